#include "tbr/preprocess.h"

#include <algorithm>
#include <chrono>
#include <ranges>
#include <thread>
#include <vector>

namespace tbr {

namespace {

struct trip_output {
  std::vector<std::uint32_t> counts_;  // per stop-time position
  std::vector<transfer_target> targets_;
};

// Runs fn(trip, out) over contiguous trip ranges, one private buffer per
// worker, and concatenates the buffers in trip order. fn appends the
// trip's transfers position by position and bumps out.counts_ for each.
template <typename MakeWorker>
transfer_set for_each_trip(timetable const& tt, unsigned threads,
                           MakeWorker&& make_worker) {
  auto const n_trips = tt.n_trips();
  threads = std::max(1U, std::min<unsigned>(
                             threads, static_cast<unsigned>(
                                          std::max<std::size_t>(n_trips, 1U))));

  auto outputs = std::vector<trip_output>(threads);
  auto const run = [&](unsigned const w) {
    auto const from = n_trips * w / threads;
    auto const to = n_trips * (w + 1U) / threads;
    auto& out = outputs[w];
    if (from == to) {
      return;
    }
    auto const first_pos = tt.time_index(trip_id{static_cast<std::uint32_t>(from)});
    auto const end_pos = to == n_trips
                             ? tt.n_stop_times()
                             : tt.time_index(trip_id{static_cast<std::uint32_t>(to)});
    out.counts_.assign(end_pos - first_pos, 0U);
    auto worker = make_worker();
    for (auto t = from; t != to; ++t) {
      auto const trip = trip_id{static_cast<std::uint32_t>(t)};
      worker(trip,
             std::span{out.counts_}.subspan(tt.time_index(trip) - first_pos,
                                            tt.trip_length(trip)),
             out.targets_);
    }
  };

  if (threads == 1U) {
    run(0U);
  } else {
    auto pool = std::vector<std::jthread>{};
    for (auto w = 0U; w != threads; ++w) {
      pool.emplace_back(run, w);
    }
  }

  auto index = std::vector<std::uint32_t>{0U};
  index.reserve(tt.n_stop_times() + 1U);
  auto targets = std::vector<transfer_target>{};
  auto total = std::size_t{0U};
  for (auto const& out : outputs) {
    total += out.targets_.size();
  }
  targets.reserve(total);
  for (auto& out : outputs) {
    for (auto const c : out.counts_) {
      index.push_back(index.back() + c);
    }
    targets.insert(end(targets), begin(out.targets_), end(out.targets_));
    out = trip_output{};
  }
  index.resize(tt.n_stop_times() + 1U, index.back());
  return transfer_set{std::move(index), std::move(targets)};
}

auto const by_target = [](transfer_target const& a, transfer_target const& b) {
  return std::pair{to_idx(a.trip_), a.idx_} < std::pair{to_idx(b.trip_), b.idx_};
};

}  // namespace

transfer_set compute_initial_transfers(timetable const& tt,
                                       unsigned const threads) {
  return for_each_trip(tt, threads, [&]() {
    return [&, group = std::vector<transfer_target>{}](
               trip_id const t, std::span<std::uint32_t> counts,
               std::vector<transfer_target>& out) mutable {
      auto const line = tt.line_of(t);
      for (auto i = stop_idx_t{1U}; i < tt.trip_length(t); ++i) {
        group.clear();
        auto const arrival = tt.arr(t, i);
        tt.for_each_walk_from(tt.stop_at(t, i), [&](stop_id const q,
                                                    rtime const walk) {
          for (auto const [l, j] : tt.lines_at(q)) {
            if (j + 1U >= tt.line_length(l)) {
              continue;
            }
            auto const u = tt.earliest_trip(l, j, arrival + walk);
            if (!u.has_value() || *u == t) {
              continue;
            }
            if (l != line || tt.trip_less(*u, t) || j < i) {
              group.push_back({*u, j});
            }
          }
        });
        std::ranges::sort(group, by_target);
        counts[i] = static_cast<std::uint32_t>(group.size());
        out.insert(end(out), begin(group), end(group));
      }
    };
  });
}

transfer_set remove_uturn_transfers(timetable const& tt,
                                    transfer_set const& ts,
                                    unsigned const threads) {
  return for_each_trip(tt, threads, [&]() {
    return [&](trip_id const t, std::span<std::uint32_t> counts,
               std::vector<transfer_target>& out) {
      for (auto i = stop_idx_t{1U}; i < tt.trip_length(t); ++i) {
        auto const prev_stop = tt.stop_at(t, i - 1U);
        auto const prev_ready = tt.arr(t, i - 1U) + tt.change_time(prev_stop);
        for (auto const& x : ts.from(tt, t, i)) {
          auto const next = static_cast<stop_idx_t>(x.idx_ + 1U);
          auto const uturn = next < tt.trip_length(x.trip_) &&
                             tt.stop_at(x.trip_, next) == prev_stop &&
                             prev_ready <= tt.dep(x.trip_, next);
          if (!uturn) {
            out.push_back(x);
            ++counts[i];
          }
        }
      }
    };
  });
}

namespace {

struct reduction_worker {
  reduction_worker(timetable const& tt, transfer_set const& ts,
                   reduction_options const& opt)
      : tt_{tt},
        ts_{ts},
        keep_{opt.keep_},
        two_maps_{opt.force_two_maps_ ||
                  std::ranges::any_of(std::views::iota(0U, tt.n_stops()),
                                      [&](auto const p) {
                                        return tt.change_time(stop_id{p}) != 0;
                                      })},
        arrival_(tt.n_stops(), kInfTime),
        change_(tt.n_stops(), kInfTime) {}

  // Lowers the arrival time at the stop itself and both maps at every
  // walkable stop. Returns whether anything improved.
  bool update(stop_id const p, rtime const arr) {
    auto improved = false;
    improved |= lower(arrival_, p, arr);
    for (auto const& fp : tt_.footpaths_from(p)) {
      auto const eta = arr + fp.duration_;
      improved |= lower(arrival_, fp.target_, eta);
      if (two_maps_) {
        improved |= lower(change_, fp.target_, eta);
      }
    }
    if (two_maps_) {
      auto const eta = arr + tt_.change_time(p);
      improved |= eta < arrival_[to_idx(p)];
      improved |= lower(change_, p, eta);
    }
    return improved;
  }

  bool lower(std::vector<rtime>& map, stop_id const p, rtime const t) {
    auto& x = map[to_idx(p)];
    if (x == kInfTime) {
      touched_.push_back(p);
    }
    if (t < x) {
      x = t;
      return true;
    }
    return false;
  }

  void operator()(trip_id const t, std::span<std::uint32_t> counts,
                  std::vector<transfer_target>& out) {
    auto const len = static_cast<stop_idx_t>(tt_.trip_length(t));
    kept_.resize(len);
    for (auto i = static_cast<stop_idx_t>(len - 1U); i >= 1U; --i) {
      kept_[i].clear();
      update(tt_.stop_at(t, i), tt_.arr(t, i));
      for (auto const& x : ts_.from(tt_, t, i)) {
        auto improves = false;
        auto const u_len = tt_.trip_length(x.trip_);
        for (auto k = static_cast<stop_idx_t>(x.idx_ + 1U); k < u_len; ++k) {
          improves |= update(tt_.stop_at(x.trip_, k), tt_.arr(x.trip_, k));
        }
        auto const keep =
            keep_ ? keep_(transfer{t, i, x.trip_, x.idx_}, improves) : improves;
        if (keep) {
          kept_[i].push_back(x);
        }
      }
    }
    for (auto i = stop_idx_t{1U}; i < len; ++i) {
      counts[i] = static_cast<std::uint32_t>(kept_[i].size());
      out.insert(end(out), begin(kept_[i]), end(kept_[i]));
    }
    for (auto const p : touched_) {
      arrival_[to_idx(p)] = kInfTime;
      change_[to_idx(p)] = kInfTime;
    }
    touched_.clear();
  }

  timetable const& tt_;
  transfer_set const& ts_;
  keep_predicate const& keep_;
  bool two_maps_;
  std::vector<rtime> arrival_, change_;
  std::vector<stop_id> touched_;
  std::vector<std::vector<transfer_target>> kept_;
};

}  // namespace

transfer_set reduce_transfers(timetable const& tt, transfer_set const& ts,
                              reduction_options const& opt,
                              unsigned const threads) {
  return for_each_trip(tt, threads,
                       [&]() { return reduction_worker{tt, ts, opt}; });
}

pipeline_result run_pipeline(timetable const& tt,
                             pipeline_options const& opt) {
  using clock = std::chrono::steady_clock;
  auto r = pipeline_result{};

  auto start = clock::now();
  auto ts = compute_initial_transfers(tt, opt.threads_);
  r.stats_.initial_time_ = clock::now() - start;
  r.stats_.initial_ = ts.size();

  if (!opt.skip_uturn_) {
    start = clock::now();
    ts = remove_uturn_transfers(tt, ts, opt.threads_);
    r.stats_.uturn_time_ = clock::now() - start;
  }
  r.stats_.after_uturn_ = ts.size();

  if (!opt.skip_reduction_) {
    start = clock::now();
    ts = reduce_transfers(tt, ts, opt.reduction_, opt.threads_);
    r.stats_.reduction_time_ = clock::now() - start;
  }
  r.stats_.after_reduction_ = ts.size();

  r.transfers_ = std::move(ts);
  return r;
}

}  // namespace tbr
