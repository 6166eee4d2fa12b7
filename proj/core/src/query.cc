#include "tbr/query.h"

#include <algorithm>
#include <bit>

#include "fmt/format.h"

#include "tbr/error.h"

namespace tbr {

std::vector<target_line> target_lines(timetable const& tt,
                                      stop_id const target) {
  auto out = std::vector<target_line>{};
  for (auto const [l, i] : tt.lines_at(target)) {
    out.push_back({l, i, 0});
  }
  for (auto const& fp : tt.footpaths_to(target)) {
    for (auto const [l, i] : tt.lines_at(fp.target_)) {
      out.push_back({l, i, fp.duration_});
    }
  }
  std::ranges::sort(out);
  return out;
}

bool result_set::add(result const& r) {
  if (std::ranges::any_of(entries_,
                          [&](result const& x) { return x.dominates(r); })) {
    return false;
  }
  std::erase_if(entries_, [&](result const& x) { return r.dominates(x); });
  entries_.push_back(r);
  return true;
}

std::vector<result> result_set::sorted() const {
  auto out = entries_;
  std::ranges::sort(out, [](result const& a, result const& b) {
    return std::pair{-static_cast<std::int64_t>(a.departure_), a.transfers_} <
           std::pair{-static_cast<std::int64_t>(b.departure_), b.transfers_};
  });
  return out;
}

engine::engine(timetable const& tt, transfer_set const& ts) : tt_{tt}, ts_{ts} {
  if (ts.index().size() != tt.n_stop_times() + 1U) {
    throw query_error{"transfer set does not belong to this timetable"};
  }
}

std::vector<rtime> relevant_departures(timetable const& tt, stop_id const src,
                                       rtime const edt, rtime const ldt) {
  auto out = std::vector<rtime>{};
  auto const collect = [&](stop_id const q, rtime const walk) {
    for (auto const [l, i] : tt.lines_at(q)) {
      if (i + 1U >= tt.line_length(l)) {
        continue;
      }
      for (auto t = to_idx(tt.first_trip(l)); t != to_idx(tt.end_trip(l));
           ++t) {
        auto const d = tt.dep(trip_id{t}, i) - walk;
        if (edt <= d && d <= ldt) {
          out.push_back(d);
        }
      }
    }
  };
  collect(src, 0);
  for (auto const& fp : tt.footpaths_from(src)) {
    collect(fp.target_, fp.duration_);
  }
  std::ranges::sort(out, std::greater<>{});
  out.erase(std::unique(begin(out), end(out)), end(out));
  return out;
}

// Pruning and target bounds of one query, shared by all its runs.
struct query_context::run_state {
  // best_[m]: earliest arrival among results with at most m transfers.
  std::array<rtime, kMaxTransfers + 1U> best_;

  run_state() { best_.fill(kInfTime); }

  void record(rtime const arrival, std::uint8_t const n) {
    for (auto m = std::size_t{n}; m != best_.size(); ++m) {
      best_[m] = std::min(best_[m], arrival);
    }
  }

  rtime prune_bound(std::uint8_t const n) const {
    return best_[std::min<std::size_t>(n + 1U, kMaxTransfers)];
  }
};

query_context::query_context(engine const& e)
    : engine_{e},
      ea_state_{e.tt(), false},
      target_range_(e.tt().n_lines(), {0U, 0U}) {}

std::span<queue_entry const> query_context::queue() const noexcept {
  return active_ == nullptr ? std::span<queue_entry const>{}
                            : std::span<queue_entry const>{active_->queue_};
}

void query_context::begin_query(stop_id const src, stop_id const tgt,
                                bool const per_level) {
  auto const& tt = engine_.tt();
  if (to_idx(src) >= tt.n_stops()) {
    throw query_error{fmt::format("unknown source stop {}", to_idx(src))};
  }
  if (to_idx(tgt) >= tt.n_stops()) {
    throw query_error{fmt::format("unknown target stop {}", to_idx(tgt))};
  }

  ++generation_;
  stats_ = query_stats{};
  src_ = src;
  tgt_ = tgt;

  if (per_level && !profile_state_.has_value()) {
    profile_state_.emplace(tt, true);
  }
  active_ = per_level ? &*profile_state_ : &ea_state_;
  active_->reset();

  for (auto const l : target_touched_) {
    target_range_[to_idx(l)] = {0U, 0U};
  }
  target_touched_.clear();
  direct_walk_ =
      src == tgt ? std::nullopt : tt.walk_time(src, tgt);
  targets_ = target_lines(tt, tgt);
  for (auto k = 0U; k != targets_.size(); ++k) {
    auto const l = targets_[k].line_;
    auto& range = target_range_[to_idx(l)];
    if (range.first == range.second) {
      range = {k, k};
      target_touched_.push_back(l);
    }
    ++range.second;
  }
}

void query_context::run(search_state& state, run_state& rs,
                        rtime const departure, query_options const& opt,
                        result_set& results) {
  auto const& tt = engine_.tt();
  auto const& ts = engine_.transfers();
  auto& queue = state.queue_;
  auto const run_begin = queue.size();
  auto const max_transfers = std::min(opt.max_transfers_, kMaxTransfers);

  // Walking straight to the target bounds every result, like a journey
  // without transfers arriving at departure + walk (never reported).
  if (direct_walk_.has_value()) {
    rs.record(departure + *direct_walk_, 0U);
  }

  auto const board = [&](stop_id const q, rtime const walk) {
    for (auto const [l, i] : tt.lines_at(q)) {
      if (i + 1U >= tt.line_length(l)) {
        continue;
      }
      if (auto const t = tt.earliest_trip(l, i, departure + walk)) {
        state.enqueue(*t, i, 0U, kNoParent);
      }
    }
  };
  board(src_, 0);
  for (auto const& fp : tt.footpaths_from(src_)) {
    board(fp.target_, fp.duration_);
  }

  // Checks whether the segment reaches the target; returns the pruning
  // bound in effect afterwards.
  auto const reach_target = [&](std::uint32_t const k, std::uint8_t const n) {
    auto const& e = queue[k];
    auto const [first, last] = target_range_[to_idx(tt.line_of(e.trip_))];
    for (auto x = first; x != last; ++x) {
      auto const& target = targets_[x];
      if (target.idx_ <= e.begin_) {
        continue;
      }
      auto const arrival = tt.arr(e.trip_, target.idx_) + target.walk_;
      if (arrival < rs.best_[n]) {
        rs.record(arrival, n);
        results.add(result{departure, arrival, n, k, target.idx_, generation_});
      }
    }
    return opt.prune_ ? rs.prune_bound(n) : kInfTime;
  };

  auto const transfer_range = [&](queue_entry const& e) {
    auto const p = tt.time_index(e.trip_);
    return std::pair{ts.begin(p + e.begin_ + 1U), ts.begin(p + e.end_ + 1U)};
  };

  auto const scan_transfers = [&](std::uint32_t const k, std::uint32_t const from,
                                  std::uint32_t const to, std::uint8_t const n) {
    auto const targets = ts.targets();
    for (auto x = from; x != to; ++x) {
      ++stats_.transfers_scanned_;
      state.enqueue(targets[x].trip_, targets[x].idx_,
                    static_cast<std::uint8_t>(n + 1U), k);
    }
  };

  auto level_begin = static_cast<std::uint32_t>(run_begin);
  for (auto n = std::uint8_t{0U}; level_begin != queue.size(); ++n) {
    auto const level_end = static_cast<std::uint32_t>(queue.size());
    auto const expand = n < max_transfers;
    stats_.entries_scanned_ += level_end - level_begin;

    if (opt.loop_ == loop_mode::kSingleLoop) {
      for (auto k = level_begin; k != level_end; ++k) {
        auto const bound = reach_target(k, n);
        auto const e = queue[k];
        if (expand && tt.arr(e.trip_, e.begin_ + 1U) < bound) {
          auto const [from, to] = transfer_range(e);
          scan_transfers(k, from, to, n);
        }
      }
    } else {
      // Arrival times are only read by the first pass, the transfer index by
      // the second, transfers and labels by the third.
      for (auto k = level_begin; k != level_end; ++k) {
        auto const bound = reach_target(k, n);
        auto& e = queue[k];
        e.scratch_ = {std::bit_cast<std::uint32_t>(tt.arr(e.trip_, e.begin_ + 1U)),
                      std::bit_cast<std::uint32_t>(bound)};
      }
      if (expand) {
        for (auto k = level_begin; k != level_end; ++k) {
          auto& e = queue[k];
          auto const next_arrival = std::bit_cast<rtime>(e.scratch_[0]);
          auto const bound = std::bit_cast<rtime>(e.scratch_[1]);
          if (next_arrival < bound) {
            auto const [from, to] = transfer_range(e);
            e.scratch_ = {from, to};
          } else {
            e.scratch_ = {0U, 0U};
          }
        }
        for (auto k = level_begin; k != level_end; ++k) {
          auto const [from, to] = queue[k].scratch_;
          scan_transfers(k, from, to, n);
        }
      }
    }
    level_begin = level_end;
  }

  ++stats_.runs_;
  stats_.max_run_entries_ =
      std::max(stats_.max_run_entries_, queue.size() - run_begin);
}

result_set query_context::earliest_arrival(stop_id const src,
                                           stop_id const tgt,
                                           rtime const departure,
                                           query_options const& opt) {
  begin_query(src, tgt, false);
  auto results = result_set{};
  if (src == tgt) {
    return results;
  }
  auto rs = run_state{};
  run(*active_, rs, departure, opt, results);
  return results;
}

result_set query_context::profile(stop_id const src, stop_id const tgt,
                                  rtime const edt, rtime const ldt,
                                  query_options const& opt) {
  begin_query(src, tgt, true);
  auto results = result_set{};
  if (src == tgt || edt > ldt) {
    return results;
  }
  auto rs = run_state{};
  for (auto const departure : relevant_departures(engine_.tt(), src, edt, ldt)) {
    run(*active_, rs, departure, opt, results);
  }
  return results;
}

journey query_context::reconstruct(result const& r) const {
  if (r.generation_ != generation_ || active_ == nullptr) {
    throw query_error{"dangling result: its query state has been discarded"};
  }
  auto const& tt = engine_.tt();
  auto const& ts = engine_.transfers();
  auto const& queue = active_->queue_;

  auto j = journey{};
  j.departure_ = r.departure_;
  j.arrival_ = r.arrival_;
  j.transfers_ = r.transfers_;

  auto k = r.entry_;
  auto exit = r.exit_idx_;
  while (true) {
    auto const& e = queue.at(k);
    j.rides_.push_back({e.trip_, e.begin_, exit});
    if (e.parent_ == kNoParent) {
      break;
    }
    auto const& p = queue.at(e.parent_);
    auto found = false;
    for (auto i = static_cast<stop_idx_t>(p.begin_ + 1U); i <= p.end_ && !found;
         ++i) {
      for (auto const& x : ts.from(tt, p.trip_, i)) {
        if (x.trip_ == e.trip_ && x.idx_ == e.begin_) {
          exit = i;
          found = true;
          break;
        }
      }
    }
    if (!found) {
      throw query_error{"inconsistent queue: transfer not found"};
    }
    k = e.parent_;
  }
  std::ranges::reverse(j.rides_);

  auto const board_stop = tt.stop_at(j.rides_.front().trip_, j.rides_.front().board_);
  if (board_stop != src_) {
    j.initial_walk_ = journey::walk{src_, board_stop, *tt.walk_time(src_, board_stop)};
  }
  auto const exit_stop = tt.stop_at(j.rides_.back().trip_, j.rides_.back().exit_);
  if (exit_stop != tgt_) {
    j.final_walk_ = journey::walk{exit_stop, tgt_, *tt.walk_time(exit_stop, tgt_)};
  }
  return j;
}

}  // namespace tbr
