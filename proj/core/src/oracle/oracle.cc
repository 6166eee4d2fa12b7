#include "tbr/oracle/oracle.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "fmt/format.h"

namespace tbr {

namespace {

void check_size(timetable const& tt) {
  auto const events = 2U * tt.n_stop_times();
  if (events > kOracleMaxEvents) {
    throw oracle_too_large{fmt::format(
        "oracle limited to {} events, instance has {}", kOracleMaxEvents,
        events)};
  }
}

// Walking time between two stops under the feasibility rules: the change
// time for p == q, a direct footpath otherwise.
std::optional<rtime> walk(timetable const& tt, stop_id const p,
                          stop_id const q) {
  if (p == q) {
    return tt.change_time(p);
  }
  for (auto const& fp : tt.footpaths_from(p)) {
    if (fp.target_ == q) {
      return fp.duration_;
    }
  }
  return std::nullopt;
}

// Walks leaving p, the reflexive one included.
std::vector<footpath> walks_from(timetable const& tt, stop_id const p) {
  auto out = std::vector<footpath>{{p, tt.change_time(p)}};
  for (auto const& fp : tt.footpaths_from(p)) {
    out.push_back(fp);
  }
  return out;
}

// Searches level by level, level n holding journeys with exactly n
// transfers. A level is a set of on-trip states (trip, board index), the
// least board index per trip, restricted to trips where it improves on
// every earlier level. Ready times per stop connect consecutive levels.
// Dropping states that do not improve keeps the search finite and only
// removes journeys dominated by ones with fewer transfers and the same
// arrival times.
struct point_search {
  point_search(timetable const& tt, stop_id const src, stop_id const tgt,
               oracle_options const& opt)
      : tt_{tt},
        src_{src},
        tgt_{tgt},
        opt_{opt},
        trip_order_(tt.n_trips()),
        best_board_(tt.n_trips(), kInfIdx) {
    std::iota(begin(trip_order_), end(trip_order_), 0U);
    walks_.resize(tt.n_stops());
    for (auto p = 0U; p != tt.n_stops(); ++p) {
      walks_[p] = walks_from(tt, stop_id{p});
    }
    if (opt.shuffle_seed_.has_value()) {
      auto rng = std::mt19937_64{*opt.shuffle_seed_};
      std::ranges::shuffle(trip_order_, rng);
      for (auto& w : walks_) {
        std::ranges::shuffle(w, rng);
      }
    }
  }

  std::vector<pareto_entry> run(rtime const departure) {
    auto results = std::vector<pareto_entry>{};
    if (src_ == tgt_) {
      return results;
    }

    // Level 0: the source itself without change time, its footpath
    // neighbours after walking.
    auto ready = std::vector<rtime>(tt_.n_stops(), kInfTime);
    ready[to_idx(src_)] = departure;
    for (auto const& fp : tt_.footpaths_from(src_)) {
      ready[to_idx(fp.target_)] =
          std::min(ready[to_idx(fp.target_)], departure + fp.duration_);
    }

    for (auto n = 0U; n <= opt_.max_transfers_; ++n) {
      auto const states = board(ready);
      if (states.empty()) {
        break;
      }
      ready.assign(tt_.n_stops(), kInfTime);
      auto best = kInfTime;
      for (auto const& [t, b] : states) {
        for (auto e = static_cast<stop_idx_t>(b + 1U); e < tt_.trip_length(t);
             ++e) {
          auto const p = tt_.stop_at(t, e);
          auto const arrival = tt_.arr(t, e);
          if (p == tgt_) {
            best = std::min(best, arrival);
          } else if (auto const w = walk(tt_, p, tgt_); w.has_value()) {
            best = std::min(best, arrival + *w);
          }
          for (auto const& x : walks_[to_idx(p)]) {
            auto& r = ready[to_idx(x.target_)];
            r = std::min(r, arrival + x.duration_);
          }
        }
      }
      if (best != kInfTime) {
        results.push_back(
            pareto_entry{departure, best, static_cast<std::uint8_t>(n)});
      }
    }

    // Walking straight to the target is a journey without transfers that
    // dominates everything arriving no earlier. It is not reported itself.
    if (auto const direct = walk(tt_, src_, tgt_); direct.has_value()) {
      std::erase_if(results, [&](pareto_entry const& e) {
        return e.arrival_ >= departure + *direct;
      });
    }
    return pareto_filter(std::move(results));
  }

  std::vector<std::pair<trip_id, stop_idx_t>> board(
      std::vector<rtime> const& ready) {
    auto states = std::vector<std::pair<trip_id, stop_idx_t>>{};
    for (auto const x : trip_order_) {
      auto const t = trip_id{x};
      for (auto b = stop_idx_t{0U}; b + 1U < tt_.trip_length(t); ++b) {
        if (b >= best_board_[x]) {
          break;
        }
        if (ready[to_idx(tt_.stop_at(t, b))] <= tt_.dep(t, b)) {
          best_board_[x] = b;
          states.emplace_back(t, b);
          break;
        }
      }
    }
    return states;
  }

  timetable const& tt_;
  stop_id src_, tgt_;
  oracle_options const& opt_;
  std::vector<std::uint32_t> trip_order_;
  std::vector<std::vector<footpath>> walks_;
  std::vector<stop_idx_t> best_board_;
};

}  // namespace

std::vector<pareto_entry> pareto_filter(std::vector<pareto_entry> entries) {
  auto const dominates = [](pareto_entry const& a, pareto_entry const& b) {
    return a.departure_ >= b.departure_ && a.arrival_ <= b.arrival_ &&
           a.transfers_ <= b.transfers_;
  };
  std::ranges::sort(entries);
  entries.erase(std::unique(begin(entries), end(entries)), end(entries));
  auto out = std::vector<pareto_entry>{};
  for (auto const& e : entries) {
    auto const dominated = std::ranges::any_of(entries, [&](auto const& o) {
      return o != e && dominates(o, e);
    });
    if (!dominated) {
      out.push_back(e);
    }
  }
  std::ranges::sort(out, [](pareto_entry const& a, pareto_entry const& b) {
    return std::tuple{b.departure_, a.transfers_, a.arrival_} <
           std::tuple{a.departure_, b.transfers_, b.arrival_};
  });
  return out;
}

std::vector<pareto_entry> oracle_pareto(timetable const& tt, stop_id const src,
                                        stop_id const tgt,
                                        rtime const departure,
                                        oracle_options const& opt) {
  check_size(tt);
  return point_search{tt, src, tgt, opt}.run(departure);
}

std::vector<rtime> oracle_relevant_departures(timetable const& tt,
                                              stop_id const src,
                                              rtime const edt,
                                              rtime const ldt) {
  auto out = std::vector<rtime>{};
  for (auto x = 0U; x != tt.n_trips(); ++x) {
    auto const t = trip_id{x};
    for (auto i = stop_idx_t{0U}; i + 1U < tt.trip_length(t); ++i) {
      auto const p = tt.stop_at(t, i);
      auto const w = p == src ? std::optional<rtime>{0} : walk(tt, src, p);
      if (!w.has_value()) {
        continue;
      }
      auto const d = tt.dep(t, i) - *w;
      if (edt <= d && d <= ldt) {
        out.push_back(d);
      }
    }
  }
  std::ranges::sort(out, std::greater<>{});
  out.erase(std::unique(begin(out), end(out)), end(out));
  return out;
}

std::vector<pareto_entry> oracle_profile(timetable const& tt,
                                         stop_id const src, stop_id const tgt,
                                         rtime const edt, rtime const ldt,
                                         oracle_options const& opt) {
  check_size(tt);
  auto all = std::vector<pareto_entry>{};
  for (auto const d : oracle_relevant_departures(tt, src, edt, ldt)) {
    auto search = point_search{tt, src, tgt, opt};
    auto const r = search.run(d);
    all.insert(end(all), begin(r), end(r));
  }
  return pareto_filter(std::move(all));
}

std::vector<transfer> oracle_all_transfers(timetable const& tt) {
  check_size(tt);
  auto out = std::vector<transfer>{};
  for (auto x = 0U; x != tt.n_trips(); ++x) {
    auto const t = trip_id{x};
    for (auto e = stop_idx_t{0U}; e < tt.trip_length(t); ++e) {
      for (auto y = 0U; y != tt.n_trips(); ++y) {
        auto const u = trip_id{y};
        if (u == t) {
          continue;
        }
        for (auto b = stop_idx_t{0U}; b < tt.trip_length(u); ++b) {
          auto const w = walk(tt, tt.stop_at(t, e), tt.stop_at(u, b));
          if (w.has_value() && tt.arr(t, e) + *w <= tt.dep(u, b)) {
            out.push_back(transfer{t, e, u, b});
          }
        }
      }
    }
  }
  std::ranges::sort(out);
  return out;
}

std::vector<transfer> oracle_initial_transfers(timetable const& tt) {
  auto const all = oracle_all_transfers(tt);

  // The first feasible trip of each (line, index), searched over all trips
  // of the line, t included: if that is t itself, staying seated wins.
  auto const first_feasible = [&](trip_id const t, stop_idx_t const e,
                                  line_id const l, stop_idx_t const b) {
    auto const w = walk(tt, tt.stop_at(t, e), tt.line_stops(l)[b]);
    for (auto u = to_idx(tt.first_trip(l)); u != to_idx(tt.end_trip(l)); ++u) {
      if (tt.arr(t, e) + *w <= tt.dep(trip_id{u}, b)) {
        return trip_id{u};
      }
    }
    return trip_id{kInfIdx};
  };

  auto out = std::vector<transfer>{};
  for (auto const& x : all) {
    auto const l = tt.line_of(x.to_trip_);
    if (x.from_idx_ == 0U || x.to_idx_ + 1U >= tt.line_length(l) ||
        first_feasible(x.from_trip_, x.from_idx_, l, x.to_idx_) != x.to_trip_) {
      continue;
    }
    if (l == tt.line_of(x.from_trip_) &&
        !(tt.trip_less(x.to_trip_, x.from_trip_) || x.to_idx_ < x.from_idx_)) {
      continue;
    }
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> validate_journey(timetable const& tt,
                                          stop_id const src,
                                          stop_id const tgt,
                                          rtime const departure,
                                          journey const& j) {
  auto problems = std::vector<std::string>{};
  auto const fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

  if (j.rides_.empty()) {
    fail("journey has no rides");
    return problems;
  }
  for (auto k = 0U; k != j.rides_.size(); ++k) {
    auto const& r = j.rides_[k];
    if (to_idx(r.trip_) >= tt.n_trips() || r.board_ >= r.exit_ ||
        r.exit_ >= tt.trip_length(r.trip_)) {
      fail(fmt::format("ride {}: invalid segment {}..{}", k, r.board_, r.exit_));
      return problems;
    }
  }

  auto const& first = j.rides_.front();
  auto const board_stop = tt.stop_at(first.trip_, first.board_);
  auto ready = departure;
  if (j.initial_walk_.has_value()) {
    auto const& w = *j.initial_walk_;
    auto const expected = w.from_ == w.to_ ? std::nullopt : walk(tt, w.from_, w.to_);
    if (w.from_ != src || w.to_ != board_stop) {
      fail("initial walk does not connect source and first boarding stop");
    } else if (!expected.has_value() || *expected != w.duration_) {
      fail("initial walk has no matching footpath");
    }
    ready += w.duration_;
  } else if (board_stop != src) {
    fail("first boarding stop is not the source");
  }
  if (tt.dep(first.trip_, first.board_) < ready) {
    fail("first trip departs before the traveller is ready");
  }

  for (auto k = 1U; k < j.rides_.size(); ++k) {
    auto const& a = j.rides_[k - 1U];
    auto const& b = j.rides_[k];
    if (a.trip_ == b.trip_) {
      fail(fmt::format("transfer {} stays on the same trip", k));
    }
    auto const w =
        walk(tt, tt.stop_at(a.trip_, a.exit_), tt.stop_at(b.trip_, b.board_));
    if (!w.has_value()) {
      fail(fmt::format("transfer {}: no walk between the stops", k));
    } else if (tt.arr(a.trip_, a.exit_) + *w > tt.dep(b.trip_, b.board_)) {
      fail(fmt::format("transfer {}: connection missed", k));
    }
  }

  auto const& last = j.rides_.back();
  auto const exit_stop = tt.stop_at(last.trip_, last.exit_);
  auto arrival = tt.arr(last.trip_, last.exit_);
  if (j.final_walk_.has_value()) {
    auto const& w = *j.final_walk_;
    auto const expected = w.from_ == w.to_ ? std::nullopt : walk(tt, w.from_, w.to_);
    if (w.from_ != exit_stop || w.to_ != tgt) {
      fail("final walk does not connect last exit stop and target");
    } else if (!expected.has_value() || *expected != w.duration_) {
      fail("final walk has no matching footpath");
    }
    arrival += w.duration_;
  } else if (exit_stop != tgt) {
    fail("last exit stop is not the target");
  }

  if (arrival != j.arrival_) {
    fail(fmt::format("reported arrival {} but legs arrive at {}",
                     format_time(j.arrival_), format_time(arrival)));
  }
  if (j.transfers_ != j.rides_.size() - 1U) {
    fail(fmt::format("reported {} transfers for {} rides", j.transfers_,
                     j.rides_.size()));
  }
  if (j.departure_ != departure) {
    fail("reported departure differs from the query");
  }
  return problems;
}

}  // namespace tbr
