#pragma once

#include <chrono>
#include <cstddef>
#include <functional>

#include "tbr/timetable.h"
#include "tbr/transfer_set.h"

namespace tbr {

// For every trip t, position i > 0 and stop q walkable from p(t,i)
// (including p(t,i) at its change time), adds a transfer to the earliest
// reachable trip u of each (L, j) in lines_at(q) with j < |p(L)| - 1.
// Transfers into t's own line are kept only if u strictly precedes t or
// j < i.
transfer_set compute_initial_transfers(timetable const&,
                                       unsigned threads = 1U);

// Drops (t,i) -> (u,j) when p(t,i-1) == p(u,j+1) and u can already be
// boarded there: arr(t,i-1) + ch(p(t,i-1)) <= dep(u,j+1).
transfer_set remove_uturn_transfers(timetable const&, transfer_set const&,
                                    unsigned threads = 1U);

// Decides whether a transfer survives reduction. `improves` tells whether
// it lowered an arrival or earliest change time at some stop.
using keep_predicate = std::function<bool(transfer const&, bool improves)>;

struct reduction_options {
  keep_predicate keep_{};  // empty: keep iff improves
  // Track arrival and change times separately even if every change time is
  // zero (then both maps coincide).
  bool force_two_maps_{false};
};

// Scans each trip backwards, keeping per-stop arrival and earliest change
// times, and discards transfers that improve neither.
transfer_set reduce_transfers(timetable const&, transfer_set const&,
                              reduction_options const& = {},
                              unsigned threads = 1U);

struct pipeline_options {
  unsigned threads_{1U};
  bool skip_uturn_{false};
  bool skip_reduction_{false};
  reduction_options reduction_{};
};

struct pipeline_stats {
  using duration = std::chrono::duration<double, std::milli>;

  std::size_t initial_{0U}, after_uturn_{0U}, after_reduction_{0U};
  duration initial_time_{}, uturn_time_{}, reduction_time_{};
};

struct pipeline_result {
  transfer_set transfers_;
  pipeline_stats stats_;
};

// Initial computation, U-turn removal and reduction. Output does not
// depend on the thread count.
pipeline_result run_pipeline(timetable const&, pipeline_options const& = {});

}  // namespace tbr
