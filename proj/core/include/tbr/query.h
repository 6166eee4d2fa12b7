#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tbr/search_state.h"
#include "tbr/timetable.h"
#include "tbr/transfer_set.h"
#include "tbr/types.h"

namespace tbr {

// Line positions from which the target can be reached, with the walking
// time to the target (0 at the target itself).
struct target_line {
  line_id line_;
  stop_idx_t idx_;
  rtime walk_;

  friend auto operator<=>(target_line const&, target_line const&) = default;
};

std::vector<target_line> target_lines(timetable const&, stop_id target);

struct result {
  rtime departure_, arrival_;
  std::uint8_t transfers_;

  std::uint32_t entry_;  // queue entry of the last trip segment
  stop_idx_t exit_idx_;
  std::uint64_t generation_;  // query that produced it

  // Later departure, earlier arrival and fewer transfers are better.
  bool dominates(result const& o) const {
    return departure_ >= o.departure_ && arrival_ <= o.arrival_ &&
           transfers_ <= o.transfers_;
  }
};

// Pareto set over (departure, arrival, transfers). On exact ties the
// first inserted entry stays.
class result_set {
public:
  bool add(result const&);

  std::span<result const> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Descending departure, then ascending transfers.
  std::vector<result> sorted() const;

private:
  std::vector<result> entries_;
};

struct journey {
  struct walk {
    stop_id from_, to_;
    rtime duration_;
  };
  struct ride {
    trip_id trip_;
    stop_idx_t board_, exit_;
  };

  std::optional<walk> initial_walk_;
  std::vector<ride> rides_;
  std::optional<walk> final_walk_;

  rtime departure_, arrival_;
  std::uint8_t transfers_;
};

enum class loop_mode { kThreePass, kSingleLoop };

struct query_options {
  bool prune_{true};
  loop_mode loop_{loop_mode::kThreePass};
  std::uint8_t max_transfers_{kMaxTransfers};
};

struct query_stats {
  std::uint64_t entries_scanned_{0U};
  std::uint64_t transfers_scanned_{0U};
  std::size_t runs_{0U};
  std::size_t max_run_entries_{0U};  // largest number enqueued by one run
};

// Timetable plus transfers; shared read-only between query contexts.
class engine {
public:
  engine(timetable const&, transfer_set const&);

  timetable const& tt() const noexcept { return tt_; }
  transfer_set const& transfers() const noexcept { return ts_; }

private:
  timetable const& tt_;
  transfer_set const& ts_;
};

// Distinct departure times dep(t,i) - walk(src,q) of boardable trips at
// src or its footpath neighbours q within [edt, ldt], descending.
std::vector<rtime> relevant_departures(timetable const&, stop_id src,
                                       rtime edt, rtime ldt);

// Reusable scratch state for queries on one engine. Not thread-safe; use
// one context per thread. Results stay reconstructible until the next
// query on the same context.
class query_context {
public:
  explicit query_context(engine const&);

  // Pareto set of (arrival, transfers) for journeys leaving src no earlier
  // than `departure`. Every result carries departure_ == departure.
  // Journeys use at least one trip. A direct footpath src -> tgt counts as
  // a journey without transfers: it dominates results arriving no earlier
  // but is not reported itself.
  result_set earliest_arrival(stop_id src, stop_id tgt, rtime departure,
                              query_options const& = {});

  // Pareto set of (departure, arrival, transfers) with departures in
  // [edt, ldt]: one earliest-arrival run per relevant departure, latest
  // first, sharing labels between runs.
  result_set profile(stop_id src, stop_id tgt, rtime edt, rtime ldt,
                     query_options const& = {});

  // Throws query_error if r belongs to an earlier query.
  journey reconstruct(result const& r) const;

  std::span<queue_entry const> queue() const noexcept;
  query_stats const& stats() const noexcept { return stats_; }
  engine const& get_engine() const noexcept { return engine_; }

private:
  struct run_state;

  void begin_query(stop_id src, stop_id tgt, bool per_level);
  void run(search_state&, run_state&, rtime departure,
           query_options const&, result_set&);
  void end_query();

  engine const& engine_;
  search_state ea_state_;
  std::optional<search_state> profile_state_;
  search_state* active_{nullptr};

  std::vector<target_line> targets_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> target_range_;
  std::vector<line_id> target_touched_;

  stop_id src_{}, tgt_{};
  std::optional<rtime> direct_walk_;
  std::uint64_t generation_{0U};
  query_stats stats_;
};

}  // namespace tbr
