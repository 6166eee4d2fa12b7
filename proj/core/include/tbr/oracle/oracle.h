#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbr/query.h"
#include "tbr/timetable.h"
#include "tbr/transfer_set.h"
#include "tbr/types.h"

// Brute-force reference implementations. They share the feasibility rules
// of the engine but none of its code paths beyond plain timetable access:
// no lines_at, no earliest_trip, no transfer sets.
namespace tbr {

// Node of the time-expanded view of a timetable.
struct expanded_event {
  enum class kind : std::uint8_t { kArrival, kDeparture };
  trip_id trip_;
  stop_idx_t idx_;
  kind kind_;
};

constexpr std::size_t kOracleMaxEvents = 100'000U;

struct oracle_too_large : std::length_error {
  using std::length_error::length_error;
};

struct pareto_entry {
  rtime departure_, arrival_;
  std::uint8_t transfers_;

  friend auto operator<=>(pareto_entry const&, pareto_entry const&) = default;
};

struct oracle_options {
  // Explores trips and walks in a seeded random order instead of by id.
  std::optional<std::uint64_t> shuffle_seed_;
  unsigned max_transfers_{std::numeric_limits<unsigned>::max()};
};

// Exact Pareto set of (arrival, transfers) for journeys leaving src no
// earlier than `departure`, sorted by ascending transfers. Every entry has
// departure_ == departure. Journeys use at least one trip; src == tgt
// yields the empty set. A direct footpath src -> tgt dominates every
// journey arriving no earlier and is not reported itself. Throws oracle_too_large above kOracleMaxEvents.
std::vector<pareto_entry> oracle_pareto(timetable const&, stop_id src,
                                        stop_id tgt, rtime departure,
                                        oracle_options const& = {});

// Departures at which a profile can change: dep(t,i) - walk(src, p(t,i))
// over all trips and non-final positions, restricted to [edt, ldt],
// distinct and descending.
std::vector<rtime> oracle_relevant_departures(timetable const&, stop_id src,
                                              rtime edt, rtime ldt);

// Pareto filter over the union of the point results at every relevant
// departure, sorted by descending departure, then ascending transfers.
std::vector<pareto_entry> oracle_profile(timetable const&, stop_id src,
                                         stop_id tgt, rtime edt, rtime ldt,
                                         oracle_options const& = {});

// Keeps the non-dominated entries (later departure, earlier arrival and
// fewer transfers are better), sorted like oracle_profile.
std::vector<pareto_entry> pareto_filter(std::vector<pareto_entry>);

// Every (t,e) -> (u,b) with t != u, e > 0 and
// arr(t,e) + walk(p(t,e), p(u,b)) <= dep(u,b), sorted.
std::vector<transfer> oracle_all_transfers(timetable const&);

// oracle_all_transfers restricted by the initial computation rules: no
// boarding at a line's last stop, only the first feasible trip of each
// line, same-line transfers only backwards in trip order or stop index.
std::vector<transfer> oracle_initial_transfers(timetable const&);

// Checks a reconstructed journey leg by leg: continuity, walking times,
// transfer feasibility, and the reported departure, arrival and transfer
// count. Returns one message per problem; empty means valid.
std::vector<std::string> validate_journey(timetable const&, stop_id src,
                                          stop_id tgt, rtime departure,
                                          journey const&);

}  // namespace tbr
