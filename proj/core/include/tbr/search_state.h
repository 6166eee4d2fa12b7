#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tbr/timetable.h"
#include "tbr/types.h"

namespace tbr {

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

// One trip segment in the query's preallocated queue array.
struct queue_entry {
  trip_id trip_;
  stop_idx_t begin_, end_;  // board index and last index to scan
  std::uint8_t transfers_;
  std::uint32_t parent_;  // entry that enqueued this one, kNoParent at source

  // Reused across the three passes over a level: first the arrival at
  // begin_ + 1 and the pruning bound, then the transfer index range.
  std::array<std::uint32_t, 2> scratch_;

  friend bool operator==(queue_entry const& a, queue_entry const& b) {
    return a.trip_ == b.trip_ && a.begin_ == b.begin_ && a.end_ == b.end_ &&
           a.transfers_ == b.transfers_ && a.parent_ == b.parent_;
  }
};

// First reached stop index per trip. Earliest-arrival queries keep one
// label per trip. Profile queries keep R_0..R_K, where R_n is the first
// stop reached with at most n transfers.
class reached_labels {
public:
  static constexpr std::size_t kLevels = kMaxTransfers + 1U;

  void init(std::size_t n_trips, bool per_level);
  bool per_level() const noexcept { return per_level_; }

  stop_idx_t get(trip_id const t, std::uint8_t const n) const {
    return per_level_ ? levels_[to_idx(t)][n] : single_[to_idx(t)];
  }

  // R(v) <- min(R(v), i) for t and every later trip v of its line, on all
  // levels from n upwards.
  void update(timetable const&, trip_id t, stop_idx_t i, std::uint8_t n);

  // Restores every touched trip to "unreached".
  void reset();

  std::size_t touched() const noexcept { return touched_.size(); }

private:
  bool per_level_{false};
  std::vector<stop_idx_t> single_;
  std::vector<std::array<stop_idx_t, kLevels>> levels_;
  std::vector<std::uint32_t> touched_;
};

struct search_state {
  explicit search_state(timetable const&, bool per_level = false);

  // If i is before the first reached stop of t (at level n), appends the
  // segment from i to that stop to the queue and updates the labels.
  bool enqueue(trip_id t, stop_idx_t i, std::uint8_t n, std::uint32_t parent);

  void reset();

  timetable const& tt_;
  reached_labels reached_;
  std::vector<queue_entry> queue_;
};

}  // namespace tbr
