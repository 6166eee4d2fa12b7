#include "tbr/search_state.h"

#include <algorithm>

namespace tbr {

void reached_labels::init(std::size_t const n_trips, bool const per_level) {
  per_level_ = per_level;
  touched_.clear();
  if (per_level_) {
    auto unreached = std::array<stop_idx_t, kLevels>{};
    unreached.fill(kInfIdx);
    single_.clear();
    levels_.assign(n_trips, unreached);
  } else {
    levels_.clear();
    single_.assign(n_trips, kInfIdx);
  }
}

void reached_labels::update(timetable const& tt, trip_id const t,
                            stop_idx_t const i, std::uint8_t const n) {
  // Labels never increase along a line, so the first trip already at or
  // below i ends the walk.
  auto const end = to_idx(tt.end_trip(tt.line_of(t)));
  if (per_level_) {
    for (auto v = to_idx(t); v != end; ++v) {
      auto& l = levels_[v];
      if (l[n] <= i) {
        break;
      }
      if (l[kLevels - 1U] == kInfIdx) {
        touched_.push_back(v);
      }
      for (auto m = std::size_t{n}; m != kLevels; ++m) {
        l[m] = std::min(l[m], i);
      }
    }
  } else {
    for (auto v = to_idx(t); v != end; ++v) {
      auto& l = single_[v];
      if (l <= i) {
        break;
      }
      if (l == kInfIdx) {
        touched_.push_back(v);
      }
      l = i;
    }
  }
}

void reached_labels::reset() {
  if (per_level_) {
    for (auto const v : touched_) {
      levels_[v].fill(kInfIdx);
    }
  } else {
    for (auto const v : touched_) {
      single_[v] = kInfIdx;
    }
  }
  touched_.clear();
}

search_state::search_state(timetable const& tt, bool const per_level)
    : tt_{tt} {
  reached_.init(tt.n_trips(), per_level);
  queue_.reserve(tt.n_elementary_connections());
}

bool search_state::enqueue(trip_id const t, stop_idx_t const i,
                           std::uint8_t const n, std::uint32_t const parent) {
  auto const reached = reached_.get(t, n);
  if (i >= reached) {
    return false;
  }
  auto const end = reached == kInfIdx
                       ? static_cast<stop_idx_t>(tt_.trip_length(t) - 1U)
                       : reached;
  queue_.push_back(queue_entry{t, i, end, n, parent, {}});
  reached_.update(tt_, t, i, n);
  return true;
}

void search_state::reset() {
  reached_.reset();
  queue_.clear();
}

}  // namespace tbr
