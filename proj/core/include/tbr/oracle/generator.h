#pragma once

#include <cstdint>
#include <string_view>

#include "tbr/feed.h"

namespace tbr {

enum class instance_profile { kRandom, kGrid, kParallelLines };

instance_profile parse_instance_profile(std::string_view);
std::string_view to_string(instance_profile);

struct generator_options {
  // random
  unsigned stops_{40U};
  unsigned routes_{14U};
  unsigned max_trips_{240U};

  // grid: n x n stops, one line per row and column in both directions
  unsigned grid_n_{32U};
  rtime headway_{20 * 60};

  // parallel-lines: copies of the U-turn and parallel-transfer motifs
  unsigned motifs_{4U};
};

// Deterministic synthetic feed that passes strict footpath validation.
// Every stop has coordinates. Footpaths connect stops of small clusters
// with durations proportional to their Manhattan distance, and change
// times never exceed twice the shortest footpath of their stop.
//
// parallel-lines guarantees that U-turn removal and transfer reduction
// each discard at least one transfer.
raw_feed generate_instance(std::uint64_t seed, instance_profile,
                           generator_options const& = {});

}  // namespace tbr
