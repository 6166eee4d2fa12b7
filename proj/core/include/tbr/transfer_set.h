#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tbr/timetable.h"
#include "tbr/types.h"

namespace tbr {

struct transfer_target {
  trip_id trip_;
  stop_idx_t idx_;

  friend bool operator==(transfer_target const&,
                         transfer_target const&) = default;
};

struct transfer {
  trip_id from_trip_;
  stop_idx_t from_idx_;
  trip_id to_trip_;
  stop_idx_t to_idx_;

  friend auto operator<=>(transfer const&, transfer const&) = default;
};

// Transfers grouped by origin (trip, index) in forward-star layout. The
// index is layered over the timetable's stop-time positions: transfers
// leaving trip t at i are targets_[index_[p]..index_[p+1]) with
// p = time_index(t) + i. Each group is sorted by (to_trip, to_idx).
class transfer_set {
public:
  transfer_set() = default;
  transfer_set(std::vector<std::uint32_t> index,
               std::vector<transfer_target> targets);

  // Sorts and groups an arbitrary list of transfers.
  static transfer_set from_list(timetable const&, std::vector<transfer>);

  std::size_t size() const noexcept { return targets_.size(); }
  bool empty() const noexcept { return targets_.empty(); }

  // Index positions for stop-time position p: [begin(p), begin(p + 1)).
  std::uint32_t begin(std::uint32_t const p) const { return index_[p]; }

  std::span<transfer_target const> from(timetable const& tt, trip_id const t,
                                        stop_idx_t const i) const {
    auto const p = tt.time_index(t) + i;
    return {targets_.data() + index_[p], targets_.data() + index_[p + 1U]};
  }

  std::span<std::uint32_t const> index() const noexcept { return index_; }
  std::span<transfer_target const> targets() const noexcept { return targets_; }

  std::vector<transfer> to_list(timetable const&) const;

  friend bool operator==(transfer_set const&, transfer_set const&) = default;

private:
  std::vector<std::uint32_t> index_;
  std::vector<transfer_target> targets_;
};

constexpr std::uint32_t kArtifactVersion = 1U;

// "TBRT", u32 version, 32-byte timetable digest, u64 index length,
// u32 index entries, u64 transfer count, (u32 trip, u16 index) per
// transfer. All integers little-endian.
std::vector<std::byte> serialize(transfer_set const&, digest_t const&);

// Throws artifact_error on bad magic, version mismatch, digest mismatch
// (stale artifact), truncation or inconsistent arrays.
transfer_set deserialize(std::span<std::byte const>, digest_t const& expected);

void write_artifact(std::filesystem::path const&, transfer_set const&,
                    digest_t const&);
transfer_set read_artifact(std::filesystem::path const&,
                           timetable const& expected);

}  // namespace tbr
