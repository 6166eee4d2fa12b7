#include "tbr/transfer_set.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fmt/format.h"

#include "tbr/error.h"

namespace tbr {

transfer_set::transfer_set(std::vector<std::uint32_t> index,
                           std::vector<transfer_target> targets)
    : index_{std::move(index)}, targets_{std::move(targets)} {}

transfer_set transfer_set::from_list(timetable const& tt,
                                     std::vector<transfer> list) {
  std::ranges::sort(list, [&](transfer const& a, transfer const& b) {
    auto const pa = tt.time_index(a.from_trip_) + a.from_idx_;
    auto const pb = tt.time_index(b.from_trip_) + b.from_idx_;
    return std::tuple{pa, to_idx(a.to_trip_), a.to_idx_} <
           std::tuple{pb, to_idx(b.to_trip_), b.to_idx_};
  });
  auto index = std::vector<std::uint32_t>(tt.n_stop_times() + 1U, 0U);
  auto targets = std::vector<transfer_target>{};
  targets.reserve(list.size());
  for (auto const& x : list) {
    ++index[tt.time_index(x.from_trip_) + x.from_idx_ + 1U];
    targets.push_back({x.to_trip_, x.to_idx_});
  }
  for (auto i = 1U; i < index.size(); ++i) {
    index[i] += index[i - 1U];
  }
  return transfer_set{std::move(index), std::move(targets)};
}

std::vector<transfer> transfer_set::to_list(timetable const& tt) const {
  auto list = std::vector<transfer>{};
  list.reserve(size());
  for (auto t = 0U; t != tt.n_trips(); ++t) {
    auto const trip = trip_id{t};
    for (auto i = 0U; i != tt.trip_length(trip); ++i) {
      auto const idx = static_cast<stop_idx_t>(i);
      for (auto const& x : from(tt, trip, idx)) {
        list.push_back({trip, idx, x.trip_, x.idx_});
      }
    }
  }
  return list;
}

namespace {

constexpr char kMagic[4] = {'T', 'B', 'R', 'T'};

struct writer {
  template <typename T>
  void put(T const x) {
    static_assert(std::is_unsigned_v<T>);
    for (auto i = 0U; i != sizeof(T); ++i) {
      out_.push_back(static_cast<std::byte>((x >> (8U * i)) & 0xFFU));
    }
  }
  std::vector<std::byte> out_;
};

struct reader {
  void need(std::size_t const n) const {
    if (data_.size() - pos_ < n) {
      throw artifact_error{artifact_error::reason::kTruncated,
                           "transfer artifact is truncated"};
    }
  }
  void need_items(std::uint64_t const n, std::size_t const item_size) const {
    if ((data_.size() - pos_) / item_size < n) {
      throw artifact_error{artifact_error::reason::kTruncated,
                           "transfer artifact is truncated"};
    }
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    auto x = T{0};
    for (auto i = 0U; i != sizeof(T); ++i) {
      x |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8U * i));
    }
    pos_ += sizeof(T);
    return x;
  }
  std::span<std::byte const> data_;
  std::size_t pos_{0U};
};

}  // namespace

std::vector<std::byte> serialize(transfer_set const& ts,
                                 digest_t const& digest) {
  auto w = writer{};
  w.out_.reserve(48U + ts.index().size() * 4U + ts.size() * 6U);
  for (auto const c : kMagic) {
    w.put(static_cast<std::uint8_t>(c));
  }
  w.put(kArtifactVersion);
  for (auto const b : digest) {
    w.put(b);
  }
  w.put(static_cast<std::uint64_t>(ts.index().size()));
  for (auto const x : ts.index()) {
    w.put(x);
  }
  w.put(static_cast<std::uint64_t>(ts.size()));
  for (auto const& x : ts.targets()) {
    w.put(to_idx(x.trip_));
    w.put(x.idx_);
  }
  return std::move(w.out_);
}

transfer_set deserialize(std::span<std::byte const> const data,
                         digest_t const& expected) {
  auto r = reader{data};
  for (auto const c : kMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c)) {
      throw artifact_error{artifact_error::reason::kBadMagic,
                           "not a transfer artifact (bad magic)"};
    }
  }
  auto const version = r.get<std::uint32_t>();
  if (version != kArtifactVersion) {
    throw artifact_error{
        artifact_error::reason::kVersion,
        fmt::format("artifact version {} unsupported (expected {})", version,
                    kArtifactVersion)};
  }
  auto digest = digest_t{};
  for (auto& b : digest) {
    b = r.get<std::uint8_t>();
  }
  if (digest != expected) {
    throw artifact_error{
        artifact_error::reason::kStale,
        "stale artifact: timetable digest does not match the feed"};
  }

  auto const n_index = r.get<std::uint64_t>();
  r.need_items(n_index, 4U);
  auto index = std::vector<std::uint32_t>(n_index);
  for (auto& x : index) {
    x = r.get<std::uint32_t>();
  }
  auto const n_targets = r.get<std::uint64_t>();
  r.need_items(n_targets, 6U);
  auto targets = std::vector<transfer_target>(n_targets);
  for (auto& x : targets) {
    x.trip_ = trip_id{r.get<std::uint32_t>()};
    x.idx_ = r.get<std::uint16_t>();
  }
  if (r.pos_ != data.size()) {
    throw artifact_error{artifact_error::reason::kCorrupt,
                         "trailing bytes after transfer artifact"};
  }
  if (index.empty() || index.front() != 0U || index.back() != n_targets ||
      !std::ranges::is_sorted(index)) {
    throw artifact_error{artifact_error::reason::kCorrupt,
                         "inconsistent transfer index"};
  }
  return transfer_set{std::move(index), std::move(targets)};
}

void write_artifact(std::filesystem::path const& path, transfer_set const& ts,
                    digest_t const& digest) {
  auto const bytes = serialize(ts, digest);
  auto out = std::ofstream{path, std::ios::binary};
  out.write(reinterpret_cast<char const*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw artifact_error{artifact_error::reason::kCorrupt,
                         fmt::format("cannot write {}", path.string())};
  }
}

transfer_set read_artifact(std::filesystem::path const& path,
                           timetable const& expected) {
  auto in = std::ifstream{path, std::ios::binary};
  if (!in) {
    throw artifact_error{artifact_error::reason::kTruncated,
                         fmt::format("cannot read {}", path.string())};
  }
  auto const chars = std::vector<char>{std::istreambuf_iterator<char>{in},
                                       std::istreambuf_iterator<char>{}};
  auto ts = deserialize(
      std::as_bytes(std::span<char const>{chars.data(), chars.size()}),
      expected.digest());
  if (ts.index().size() != expected.n_stop_times() + 1U) {
    throw artifact_error{artifact_error::reason::kCorrupt,
                         "transfer index does not fit the timetable"};
  }
  for (auto const& x : ts.targets()) {
    if (to_idx(x.trip_) >= expected.n_trips() ||
        x.idx_ >= expected.trip_length(x.trip_)) {
      throw artifact_error{artifact_error::reason::kCorrupt,
                           "transfer target out of range"};
    }
  }
  return ts;
}

}  // namespace tbr
