#include "tbr/timetable.h"

#include <algorithm>
#include <cstring>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fmt/format.h"
#include "openssl/evp.h"

#include "tbr/error.h"

namespace tbr {

bool trip_leq(std::span<rtime const> const t_arr,
              std::span<rtime const> const t_dep,
              std::span<rtime const> const u_arr,
              std::span<rtime const> const u_dep) {
  if (t_arr.size() != u_arr.size() || t_dep.size() != u_dep.size() ||
      t_arr.size() != t_dep.size()) {
    throw std::invalid_argument{"trip_leq: stop sequences differ in length"};
  }
  for (auto i = 0U; i != t_arr.size(); ++i) {
    if (t_arr[i] > u_arr[i] || t_dep[i] > u_dep[i]) {
      return false;
    }
  }
  return true;
}

bool trip_less(std::span<rtime const> const t_arr,
               std::span<rtime const> const t_dep,
               std::span<rtime const> const u_arr,
               std::span<rtime const> const u_dep) {
  return trip_leq(t_arr, t_dep, u_arr, u_dep) &&
         !(std::ranges::equal(t_arr, u_arr) && std::ranges::equal(t_dep, u_dep));
}

namespace {

void verify_monotone(trip_info const& t) {
  if (t.stops_.size() != t.arr_.size() || t.stops_.size() != t.dep_.size()) {
    throw feed_error{fmt::format("trip {}: stop and time counts differ", t.id_)};
  }
  if (t.stops_.size() < 2U) {
    throw feed_error{fmt::format("trip {}: needs at least two stops", t.id_)};
  }
  if (t.stops_.size() >= kInfIdx) {
    throw feed_error{fmt::format("trip {}: {} stops exceed the limit of {}",
                                 t.id_, t.stops_.size(), kInfIdx - 1)};
  }
  for (auto i = 0U; i != t.stops_.size(); ++i) {
    if (t.arr_[i] > t.dep_[i]) {
      throw feed_error{fmt::format(
          "trip {}: departure before arrival at position {}", t.id_, i)};
    }
    if (i + 1U != t.stops_.size() && t.dep_[i] > t.arr_[i + 1U]) {
      throw feed_error{fmt::format(
          "trip {}: arrival at position {} before previous departure", t.id_,
          i + 1U)};
    }
  }
}

}  // namespace

std::vector<std::vector<std::uint32_t>> build_lines(
    std::span<trip_info const> const trips) {
  // Groups in order of first appearance.
  auto groups = std::vector<std::vector<std::uint32_t>>{};
  auto group_of = std::map<std::vector<stop_id>, std::size_t>{};
  for (auto i = 0U; i != trips.size(); ++i) {
    verify_monotone(trips[i]);
    auto const [it, inserted] =
        group_of.try_emplace(trips[i].stops_, groups.size());
    if (inserted) {
      groups.emplace_back();
    }
    groups[it->second].push_back(i);
  }

  auto lines = std::vector<std::vector<std::uint32_t>>{};
  for (auto& g : groups) {
    std::ranges::sort(g, [&](std::uint32_t const a, std::uint32_t const b) {
      auto const& x = trips[a];
      auto const& y = trips[b];
      if (x.arr_ != y.arr_) {
        return x.arr_ < y.arr_;
      }
      if (x.dep_ != y.dep_) {
        return x.dep_ < y.dep_;
      }
      return a < b;
    });

    auto const first_line = lines.size();
    for (auto const idx : g) {
      auto const& t = trips[idx];
      auto placed = false;
      for (auto l = first_line; l != lines.size(); ++l) {
        auto const& last = trips[lines[l].back()];
        if (trip_leq(last.arr_, last.dep_, t.arr_, t.dep_)) {
          lines[l].push_back(idx);
          placed = true;
          break;
        }
      }
      if (!placed) {
        lines.push_back({idx});
      }
    }
  }
  return lines;
}

timetable timetable::build(std::vector<stop_info> stops,
                           std::span<footpath_info const> const footpaths,
                           std::span<trip_info const> const trips) {
  auto tt = timetable{};
  auto const n_stops = stops.size();

  for (auto i = 0U; i != n_stops; ++i) {
    if (stops[i].change_time_ < 0) {
      throw feed_error{
          fmt::format("stop {}: negative change time", stops[i].id_)};
    }
    if (!tt.stop_lookup_.emplace(stops[i].id_, stop_id{i}).second) {
      throw feed_error{fmt::format("duplicate stop id {}", stops[i].id_)};
    }
    tt.change_times_.push_back(stops[i].change_time_);
  }
  tt.stops_ = std::move(stops);

  // Footpaths: forward star by origin and by destination.
  auto fps = std::vector<footpath_info>{footpaths.begin(), footpaths.end()};
  for (auto const& fp : fps) {
    if (to_idx(fp.from_) >= n_stops || to_idx(fp.to_) >= n_stops) {
      throw feed_error{"footpath references unknown stop"};
    }
    if (fp.from_ == fp.to_) {
      throw feed_error{fmt::format("footpath {} -> {} is a self loop",
                                   tt.stops_[to_idx(fp.from_)].id_,
                                   tt.stops_[to_idx(fp.to_)].id_)};
    }
    if (fp.duration_ < 0) {
      throw feed_error{"footpath with negative duration"};
    }
  }
  auto const by = [](auto proj_a, auto proj_b) {
    return [=](footpath_info const& x, footpath_info const& y) {
      return std::pair{proj_a(x), proj_b(x)} < std::pair{proj_a(y), proj_b(y)};
    };
  };
  auto const from = [](footpath_info const& f) { return to_idx(f.from_); };
  auto const to = [](footpath_info const& f) { return to_idx(f.to_); };

  std::ranges::sort(fps, by(from, to));
  for (auto i = 1U; i < fps.size(); ++i) {
    if (fps[i - 1U].from_ == fps[i].from_ && fps[i - 1U].to_ == fps[i].to_) {
      throw feed_error{fmt::format("duplicate footpath {} -> {}",
                                   tt.stops_[to_idx(fps[i].from_)].id_,
                                   tt.stops_[to_idx(fps[i].to_)].id_)};
    }
  }
  tt.footpath_index_out_.assign(n_stops + 1U, 0U);
  for (auto const& fp : fps) {
    ++tt.footpath_index_out_[to_idx(fp.from_) + 1U];
    tt.footpaths_out_.push_back({fp.to_, fp.duration_});
  }
  std::partial_sum(begin(tt.footpath_index_out_), end(tt.footpath_index_out_),
                   begin(tt.footpath_index_out_));

  std::ranges::sort(fps, by(to, from));
  tt.footpath_index_in_.assign(n_stops + 1U, 0U);
  for (auto const& fp : fps) {
    ++tt.footpath_index_in_[to_idx(fp.to_) + 1U];
    tt.footpaths_in_.push_back({fp.from_, fp.duration_});
  }
  std::partial_sum(begin(tt.footpath_index_in_), end(tt.footpath_index_in_),
                   begin(tt.footpath_index_in_));

  // Lines and trips.
  for (auto const& t : trips) {
    for (auto const s : t.stops_) {
      if (to_idx(s) >= n_stops) {
        throw feed_error{fmt::format("trip {}: unknown stop", t.id_)};
      }
    }
  }
  auto const lines = build_lines(trips);
  tt.line_stop_index_.push_back(0U);
  tt.line_first_trip_.push_back(0U);
  tt.trip_time_index_.push_back(0U);
  for (auto l = 0U; l != lines.size(); ++l) {
    auto const& seq = trips[lines[l].front()].stops_;
    tt.line_stops_.insert(end(tt.line_stops_), begin(seq), end(seq));
    tt.line_stop_index_.push_back(static_cast<std::uint32_t>(tt.line_stops_.size()));
    for (auto const idx : lines[l]) {
      auto const& t = trips[idx];
      tt.trip_line_.push_back(line_id{l});
      tt.trip_ids_.push_back(t.id_);
      tt.arr_.insert(end(tt.arr_), begin(t.arr_), end(t.arr_));
      tt.dep_.insert(end(tt.dep_), begin(t.dep_), end(t.dep_));
      tt.trip_time_index_.push_back(static_cast<std::uint32_t>(tt.arr_.size()));
    }
    tt.line_first_trip_.push_back(static_cast<std::uint32_t>(tt.trip_line_.size()));
  }
  tt.trip_time_index_.pop_back();

  // Lines at stops, ordered by (line, index).
  tt.stop_line_index_.assign(n_stops + 1U, 0U);
  for (auto const s : tt.line_stops_) {
    ++tt.stop_line_index_[to_idx(s) + 1U];
  }
  std::partial_sum(begin(tt.stop_line_index_), end(tt.stop_line_index_),
                   begin(tt.stop_line_index_));
  tt.stop_lines_.resize(tt.line_stops_.size());
  auto fill = std::vector<std::uint32_t>{begin(tt.stop_line_index_),
                                         std::prev(end(tt.stop_line_index_))};
  for (auto l = 0U; l != lines.size(); ++l) {
    auto const seq = tt.line_stops(line_id{l});
    for (auto i = 0U; i != seq.size(); ++i) {
      tt.stop_lines_[fill[to_idx(seq[i])]++] =
          line_stop{line_id{l}, static_cast<stop_idx_t>(i)};
    }
  }

  tt.compute_digest();
  return tt;
}

std::span<footpath const> timetable::footpaths_from(stop_id const p) const {
  auto const i = to_idx(p);
  return {footpaths_out_.data() + footpath_index_out_[i],
          footpaths_out_.data() + footpath_index_out_[i + 1U]};
}

std::span<footpath const> timetable::footpaths_to(stop_id const p) const {
  auto const i = to_idx(p);
  return {footpaths_in_.data() + footpath_index_in_[i],
          footpaths_in_.data() + footpath_index_in_[i + 1U]};
}

std::optional<rtime> timetable::walk_time(stop_id const from,
                                          stop_id const to) const {
  if (from == to) {
    return change_time(from);
  }
  for (auto const& fp : footpaths_from(from)) {
    if (fp.target_ == to) {
      return fp.duration_;
    }
  }
  return std::nullopt;
}

std::span<stop_id const> timetable::line_stops(line_id const l) const {
  auto const i = to_idx(l);
  return {line_stops_.data() + line_stop_index_[i],
          line_stops_.data() + line_stop_index_[i + 1U]};
}

std::span<line_stop const> timetable::lines_at(stop_id const p) const {
  auto const i = to_idx(p);
  if (i >= n_stops()) {
    throw query_error{fmt::format("unknown stop {}", i)};
  }
  return {stop_lines_.data() + stop_line_index_[i],
          stop_lines_.data() + stop_line_index_[i + 1U]};
}

std::span<rtime const> timetable::arrivals(trip_id const t) const {
  return {arr_.data() + time_index(t), trip_length(t)};
}

std::span<rtime const> timetable::departures(trip_id const t) const {
  return {dep_.data() + time_index(t), trip_length(t)};
}

bool timetable::trip_leq(trip_id const t, trip_id const u) const {
  return tbr::trip_leq(arrivals(t), departures(t), arrivals(u), departures(u));
}

bool timetable::trip_less(trip_id const t, trip_id const u) const {
  return tbr::trip_less(arrivals(t), departures(t), arrivals(u), departures(u));
}

std::optional<trip_id> timetable::earliest_trip(line_id const l,
                                                stop_idx_t const i,
                                                rtime const time) const {
  // Departures at a fixed position are sorted along the line.
  auto lo = to_idx(first_trip(l));
  auto hi = to_idx(end_trip(l));
  while (lo < hi) {
    auto const mid = lo + (hi - lo) / 2U;
    if (dep_[trip_time_index_[mid] + i] < time) {
      lo = mid + 1U;
    } else {
      hi = mid;
    }
  }
  return lo == to_idx(end_trip(l)) ? std::nullopt
                                   : std::optional{trip_id{lo}};
}

std::optional<stop_id> timetable::find_stop(std::string_view const id) const {
  auto const it = stop_lookup_.find(std::string{id});
  return it == end(stop_lookup_) ? std::nullopt : std::optional{it->second};
}

namespace {

struct hasher {
  hasher() : ctx_{EVP_MD_CTX_new()} {
    EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr);
  }
  ~hasher() { EVP_MD_CTX_free(ctx_); }
  hasher(hasher const&) = delete;
  hasher& operator=(hasher const&) = delete;

  template <typename T>
  void add(std::span<T const> const v) {
    add_u64(v.size());
    EVP_DigestUpdate(ctx_, v.data(), v.size_bytes());
  }
  void add(std::string_view const s) {
    add_u64(s.size());
    EVP_DigestUpdate(ctx_, s.data(), s.size());
  }
  void add_u64(std::uint64_t const x) {
    EVP_DigestUpdate(ctx_, &x, sizeof(x));
  }

  digest_t finish() {
    auto d = digest_t{};
    auto len = 0U;
    EVP_DigestFinal_ex(ctx_, d.data(), &len);
    return d;
  }

  EVP_MD_CTX* ctx_;
};

}  // namespace

void timetable::compute_digest() {
  auto h = hasher{};
  h.add(std::string_view{"tbr-timetable-v1"});
  for (auto const& s : stops_) {
    h.add(s.id_);
  }
  h.add(std::span<rtime const>{change_times_});
  h.add(std::span<std::uint32_t const>{footpath_index_out_});
  for (auto const& fp : footpaths_out_) {
    h.add_u64(to_idx(fp.target_));
    h.add_u64(static_cast<std::uint64_t>(fp.duration_));
  }
  h.add(std::span<std::uint32_t const>{line_stop_index_});
  h.add(std::span<stop_id const>{line_stops_});
  h.add(std::span<std::uint32_t const>{line_first_trip_});
  for (auto const& id : trip_ids_) {
    h.add(id);
  }
  h.add(std::span<rtime const>{arr_});
  h.add(std::span<rtime const>{dep_});
  digest_ = h.finish();
}

}  // namespace tbr
