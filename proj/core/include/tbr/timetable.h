#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tbr/types.h"

namespace tbr {

using digest_t = std::array<std::uint8_t, 32>;

struct stop_info {
  std::string id_;
  std::string name_;
  rtime change_time_{0};
  std::optional<double> lat_, lon_;
};

struct footpath_info {
  stop_id from_, to_;
  rtime duration_;
};

// One vehicle run before it has been assigned to a line.
struct trip_info {
  std::string id_;
  std::vector<stop_id> stops_;
  std::vector<rtime> arr_, dep_;
};

struct footpath {
  stop_id target_;  // origin for the backward copy
  rtime duration_;
};

struct line_stop {
  line_id line_;
  stop_idx_t idx_;

  friend bool operator==(line_stop const&, line_stop const&) = default;
};

// Componentwise order on trips with identical stop sequences: arrival AND
// departure times must not decrease from t to u at any position.
// Throws std::invalid_argument if the sequences differ in length.
bool trip_leq(std::span<rtime const> t_arr, std::span<rtime const> t_dep,
              std::span<rtime const> u_arr, std::span<rtime const> u_dep);

// t precedes u and differs in at least one time.
bool trip_less(std::span<rtime const> t_arr, std::span<rtime const> t_dep,
               std::span<rtime const> u_arr, std::span<rtime const> u_dep);

// Groups of trip_info indices. Each group shares one stop sequence and is
// a chain under trip_leq, in order. Throws feed_error on trips violating
// arr <= dep <= next arr.
std::vector<std::vector<std::uint32_t>> build_lines(
    std::span<trip_info const>);

// Immutable indexed timetable. Stops, lines and trips carry consecutive
// ids from 0; trips of a line are consecutive with earlier trips first.
// Footpaths, stops on lines, lines at stops and stop times are stored as
// forward stars.
class timetable {
public:
  static timetable build(std::vector<stop_info>,
                         std::span<footpath_info const>,
                         std::span<trip_info const>);

  std::size_t n_stops() const noexcept { return change_times_.size(); }
  std::size_t n_lines() const noexcept { return line_first_trip_.size() - 1U; }
  std::size_t n_trips() const noexcept { return trip_line_.size(); }
  std::size_t n_stop_times() const noexcept { return arr_.size(); }
  std::size_t n_footpaths() const noexcept { return footpaths_out_.size(); }

  // Trip segments of length one, summed over all trips.
  std::size_t n_elementary_connections() const noexcept {
    return n_stop_times() - n_trips();
  }

  rtime change_time(stop_id const p) const { return change_times_[to_idx(p)]; }

  std::span<footpath const> footpaths_from(stop_id) const;
  std::span<footpath const> footpaths_to(stop_id) const;

  // Duration of the direct footpath, the change time if from == to.
  std::optional<rtime> walk_time(stop_id from, stop_id to) const;

  // Visits every q with a defined walking time from p, including p itself
  // (at its change time) first.
  template <typename Fn>
  void for_each_walk_from(stop_id const p, Fn&& fn) const {
    fn(p, change_time(p));
    for (auto const& fp : footpaths_from(p)) {
      fn(fp.target_, fp.duration_);
    }
  }

  std::span<stop_id const> line_stops(line_id) const;
  std::size_t line_length(line_id const l) const {
    return line_stops(l).size();
  }

  // Throws query_error on an unknown stop.
  std::span<line_stop const> lines_at(stop_id) const;

  trip_id first_trip(line_id const l) const {
    return trip_id{line_first_trip_[to_idx(l)]};
  }
  trip_id end_trip(line_id const l) const {
    return trip_id{line_first_trip_[to_idx(l) + 1U]};
  }
  line_id line_of(trip_id const t) const { return trip_line_[to_idx(t)]; }
  std::size_t trip_length(trip_id const t) const {
    return line_length(line_of(t));
  }
  stop_id stop_at(trip_id const t, stop_idx_t const i) const {
    return line_stops(line_of(t))[i];
  }

  // Offset of the trip's first entry in the stop-time arrays.
  std::uint32_t time_index(trip_id const t) const {
    return trip_time_index_[to_idx(t)];
  }
  rtime arr(trip_id const t, stop_idx_t const i) const {
    return arr_[time_index(t) + i];
  }
  rtime dep(trip_id const t, stop_idx_t const i) const {
    return dep_[time_index(t) + i];
  }
  std::span<rtime const> arrivals(trip_id) const;
  std::span<rtime const> departures(trip_id) const;

  bool trip_leq(trip_id t, trip_id u) const;
  bool trip_less(trip_id t, trip_id u) const;

  // Least trip of the line departing at position i no earlier than time.
  std::optional<trip_id> earliest_trip(line_id, stop_idx_t i,
                                       rtime time) const;

  std::string const& stop_external_id(stop_id const p) const {
    return stops_[to_idx(p)].id_;
  }
  stop_info const& stop(stop_id const p) const { return stops_[to_idx(p)]; }
  std::string const& trip_external_id(trip_id const t) const {
    return trip_ids_[to_idx(t)];
  }
  std::optional<stop_id> find_stop(std::string_view external_id) const;

  // SHA-256 over the canonical content; identifies preprocessing artifacts.
  digest_t const& digest() const noexcept { return digest_; }

private:
  void compute_digest();

  std::vector<stop_info> stops_;
  std::vector<rtime> change_times_;
  std::unordered_map<std::string, stop_id> stop_lookup_;

  std::vector<std::uint32_t> footpath_index_out_, footpath_index_in_;
  std::vector<footpath> footpaths_out_, footpaths_in_;

  std::vector<std::uint32_t> line_stop_index_;
  std::vector<stop_id> line_stops_;
  std::vector<std::uint32_t> line_first_trip_;

  std::vector<std::uint32_t> stop_line_index_;
  std::vector<line_stop> stop_lines_;

  std::vector<line_id> trip_line_;
  std::vector<std::string> trip_ids_;
  std::vector<std::uint32_t> trip_time_index_;
  std::vector<rtime> arr_, dep_;

  digest_t digest_{};
};

}  // namespace tbr
