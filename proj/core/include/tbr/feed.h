#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbr/timetable.h"
#include "tbr/types.h"

namespace tbr {

// Plain-text feed: stops.csv, trips.csv, stop_times.csv, footpaths.csv.
struct raw_stop {
  std::string id_;
  std::string name_;
  std::optional<double> lat_, lon_;
  rtime change_time_{0};

  friend bool operator==(raw_stop const&, raw_stop const&) = default;
};

struct raw_stop_time {
  std::uint32_t seq_;
  rtime arrival_, departure_;  // day offset already applied
  std::string stop_id_;

  friend bool operator==(raw_stop_time const&, raw_stop_time const&) = default;
};

struct raw_trip {
  std::string id_;
  std::string route_id_;
  int day_{0};
  std::vector<raw_stop_time> stop_times_;  // ascending seq_

  friend bool operator==(raw_trip const&, raw_trip const&) = default;
};

struct raw_footpath {
  std::string from_, to_;
  rtime duration_;

  friend bool operator==(raw_footpath const&, raw_footpath const&) = default;
};

struct raw_feed {
  std::vector<raw_stop> stops_;
  std::vector<raw_trip> trips_;
  std::vector<raw_footpath> footpaths_;

  friend bool operator==(raw_feed const&, raw_feed const&) = default;
};

// Reads and validates a feed directory. footpaths.csv may be absent.
// Throws feed_error naming file and line.
raw_feed parse_feed(std::filesystem::path const& dir);

// Same, on in-memory file contents.
raw_feed parse_feed(std::string_view stops_csv, std::string_view trips_csv,
                    std::string_view stop_times_csv,
                    std::string_view footpaths_csv);

void write_feed(raw_feed const&, std::filesystem::path const& dir);

enum class footpath_mode { kStrict, kClosure, kPermissive };

footpath_mode parse_footpath_mode(std::string_view);
std::string_view to_string(footpath_mode);

struct footpath_report {
  raw_feed feed_;
  std::size_t violations_{0U};  // permissive: warnings; closure: edges added
};

// strict: throws feed_error unless the footpath relation is symmetric,
// transitively closed and satisfies fp(a,c) <= fp(a,b) + fp(b,c), where
// fp(p,p) is the change time of p.
// closure: adds reverse edges, then the missing transitive edges with
// shortest summed durations.
// permissive: passes through, counting strict-mode violations.
footpath_report validate_footpaths(raw_feed, footpath_mode);

timetable to_timetable(raw_feed const&);

}  // namespace tbr
