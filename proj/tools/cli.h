#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbr/feed.h"
#include "tbr/oracle/generator.h"

namespace tbr::cli {

// Process exit codes.
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kInternalError = 2;

enum class output_format { kCsv, kJson };
enum class query_mode { kEarliestArrival, kProfile };

query_mode parse_query_mode(std::string_view);

// Feed and artifact the query commands operate on. The footpath mode must
// be the one the artifact was built with, otherwise the artifact is stale.
struct dataset_args {
  std::filesystem::path feed_;
  std::filesystem::path artifact_;
  footpath_mode footpaths_{footpath_mode::kStrict};
};

struct build_args {
  std::filesystem::path feed_;
  std::filesystem::path out_;
  unsigned threads_{1U};
  footpath_mode footpaths_{footpath_mode::kStrict};
  bool skip_uturn_{false};
  bool skip_reduction_{false};
};

struct query_args {
  dataset_args data_;
  std::string src_, tgt_;
  std::string time_;  // hh:mm:ss, or hh:mm:ss-hh:mm:ss for profiles
  output_format format_{output_format::kCsv};
  bool journeys_{false};
};

struct georank_args {
  dataset_args data_;
  unsigned queries_{100U};
  query_mode mode_{query_mode::kEarliestArrival};
  std::uint64_t seed_{1U};
  unsigned min_rank_{4U};
};

struct bench_args {
  dataset_args data_;
  unsigned queries_{1000U};
  query_mode mode_{query_mode::kEarliestArrival};
  std::uint64_t seed_{1U};
  unsigned warmup_{3U};
  unsigned threads_{1U};
  std::optional<std::filesystem::path> per_query_csv_;
};

struct generate_args {
  std::filesystem::path out_;
  instance_profile profile_{instance_profile::kRandom};
  std::uint64_t seed_{1U};
  generator_options generator_{};
};

// Each command writes results to `out` and diagnostics to `err`, and
// returns a process exit code.
int cmd_build(build_args const&, std::ostream& out, std::ostream& err);
int cmd_query(query_args const&, std::ostream& out, std::ostream& err);
int cmd_profile(query_args const&, std::ostream& out, std::ostream& err);
int cmd_georank(georank_args const&, std::ostream& out, std::ostream& err);
int cmd_bench(bench_args const&, std::ostream& out, std::ostream& err);
int cmd_generate(generate_args const&, std::ostream& out,
                 std::ostream& err);

// Great-circle distance in metres.
double haversine(double lat1, double lon1, double lat2, double lon2);

// Stops other than src ordered by ascending distance from src, ties by id.
std::vector<stop_id> stops_by_distance(timetable const&, stop_id src);

// Full command line entry point.
int run(int argc, char const* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace tbr::cli
