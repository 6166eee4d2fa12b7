#include "cli.h"

#include <ostream>

#include "CLI11.hpp"

#include "fmt/format.h"
#include "fmt/ostream.h"

namespace tbr::cli {

namespace {

void add_dataset(CLI::App& app, dataset_args& d, std::string& footpaths) {
  app.add_option("--feed", d.feed_, "Feed directory the artifact was built from")
      ->required();
  app.add_option("--artifact", d.artifact_, "Transfer artifact")->required();
  app.add_option("--footpath-mode", footpaths,
                 "strict, closure or permissive; must match the build")
      ->capture_default_str();
}

}  // namespace

int run(int const argc, char const* const* argv, std::ostream& out,
        std::ostream& err) {
  auto app = CLI::App{"Trip-based public transit routing"};
  app.require_subcommand(1);

  auto footpaths = std::string{"strict"};
  auto mode = std::string{"ea"};
  auto json = false;
  auto csv = false;
  auto profile = std::string{"random"};

  auto build = build_args{};
  auto* build_cmd = app.add_subcommand("build", "Preprocess a feed into an artifact");
  build_cmd->add_option("feed", build.feed_, "Feed directory")->required();
  build_cmd->add_option("-o,--out", build.out_, "Artifact path")->required();
  build_cmd->add_option("--threads", build.threads_)->capture_default_str();
  build_cmd->add_option("--footpath-mode", footpaths)->capture_default_str();
  build_cmd->add_flag("--skip-uturn", build.skip_uturn_);
  build_cmd->add_flag("--skip-reduction", build.skip_reduction_);

  auto query = query_args{};
  auto* query_cmd = app.add_subcommand("query", "Earliest arrival query");
  auto* profile_cmd = app.add_subcommand("profile", "Profile query");
  for (auto* cmd : {query_cmd, profile_cmd}) {
    add_dataset(*cmd, query.data_, footpaths);
    cmd->add_option("source", query.src_, "Source stop id")->required();
    cmd->add_option("target", query.tgt_, "Target stop id")->required();
    cmd->add_flag("--json", json, "JSON output");
    cmd->add_flag("--csv", csv, "CSV output (default)");
    cmd->add_flag("--journeys", query.journeys_, "Include journey legs");
  }
  query_cmd->add_option("time", query.time_, "Departure hh:mm:ss")->required();
  profile_cmd->add_option("range", query.time_, "Departure range hh:mm:ss-hh:mm:ss")
      ->required();

  auto georank = georank_args{};
  auto* georank_cmd =
      app.add_subcommand("georank", "Queries to the 2^r-th nearest stop");
  add_dataset(*georank_cmd, georank.data_, footpaths);
  georank_cmd->add_option("--queries", georank.queries_)->capture_default_str();
  georank_cmd->add_option("--mode", mode, "ea or profile")->capture_default_str();
  georank_cmd->add_option("--seed", georank.seed_)->capture_default_str();
  georank_cmd->add_option("--min-rank", georank.min_rank_)->capture_default_str();

  auto bench = bench_args{};
  auto per_query = std::string{};
  auto* bench_cmd = app.add_subcommand("bench", "Random query benchmark");
  add_dataset(*bench_cmd, bench.data_, footpaths);
  bench_cmd->add_option("--queries", bench.queries_)->capture_default_str();
  bench_cmd->add_option("--mode", mode, "ea or profile")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed_)->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup_)->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads_)->capture_default_str();
  bench_cmd->add_option("--out", per_query, "Per-query CSV path");

  auto generate = generate_args{};
  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic feed");
  generate_cmd->add_option("out", generate.out_, "Output directory")->required();
  generate_cmd->add_option("--profile", profile, "random, grid or parallel-lines")
      ->capture_default_str();
  generate_cmd->add_option("--seed", generate.seed_)->capture_default_str();
  generate_cmd->add_option("--grid-n", generate.generator_.grid_n_)
      ->capture_default_str();
  generate_cmd->add_option("--headway", generate.generator_.headway_,
                           "Grid headway in seconds")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const& e) {
    fmt::print(out, "{}", app.help());
    return kOk;
  } catch (CLI::CallForAllHelp const& e) {
    fmt::print(out, "{}", app.help("", CLI::AppFormatMode::All));
    return kOk;
  } catch (CLI::ParseError const& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  }

  try {
    build.footpaths_ = parse_footpath_mode(footpaths);
    query.data_.footpaths_ = build.footpaths_;
    georank.data_.footpaths_ = build.footpaths_;
    bench.data_.footpaths_ = build.footpaths_;
    georank.mode_ = bench.mode_ = parse_query_mode(mode);
    generate.profile_ = parse_instance_profile(profile);
  } catch (std::invalid_argument const& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  }
  if (json && csv) {
    fmt::print(err, "error: --json and --csv are exclusive\n");
    return kValidationError;
  }
  query.format_ = json ? output_format::kJson : output_format::kCsv;
  if (!per_query.empty()) {
    bench.per_query_csv_ = per_query;
  }

  if (*build_cmd) {
    return cmd_build(build, out, err);
  } else if (*query_cmd) {
    return cmd_query(query, out, err);
  } else if (*profile_cmd) {
    return cmd_profile(query, out, err);
  } else if (*georank_cmd) {
    return cmd_georank(georank, out, err);
  } else if (*bench_cmd) {
    return cmd_bench(bench, out, err);
  } else {
    return cmd_generate(generate, out, err);
  }
}

}  // namespace tbr::cli
