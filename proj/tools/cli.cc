#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "fmt/format.h"
#include "fmt/ostream.h"
#include "nlohmann/json.hpp"

#include "tbr/error.h"
#include "tbr/preprocess.h"
#include "tbr/query.h"
#include "tbr/transfer_set.h"

namespace tbr::cli {

namespace {

using json = nlohmann::ordered_json;
using clock = std::chrono::steady_clock;

// Translates exceptions into exit codes with the message on `err`.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (feed_error const& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (artifact_error const& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (query_error const& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (std::invalid_argument const& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (std::exception const& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kInternalError;
  }
  return kValidationError;
}

timetable load_timetable(std::filesystem::path const& feed,
                         footpath_mode const mode, std::ostream& err) {
  auto report = validate_footpaths(parse_feed(feed), mode);
  if (report.violations_ != 0U) {
    fmt::print(err, "{}: {} footpath {}\n", to_string(mode),
               report.violations_,
               mode == footpath_mode::kClosure ? "edges added" : "violations");
  }
  return to_timetable(report.feed_);
}

struct dataset {
  explicit dataset(dataset_args const& args, std::ostream& err)
      : tt_{load_timetable(args.feed_, args.footpaths_, err)},
        ts_{read_artifact(args.artifact_, tt_)},
        engine_{tt_, ts_} {}

  timetable tt_;
  transfer_set ts_;
  engine engine_;
};

stop_id resolve_stop(timetable const& tt, std::string const& id) {
  auto const s = tt.find_stop(id);
  if (!s.has_value()) {
    throw query_error{fmt::format("unknown stop id '{}'", id)};
  }
  return *s;
}

std::pair<rtime, rtime> parse_range(std::string_view const s) {
  auto const dash = s.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument{
        fmt::format("expected a range hh:mm:ss-hh:mm:ss, got '{}'", s)};
  }
  return {parse_time(s.substr(0U, dash)), parse_time(s.substr(dash + 1U))};
}

json journey_json(timetable const& tt, journey const& j) {
  auto legs = json::array();
  auto const walk = [&](journey::walk const& w) {
    legs.push_back({{"type", "walk"},
                    {"from", tt.stop_external_id(w.from_)},
                    {"to", tt.stop_external_id(w.to_)},
                    {"duration", w.duration_}});
  };
  if (j.initial_walk_.has_value()) {
    walk(*j.initial_walk_);
  }
  for (auto const& r : j.rides_) {
    legs.push_back({{"type", "ride"},
                    {"trip", tt.trip_external_id(r.trip_)},
                    {"from", tt.stop_external_id(tt.stop_at(r.trip_, r.board_))},
                    {"departure", format_time(tt.dep(r.trip_, r.board_))},
                    {"to", tt.stop_external_id(tt.stop_at(r.trip_, r.exit_))},
                    {"arrival", format_time(tt.arr(r.trip_, r.exit_))}});
  }
  if (j.final_walk_.has_value()) {
    walk(*j.final_walk_);
  }
  return legs;
}

// Legs separated by " | ", free of commas so the CSV needs no quoting.
std::string journey_csv(timetable const& tt, journey const& j) {
  auto legs = std::vector<std::string>{};
  auto const walk = [&](journey::walk const& w) {
    legs.push_back(fmt::format("walk {} {} {}s", tt.stop_external_id(w.from_),
                               tt.stop_external_id(w.to_), w.duration_));
  };
  if (j.initial_walk_.has_value()) {
    walk(*j.initial_walk_);
  }
  for (auto const& r : j.rides_) {
    legs.push_back(fmt::format(
        "ride {} {} {} {} {}", tt.trip_external_id(r.trip_),
        tt.stop_external_id(tt.stop_at(r.trip_, r.board_)),
        format_time(tt.dep(r.trip_, r.board_)),
        tt.stop_external_id(tt.stop_at(r.trip_, r.exit_)),
        format_time(tt.arr(r.trip_, r.exit_))));
  }
  if (j.final_walk_.has_value()) {
    walk(*j.final_walk_);
  }
  return fmt::format("{}", fmt::join(legs, " | "));
}

void print_results(query_args const& args, dataset const& d,
                   query_context const& ctx, result_set const& results,
                   bool const profile, std::ostream& out) {
  auto const sorted = results.sorted();
  if (args.format_ == output_format::kJson) {
    auto arr = json::array();
    for (auto const& r : sorted) {
      auto o = json::object();
      if (profile) {
        o["departure"] = format_time(r.departure_);
      }
      o["arrival"] = format_time(r.arrival_);
      o["transfers"] = r.transfers_;
      if (args.journeys_) {
        o["journey"] = journey_json(d.tt_, ctx.reconstruct(r));
      }
      arr.push_back(std::move(o));
    }
    fmt::print(out, "{}\n", arr.dump(2));
    return;
  }

  fmt::print(out, "{}arrival,transfers{}\n", profile ? "departure," : "",
             args.journeys_ ? ",journey" : "");
  for (auto const& r : sorted) {
    if (profile) {
      fmt::print(out, "{},", format_time(r.departure_));
    }
    fmt::print(out, "{},{}", format_time(r.arrival_), r.transfers_);
    if (args.journeys_) {
      fmt::print(out, ",{}", journey_csv(d.tt_, ctx.reconstruct(r)));
    }
    fmt::print(out, "\n");
  }
}

double micros(clock::duration const d) {
  return std::chrono::duration<double, std::micro>(d).count();
}

// Runs one query; returns its result count and wall time.
struct timed_result {
  std::size_t results_;
  double time_us_;
  query_stats stats_;
};

timed_result timed_query(query_context& ctx, query_mode const mode,
                         stop_id const src, stop_id const tgt,
                         rtime const departure) {
  auto const start = clock::now();
  auto const r = mode == query_mode::kEarliestArrival
                     ? ctx.earliest_arrival(src, tgt, departure)
                     : ctx.profile(src, tgt, 0, kSecondsPerDay - 1);
  auto const time = micros(clock::now() - start);
  return {r.size(), time, ctx.stats()};
}

}  // namespace

query_mode parse_query_mode(std::string_view const s) {
  if (s == "ea") {
    return query_mode::kEarliestArrival;
  }
  if (s == "profile") {
    return query_mode::kProfile;
  }
  throw std::invalid_argument{fmt::format("unknown query mode '{}'", s)};
}

double haversine(double const lat1, double const lon1, double const lat2,
                 double const lon2) {
  constexpr auto kEarthRadius = 6'371'000.0;
  constexpr auto kRad = std::numbers::pi / 180.0;
  auto const dlat = (lat2 - lat1) * kRad;
  auto const dlon = (lon2 - lon1) * kRad;
  auto const a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                 std::cos(lat1 * kRad) * std::cos(lat2 * kRad) *
                     std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<stop_id> stops_by_distance(timetable const& tt,
                                       stop_id const src) {
  auto const& s = tt.stop(src);
  auto keyed = std::vector<std::pair<double, stop_id>>{};
  for (auto p = 0U; p != tt.n_stops(); ++p) {
    auto const& q = tt.stop(stop_id{p});
    if (stop_id{p} == src) {
      continue;
    }
    if (!q.lat_.has_value() || !q.lon_.has_value() || !s.lat_.has_value() ||
        !s.lon_.has_value()) {
      throw query_error{fmt::format("stop '{}' has no coordinates",
                                    !s.lat_.has_value() || !s.lon_.has_value()
                                        ? s.id_
                                        : q.id_)};
    }
    keyed.emplace_back(haversine(*s.lat_, *s.lon_, *q.lat_, *q.lon_),
                       stop_id{p});
  }
  std::ranges::sort(keyed);
  auto out = std::vector<stop_id>{};
  out.reserve(keyed.size());
  for (auto const& [_, p] : keyed) {
    out.push_back(p);
  }
  return out;
}

int cmd_build(build_args const& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    auto const tt = load_timetable(args.feed_, args.footpaths_, err);
    auto opt = pipeline_options{};
    opt.threads_ = args.threads_;
    opt.skip_uturn_ = args.skip_uturn_;
    opt.skip_reduction_ = args.skip_reduction_;
    auto const r = run_pipeline(tt, opt);
    write_artifact(args.out_, r.transfers_, tt.digest());

    auto const& s = r.stats_;
    fmt::print(out, "stage,transfers,time_ms\n");
    fmt::print(out, "initial,{},{:.3f}\n", s.initial_, s.initial_time_.count());
    fmt::print(out, "uturn,{},{:.3f}\n", s.after_uturn_, s.uturn_time_.count());
    fmt::print(out, "reduced,{},{:.3f}\n", s.after_reduction_,
               s.reduction_time_.count());
    return kOk;
  });
}

int cmd_query(query_args const& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    auto const d = dataset{args.data_, err};
    auto const src = resolve_stop(d.tt_, args.src_);
    auto const tgt = resolve_stop(d.tt_, args.tgt_);
    auto ctx = query_context{d.engine_};
    auto const r = ctx.earliest_arrival(src, tgt, parse_time(args.time_));
    print_results(args, d, ctx, r, false, out);
    return kOk;
  });
}

int cmd_profile(query_args const& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    auto const d = dataset{args.data_, err};
    auto const src = resolve_stop(d.tt_, args.src_);
    auto const tgt = resolve_stop(d.tt_, args.tgt_);
    auto const [edt, ldt] = parse_range(args.time_);
    auto ctx = query_context{d.engine_};
    auto const r = ctx.profile(src, tgt, edt, ldt);
    print_results(args, d, ctx, r, true, out);
    return kOk;
  });
}

int cmd_georank(georank_args const& args, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&]() {
    auto const d = dataset{args.data_, err};
    auto const& tt = d.tt_;
    if (tt.n_stops() < 2U) {
      throw query_error{"geo-rank needs at least two stops"};
    }
    auto const m = tt.n_stops() - 1U;
    auto const max_rank = std::max<unsigned>(
        args.min_rank_,
        static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(m)))));

    auto rng = std::mt19937_64{args.seed_};
    auto pick_stop = std::uniform_int_distribution<std::uint32_t>{
        0U, static_cast<std::uint32_t>(tt.n_stops() - 1U)};
    auto pick_time = std::uniform_int_distribution<rtime>{0, kSecondsPerDay - 1};
    auto ctx = query_context{d.engine_};

    fmt::print(out,
               "source,rank,target,target_position,clamped,departure,time_us,"
               "results\n");
    for (auto q = 0U; q != args.queries_; ++q) {
      auto const src = stop_id{pick_stop(rng)};
      auto const departure = pick_time(rng);
      auto const order = stops_by_distance(tt, src);
      for (auto r = args.min_rank_; r <= max_rank; ++r) {
        auto const wanted = std::uint64_t{1U} << r;  // 1-based position
        auto const clamped = wanted > order.size();
        auto const position = clamped ? order.size() : wanted;
        auto const tgt = order[position - 1U];
        auto const t = timed_query(ctx, args.mode_, src, tgt, departure);
        fmt::print(out, "{},{},{},{},{},{},{:.3f},{}\n", tt.stop_external_id(src),
                   r, tt.stop_external_id(tgt), position, clamped ? 1 : 0,
                   args.mode_ == query_mode::kProfile ? "profile"
                                                       : format_time(departure),
                   t.time_us_, t.results_);
      }
    }
    return kOk;
  });
}

int cmd_bench(bench_args const& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    auto const d = dataset{args.data_, err};
    auto const& tt = d.tt_;

    struct bench_query {
      stop_id src_, tgt_;
      rtime departure_;
    };
    auto rng = std::mt19937_64{args.seed_};
    auto pick_stop = std::uniform_int_distribution<std::uint32_t>{
        0U, static_cast<std::uint32_t>(std::max<std::size_t>(tt.n_stops(), 1U) - 1U)};
    auto pick_time = std::uniform_int_distribution<rtime>{0, kSecondsPerDay - 1};
    auto const draw = [&]() {
      auto const src = stop_id{pick_stop(rng)};
      auto tgt = stop_id{pick_stop(rng)};
      while (tt.n_stops() > 1U && tgt == src) {
        tgt = stop_id{pick_stop(rng)};
      }
      return bench_query{src, tgt, pick_time(rng)};
    };
    auto warmup = std::vector<bench_query>{};
    for (auto i = 0U; i != args.warmup_ && tt.n_stops() != 0U; ++i) {
      warmup.push_back(draw());
    }
    auto queries = std::vector<bench_query>{};
    for (auto i = 0U; i != args.queries_ && tt.n_stops() != 0U; ++i) {
      queries.push_back(draw());
    }

    auto records = std::vector<timed_result>(queries.size());
    auto const threads = std::max(1U, args.threads_);
    auto const worker = [&](unsigned const w) {
      auto ctx = query_context{d.engine_};
      for (auto const& q : warmup) {
        timed_query(ctx, args.mode_, q.src_, q.tgt_, q.departure_);
      }
      for (auto i = std::size_t{w}; i < queries.size(); i += threads) {
        auto const& q = queries[i];
        records[i] = timed_query(ctx, args.mode_, q.src_, q.tgt_, q.departure_);
      }
    };
    if (threads == 1U) {
      worker(0U);
    } else {
      auto pool = std::vector<std::jthread>{};
      for (auto w = 0U; w != threads; ++w) {
        pool.emplace_back(worker, w);
      }
    }

    if (args.per_query_csv_.has_value()) {
      auto f = std::ofstream{*args.per_query_csv_};
      if (!f) {
        throw std::runtime_error{
            fmt::format("cannot write {}", args.per_query_csv_->string())};
      }
      fmt::print(f,
                 "query,source,target,departure,time_us,results,"
                 "entries_scanned,transfers_scanned\n");
      for (auto i = 0U; i != queries.size(); ++i) {
        auto const& q = queries[i];
        auto const& r = records[i];
        fmt::print(f, "{},{},{},{},{:.3f},{},{},{}\n", i,
                   tt.stop_external_id(q.src_), tt.stop_external_id(q.tgt_),
                   args.mode_ == query_mode::kProfile ? "profile"
                                                      : format_time(q.departure_),
                   r.time_us_, r.results_, r.stats_.entries_scanned_,
                   r.stats_.transfers_scanned_);
      }
    }

    auto times = std::vector<double>{};
    auto reachable = std::size_t{0U};
    for (auto const& r : records) {
      times.push_back(r.time_us_);
      reachable += r.results_ != 0U ? 1U : 0U;
    }
    std::ranges::sort(times);
    auto const percentile = [&](double const p) {
      if (times.empty()) {
        return 0.0;
      }
      auto const rank = static_cast<std::size_t>(
          std::ceil(p * static_cast<double>(times.size())));
      return times[std::clamp<std::size_t>(rank, 1U, times.size()) - 1U];
    };
    auto const mean =
        times.empty() ? 0.0
                      : std::accumulate(begin(times), end(times), 0.0) /
                            static_cast<double>(times.size());
    auto const median =
        times.empty()
            ? 0.0
            : (times.size() % 2U == 1U
                   ? times[times.size() / 2U]
                   : (times[times.size() / 2U - 1U] + times[times.size() / 2U]) /
                         2.0);

    fmt::print(out, "queries,mean_us,median_us,p99_us,reachable,unreachable\n");
    fmt::print(out, "{},{:.3f},{:.3f},{:.3f},{},{}\n", queries.size(), mean,
               median, percentile(0.99), reachable, queries.size() - reachable);
    return kOk;
  });
}

int cmd_generate(generate_args const& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() {
    auto const feed = generate_instance(args.seed_, args.profile_, args.generator_);
    write_feed(feed, args.out_);
    fmt::print(out, "{} stops, {} trips, {} footpaths written to {}\n",
               feed.stops_.size(), feed.trips_.size(), feed.footpaths_.size(),
               args.out_.string());
    return kOk;
  });
}

}  // namespace tbr::cli
