// Acceptance suite: one PASS/FAIL line per criterion. Exit code is nonzero
// if any gating criterion fails. Criterion 9 is reported, never gating.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fmt/format.h"
#include "fmt/ostream.h"

#include "tbr/feed.h"
#include "tbr/oracle/generator.h"
#include "tbr/oracle/oracle.h"
#include "tbr/preprocess.h"
#include "tbr/query.h"
#include "tbr/transfer_set.h"

#include "cli.h"

using namespace tbr;

namespace {

constexpr auto kInstances = 20U;
constexpr auto kEaPerInstance = 50U;
constexpr auto kProfilePerInstance = 10U;
constexpr auto kSoundnessPerInstance = 500U;

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point const start) {
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct query {
  stop_id src_, tgt_;
  rtime time_;
};

std::vector<query> random_queries(timetable const& tt, std::uint64_t const seed,
                                  unsigned const n) {
  auto rng = std::mt19937_64{seed};
  auto stop = std::uniform_int_distribution<std::uint32_t>{
      0U, static_cast<std::uint32_t>(tt.n_stops() - 1U)};
  auto time = std::uniform_int_distribution<rtime>{6 * 3600, 9 * 3600};
  auto out = std::vector<query>{};
  while (out.size() != n) {
    auto const a = stop_id{stop(rng)};
    auto const b = stop_id{stop(rng)};
    if (a != b) {
      out.push_back({a, b, time(rng)});
    }
  }
  return out;
}

std::vector<pareto_entry> entries(result_set const& r) {
  auto out = std::vector<pareto_entry>{};
  for (auto const& x : r.sorted()) {
    out.push_back({x.departure_, x.arrival_, x.transfers_});
  }
  return out;
}

std::string show(std::vector<pareto_entry> const& v) {
  auto s = std::string{"{"};
  for (auto const& e : v) {
    s += fmt::format(" ({},{},{})", format_time(e.departure_),
                     format_time(e.arrival_), e.transfers_);
  }
  return s + " }";
}

struct instance {
  explicit instance(raw_feed const& f)
      : tt_{to_timetable(validate_footpaths(f, footpath_mode::kStrict).feed_)},
        initial_{compute_initial_transfers(tt_)},
        uturn_{remove_uturn_transfers(tt_, initial_)},
        reduced_{reduce_transfers(tt_, uturn_)},
        engine_{tt_, reduced_} {}

  timetable tt_;
  transfer_set initial_, uturn_, reduced_;
  engine engine_;
};

struct criterion {
  unsigned id_;
  std::string name_;
  bool gating_{true};
  bool pass_{true};
  std::size_t checks_{0U}, failures_{0U};
  std::vector<std::string> notes_;

  void check(bool const ok, std::function<std::string()> const& why) {
    ++checks_;
    if (!ok) {
      pass_ = false;
      if (++failures_ <= 5U) {
        notes_.push_back(why());
      }
    }
  }

  void report(std::string const& detail) const {
    fmt::print("criterion {} ({}): {}  {}\n", id_, name_,
               gating_ ? (pass_ ? "PASS" : "FAIL")
                       : (pass_ ? "REPORTED" : "REPORTED (targets missed)"),
               detail);
    for (auto const& n : notes_) {
      fmt::print("    {}\n", n);
    }
  }
};

struct suite {
  std::vector<instance> instances_;
  std::vector<std::vector<query>> ea_queries_;
  std::vector<criterion> results_;
  std::filesystem::path out_dir_;

  oracle_options capped() const {
    auto opt = oracle_options{};
    opt.max_transfers_ = kMaxTransfers;
    return opt;
  }

  void setup() {
    instances_.reserve(kInstances);  // engines point into their instance
    for (auto seed = 1U; seed <= kInstances; ++seed) {
      instances_.emplace_back(generate_instance(seed, instance_profile::kRandom));
      ea_queries_.push_back(
          random_queries(instances_.back().tt_, seed, kEaPerInstance));
    }
  }

  // 1 and 6: engine equals the reference search; every journey validates.
  void oracle_ea() {
    auto c1 = criterion{1U, "oracle equivalence, EA"};
    auto c6 = criterion{6U, "journey validity"};
    auto const start = clock::now();
    auto queries = 0U;
    auto with_transfers = 0U;
    auto sizes_ok = true;
    for (auto k = 0U; k != instances_.size(); ++k) {
      auto const& in = instances_[k];
      sizes_ok &= in.tt_.n_stops() <= 50U && in.tt_.n_trips() <= 300U &&
                  in.tt_.n_footpaths() != 0U;
      auto ctx = query_context{in.engine_};
      for (auto const& q : ea_queries_[k]) {
        ++queries;
        auto const r = ctx.earliest_arrival(q.src_, q.tgt_, q.time_);
        auto const got = entries(r);
        auto const expected =
            oracle_pareto(in.tt_, q.src_, q.tgt_, q.time_, capped());
        c1.check(got == expected, [&] {
          return fmt::format("instance {} query {}->{} at {}: engine {} oracle {}",
                             k + 1U, to_idx(q.src_), to_idx(q.tgt_),
                             format_time(q.time_), show(got), show(expected));
        });
        for (auto const& x : r.entries()) {
          with_transfers += x.transfers_ != 0U ? 1U : 0U;
          auto const problems =
              validate_journey(in.tt_, q.src_, q.tgt_, q.time_, ctx.reconstruct(x));
          c6.check(problems.empty(), [&] {
            return fmt::format("instance {} query {}->{}: {}", k + 1U,
                               to_idx(q.src_), to_idx(q.tgt_), problems.front());
          });
        }
      }
    }
    auto const elapsed = seconds_since(start);
    c1.check(sizes_ok, [] { return std::string{"instance limits violated"}; });
    c1.check(queries >= 1000U, [] { return std::string{"fewer than 1000 queries"}; });
    c1.check(elapsed < 60.0, [&] { return fmt::format("took {:.1f} s", elapsed); });
    c1.report(fmt::format("{} instances, {} queries, {} mismatches, {:.2f} s",
                          instances_.size(), queries, c1.failures_, elapsed));
    c6.check(c6.checks_ != 0U, [] { return std::string{"no journeys"}; });
    c6.report(fmt::format("{} journeys ({} with transfers), {} invalid", c6.checks_,
                          with_transfers, c6.failures_));
    results_.push_back(c1);
    results_.push_back(c6);
  }

  // 2: profile queries against the filtered union of point results.
  void oracle_profile_check() {
    auto c = criterion{2U, "oracle equivalence, profile"};
    auto queries = 0U;
    auto tuples = std::size_t{0U};
    for (auto k = 0U; k != instances_.size(); ++k) {
      auto const& in = instances_[k];
      auto ctx = query_context{in.engine_};
      for (auto const& q :
           random_queries(in.tt_, 1000U + k, kProfilePerInstance)) {
        ++queries;
        auto const ldt = q.time_ + 2 * 3600;
        auto const r = ctx.profile(q.src_, q.tgt_, q.time_, ldt);
        auto const got = entries(r);
        auto const expected =
            oracle_profile(in.tt_, q.src_, q.tgt_, q.time_, ldt, capped());
        tuples += got.size();
        c.check(got == expected, [&] {
          return fmt::format("instance {} query {}->{} [{}, {}]: engine {} oracle {}",
                             k + 1U, to_idx(q.src_), to_idx(q.tgt_),
                             format_time(q.time_), format_time(ldt), show(got),
                             show(expected));
        });
        for (auto const& x : r.entries()) {
          auto const problems = validate_journey(in.tt_, q.src_, q.tgt_, x.departure_,
                                                 ctx.reconstruct(x));
          c.check(problems.empty(), [&] { return problems.front(); });
        }
      }
    }
    c.check(queries >= 200U, [] { return std::string{"fewer than 200 queries"}; });
    c.report(fmt::format("{} queries, {} tuples, {} failed checks", queries, tuples,
                         c.failures_));
    results_.push_back(c);
  }

  // 3: every preprocessing stage yields the same answers.
  void soundness() {
    auto c = criterion{3U, "reduction soundness"};
    auto queries = 0U;
    for (auto k = 0U; k != instances_.size(); ++k) {
      auto const& in = instances_[k];
      auto const e_initial = engine{in.tt_, in.initial_};
      auto const e_uturn = engine{in.tt_, in.uturn_};
      auto a = query_context{e_initial};
      auto b = query_context{e_uturn};
      auto r = query_context{in.engine_};
      for (auto const& q :
           random_queries(in.tt_, 2000U + k, kSoundnessPerInstance)) {
        ++queries;
        auto const x = entries(a.earliest_arrival(q.src_, q.tgt_, q.time_));
        auto const y = entries(b.earliest_arrival(q.src_, q.tgt_, q.time_));
        auto const z = entries(r.earliest_arrival(q.src_, q.tgt_, q.time_));
        c.check(x == y && y == z, [&] {
          return fmt::format("instance {} query {}->{} at {}: {} / {} / {}", k + 1U,
                             to_idx(q.src_), to_idx(q.tgt_), format_time(q.time_),
                             show(x), show(y), show(z));
        });
      }
      for (auto const& q : random_queries(in.tt_, 3000U + k, 20U)) {
        auto const ldt = q.time_ + 3600;
        auto const x = entries(a.profile(q.src_, q.tgt_, q.time_, ldt));
        auto const z = entries(r.profile(q.src_, q.tgt_, q.time_, ldt));
        c.check(x == z, [&] {
          return fmt::format("instance {} profile {}->{}: {} / {}", k + 1U,
                             to_idx(q.src_), to_idx(q.tgt_), show(x), show(z));
        });
      }
    }
    c.report(fmt::format("{} instances x {} EA queries (plus 20 profiles each), "
                         "{} mismatches",
                         instances_.size(), kSoundnessPerInstance, c.failures_));
    results_.push_back(c);
  }

  // 4: parallel-lines removes transfers at both stages; counts shrink.
  void effectiveness() {
    auto c = criterion{4U, "reduction effectiveness"};
    auto totals = std::array<std::size_t, 3>{};
    for (auto seed = 1U; seed <= 10U; ++seed) {
      auto const tt = to_timetable(
          generate_instance(seed, instance_profile::kParallelLines));
      auto const s = run_pipeline(tt).stats_;
      c.check(s.after_uturn_ < s.initial_ && s.after_reduction_ < s.after_uturn_,
              [&] {
                return fmt::format("parallel-lines seed {}: {} -> {} -> {}", seed,
                                   s.initial_, s.after_uturn_, s.after_reduction_);
              });
    }
    for (auto k = 0U; k != instances_.size(); ++k) {
      auto const& in = instances_[k];
      auto const sizes = std::array{in.initial_.size(), in.uturn_.size(),
                                    in.reduced_.size()};
      for (auto i = 0U; i != 3U; ++i) {
        totals[i] += sizes[i];
      }
      c.check(sizes[0] >= sizes[1] && sizes[1] >= sizes[2], [&] {
        return fmt::format("instance {}: {} -> {} -> {}", k + 1U, sizes[0], sizes[1],
                           sizes[2]);
      });
    }
    c.report(fmt::format(
        "parallel-lines 10 seeds strict; random instances {} -> {} -> {} transfers "
        "({:.0f}% removed)",
        totals[0], totals[1], totals[2],
        100.0 * (1.0 - static_cast<double>(totals[2]) /
                           static_cast<double>(std::max<std::size_t>(totals[0], 1U)))));
    results_.push_back(c);
  }

  // 5: thread count does not change the artifact bytes.
  void determinism() {
    auto c = criterion{5U, "parallel determinism"};
    auto check = [&](timetable const& tt, std::string const& label) {
      auto first = std::vector<std::byte>{};
      for (auto const threads : {1U, 4U, 8U}) {
        auto opt = pipeline_options{};
        opt.threads_ = threads;
        auto const blob = serialize(run_pipeline(tt, opt).transfers_, tt.digest());
        if (threads == 1U) {
          first = blob;
        } else {
          c.check(blob == first, [&] {
            return fmt::format("{}: {} threads differ", label, threads);
          });
        }
      }
    };
    for (auto k = 0U; k != instances_.size(); ++k) {
      check(instances_[k].tt_, fmt::format("instance {}", k + 1U));
    }
    for (auto seed = 1U; seed <= 5U; ++seed) {
      check(to_timetable(generate_instance(seed, instance_profile::kParallelLines)),
            fmt::format("parallel-lines {}", seed));
    }
    auto opt = generator_options{};
    opt.grid_n_ = 16U;
    check(to_timetable(generate_instance(1U, instance_profile::kGrid, opt)), "grid 16");
    c.report(fmt::format("{} comparisons, {} differ", c.checks_, c.failures_));
    results_.push_back(c);
  }

  // 7 and 8: pruning and loop structure do not change answers.
  void variants() {
    auto c7 = criterion{7U, "pruning neutrality"};
    auto c8 = criterion{8U, "loop-splitting equivalence"};
    auto scanned_on = std::uint64_t{0U};
    auto scanned_off = std::uint64_t{0U};
    auto no_prune = query_options{};
    no_prune.prune_ = false;
    auto single = query_options{};
    single.loop_ = loop_mode::kSingleLoop;
    for (auto k = 0U; k != instances_.size(); ++k) {
      auto const& in = instances_[k];
      auto a = query_context{in.engine_};
      auto b = query_context{in.engine_};
      for (auto const& q : ea_queries_[k]) {
        auto const r = entries(a.earliest_arrival(q.src_, q.tgt_, q.time_));
        scanned_on += a.stats().entries_scanned_;

        auto const s = entries(b.earliest_arrival(q.src_, q.tgt_, q.time_, single));
        c8.check(r == s && std::ranges::equal(a.queue(), b.queue()), [&] {
          return fmt::format("instance {} query {}->{}: {} vs {}", k + 1U,
                             to_idx(q.src_), to_idx(q.tgt_), show(r), show(s));
        });

        auto const u = entries(b.earliest_arrival(q.src_, q.tgt_, q.time_, no_prune));
        scanned_off += b.stats().entries_scanned_;
        c7.check(r == u, [&] {
          return fmt::format("instance {} query {}->{}: {} vs {}", k + 1U,
                             to_idx(q.src_), to_idx(q.tgt_), show(r), show(u));
        });
      }
    }
    c7.report(fmt::format("{} queries, {} mismatches; entries scanned {} pruned vs "
                          "{} unpruned",
                          c7.checks_, c7.failures_, scanned_on, scanned_off));
    c8.report(fmt::format("{} queries, {} mismatches in results or queues",
                          c8.checks_, c8.failures_));
    results_.push_back(c7);
    results_.push_back(c8);
  }

  // 9: grid(100) timings, written to a CSV; never gating.
  void performance() {
    auto c = criterion{9U, "performance smoke, grid(100)"};
    c.gating_ = false;
    auto opt = generator_options{};
    opt.grid_n_ = 100U;
    auto const tt = to_timetable(generate_instance(1U, instance_profile::kGrid, opt));

    auto popt = pipeline_options{};
    popt.threads_ = 8U;
    auto start = clock::now();
    auto const pipeline = run_pipeline(tt, popt);
    auto const preprocessing_s = seconds_since(start);
    auto const e = engine{tt, pipeline.transfers_};
    auto ctx = query_context{e};

    auto rng = std::mt19937_64{99U};
    auto stop = std::uniform_int_distribution<std::uint32_t>{
        0U, static_cast<std::uint32_t>(tt.n_stops() - 1U)};
    auto time = std::uniform_int_distribution<rtime>{0, kSecondsPerDay - 1};
    auto const median = [](std::vector<double> v) {
      std::ranges::sort(v);
      return v.empty() ? 0.0 : v[v.size() / 2U];
    };

    auto ea_ms = std::vector<double>{};
    for (auto i = 0U; i != 200U; ++i) {
      auto const src = stop_id{stop(rng)};
      auto const tgt = stop_id{stop(rng)};
      auto const departure = time(rng);
      start = clock::now();
      ctx.earliest_arrival(src, tgt, departure);
      ea_ms.push_back(1e3 * seconds_since(start));
    }
    auto profile_ms = std::vector<double>{};
    for (auto i = 0U; i != 10U; ++i) {
      auto const src = stop_id{stop(rng)};
      auto const tgt = stop_id{stop(rng)};
      start = clock::now();
      ctx.profile(src, tgt, 0, kSecondsPerDay - 1);
      profile_ms.push_back(1e3 * seconds_since(start));
    }

    auto const ea = median(ea_ms);
    auto const profile = median(profile_ms);
    c.check(ea < 50.0, [&] { return fmt::format("median EA {:.2f} ms", ea); });
    c.check(profile < 1000.0,
            [&] { return fmt::format("median profile {:.1f} ms", profile); });
    c.check(preprocessing_s < 30.0, [&] {
      return fmt::format("preprocessing {:.1f} s", preprocessing_s);
    });

    auto const csv = out_dir_ / "acceptance_perf.csv";
    auto f = std::ofstream{csv};
    fmt::print(f,
               "stops,trips,stop_times,transfers,threads,hardware_threads,"
               "preprocessing_s,ea_queries,median_ea_ms,profile_queries,"
               "median_profile_ms\n");
    fmt::print(f, "{},{},{},{},8,{},{:.3f},{},{:.3f},{},{:.3f}\n", tt.n_stops(),
               tt.n_trips(), tt.n_stop_times(), pipeline.transfers_.size(),
               std::thread::hardware_concurrency(), preprocessing_s, ea_ms.size(),
               ea, profile_ms.size(), profile);
    c.report(fmt::format(
        "preprocessing {:.2f} s ({} hardware threads), median EA {:.2f} ms, median "
        "full-day profile {:.1f} ms; written to {}",
        preprocessing_s, std::thread::hardware_concurrency(), ea, profile,
        csv.string()));
    results_.push_back(c);
  }

  // 10: geo-rank CSV shape and target selection on grid(32).
  void georank() {
    auto c = criterion{10U, "geo-rank harness"};
    auto const dir = out_dir_ / "acceptance_grid32";
    std::filesystem::remove_all(dir);
    auto sink = std::ostringstream{};
    auto gen = cli::generate_args{};
    gen.out_ = dir / "feed";
    gen.profile_ = instance_profile::kGrid;
    gen.generator_.grid_n_ = 32U;
    c.check(cli::cmd_generate(gen, sink, std::cerr) == cli::kOk,
            [] { return std::string{"generate failed"}; });
    auto build = cli::build_args{};
    build.feed_ = gen.out_;
    build.out_ = dir / "artifact.tbr";
    c.check(cli::cmd_build(build, sink, std::cerr) == cli::kOk,
            [] { return std::string{"build failed"}; });

    auto args = cli::georank_args{};
    args.data_.feed_ = gen.out_;
    args.data_.artifact_ = build.out_;
    args.queries_ = 25U;
    args.seed_ = 2024U;
    auto out = std::ostringstream{};
    c.check(cli::cmd_georank(args, out, std::cerr) == cli::kOk,
            [] { return std::string{"georank failed"}; });

    auto const tt = to_timetable(parse_feed(gen.out_));
    auto const m = tt.n_stops() - 1U;
    auto const max_rank =
        static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(m))));
    auto const n_ranks = max_rank - args.min_rank_ + 1U;

    auto lines = std::istringstream{out.str()};
    auto line = std::string{};
    std::getline(lines, line);
    c.check(line == "source,rank,target,target_position,clamped,departure,time_us,"
                    "results",
            [&] { return "bad header: " + line; });

    auto const dist = [&](stop_id const a, stop_id const b) {
      auto const& p = tt.stop(a);
      auto const& q = tt.stop(b);
      auto const r = std::numbers::pi / 180.0;
      auto const x = std::sin(*p.lat_ * r) * std::sin(*q.lat_ * r) +
                     std::cos(*p.lat_ * r) * std::cos(*q.lat_ * r) *
                         std::cos((*q.lon_ - *p.lon_) * r);
      return 6'371'000.0 * std::acos(std::clamp(x, -1.0, 1.0));
    };

    auto rows = 0U;
    auto clamped_rows = 0U;
    for (auto q = 0U; q != args.queries_; ++q) {
      auto src = std::optional<stop_id>{};
      auto sorted = std::vector<double>{};
      for (auto r = args.min_rank_; r <= max_rank; ++r) {
        if (!std::getline(lines, line)) {
          c.check(false, [] { return std::string{"missing rows"}; });
          break;
        }
        ++rows;
        auto cells = std::vector<std::string>{};
        auto ss = std::istringstream{line};
        for (auto cell = std::string{}; std::getline(ss, cell, ',');) {
          cells.push_back(cell);
        }
        if (cells.size() != 8U) {
          c.check(false, [&] { return "malformed row: " + line; });
          continue;
        }
        auto const s = tt.find_stop(cells[0]);
        auto const t = tt.find_stop(cells[2]);
        if (!s.has_value() || !t.has_value() || (src.has_value() && *src != *s)) {
          c.check(false, [&] { return "bad stops in row: " + line; });
          continue;
        }
        if (!src.has_value()) {
          src = s;
          for (auto p = 0U; p != tt.n_stops(); ++p) {
            if (stop_id{p} != *s) {
              sorted.push_back(dist(*s, stop_id{p}));
            }
          }
          std::ranges::sort(sorted);
        }
        auto const wanted = std::size_t{1U} << r;
        auto const clamped = wanted > m;
        auto const position = clamped ? m : wanted;
        clamped_rows += clamped ? 1U : 0U;
        c.check(cells[1] == std::to_string(r) &&
                    cells[3] == std::to_string(position) &&
                    cells[4] == (clamped ? "1" : "0") && std::stod(cells[6]) > 0.0,
                [&] { return "unexpected rank fields: " + line; });
        c.check(std::abs(dist(*s, *t) - sorted[position - 1U]) < 1e-3,
                [&] { return "target is not at the expected distance: " + line; });
      }
    }
    c.check(!std::getline(lines, line), [] { return std::string{"extra rows"}; });
    c.check(rows == args.queries_ * n_ranks,
            [&] { return fmt::format("{} rows", rows); });
    c.report(fmt::format("{} sources x ranks {}..{} = {} rows, {} clamped, {} failed "
                         "checks",
                         args.queries_, args.min_rank_, max_rank, rows, clamped_rows,
                         c.failures_));
    results_.push_back(c);
  }
};

}  // namespace

int main(int argc, char** argv) {
  auto s = suite{};
  s.out_dir_ = argc > 1 ? std::filesystem::path{argv[1]}
                        : std::filesystem::current_path();
  auto const start = clock::now();
  s.setup();
  s.oracle_ea();
  s.oracle_profile_check();
  s.soundness();
  s.effectiveness();
  s.determinism();
  s.variants();
  s.performance();
  s.georank();

  std::ranges::sort(s.results_, {}, &criterion::id_);
  auto failed = 0U;
  fmt::print("\nsummary ({:.1f} s):\n", seconds_since(start));
  for (auto const& c : s.results_) {
    fmt::print("  criterion {}: {}\n", c.id_,
               !c.gating_ ? "REPORTED" : (c.pass_ ? "PASS" : "FAIL"));
    failed += c.gating_ && !c.pass_ ? 1U : 0U;
  }
  return failed == 0U ? 0 : 1;
}
