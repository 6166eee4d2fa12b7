#include <algorithm>
#include <random>

#include "gtest/gtest.h"

#include "tbr/error.h"
#include "tbr/query.h"

#include "../test_util.h"

using namespace tbr;
using tbr::test::hms;

namespace {

struct query_f1 : ::testing::Test {
  timetable tt_ = test::load_fixture("f1");
  transfer_set ts_ = run_pipeline(tt_).transfers_;
  engine e_{tt_, ts_};
  query_context ctx_{e_};

  stop_id s(std::string_view const id) const { return test::stop(tt_, id); }
};

struct instance {
  explicit instance(std::uint64_t const seed)
      : tt_{test::random_timetable(seed)},
        ts_{run_pipeline(tt_).transfers_},
        e_{tt_, ts_} {}

  timetable tt_;
  transfer_set ts_;
  engine e_;
};

struct query {
  stop_id src_, tgt_;
  rtime time_;
};

std::vector<query> random_queries(timetable const& tt, std::uint64_t const seed,
                                  unsigned const n) {
  auto rng = std::mt19937_64{seed};
  auto stop = std::uniform_int_distribution<std::uint32_t>{
      0U, static_cast<std::uint32_t>(tt.n_stops() - 1U)};
  auto time = std::uniform_int_distribution<rtime>{hms("06:00:00"), hms("09:00:00")};
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

oracle_options capped() {
  auto opt = oracle_options{};
  opt.max_transfers_ = kMaxTransfers;
  return opt;
}

}  // namespace

TEST_F(query_f1, earliest_arrival) {
  auto const r = ctx_.earliest_arrival(s("A"), s("D"), hms("08:00:00"));
  EXPECT_EQ(test::entries(r),
            (std::vector{pareto_entry{hms("08:00:00"), hms("08:30:00"), 0U}}));
  EXPECT_EQ(test::entries(r), oracle_pareto(tt_, s("A"), s("D"), hms("08:00:00")));
}

TEST_F(query_f1, late_departure_is_unreachable) {
  EXPECT_TRUE(ctx_.earliest_arrival(s("A"), s("D"), hms("08:01:00")).empty());
}

TEST_F(query_f1, same_source_and_target) {
  EXPECT_TRUE(ctx_.earliest_arrival(s("A"), s("A"), hms("08:00:00")).empty());
  EXPECT_TRUE(ctx_.profile(s("A"), s("A"), 0, kSecondsPerDay).empty());
}

TEST_F(query_f1, unknown_stop) {
  EXPECT_THROW(ctx_.earliest_arrival(stop_id{99U}, s("D"), 0), query_error);
  EXPECT_THROW(ctx_.profile(s("A"), stop_id{4U}, 0, 10), query_error);
}

TEST_F(query_f1, profile) {
  auto const r = ctx_.profile(s("A"), s("D"), hms("08:00:00"), hms("09:00:00"));
  EXPECT_EQ(test::entries(r),
            (std::vector{pareto_entry{hms("08:00:00"), hms("08:30:00"), 0U}}));
  EXPECT_EQ(test::entries(r), oracle_profile(tt_, s("A"), s("D"), hms("08:00:00"),
                                             hms("09:00:00")));
  EXPECT_TRUE(ctx_.profile(s("A"), s("D"), hms("09:00:00"), hms("08:00:00")).empty());
}

TEST_F(query_f1, final_walk) {
  // C is reached by leaving t1 at B and walking 120 s.
  auto const r = ctx_.earliest_arrival(s("A"), s("C"), hms("07:00:00"));
  ASSERT_EQ(r.size(), 1U);
  auto const& x = r.entries()[0];
  EXPECT_EQ(x.arrival_, hms("08:12:00"));
  EXPECT_EQ(x.transfers_, 0U);

  auto const j = ctx_.reconstruct(x);
  EXPECT_FALSE(j.initial_walk_.has_value());
  ASSERT_EQ(j.rides_.size(), 1U);
  EXPECT_EQ(j.rides_[0].trip_, test::trip(tt_, "t1"));
  EXPECT_EQ(j.rides_[0].board_, 0U);
  EXPECT_EQ(j.rides_[0].exit_, 1U);
  ASSERT_TRUE(j.final_walk_.has_value());
  EXPECT_EQ(j.final_walk_->duration_, 120);
  EXPECT_TRUE(validate_journey(tt_, s("A"), s("C"), hms("07:00:00"), j).empty());
}

TEST_F(query_f1, initial_walk) {
  // From B, u1 is the only way to A: walk to C, ride u1.
  auto const r = ctx_.earliest_arrival(s("B"), s("A"), hms("08:00:00"));
  EXPECT_EQ(test::entries(r),
            (std::vector{pareto_entry{hms("08:00:00"), hms("08:50:00"), 0U}}));
  auto const j = ctx_.reconstruct(r.entries()[0]);
  ASSERT_TRUE(j.initial_walk_.has_value());
  EXPECT_EQ(j.initial_walk_->to_, s("C"));
  EXPECT_EQ(j.initial_walk_->duration_, 120);
  EXPECT_TRUE(validate_journey(tt_, s("B"), s("A"), hms("08:00:00"), j).empty());
}

TEST_F(query_f1, dangling_result) {
  auto const r = ctx_.earliest_arrival(s("A"), s("D"), hms("08:00:00"));
  auto const x = r.entries()[0];
  EXPECT_NO_THROW(ctx_.reconstruct(x));
  ctx_.earliest_arrival(s("A"), s("C"), hms("08:00:00"));
  EXPECT_THROW(ctx_.reconstruct(x), query_error);
}

TEST_F(query_f1, relevant_departures) {
  EXPECT_EQ(relevant_departures(tt_, s("A"), hms("08:00:00"), hms("09:00:00")),
            std::vector{hms("08:00:00")});
  // t1 at B, and u1 at C behind a 120 s walk.
  EXPECT_EQ(relevant_departures(tt_, s("B"), 0, kSecondsPerDay),
            (std::vector{hms("08:14:00"), hms("08:10:00")}));
  EXPECT_EQ(relevant_departures(tt_, s("B"), hms("08:11:00"), hms("09:00:00")),
            std::vector{hms("08:14:00")});
  // D is t1's last stop; only u1 departs there.
  EXPECT_EQ(relevant_departures(tt_, s("D"), 0, kSecondsPerDay),
            std::vector{hms("08:40:00")});
}

TEST(relevant_departures, isolated_stop) {
  auto const tt = to_timetable(parse_feed(
      "stop_id,name,lat,lon,change_time\nA,,,,0\nB,,,,0\nZ,,,,0\n",
      "trip_id,route_id,day\nt,R,0\n",
      "trip_id,seq,arrival,departure,stop_id\nt,1,08:00:00,08:00:00,A\n"
      "t,2,08:05:00,08:05:00,B\n",
      ""));
  EXPECT_TRUE(relevant_departures(tt, test::stop(tt, "Z"), 0, kSecondsPerDay).empty());
}

TEST(relevant_departures, matches_oracle) {
  for (auto seed = 1U; seed != 5U; ++seed) {
    auto const tt = test::random_timetable(seed);
    for (auto s = 0U; s != tt.n_stops(); ++s) {
      EXPECT_EQ(relevant_departures(tt, stop_id{s}, hms("06:30:00"), hms("08:30:00")),
                oracle_relevant_departures(tt, stop_id{s}, hms("06:30:00"),
                                           hms("08:30:00")));
    }
  }
}

TEST(search_state, enqueue) {
  auto const tt = to_timetable(parse_feed(
      "stop_id,name,lat,lon,change_time\nA,,,,0\nB,,,,0\nC,,,,0\nD,,,,0\nE,,,,0\n",
      "trip_id,route_id,day\nt,R,0\nv,R,0\n",
      "trip_id,seq,arrival,departure,stop_id\n"
      "t,1,08:00:00,08:00:00,A\nt,2,08:01:00,08:01:00,B\nt,3,08:02:00,08:02:00,C\n"
      "t,4,08:03:00,08:03:00,D\nt,5,08:04:00,08:04:00,E\n"
      "v,1,09:00:00,09:00:00,A\nv,2,09:01:00,09:01:00,B\nv,3,09:02:00,09:02:00,C\n"
      "v,4,09:03:00,09:03:00,D\nv,5,09:04:00,09:04:00,E\n",
      ""));
  auto const t = test::trip(tt, "t");
  auto const v = test::trip(tt, "v");
  ASSERT_EQ(tt.line_of(t), tt.line_of(v));

  auto s = search_state{tt};
  EXPECT_TRUE(s.enqueue(t, 2U, 0U, kNoParent));
  EXPECT_EQ(s.queue_.back(), (queue_entry{t, 2U, 4U, 0U, kNoParent, {}}));
  EXPECT_FALSE(s.enqueue(t, 3U, 0U, kNoParent));
  EXPECT_FALSE(s.enqueue(v, 2U, 0U, kNoParent));  // later trip inherits
  EXPECT_TRUE(s.enqueue(v, 1U, 0U, 0U));
  EXPECT_EQ(s.queue_.back(), (queue_entry{v, 1U, 2U, 0U, 0U, {}}));
  EXPECT_TRUE(s.enqueue(t, 0U, 1U, 1U));
  EXPECT_EQ(s.queue_.back(), (queue_entry{t, 0U, 2U, 1U, 1U, {}}));
  EXPECT_EQ(s.reached_.get(v, 0U), 0U);

  s.reset();
  EXPECT_TRUE(s.queue_.empty());
  EXPECT_EQ(s.reached_.get(t, 0U), kInfIdx);
  EXPECT_EQ(s.reached_.get(v, 0U), kInfIdx);
}

TEST(search_state, per_level_labels) {
  auto const tt = test::random_timetable(4U);
  auto t = trip_id{0U};
  while (tt.trip_length(t) < 5U) {
    t = trip_id{to_idx(t) + 1U};
  }
  auto s = search_state{tt, true};
  EXPECT_TRUE(s.enqueue(t, 3U, 3U, kNoParent));
  for (auto n = 0U; n != 3U; ++n) {
    EXPECT_EQ(s.reached_.get(t, static_cast<std::uint8_t>(n)), kInfIdx);
  }
  EXPECT_TRUE(s.enqueue(t, 1U, 1U, kNoParent));
  EXPECT_EQ(s.reached_.get(t, 0U), kInfIdx);
  for (auto n = 1U; n != reached_labels::kLevels; ++n) {
    EXPECT_EQ(s.reached_.get(t, static_cast<std::uint8_t>(n)), 1U);
  }
  EXPECT_FALSE(s.enqueue(t, 2U, 4U, kNoParent));
  EXPECT_TRUE(s.enqueue(t, 2U, 0U, kNoParent));
  EXPECT_EQ(s.queue_.back().end_, tt.trip_length(t) - 1U);
}

TEST(result_set, dominance_and_ties) {
  auto rs = result_set{};
  EXPECT_TRUE(rs.add(result{0, 10, 1U, 0U, 0U, 0U}));
  EXPECT_FALSE(rs.add(result{0, 10, 1U, 1U, 0U, 0U}));  // tie: first stays
  EXPECT_EQ(rs.entries()[0].entry_, 0U);
  EXPECT_TRUE(rs.add(result{0, 9, 2U, 2U, 0U, 0U}));
  EXPECT_TRUE(rs.add(result{5, 12, 1U, 3U, 0U, 0U}));
  EXPECT_EQ(rs.size(), 3U);
  EXPECT_TRUE(rs.add(result{0, 9, 1U, 4U, 0U, 0U}));
  EXPECT_EQ(rs.size(), 2U);
  auto const sorted = rs.sorted();
  EXPECT_EQ(sorted[0].departure_, 5);
  EXPECT_EQ(sorted[1].entry_, 4U);
}

TEST(query, matches_oracle_on_random_instances) {
  for (auto seed = 1U; seed != 6U; ++seed) {
    auto const in = instance{seed};
    auto ctx = query_context{in.e_};
    for (auto const& q : random_queries(in.tt_, seed, 30U)) {
      auto const r = ctx.earliest_arrival(q.src_, q.tgt_, q.time_);
      EXPECT_EQ(test::entries(r),
                oracle_pareto(in.tt_, q.src_, q.tgt_, q.time_, capped()));
      for (auto const& x : r.entries()) {
        auto const problems =
            validate_journey(in.tt_, q.src_, q.tgt_, q.time_, ctx.reconstruct(x));
        EXPECT_TRUE(problems.empty()) << problems.front();
      }
    }
  }
}

TEST(query, profile_matches_oracle_on_random_instances) {
  for (auto seed = 1U; seed != 4U; ++seed) {
    auto const in = instance{seed};
    auto ctx = query_context{in.e_};
    for (auto const& q : random_queries(in.tt_, seed + 100U, 8U)) {
      auto const ldt = q.time_ + 3600;
      auto const r = ctx.profile(q.src_, q.tgt_, q.time_, ldt);
      EXPECT_EQ(test::entries(r),
                oracle_profile(in.tt_, q.src_, q.tgt_, q.time_, ldt, capped()));
      for (auto const& x : r.entries()) {
        EXPECT_TRUE(validate_journey(in.tt_, q.src_, q.tgt_, x.departure_,
                                     ctx.reconstruct(x))
                        .empty());
      }
    }
  }
}

TEST(query, single_departure_interval_equals_point_query) {
  auto const in = instance{7U};
  auto ctx = query_context{in.e_};
  for (auto const& q : random_queries(in.tt_, 7U, 40U)) {
    auto const deps =
        relevant_departures(in.tt_, q.src_, q.time_, q.time_ + 1800);
    if (deps.empty()) {
      continue;
    }
    auto const d = deps.back();
    auto const profile = test::entries(ctx.profile(q.src_, q.tgt_, d, d));
    EXPECT_EQ(profile, test::entries(ctx.earliest_arrival(q.src_, q.tgt_, d)));
  }
}

TEST(query, queue_fits_elementary_connections) {
  auto const in = instance{8U};
  auto ctx = query_context{in.e_};
  auto no_prune = query_options{};
  no_prune.prune_ = false;
  for (auto const& q : random_queries(in.tt_, 8U, 40U)) {
    ctx.earliest_arrival(q.src_, q.tgt_, q.time_, no_prune);
    EXPECT_LE(ctx.stats().max_run_entries_, in.tt_.n_elementary_connections());
    ctx.profile(q.src_, q.tgt_, q.time_, q.time_ + 7200, no_prune);
    EXPECT_LE(ctx.stats().max_run_entries_, in.tt_.n_elementary_connections());
  }
}

TEST(query, max_transfers) {
  auto const in = instance{9U};
  auto ctx = query_context{in.e_};
  for (auto const k : {0U, 1U, 2U}) {
    auto opt = query_options{};
    opt.max_transfers_ = static_cast<std::uint8_t>(k);
    auto oopt = oracle_options{};
    oopt.max_transfers_ = k;
    for (auto const& q : random_queries(in.tt_, 9U + k, 20U)) {
      auto const r = ctx.earliest_arrival(q.src_, q.tgt_, q.time_, opt);
      EXPECT_EQ(test::entries(r), oracle_pareto(in.tt_, q.src_, q.tgt_, q.time_, oopt));
      for (auto const& x : r.entries()) {
        EXPECT_LE(x.transfers_, k);
      }
    }
  }
}

TEST(query, loop_variants_and_pruning_agree) {
  auto const in = instance{10U};
  auto a = query_context{in.e_};
  auto b = query_context{in.e_};
  auto single = query_options{};
  single.loop_ = loop_mode::kSingleLoop;
  auto no_prune = query_options{};
  no_prune.prune_ = false;
  for (auto const& q : random_queries(in.tt_, 10U, 40U)) {
    auto const r = test::entries(a.earliest_arrival(q.src_, q.tgt_, q.time_));
    EXPECT_EQ(r, test::entries(b.earliest_arrival(q.src_, q.tgt_, q.time_, single)));
    EXPECT_TRUE(std::ranges::equal(a.queue(), b.queue()));
    EXPECT_EQ(r, test::entries(b.earliest_arrival(q.src_, q.tgt_, q.time_, no_prune)));
    EXPECT_GE(b.stats().entries_scanned_, a.stats().entries_scanned_);

    auto const p = test::entries(a.profile(q.src_, q.tgt_, q.time_, q.time_ + 3600));
    EXPECT_EQ(p, test::entries(
                     b.profile(q.src_, q.tgt_, q.time_, q.time_ + 3600, single)));
    EXPECT_TRUE(std::ranges::equal(a.queue(), b.queue()));
    EXPECT_EQ(p, test::entries(
                     b.profile(q.src_, q.tgt_, q.time_, q.time_ + 3600, no_prune)));
  }
}

TEST(query, engine_rejects_foreign_transfer_set) {
  auto const a = test::random_timetable(1U);
  auto const b = test::load_fixture("f1");
  auto const ts = run_pipeline(b).transfers_;
  EXPECT_THROW((engine{a, ts}), query_error);
}

TEST(query, direct_walk_dominates) {
  // t: X -> Y, u: Y -> X -> Z turns back to X, footpath X <-> T. Riding
  // t and u back to X and walking on to T never beats walking right away.
  auto const tt = to_timetable(parse_feed(
      "stop_id,name,lat,lon,change_time\nX,,,,30\nY,,,,30\nZ,,,,30\nT,,,,30\n",
      "trip_id,route_id,day\nt,R1,0\nu,R2,0\nv,R3,0\n",
      "trip_id,seq,arrival,departure,stop_id\n"
      "t,1,08:00:00,08:00:00,X\nt,2,08:04:00,08:04:00,Y\n"
      "u,1,08:05:00,08:05:00,Y\nu,2,08:09:00,08:09:00,X\nu,3,08:15:00,08:15:00,Z\n"
      "v,1,08:01:00,08:01:00,X\nv,2,08:02:00,08:02:00,T\n",
      "from_stop,to_stop,duration\nX,T,180\nT,X,180\n"));
  auto const x = test::stop(tt, "X");
  auto const t = test::stop(tt, "T");

  auto const initial = compute_initial_transfers(tt);
  auto const uturn = remove_uturn_transfers(tt, initial);
  EXPECT_EQ(uturn.size() + 1U, initial.size());  // t@Y -> u@Y is a U-turn

  for (auto const* ts : {&initial, &uturn}) {
    auto const e = engine{tt, *ts};
    auto ctx = query_context{e};
    // v arrives before the walk would; the U-turn journey would reach T
    // at 08:12 with one transfer but the walk arrives at 08:03.
    EXPECT_EQ(test::entries(ctx.earliest_arrival(x, t, hms("08:00:00"))),
              (std::vector{pareto_entry{hms("08:00:00"), hms("08:02:00"), 0U}}));
    EXPECT_TRUE(ctx.earliest_arrival(x, t, hms("08:01:30")).empty());
    EXPECT_EQ(test::entries(ctx.earliest_arrival(x, test::stop(tt, "Z"),
                                                 hms("08:00:00"))),
              (std::vector{pareto_entry{hms("08:00:00"), hms("08:15:00"), 0U}}));
    EXPECT_EQ(test::entries(ctx.profile(x, t, hms("07:00:00"), hms("09:00:00"))),
              (std::vector{pareto_entry{hms("08:01:00"), hms("08:02:00"), 0U}}));
  }
  EXPECT_EQ(oracle_pareto(tt, x, t, hms("08:00:00")),
            (std::vector{pareto_entry{hms("08:00:00"), hms("08:02:00"), 0U}}));
  EXPECT_TRUE(oracle_pareto(tt, x, t, hms("08:01:30")).empty());
}
