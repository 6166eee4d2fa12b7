#include "tbr/oracle/generator.h"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fmt/format.h"

namespace tbr {

namespace {

constexpr auto kLatOrigin = 48.0;
constexpr auto kLonOrigin = 11.0;
constexpr auto kLatStep = 0.0045;  // about 500 m
constexpr auto kLonStep = 0.0068;  // about 500 m at this latitude
constexpr auto kWalkPerCell = rtime{60};

struct cell {
  int x_, y_;
};

int manhattan(cell const a, cell const b) {
  return std::abs(a.x_ - b.x_) + std::abs(a.y_ - b.y_);
}

raw_stop make_stop(std::string id, cell const c, rtime const change_time) {
  auto s = raw_stop{};
  s.name_ = id;
  s.id_ = std::move(id);
  s.lat_ = kLatOrigin + c.y_ * kLatStep;
  s.lon_ = kLonOrigin + c.x_ * kLonStep;
  s.change_time_ = change_time;
  return s;
}

// Departure at the first stop, then per segment: running time, then dwell.
raw_trip make_trip(std::string id, std::string route,
                   std::vector<std::string> const& stops, rtime const start,
                   std::vector<rtime> const& run, std::vector<rtime> const& dwell) {
  auto t = raw_trip{};
  t.id_ = std::move(id);
  t.route_id_ = std::move(route);
  auto time = start;
  for (auto i = 0U; i != stops.size(); ++i) {
    auto st = raw_stop_time{i, time, time, stops[i]};
    if (i != 0U) {
      st.arrival_ = time;
      st.departure_ = i + 1U == stops.size() ? time : time + dwell[i];
    }
    time = st.departure_ + (i + 1U < stops.size() ? run[i] : 0);
    t.stop_times_.push_back(std::move(st));
  }
  return t;
}

// Complete, symmetric footpath graph over a cluster with Manhattan
// durations: closed under composition and metric by construction.
void add_cluster(raw_feed& feed, std::vector<std::size_t> const& members,
                 std::vector<cell> const& cells) {
  for (auto const a : members) {
    for (auto const b : members) {
      if (a != b) {
        feed.footpaths_.push_back(raw_footpath{
            feed.stops_[a].id_, feed.stops_[b].id_,
            kWalkPerCell * manhattan(cells[a], cells[b])});
      }
    }
  }
}

raw_feed random_instance(std::mt19937_64& rng, generator_options const& opt) {
  auto const uniform = [&](int const lo, int const hi) {
    return std::uniform_int_distribution<int>{lo, hi}(rng);
  };
  auto const chance = [&](double const p) {
    return std::bernoulli_distribution{p}(rng);
  };

  auto const side = std::max(8, static_cast<int>(opt.stops_ / 2U));
  auto all_cells = std::vector<cell>{};
  for (auto y = 0; y != side; ++y) {
    for (auto x = 0; x != side; ++x) {
      all_cells.push_back({x, y});
    }
  }
  std::ranges::shuffle(all_cells, rng);
  auto const cells =
      std::vector<cell>(begin(all_cells), begin(all_cells) + opt.stops_);

  auto feed = raw_feed{};
  for (auto i = 0U; i != opt.stops_; ++i) {
    // Every footpath lasts at least kWalkPerCell, so change times up to
    // twice that keep ch(a) <= fp(a,b) + fp(b,a).
    auto const ch = static_cast<rtime>(30 * uniform(0, 4));
    feed.stops_.push_back(make_stop(fmt::format("s{}", i), cells[i], ch));
  }

  // Clusters of two or three nearby stops.
  auto clustered = std::vector<bool>(opt.stops_, false);
  for (auto i = 0U; i != opt.stops_; ++i) {
    if (clustered[i] || !chance(0.4)) {
      continue;
    }
    auto members = std::vector<std::size_t>{i};
    for (auto j = 0U; j != opt.stops_ && members.size() < 3U; ++j) {
      if (j != i && !clustered[j] && manhattan(cells[i], cells[j]) <= 3 &&
          std::ranges::all_of(members, [&](std::size_t const m) {
            return manhattan(cells[m], cells[j]) <= 4;
          })) {
        members.push_back(j);
      }
    }
    if (members.size() > 1U) {
      for (auto const m : members) {
        clustered[m] = true;
      }
      add_cluster(feed, members, cells);
    }
  }

  auto const per_route = std::max(1U, opt.max_trips_ / std::max(1U, opt.routes_));
  auto order = std::vector<std::size_t>(opt.stops_);
  std::iota(begin(order), end(order), 0U);
  for (auto r = 0U; r != opt.routes_; ++r) {
    // Stop sequence: a random start, then repeatedly one of the nearest
    // unused stops, so routes resemble real ones and intersect.
    auto const length = std::min<std::size_t>(uniform(3, 8), opt.stops_);
    auto seq = std::vector<std::size_t>{static_cast<std::size_t>(
        uniform(0, static_cast<int>(opt.stops_) - 1))};
    while (seq.size() < length) {
      auto const last = cells[seq.back()];
      std::ranges::sort(order, [&](std::size_t const a, std::size_t const b) {
        return std::pair{manhattan(cells[a], last), a} <
               std::pair{manhattan(cells[b], last), b};
      });
      auto candidates = std::vector<std::size_t>{};
      for (auto const s : order) {
        if (std::ranges::find(seq, s) == end(seq)) {
          candidates.push_back(s);
        }
        if (candidates.size() == 4U) {
          break;
        }
      }
      seq.push_back(candidates[static_cast<std::size_t>(
          uniform(0, static_cast<int>(candidates.size()) - 1))]);
    }
    // Some routes return to their first stop, so stops repeat on a line.
    if (seq.size() >= 3U && chance(0.15)) {
      seq.push_back(seq.front());
    }
    auto stops = std::vector<std::string>{};
    auto run = std::vector<rtime>{};
    for (auto i = 0U; i != seq.size(); ++i) {
      stops.push_back(feed.stops_[seq[i]].id_);
      if (i + 1U != seq.size()) {
        run.push_back(60 * std::max(1, manhattan(cells[seq[i]], cells[seq[i + 1U]])) +
                      30 * uniform(0, 2));
      }
    }

    auto const n_trips = std::max<int>(1, uniform(static_cast<int>(per_route / 2U),
                                                  static_cast<int>(per_route * 3U / 2U)));
    auto start = static_cast<rtime>(6 * 3600 + 60 * uniform(0, 60));
    for (auto k = 0; k != n_trips; ++k) {
      if (feed.trips_.size() == opt.max_trips_) {
        break;
      }
      // Occasional slower segments and dwells let trips overtake, which
      // splits a route into several lines.
      auto trip_run = run;
      for (auto& x : trip_run) {
        if (chance(0.15)) {
          x += 30 * uniform(1, 6);
        }
      }
      auto dwell = std::vector<rtime>(seq.size(), 0);
      for (auto& d : dwell) {
        d = chance(0.3) ? 30 : 0;
      }
      feed.trips_.push_back(make_trip(fmt::format("r{}_t{}", r, k),
                                      fmt::format("r{}", r), stops, start,
                                      trip_run, dwell));
      start += static_cast<rtime>(60 * uniform(3, 20));
    }
  }
  return feed;
}

raw_feed grid_instance(std::mt19937_64& rng, generator_options const& opt) {
  auto const n = static_cast<int>(opt.grid_n_);
  if (n < 2) {
    throw std::invalid_argument{"grid needs at least 2 x 2 stops"};
  }
  auto const id = [](int const x, int const y) {
    return fmt::format("g{}_{}", x, y);
  };
  auto feed = raw_feed{};
  for (auto y = 0; y != n; ++y) {
    for (auto x = 0; x != n; ++x) {
      feed.stops_.push_back(make_stop(id(x, y), {x, y}, 60));
    }
  }

  constexpr auto kSegment = rtime{120};
  auto const first = rtime{5 * 3600};
  auto const last = rtime{23 * 3600};
  auto offset = std::uniform_int_distribution<rtime>{
      0, std::max<rtime>(opt.headway_ / 60 - 1, 0)};
  auto route = 0U;
  auto const add_route = [&](std::vector<std::string> const& stops) {
    auto const run = std::vector<rtime>(stops.size() - 1U, kSegment);
    auto const dwell = std::vector<rtime>(stops.size(), 0);
    auto k = 0U;
    for (auto start = first + 60 * offset(rng); start <= last;
         start += opt.headway_) {
      feed.trips_.push_back(make_trip(fmt::format("l{}_t{}", route, k++),
                                      fmt::format("l{}", route), stops, start,
                                      run, dwell));
    }
    ++route;
  };
  for (auto a = 0; a != n; ++a) {
    auto row = std::vector<std::string>{};
    auto col = std::vector<std::string>{};
    for (auto b = 0; b != n; ++b) {
      row.push_back(id(b, a));
      col.push_back(id(a, b));
    }
    add_route(row);
    add_route(col);
    std::ranges::reverse(row);
    std::ranges::reverse(col);
    add_route(row);
    add_route(col);
  }
  return feed;
}

// Each copy holds two motifs on private stops:
//  - U-turn: t runs S A X, u runs X A E. The transfer t@X -> u@X is a
//    U-turn since u can already be boarded at A.
//  - parallel: t runs P1 P2 P3 P4, u runs P2 P3 Z shortly behind t. Both
//    t@P2 -> u@P2 and t@P3 -> u@P3 are feasible; only the later one
//    improves anything.
raw_feed parallel_instance(std::mt19937_64& rng, generator_options const& opt) {
  auto feed = raw_feed{};
  auto const runs = std::uniform_int_distribution<int>{1, 3}(rng);
  auto shift = std::uniform_int_distribution<int>{0, 59};
  for (auto c = 0U; c != opt.motifs_; ++c) {
    auto const name = [&](std::string_view const s) {
      return fmt::format("m{}_{}", c, s);
    };
    auto const base_x = static_cast<int>(c) * 6;
    auto const stop = [&](std::string_view const s, int const dx,
                          int const dy) {
      feed.stops_.push_back(make_stop(name(s), {base_x + dx, dy}, 60));
    };
    stop("S", 0, 0);
    stop("A", 1, 0);
    stop("X", 2, 0);
    stop("E", 1, 1);
    stop("P1", 0, 3);
    stop("P2", 1, 3);
    stop("P3", 2, 3);
    stop("P4", 3, 3);
    stop("Z", 2, 4);

    auto const base = static_cast<rtime>(7 * 3600 + 60 * shift(rng));
    auto const zero = [](std::size_t const n) {
      return std::vector<rtime>(n, 0);
    };
    for (auto k = 0; k != runs; ++k) {
      auto const t0 = base + k * 1800;
      auto const id = [&](std::string_view const r) {
        return fmt::format("m{}_{}_{}", c, r, k);
      };
      // t: S 0:00, A 2:00, X 4:00; u: X 5:00, A 7:00, E 12:00
      feed.trips_.push_back(make_trip(id("uturn_t"), name("uturn_t"),
                                      {name("S"), name("A"), name("X")}, t0,
                                      {120, 120}, zero(3)));
      feed.trips_.push_back(make_trip(id("uturn_u"), name("uturn_u"),
                                      {name("X"), name("A"), name("E")},
                                      t0 + 300, {120, 300}, zero(3)));
      // t: P1 0:00, P2 5:00, P3 10:00, P4 15:00; u: P2 7:00, P3 12:00, Z 20:00
      feed.trips_.push_back(make_trip(
          id("par_t"), name("par_t"),
          {name("P1"), name("P2"), name("P3"), name("P4")}, t0, {300, 300, 300},
          zero(4)));
      feed.trips_.push_back(make_trip(id("par_u"), name("par_u"),
                                      {name("P2"), name("P3"), name("Z")},
                                      t0 + 420, {300, 480}, zero(3)));
    }
  }
  return feed;
}

}  // namespace

instance_profile parse_instance_profile(std::string_view const s) {
  if (s == "random") {
    return instance_profile::kRandom;
  }
  if (s == "grid") {
    return instance_profile::kGrid;
  }
  if (s == "parallel-lines") {
    return instance_profile::kParallelLines;
  }
  throw std::invalid_argument{fmt::format("unknown instance profile '{}'", s)};
}

std::string_view to_string(instance_profile const p) {
  switch (p) {
    case instance_profile::kRandom: return "random";
    case instance_profile::kGrid: return "grid";
    case instance_profile::kParallelLines: return "parallel-lines";
  }
  return "?";
}

raw_feed generate_instance(std::uint64_t const seed,
                           instance_profile const profile,
                           generator_options const& opt) {
  auto rng = std::mt19937_64{seed};
  switch (profile) {
    case instance_profile::kRandom: return random_instance(rng, opt);
    case instance_profile::kGrid: return grid_instance(rng, opt);
    case instance_profile::kParallelLines: return parallel_instance(rng, opt);
  }
  throw std::invalid_argument{"unknown instance profile"};
}

}  // namespace tbr
