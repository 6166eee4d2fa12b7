#include "tbr/feed.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fmt/format.h"

#include "tbr/error.h"

namespace fs = std::filesystem;

namespace tbr {

namespace {

// Splits one CSV record. Double-quoted fields may contain commas and
// doubled quotes.
std::vector<std::string> split_record(std::string_view const line,
                                      std::string_view const file,
                                      std::size_t const line_no) {
  auto fields = std::vector<std::string>{};
  auto cur = std::string{};
  auto quoted = false;
  auto at_field_start = true;
  for (auto i = 0U; i != line.size(); ++i) {
    auto const c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1U != line.size() && line[i + 1U] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
    } else if (c == ',') {
      fields.emplace_back(std::move(cur));
      cur.clear();
      at_field_start = true;
    } else {
      cur += c;
      at_field_start = false;
    }
  }
  if (quoted) {
    throw feed_error{std::string{file}, line_no, "unterminated quote"};
  }
  fields.emplace_back(std::move(cur));
  return fields;
}

struct csv_table {
  csv_table(std::string_view const file, std::string_view const content,
            std::vector<std::string_view> const& required)
      : file_{file} {
    auto in = std::istringstream{std::string{content}};
    auto line = std::string{};
    auto line_no = std::size_t{0U};
    auto header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (!header_seen) {
        if (line.size() >= 3U && line.starts_with("\xEF\xBB\xBF")) {
          line.erase(0U, 3U);
        }
        auto const names = split_record(line, file, line_no);
        for (auto i = 0U; i != names.size(); ++i) {
          column_.emplace(names[i], i);
        }
        for (auto const r : required) {
          if (!column_.contains(std::string{r})) {
            throw feed_error{file_, line_no,
                             fmt::format("missing column \"{}\"", r)};
          }
        }
        width_ = names.size();
        header_seen = true;
        continue;
      }
      if (line.empty()) {
        continue;
      }
      auto fields = split_record(line, file, line_no);
      if (fields.size() != width_) {
        throw feed_error{file_, line_no,
                         fmt::format("expected {} fields, got {}", width_,
                                     fields.size())};
      }
      rows_.push_back({line_no, std::move(fields)});
    }
    if (!header_seen) {
      throw feed_error{file_, 0U, "missing header row"};
    }
  }

  struct row {
    std::size_t line_;
    std::vector<std::string> fields_;
  };

  std::optional<std::size_t> col(std::string_view const name) const {
    auto const it = column_.find(std::string{name});
    return it == end(column_) ? std::nullopt : std::optional{it->second};
  }

  std::string const& get(row const& r, std::string_view const name) const {
    return r.fields_[column_.at(std::string{name})];
  }

  [[noreturn]] void fail(row const& r, std::string const& reason) const {
    throw feed_error{file_, r.line_, reason};
  }

  template <typename T>
  T number(row const& r, std::string_view const name) const {
    auto const& s = get(r, name);
    auto value = T{};
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      fail(r, fmt::format("bad {} \"{}\"", name, s));
    }
    return value;
  }

  rtime time(row const& r, std::string_view const name) const {
    try {
      return parse_time(get(r, name));
    } catch (std::invalid_argument const& e) {
      fail(r, fmt::format("{}: {}", name, e.what()));
    }
  }

  std::string file_;
  std::map<std::string, std::size_t> column_;
  std::size_t width_{0U};
  std::vector<row> rows_;
};

std::string read_file(fs::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  if (!in) {
    throw feed_error{p.filename().string(), 0U, "cannot open file"};
  }
  auto ss = std::stringstream{};
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

raw_feed parse_feed(std::string_view const stops_csv,
                    std::string_view const trips_csv,
                    std::string_view const stop_times_csv,
                    std::string_view const footpaths_csv) {
  auto feed = raw_feed{};

  auto stop_idx = std::unordered_map<std::string, std::size_t>{};
  auto const stops = csv_table{"stops.csv", stops_csv,
                               {"stop_id", "name", "lat", "lon"}};
  auto const has_change_time = stops.col("change_time").has_value();
  for (auto const& r : stops.rows_) {
    auto s = raw_stop{};
    s.id_ = stops.get(r, "stop_id");
    s.name_ = stops.get(r, "name");
    if (s.id_.empty()) {
      stops.fail(r, "empty stop_id");
    }
    if (!stops.get(r, "lat").empty() || !stops.get(r, "lon").empty()) {
      s.lat_ = stops.number<double>(r, "lat");
      s.lon_ = stops.number<double>(r, "lon");
    }
    if (has_change_time && !stops.get(r, "change_time").empty()) {
      s.change_time_ = stops.number<rtime>(r, "change_time");
      if (s.change_time_ < 0) {
        stops.fail(r, "negative change_time");
      }
    }
    if (!stop_idx.emplace(s.id_, feed.stops_.size()).second) {
      stops.fail(r, fmt::format("duplicate stop_id \"{}\"", s.id_));
    }
    feed.stops_.emplace_back(std::move(s));
  }

  auto trip_idx = std::unordered_map<std::string, std::size_t>{};
  auto const trips = csv_table{"trips.csv", trips_csv,
                               {"trip_id", "route_id", "day"}};
  for (auto const& r : trips.rows_) {
    auto t = raw_trip{};
    t.id_ = trips.get(r, "trip_id");
    t.route_id_ = trips.get(r, "route_id");
    t.day_ = trips.number<int>(r, "day");
    if (t.day_ < 0) {
      trips.fail(r, "negative day");
    }
    if (!trip_idx.emplace(t.id_, feed.trips_.size()).second) {
      trips.fail(r, fmt::format("duplicate trip_id \"{}\"", t.id_));
    }
    feed.trips_.emplace_back(std::move(t));
  }

  auto const stop_times =
      csv_table{"stop_times.csv", stop_times_csv,
                {"trip_id", "seq", "arrival", "departure", "stop_id"}};
  auto row_lines = std::vector<std::vector<std::size_t>>(feed.trips_.size());
  for (auto const& r : stop_times.rows_) {
    auto const& trip = stop_times.get(r, "trip_id");
    auto const t = trip_idx.find(trip);
    if (t == end(trip_idx)) {
      stop_times.fail(r, fmt::format("unknown trip \"{}\"", trip));
    }
    auto const& stop = stop_times.get(r, "stop_id");
    if (!stop_idx.contains(stop)) {
      stop_times.fail(r, fmt::format("unknown stop \"{}\"", stop));
    }
    auto& rt = feed.trips_[t->second];
    auto const offset = rt.day_ * kSecondsPerDay;
    rt.stop_times_.push_back(
        raw_stop_time{stop_times.number<std::uint32_t>(r, "seq"),
                      stop_times.time(r, "arrival") + offset,
                      stop_times.time(r, "departure") + offset, stop});
    row_lines[t->second].push_back(r.line_);
  }
  for (auto i = 0U; i != feed.trips_.size(); ++i) {
    auto& t = feed.trips_[i];
    auto order = std::vector<std::size_t>(t.stop_times_.size());
    for (auto k = 0U; k != order.size(); ++k) {
      order[k] = k;
    }
    std::ranges::stable_sort(order, [&](auto const a, auto const b) {
      return t.stop_times_[a].seq_ < t.stop_times_[b].seq_;
    });
    auto sorted = std::vector<raw_stop_time>{};
    auto lines = std::vector<std::size_t>{};
    for (auto const k : order) {
      sorted.push_back(t.stop_times_[k]);
      lines.push_back(row_lines[i][k]);
    }
    t.stop_times_ = std::move(sorted);

    if (t.stop_times_.size() < 2U) {
      throw feed_error{"stop_times.csv", lines.empty() ? 0U : lines.front(),
                       fmt::format("trip \"{}\" has fewer than two stop times",
                                   t.id_)};
    }
    for (auto k = 0U; k != t.stop_times_.size(); ++k) {
      auto const& st = t.stop_times_[k];
      if (k != 0U && st.seq_ == t.stop_times_[k - 1U].seq_) {
        throw feed_error{"stop_times.csv", lines[k],
                         fmt::format("trip \"{}\": duplicate seq {}", t.id_,
                                     st.seq_)};
      }
      if (st.departure_ < st.arrival_) {
        throw feed_error{"stop_times.csv", lines[k],
                         fmt::format("trip \"{}\": departure before arrival "
                                     "(non-monotone stop times)",
                                     t.id_)};
      }
      if (k != 0U && st.arrival_ < t.stop_times_[k - 1U].departure_) {
        throw feed_error{"stop_times.csv", lines[k],
                         fmt::format("trip \"{}\": arrival before previous "
                                     "departure (non-monotone stop times)",
                                     t.id_)};
      }
    }
  }

  if (!footpaths_csv.empty()) {
    auto const fps = csv_table{"footpaths.csv", footpaths_csv,
                               {"from_stop", "to_stop", "duration"}};
    auto seen = std::set<std::pair<std::string, std::string>>{};
    for (auto const& r : fps.rows_) {
      auto fp = raw_footpath{fps.get(r, "from_stop"), fps.get(r, "to_stop"),
                             fps.number<rtime>(r, "duration")};
      if (!stop_idx.contains(fp.from_)) {
        fps.fail(r, fmt::format("unknown stop \"{}\"", fp.from_));
      }
      if (!stop_idx.contains(fp.to_)) {
        fps.fail(r, fmt::format("unknown stop \"{}\"", fp.to_));
      }
      if (fp.from_ == fp.to_) {
        fps.fail(r, "footpath from a stop to itself");
      }
      if (fp.duration_ < 0) {
        fps.fail(r, "negative duration");
      }
      if (!seen.emplace(fp.from_, fp.to_).second) {
        fps.fail(r, "duplicate footpath");
      }
      feed.footpaths_.emplace_back(std::move(fp));
    }
  }

  return feed;
}

raw_feed parse_feed(fs::path const& dir) {
  auto const footpaths = dir / "footpaths.csv";
  return parse_feed(read_file(dir / "stops.csv"), read_file(dir / "trips.csv"),
                    read_file(dir / "stop_times.csv"),
                    fs::exists(footpaths) ? read_file(footpaths) : "");
}

namespace {

std::string quote(std::string const& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  auto out = std::string{"\""};
  for (auto const c : s) {
    out += c;
    if (c == '"') {
      out += '"';
    }
  }
  return out + '"';
}

void write_file(fs::path const& p, std::string const& content) {
  auto out = std::ofstream{p, std::ios::binary};
  if (!out) {
    throw feed_error{p.string(), 0U, "cannot write file"};
  }
  out << content;
}

}  // namespace

void write_feed(raw_feed const& feed, fs::path const& dir) {
  fs::create_directories(dir);

  auto stops = std::string{"stop_id,name,lat,lon,change_time\n"};
  for (auto const& s : feed.stops_) {
    stops += fmt::format("{},{},{},{},{}\n", quote(s.id_), quote(s.name_),
                         s.lat_ ? fmt::format("{}", *s.lat_) : "",
                         s.lon_ ? fmt::format("{}", *s.lon_) : "",
                         s.change_time_);
  }
  write_file(dir / "stops.csv", stops);

  auto trips = std::string{"trip_id,route_id,day\n"};
  auto stop_times = std::string{"trip_id,seq,arrival,departure,stop_id\n"};
  for (auto const& t : feed.trips_) {
    trips += fmt::format("{},{},{}\n", quote(t.id_), quote(t.route_id_), t.day_);
    auto const offset = t.day_ * kSecondsPerDay;
    for (auto const& st : t.stop_times_) {
      stop_times += fmt::format("{},{},{},{},{}\n", quote(t.id_), st.seq_,
                                format_time(st.arrival_ - offset),
                                format_time(st.departure_ - offset),
                                quote(st.stop_id_));
    }
  }
  write_file(dir / "trips.csv", trips);
  write_file(dir / "stop_times.csv", stop_times);

  auto footpaths = std::string{"from_stop,to_stop,duration\n"};
  for (auto const& fp : feed.footpaths_) {
    footpaths +=
        fmt::format("{},{},{}\n", quote(fp.from_), quote(fp.to_), fp.duration_);
  }
  write_file(dir / "footpaths.csv", footpaths);
}

footpath_mode parse_footpath_mode(std::string_view const s) {
  if (s == "strict") {
    return footpath_mode::kStrict;
  } else if (s == "closure") {
    return footpath_mode::kClosure;
  } else if (s == "permissive") {
    return footpath_mode::kPermissive;
  }
  throw std::invalid_argument{fmt::format("unknown footpath mode \"{}\"", s)};
}

std::string_view to_string(footpath_mode const m) {
  switch (m) {
    case footpath_mode::kStrict: return "strict";
    case footpath_mode::kClosure: return "closure";
    case footpath_mode::kPermissive: return "permissive";
  }
  return "?";
}

namespace {

using edge_map = std::map<std::pair<std::string, std::string>, rtime>;

edge_map to_edges(raw_feed const& feed) {
  auto edges = edge_map{};
  for (auto const& fp : feed.footpaths_) {
    edges.emplace(std::pair{fp.from_, fp.to_}, fp.duration_);
  }
  return edges;
}

// Calls report(message) for every strict-mode violation.
void check_footpaths(raw_feed const& feed,
                     std::function<void(std::string)> const& report) {
  auto const edges = to_edges(feed);
  auto change = std::unordered_map<std::string, rtime>{};
  for (auto const& s : feed.stops_) {
    change.emplace(s.id_, s.change_time_);
  }
  auto out = std::map<std::string, std::vector<std::pair<std::string, rtime>>>{};
  for (auto const& [key, d] : edges) {
    out[key.first].emplace_back(key.second, d);
  }

  for (auto const& [key, d] : edges) {
    auto const& [a, b] = key;
    auto const rev = edges.find({b, a});
    if (rev == end(edges) || rev->second != d) {
      report(fmt::format("footpath {} -> {} ({}) has no symmetric counterpart "
                         "(triple {},{},{})",
                         a, b, d, a, b, a));
    }
    for (auto const& [c, d2] : out[b]) {
      if (c == a) {
        if (change.at(a) > d + d2) {
          report(fmt::format(
              "triangle inequality violated for triple {},{},{}: change time "
              "{} > {} + {}",
              a, b, c, change.at(a), d, d2));
        }
        continue;
      }
      auto const direct = edges.find({a, c});
      if (direct == end(edges)) {
        report(fmt::format("footpaths not transitively closed for triple "
                           "{},{},{}: {} -> {} missing",
                           a, b, c, a, c));
      } else if (direct->second > d + d2) {
        report(fmt::format("triangle inequality violated for triple {},{},{}: "
                           "{} > {} + {}",
                           a, b, c, direct->second, d, d2));
      }
    }
  }
}

}  // namespace

footpath_report validate_footpaths(raw_feed feed, footpath_mode const mode) {
  auto report = footpath_report{};
  switch (mode) {
    case footpath_mode::kStrict:
      check_footpaths(feed, [](std::string msg) {
        throw feed_error{"footpaths.csv", 0U, msg};
      });
      break;

    case footpath_mode::kPermissive:
      check_footpaths(feed, [&](std::string const&) { ++report.violations_; });
      break;

    case footpath_mode::kClosure: {
      auto edges = to_edges(feed);
      auto added = edge_map{};
      for (auto const& [key, d] : edges) {
        if (!edges.contains({key.second, key.first})) {
          added.emplace(std::pair{key.second, key.first}, d);
        }
      }
      edges.insert(begin(added), end(added));

      auto adj = std::map<std::string, std::vector<std::pair<std::string, rtime>>>{};
      for (auto const& [key, d] : edges) {
        adj[key.first].emplace_back(key.second, d);
      }
      auto transitive = edge_map{};
      for (auto const& [src, _] : adj) {
        auto dist = std::map<std::string, rtime>{{src, 0}};
        using entry = std::pair<rtime, std::string>;
        auto pq = std::priority_queue<entry, std::vector<entry>, std::greater<>>{};
        pq.emplace(0, src);
        while (!pq.empty()) {
          auto const [d, s] = pq.top();
          pq.pop();
          if (d != dist[s]) {
            continue;
          }
          for (auto const& [next, w] : adj[s]) {
            auto const it = dist.find(next);
            if (it == end(dist) || d + w < it->second) {
              dist[next] = d + w;
              pq.emplace(d + w, next);
            }
          }
        }
        for (auto const& [target, d] : dist) {
          if (target != src && !edges.contains({src, target})) {
            transitive.emplace(std::pair{src, target}, d);
          }
        }
      }
      added.insert(begin(transitive), end(transitive));
      for (auto const& [key, d] : added) {
        feed.footpaths_.push_back(raw_footpath{key.first, key.second, d});
      }
      report.violations_ = added.size();
      break;
    }
  }
  report.feed_ = std::move(feed);
  return report;
}

timetable to_timetable(raw_feed const& feed) {
  auto stops = std::vector<stop_info>{};
  auto ids = std::unordered_map<std::string, stop_id>{};
  for (auto const& s : feed.stops_) {
    ids.emplace(s.id_, stop_id{static_cast<std::uint32_t>(stops.size())});
    stops.push_back(stop_info{s.id_, s.name_, s.change_time_, s.lat_, s.lon_});
  }
  auto const lookup = [&](std::string const& id) {
    auto const it = ids.find(id);
    if (it == end(ids)) {
      throw feed_error{fmt::format("unknown stop \"{}\"", id)};
    }
    return it->second;
  };

  auto footpaths = std::vector<footpath_info>{};
  for (auto const& fp : feed.footpaths_) {
    footpaths.push_back({lookup(fp.from_), lookup(fp.to_), fp.duration_});
  }

  auto trips = std::vector<trip_info>{};
  for (auto const& t : feed.trips_) {
    auto info = trip_info{};
    info.id_ = t.id_;
    for (auto const& st : t.stop_times_) {
      info.stops_.push_back(lookup(st.stop_id_));
      info.arr_.push_back(st.arrival_);
      info.dep_.push_back(st.departure_);
    }
    trips.emplace_back(std::move(info));
  }
  return timetable::build(std::move(stops), footpaths, trips);
}

}  // namespace tbr
