#include "tbr/types.h"

#include <charconv>
#include <stdexcept>

#include "fmt/format.h"

#include "tbr/error.h"

namespace tbr {

namespace {

int parse_field(std::string_view const s, std::string_view const whole) {
  auto value = 0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() ||
      value < 0) {
    throw std::invalid_argument{fmt::format("bad time \"{}\"", whole)};
  }
  return value;
}

}  // namespace

rtime parse_time(std::string_view const s) {
  auto const first = s.find(':');
  auto const second =
      first == std::string_view::npos ? first : s.find(':', first + 1U);
  if (second == std::string_view::npos) {
    throw std::invalid_argument{fmt::format("bad time \"{}\"", s)};
  }
  auto const h = parse_field(s.substr(0U, first), s);
  auto const m = parse_field(s.substr(first + 1U, second - first - 1U), s);
  auto const sec = parse_field(s.substr(second + 1U), s);
  if (m >= 60 || sec >= 60 || h > 24 * 365) {
    throw std::invalid_argument{fmt::format("bad time \"{}\"", s)};
  }
  return h * 3600 + m * 60 + sec;
}

std::string format_time(rtime const t) {
  if (t == kInfTime) {
    return "inf";
  }
  auto const sign = t < 0 ? "-" : "";
  auto const a = t < 0 ? -static_cast<std::int64_t>(t) : t;
  return fmt::format("{}{:02}:{:02}:{:02}", sign, a / 3600, (a / 60) % 60,
                     a % 60);
}

feed_error::feed_error(std::string file, std::size_t const line,
                       std::string const& reason)
    : std::runtime_error{line == 0U
                             ? fmt::format("{}: {}", file, reason)
                             : fmt::format("{}:{}: {}", file, line, reason)},
      file_{std::move(file)},
      line_{line} {}

feed_error::feed_error(std::string const& reason)
    : std::runtime_error{reason} {}

artifact_error::artifact_error(reason const r, std::string const& what)
    : std::runtime_error{what}, reason_{r} {}

}  // namespace tbr
