#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbr {

// Malformed or inconsistent input data (feeds, footpath sets, trips).
class feed_error : public std::runtime_error {
public:
  // line 0: the problem is not tied to one row.
  feed_error(std::string file, std::size_t line, std::string const& reason);
  explicit feed_error(std::string const& reason);

  std::string const& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string file_;
  std::size_t line_{0U};
};

class artifact_error : public std::runtime_error {
public:
  enum class reason { kBadMagic, kVersion, kStale, kTruncated, kCorrupt };

  artifact_error(reason, std::string const& what);

  reason why() const noexcept { return reason_; }

private:
  reason reason_;
};

// Invalid query input: unknown stops, bad intervals, dangling results.
class query_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tbr
