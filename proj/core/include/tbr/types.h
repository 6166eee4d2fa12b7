#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

namespace tbr {

// Seconds since midnight of the feed's first service day. Overnight
// services keep counting past 86400.
using rtime = std::int32_t;

constexpr rtime kInfTime = std::numeric_limits<rtime>::max();
constexpr rtime kSecondsPerDay = 86400;

enum class stop_id : std::uint32_t {};
enum class line_id : std::uint32_t {};
enum class trip_id : std::uint32_t {};

// Position of a stop within a line's stop sequence. Lines are limited to
// kInfIdx - 1 stops so that kInfIdx can act as "unreached".
using stop_idx_t = std::uint16_t;
constexpr stop_idx_t kInfIdx = std::numeric_limits<stop_idx_t>::max();

#ifndef TBR_MAX_TRANSFERS
#define TBR_MAX_TRANSFERS 15
#endif

// Largest transfer count a query explores.
constexpr std::uint8_t kMaxTransfers = TBR_MAX_TRANSFERS;

template <typename E>
constexpr std::underlying_type_t<E> to_idx(E const e) noexcept {
  return static_cast<std::underlying_type_t<E>>(e);
}

// hh:mm:ss with hh >= 24 allowed. Throws std::invalid_argument.
rtime parse_time(std::string_view);

std::string format_time(rtime);

}  // namespace tbr
