#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solesense/error.hpp"
#include "solesense/units.hpp"

namespace solesense {

// Wire layout, little-endian:
//   0  magic 'S' 'L'        2
//   2  version              1
//   3  device_id            1
//   4  sequence u32         4
//   8  timestamp_ms u64     8
//  16  counts 5 x u16      10  (canonical channel order)
//  26  crc16 CCITT-FALSE    2  over bytes 0..25
inline constexpr std::size_t kFrameSize = 28;
inline constexpr std::size_t kCrcOffset = 26;
inline constexpr std::uint8_t kMagic0 = 0x53;
inline constexpr std::uint8_t kMagic1 = 0x4C;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7332;

struct TelemetryFrame {
  std::uint8_t device_id = 0;
  std::uint32_t sequence = 0;
  std::uint64_t timestamp_ms = 0;
  ChannelArray<std::uint16_t> counts{};

  bool operator==(const TelemetryFrame&) const = default;
};

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept;

FrameBytes encode(const TelemetryFrame& frame) noexcept;

enum class DecodeError { Truncated, BadMagic, BadVersion, BadCrc };

const char* to_string(DecodeError e) noexcept;

class FrameDecodeError : public Error {
 public:
  FrameDecodeError(DecodeError code, std::size_t offset);
  DecodeError code() const noexcept { return code_; }
  // Byte offset (within the decoded buffer) of the field that failed.
  std::size_t offset() const noexcept { return offset_; }

 private:
  DecodeError code_;
  std::size_t offset_;
};

// Checks magic, then CRC, then version. Throws FrameDecodeError.
TelemetryFrame decode(std::span<const std::uint8_t> bytes);

struct DecoderStats {
  std::uint64_t frames = 0;
  std::uint64_t resync_events = 0;  // corrupt regions skipped over
  std::uint64_t skipped_bytes = 0;
};

// Incremental decoder for a byte stream. After a failed frame it advances one byte at a
// time until the next magic that yields a valid frame.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<TelemetryFrame> next();
  // Remaining buffered bytes once the stream has ended count as one corrupt region.
  void finish();

  const DecoderStats& stats() const noexcept { return stats_; }
  std::size_t buffered() const noexcept { return buf_.size() - pos_; }

 private:
  void skip_byte();
  void compact();

  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  bool in_resync_ = false;
  DecoderStats stats_;
};

}  // namespace solesense
