#include "solesense/telemetry.hpp"

namespace solesense {

namespace {

template <typename T>
void put_le(std::uint8_t* out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[i]) << (8 * i));
  return v;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : data) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

FrameBytes encode(const TelemetryFrame& f) noexcept {
  FrameBytes b{};
  b[0] = kMagic0;
  b[1] = kMagic1;
  b[2] = kProtocolVersion;
  b[3] = f.device_id;
  put_le(&b[4], f.sequence);
  put_le(&b[8], f.timestamp_ms);
  for (std::size_t c = 0; c < kChannelCount; ++c) put_le(&b[16 + 2 * c], f.counts[c]);
  put_le(&b[kCrcOffset], crc16_ccitt_false(std::span(b.data(), kCrcOffset)));
  return b;
}

const char* to_string(DecodeError e) noexcept {
  switch (e) {
    case DecodeError::Truncated: return "Truncated";
    case DecodeError::BadMagic: return "BadMagic";
    case DecodeError::BadVersion: return "BadVersion";
    case DecodeError::BadCrc: return "BadCrc";
  }
  return "?";
}

FrameDecodeError::FrameDecodeError(DecodeError code, std::size_t offset)
    : Error(ErrorKind::Codec, std::string(to_string(code)) + " at byte " + std::to_string(offset)),
      code_(code),
      offset_(offset) {}

TelemetryFrame decode(std::span<const std::uint8_t> b) {
  if (b.size() < kFrameSize) throw FrameDecodeError(DecodeError::Truncated, b.size());
  if (b[0] != kMagic0) throw FrameDecodeError(DecodeError::BadMagic, 0);
  if (b[1] != kMagic1) throw FrameDecodeError(DecodeError::BadMagic, 1);
  const auto crc = get_le<std::uint16_t>(&b[kCrcOffset]);
  if (crc != crc16_ccitt_false(b.first(kCrcOffset))) {
    throw FrameDecodeError(DecodeError::BadCrc, kCrcOffset);
  }
  if (b[2] != kProtocolVersion) throw FrameDecodeError(DecodeError::BadVersion, 2);

  TelemetryFrame f;
  f.device_id = b[3];
  f.sequence = get_le<std::uint32_t>(&b[4]);
  f.timestamp_ms = get_le<std::uint64_t>(&b[8]);
  for (std::size_t c = 0; c < kChannelCount; ++c) f.counts[c] = get_le<std::uint16_t>(&b[16 + 2 * c]);
  return f;
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  compact();
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void StreamDecoder::skip_byte() {
  if (!in_resync_) {
    in_resync_ = true;
    ++stats_.resync_events;
  }
  ++pos_;
  ++stats_.skipped_bytes;
}

void StreamDecoder::compact() {
  if (pos_ > 0 && pos_ >= buf_.size() / 2) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
}

std::optional<TelemetryFrame> StreamDecoder::next() {
  while (buffered() >= kFrameSize) {
    try {
      const auto f = decode(std::span(buf_).subspan(pos_, kFrameSize));
      pos_ += kFrameSize;
      in_resync_ = false;
      ++stats_.frames;
      return f;
    } catch (const FrameDecodeError&) {
      skip_byte();
    }
  }
  return std::nullopt;
}

void StreamDecoder::finish() {
  if (buffered() > 0) {
    if (!in_resync_) ++stats_.resync_events;
    stats_.skipped_bytes += buffered();
    pos_ = buf_.size();
  }
  in_resync_ = false;
}

}  // namespace solesense
