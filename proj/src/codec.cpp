#include "smartpark/codec.hpp"

#include <array>
#include <bit>
#include <string>

#include "smartpark/errors.hpp"

namespace smartpark::codec {
namespace {

class BitWriter {
public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t value, unsigned width) {
    for (unsigned i = width; i-- > 0;) {
      if (bit_ == 0) out_.push_back(0);
      if ((value >> i) & 1U) out_.back() |= static_cast<std::uint8_t>(0x80U >> bit_);
      bit_ = (bit_ + 1) & 7U;
    }
  }

private:
  std::vector<std::uint8_t>& out_;
  unsigned bit_{0};
};

class BitReader {
public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t get(unsigned width) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i, ++pos_) {
      const auto byte = in_[pos_ / 8];
      v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1U);
    }
    return v;
  }

  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_{0};
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

std::uint32_t pack_record(const SensorRecord& r) {
  std::uint32_t v = (std::uint32_t{r.sensor_id} << 10) | (std::uint32_t{r.offset_s} << 3) |
                    (std::uint32_t{r.state} << 2) | (std::uint32_t{r.watchdog} << 1);
  const bool odd = (std::popcount(v) & 1) != 0;
  return v | (odd ? 0U : 1U);
}

constexpr std::array<std::uint16_t, 256> kCrcTable = [] {
  std::array<std::uint16_t, 256> t{};
  for (unsigned n = 0; n < 256; ++n) {
    auto crc = static_cast<std::uint16_t>(n << 8);
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000U) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021U)
                            : static_cast<std::uint16_t>(crc << 1);
    }
    t[n] = crc;
  }
  return t;
}();

std::uint16_t crc_update(std::uint16_t crc, std::uint8_t byte) noexcept {
  return static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[(crc >> 8) ^ byte]);
}

// Record count implied by a total frame length, if any count yields exactly
// that length.
bool count_for_length(std::size_t length, std::size_t& count) {
  if (length < kHeaderBytes + kChecksumBytes) return false;
  const std::size_t payload = length - kHeaderBytes - kChecksumBytes;
  // payload_bytes(c) = ceil(5c/2): the candidate is floor(2p/5) or the next one.
  for (std::size_t c = (2 * payload) / 5; c <= (2 * payload) / 5 + 1; ++c) {
    if (payload_bytes(c) == payload && c <= 0xFFFF) {
      count = c;
      return true;
    }
  }
  return false;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept {
  std::uint16_t crc = 0xFFFF;
  for (auto b : bytes) crc = crc_update(crc, b);
  return crc;
}

void append_encoded(const UplinkBatch& batch, std::vector<std::uint8_t>& out) {
  if (batch.records.size() > 0xFFFF) {
    throw EncodingError("record_count " + std::to_string(batch.records.size()) +
                        " exceeds 16-bit field");
  }
  for (const auto& r : batch.records) {
    if (r.sensor_id > kMaxSensorId) {
      throw EncodingError("sensor_id " + std::to_string(r.sensor_id) + " exceeds 10 bits");
    }
    if (r.offset_s > kMaxOffset) {
      throw EncodingError("timestamp offset " + std::to_string(r.offset_s) + " exceeds 7 bits");
    }
  }

  const std::size_t start = out.size();
  put_u16(out, kMagic);
  out.push_back(kVersion);
  put_u16(out, batch.ap_id);
  put_u32(out, batch.batch_epoch);
  put_u16(out, static_cast<std::uint16_t>(batch.records.size()));
  out.push_back(0);  // reserved

  BitWriter writer(out);
  for (const auto& r : batch.records) writer.put(pack_record(r), kRecordBits);

  const auto crc = crc16_ccitt_false(std::span(out).subspan(start));
  put_u16(out, crc);
}

std::vector<std::uint8_t> encode(const UplinkBatch& batch) {
  std::vector<std::uint8_t> out;
  append_encoded(batch, out);
  return out;
}

std::size_t peek_frame_length(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw TruncationError("frame shorter than " + std::to_string(kHeaderBytes) +
                          "-byte header (" + std::to_string(bytes.size()) + " bytes)");
  }
  return frame_bytes(get_u16(bytes, 9));
}

UplinkBatch decode(std::span<const std::uint8_t> bytes) {
  const std::size_t expected = peek_frame_length(bytes);

  if (bytes.size() != expected) {
    // A corrupted record_count also changes the expected length. Tell that
    // apart from a short read by checking whether the frame is valid under
    // the count its actual length implies.
    std::size_t implied = 0;
    if (count_for_length(bytes.size(), implied)) {
      std::uint16_t crc = 0xFFFF;
      for (std::size_t i = 0; i < bytes.size() - kChecksumBytes; ++i) {
        std::uint8_t b = bytes[i];
        if (i == 9) b = static_cast<std::uint8_t>(implied >> 8);
        if (i == 10) b = static_cast<std::uint8_t>(implied);
        crc = crc_update(crc, b);
      }
      if (crc == get_u16(bytes, bytes.size() - kChecksumBytes)) {
        throw IntegrityError("record_count field corrupted (header says " +
                             std::to_string(get_u16(bytes, 9)) + ", frame holds " +
                             std::to_string(implied) + ")");
      }
    }
    if (bytes.size() < expected) {
      throw TruncationError("frame truncated: " + std::to_string(bytes.size()) + " of " +
                            std::to_string(expected) + " bytes");
    }
    throw IntegrityError("frame has " + std::to_string(bytes.size() - expected) +
                         " trailing bytes");
  }

  const std::size_t body = expected - kChecksumBytes;
  const auto stored = get_u16(bytes, body);
  const auto computed = crc16_ccitt_false(bytes.first(body));
  if (stored != computed) throw IntegrityError("checksum mismatch");

  if (get_u16(bytes, 0) != kMagic) throw IntegrityError("bad magic");
  if (bytes[2] != kVersion) {
    throw IntegrityError("unsupported version " + std::to_string(bytes[2]));
  }
  if (bytes[11] != 0) throw IntegrityError("reserved byte is non-zero");

  UplinkBatch batch;
  batch.ap_id = get_u16(bytes, 3);
  batch.batch_epoch = get_u32(bytes, 5);
  const std::size_t count = get_u16(bytes, 9);
  batch.records.reserve(count);

  const auto payload = bytes.subspan(kHeaderBytes, payload_bytes(count));
  BitReader reader(payload);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = reader.get(kRecordBits);
    if ((std::popcount(v) & 1) == 0) {
      throw IntegrityError("parity error in record " + std::to_string(i));
    }
    SensorRecord r;
    r.sensor_id = static_cast<std::uint16_t>(v >> 10);
    r.offset_s = static_cast<std::uint8_t>((v >> 3) & 0x7FU);
    r.state = ((v >> 2) & 1U) != 0;
    r.watchdog = ((v >> 1) & 1U) != 0;
    batch.records.push_back(r);
  }
  while (reader.position() % 8 != 0) {
    if (reader.get(1) != 0) throw IntegrityError("non-zero padding bits");
  }
  return batch;
}

std::vector<UplinkBatch> decode_stream(std::span<const std::uint8_t> bytes) {
  std::vector<UplinkBatch> out;
  std::size_t at = 0;
  while (at < bytes.size()) {
    const auto rest = bytes.subspan(at);
    const auto len = peek_frame_length(rest);
    if (len > rest.size()) {
      throw TruncationError("stream ends inside frame " + std::to_string(out.size()));
    }
    out.push_back(decode(rest.first(len)));
    at += len;
  }
  return out;
}

}  // namespace smartpark::codec
