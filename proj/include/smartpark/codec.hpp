// Access-point uplink frame codec.
//
// Frame layout (all multi-byte integers big-endian):
//
//   offset  size  field
//   0       2     magic 0x5350 ("SP")
//   2       1     version (1)
//   3       2     ap_id
//   5       4     batch_epoch (unix seconds)
//   9       2     record_count
//   11      1     reserved (0)
//   12      P     payload, P = ceil(20 * record_count / 8)
//   12+P    2     CRC-16/CCITT-FALSE over bytes [0, 12+P)
//
// Each record is 20 bits, packed MSB-first back to back with no per-record
// alignment; the final byte is zero-padded:
//
//   sensor_id(10) | offset_s(7) | state(1) | watchdog(1) | parity(1)
//
// The parity bit makes the number of set bits in the 20-bit record odd.
// See docs/wire_format.md for a worked example.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smartpark::codec {

inline constexpr std::uint16_t kMagic = 0x5350;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 12;
inline constexpr std::size_t kChecksumBytes = 2;
inline constexpr unsigned kRecordBits = 20;
inline constexpr std::uint16_t kMaxSensorId = 1023;
inline constexpr std::uint8_t kMaxOffset = 127;

/// One 30 s report from one spot sensor. The absolute sample time is
/// `batch_epoch + offset_s`.
struct SensorRecord {
  std::uint16_t sensor_id{0};
  std::uint8_t offset_s{0};
  bool state{false};     // true = a car is parked
  bool watchdog{false};  // true = state has been stable for >= 2 reports

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

struct UplinkBatch {
  std::uint32_t batch_epoch{0};
  std::uint16_t ap_id{0};
  std::vector<SensorRecord> records;

  friend bool operator==(const UplinkBatch&, const UplinkBatch&) = default;
};

/// Payload byte count for `record_count` records.
[[nodiscard]] constexpr std::size_t payload_bytes(std::size_t record_count) noexcept {
  return (record_count * kRecordBits + 7) / 8;
}

[[nodiscard]] constexpr std::size_t frame_bytes(std::size_t record_count) noexcept {
  return kHeaderBytes + payload_bytes(record_count) + kChecksumBytes;
}

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
[[nodiscard]] std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept;

/// Throws EncodingError when a field exceeds its bit width.
[[nodiscard]] std::vector<std::uint8_t> encode(const UplinkBatch& batch);

/// Throws TruncationError when the input ends before the frame does and
/// IntegrityError for any corruption (checksum, parity, bad magic/version,
/// inconsistent length). A single flipped bit anywhere in a valid frame is
/// always reported as IntegrityError.
[[nodiscard]] UplinkBatch decode(std::span<const std::uint8_t> bytes);

/// Length of the frame starting at `bytes`, read from its header.
/// Throws TruncationError when fewer than kHeaderBytes are available.
[[nodiscard]] std::size_t peek_frame_length(std::span<const std::uint8_t> bytes);

/// Splits a concatenation of frames (the `.apb` stream format) and decodes each.
[[nodiscard]] std::vector<UplinkBatch> decode_stream(std::span<const std::uint8_t> bytes);

/// Appends encode(batch) to `out`.
void append_encoded(const UplinkBatch& batch, std::vector<std::uint8_t>& out);

}  // namespace smartpark::codec
