#pragma once

// AFW1 update container: a fixed 48-byte header table followed by the
// "app" and "bootloader" payloads, packed contiguously.
//
//   off  size  field
//   0    2     table_ver (=1)
//   2    2     table_len (=44, excludes table_checksum)
//   4    20    images[0]  identifier:u16 reserved:u16 offset:u32
//                         length:u32 checksum:u32 version:u32
//   24   20    images[1]
//   44   4     table_checksum = CRC-32 of bytes [0, 44)
//   48   ...   app payload, then bootloader payload
//
// All fields little-endian. The parser does not validate checksums; that
// is the verifier's job.

#include "fwkit/bytes.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

namespace fwkit {

inline constexpr std::uint16_t kTableVersion = 1;
inline constexpr std::uint16_t kTableLength = 44;
inline constexpr std::size_t kEntrySize = 20;
inline constexpr std::size_t kHeaderSize = 48;

enum class ImageSlot { App, Boot };

inline constexpr std::uint16_t kAppIdentifier = 1;
inline constexpr std::uint16_t kBootIdentifier = 2;

constexpr std::size_t slot_index(ImageSlot s) { return s == ImageSlot::App ? 0 : 1; }
constexpr const char *slot_name(ImageSlot s) { return s == ImageSlot::App ? "app" : "boot"; }

struct ImageEntry {
    std::uint16_t identifier = 0;
    std::uint16_t reserved = 0;
    std::uint32_t offset = 0;
    std::uint32_t length = 0;
    std::uint32_t checksum = 0;
    std::uint32_t version = 0;

    friend bool operator==(const ImageEntry &, const ImageEntry &) = default;
};

struct UpdateHeader {
    std::uint16_t table_ver = kTableVersion;
    std::uint16_t table_len = kTableLength;
    std::array<ImageEntry, 2> images{};
    std::uint32_t table_checksum = 0;

    friend bool operator==(const UpdateHeader &, const UpdateHeader &) = default;
};

struct FirmwareUpdate {
    UpdateHeader header;
    Bytes app_payload;
    Bytes boot_payload;

    ImageEntry &entry(ImageSlot s) { return header.images[slot_index(s)]; }
    const ImageEntry &entry(ImageSlot s) const { return header.images[slot_index(s)]; }
    Bytes &payload(ImageSlot s) { return s == ImageSlot::App ? app_payload : boot_payload; }
    const Bytes &payload(ImageSlot s) const { return s == ImageSlot::App ? app_payload : boot_payload; }

    friend bool operator==(const FirmwareUpdate &, const FirmwareUpdate &) = default;
};

enum class FormatErrc {
    TooShort,
    BadTableVersion,
    BadTableLength,
    BoundsError,
    DuplicateIdentifier,
    UnknownIdentifier,
    WrongImageOrder,
    InvariantViolation,
    TooLarge,
};

const char *to_string(FormatErrc e);

class FormatError : public std::runtime_error {
  public:
    FormatError(FormatErrc code, const std::string &what) : std::runtime_error(what), code_(code) {}
    FormatErrc code() const noexcept { return code_; }

  private:
    FormatErrc code_;
};

/// Parses a complete AFW1 file. Bytes past the bootloader payload are an
/// error here; use parse_update_prefix when a trailer may follow.
FirmwareUpdate parse_update(ByteView bytes);

struct ParsedPrefix {
    FirmwareUpdate update;
    std::size_t container_size = 0; ///< bytes consumed by header + payloads
};

/// Parses the AFW1 container at the start of `bytes`, tolerating trailing
/// data (e.g. a MAC trailer).
ParsedPrefix parse_update_prefix(ByteView bytes);

Bytes serialize_update(const FirmwareUpdate &u);

/// Encodes header bytes [0, table_len) as they appear on disk.
std::array<std::uint8_t, kTableLength> encode_table(const UpdateHeader &h);

/// Builds a self-consistent update: contiguous layout from offset 48,
/// image and table checksums filled in.
FirmwareUpdate build_update(ByteView app, ByteView boot, std::uint32_t app_version, std::uint32_t boot_version);

} // namespace fwkit
