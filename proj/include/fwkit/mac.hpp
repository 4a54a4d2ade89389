#pragma once

// Keyed authentication for update files. The tag travels in a 36-byte
// trailer appended after the container:
//
//   "MAC1" | HMAC-SHA-256(key, container bytes)
//
// Checksum-only consumers never look past the bootloader payload, so a
// tagged file stays readable by them.

#include "fwkit/bytes.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

namespace fwkit {

inline constexpr std::size_t kMacKeySize = 32;
inline constexpr std::size_t kMacTagSize = 32;
inline constexpr std::array<std::uint8_t, 4> kMacMagic{'M', 'A', 'C', '1'};
inline constexpr std::size_t kMacTrailerSize = kMacMagic.size() + kMacTagSize;

using MacKey = std::array<std::uint8_t, kMacKeySize>;
using MacTag = std::array<std::uint8_t, kMacTagSize>;

/// HMAC-SHA-256 with a key of any length.
MacTag hmac_sha256(ByteView key, ByteView data);

/// Parses a 32-byte key from hex text. Throws std::invalid_argument.
MacKey parse_mac_key(std::string_view hex_text);

class MacError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// True when `bytes` ends in something shaped like a trailer (magic at
/// the right position). Says nothing about the tag's validity.
bool has_mac_trailer(ByteView bytes);

/// Returns container ‖ "MAC1" ‖ tag. Throws MacError if the input is
/// already tagged.
Bytes attach_mac(ByteView container, const MacKey &key);

enum class MacStatus { Valid, Missing, Mismatch };

const char *to_string(MacStatus s);

/// Constant-time tag comparison against HMAC over everything before the
/// trailer.
MacStatus verify_mac(ByteView bytes, const MacKey &key);

} // namespace fwkit
