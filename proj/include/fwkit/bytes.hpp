#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fwkit {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Little-endian field access. Callers guarantee the range is in bounds.
inline std::uint16_t load_le16(ByteView b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline std::uint32_t load_le32(ByteView b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline void store_le16(std::span<std::uint8_t> b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<std::uint8_t>(v);
    b[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

inline void store_le32(std::span<std::uint8_t> b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline void append_le32(Bytes &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()};
}

/// Formats `v` as lowercase `0x`-prefixed hex, zero-padded to `digits`.
std::string hex(std::uint64_t v, int digits = 8);

/// Lowercase hex without prefix, two digits per byte.
std::string to_hex(ByteView b);

/// Parses hex text, ignoring whitespace and an optional leading `0x`.
/// Throws std::invalid_argument on odd length or a non-hex digit.
Bytes from_hex(std::string_view text);

Bytes read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, ByteView data);

} // namespace fwkit
