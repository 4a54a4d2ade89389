#include "fwkit/checksum.hpp"

#include <array>

namespace fwkit {

namespace {

constexpr std::uint32_t kPolynomial = 0xEDB88320u;

constexpr std::array<std::uint32_t, 256> make_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k)
            c = (c & 1) ? kPolynomial ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

constexpr auto kTable = make_table();

} // namespace

Crc32State crc32_update(Crc32State state, ByteView chunk) {
    std::uint32_t crc = state.reg;
    for (auto b : chunk)
        crc = kTable[(crc ^ b) & 0xFF] ^ (crc >> 8);
    return {crc};
}

Crc32Value crc32_finalize(Crc32State state) { return {state.reg ^ 0xFFFFFFFFu}; }

Crc32Value crc32(ByteView data) { return crc32_finalize(crc32_update({}, data)); }

} // namespace fwkit
