#pragma once

#include "fwkit/bytes.hpp"

#include <cstdint>

namespace fwkit {

/// CRC-32 value, IEEE 802.3 parameterization: reflected polynomial
/// 0xEDB88320, init 0xFFFFFFFF, final XOR 0xFFFFFFFF (check value of
/// "123456789" is 0xCBF43926). If a device disagrees, compare against
/// these parameters first.
struct Crc32Value {
    std::uint32_t value = 0;

    friend bool operator==(Crc32Value, Crc32Value) = default;
};

/// Running CRC state for streamed input. Start with `Crc32State{}`, fold
/// chunks with crc32_update, finish with crc32_finalize.
struct Crc32State {
    std::uint32_t reg = 0xFFFFFFFFu;
};

Crc32State crc32_update(Crc32State state, ByteView chunk);
Crc32Value crc32_finalize(Crc32State state);

Crc32Value crc32(ByteView data);

} // namespace fwkit
