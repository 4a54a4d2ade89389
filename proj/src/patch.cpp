#include "fwkit/patch.hpp"

#include "fwkit/checksum.hpp"

#include <algorithm>

namespace fwkit {

FirmwareUpdate set_version(FirmwareUpdate u, ImageSlot which, std::uint32_t version) {
    u.entry(which).version = version;
    return u;
}

FirmwareUpdate patch_bytes(FirmwareUpdate u, ImageSlot which, std::size_t at, ByteView bytes) {
    Bytes &payload = u.payload(which);
    if (at > payload.size() || bytes.size() > payload.size() - at)
        throw PatchError("OutOfRange: patch [" + std::to_string(at) + ", " + std::to_string(at + bytes.size()) +
                         ") exceeds " + slot_name(which) + " payload of " + std::to_string(payload.size()) +
                         " bytes");
    std::copy(bytes.begin(), bytes.end(), payload.begin() + static_cast<std::ptrdiff_t>(at));
    return u;
}

FirmwareUpdate resign(FirmwareUpdate u) {
    u.entry(ImageSlot::App).checksum = crc32(u.app_payload).value;
    u.entry(ImageSlot::Boot).checksum = crc32(u.boot_payload).value;
    u.header.table_checksum = crc32(encode_table(u.header)).value;
    return u;
}

} // namespace fwkit
