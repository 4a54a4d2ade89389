#include "fwkit/container.hpp"

#include "fwkit/checksum.hpp"

#include <limits>

namespace fwkit {

const char *to_string(FormatErrc e) {
    switch (e) {
    case FormatErrc::TooShort:
        return "TooShort";
    case FormatErrc::BadTableVersion:
        return "BadTableVersion";
    case FormatErrc::BadTableLength:
        return "BadTableLength";
    case FormatErrc::BoundsError:
        return "BoundsError";
    case FormatErrc::DuplicateIdentifier:
        return "DuplicateIdentifier";
    case FormatErrc::UnknownIdentifier:
        return "UnknownIdentifier";
    case FormatErrc::WrongImageOrder:
        return "WrongImageOrder";
    case FormatErrc::InvariantViolation:
        return "InvariantViolation";
    case FormatErrc::TooLarge:
        return "TooLarge";
    }
    return "?";
}

namespace {

constexpr std::size_t kEntryBase = 4;

[[noreturn]] void fail(FormatErrc code, const std::string &detail) {
    throw FormatError(code, std::string(to_string(code)) + ": " + detail);
}

ImageEntry decode_entry(ByteView b, std::size_t at) {
    ImageEntry e;
    e.identifier = load_le16(b, at);
    e.reserved = load_le16(b, at + 2);
    e.offset = load_le32(b, at + 4);
    e.length = load_le32(b, at + 8);
    e.checksum = load_le32(b, at + 12);
    e.version = load_le32(b, at + 16);
    return e;
}

void encode_entry(std::span<std::uint8_t> b, std::size_t at, const ImageEntry &e) {
    store_le16(b, at, e.identifier);
    store_le16(b, at + 2, e.reserved);
    store_le32(b, at + 4, e.offset);
    store_le32(b, at + 8, e.length);
    store_le32(b, at + 12, e.checksum);
    store_le32(b, at + 16, e.version);
}

bool known_identifier(std::uint16_t id) { return id == kAppIdentifier || id == kBootIdentifier; }

} // namespace

ParsedPrefix parse_update_prefix(ByteView bytes) {
    if (bytes.size() < kHeaderSize)
        fail(FormatErrc::TooShort, std::to_string(bytes.size()) + " bytes, need at least 48");

    UpdateHeader h;
    h.table_ver = load_le16(bytes, 0);
    h.table_len = load_le16(bytes, 2);
    if (h.table_ver != kTableVersion)
        fail(FormatErrc::BadTableVersion, "table_ver=" + std::to_string(h.table_ver));
    if (h.table_len != kTableLength)
        fail(FormatErrc::BadTableLength, "table_len=" + std::to_string(h.table_len));
    for (std::size_t i = 0; i < 2; ++i)
        h.images[i] = decode_entry(bytes, kEntryBase + i * kEntrySize);
    h.table_checksum = load_le32(bytes, kTableLength);

    const auto &app = h.images[0];
    const auto &boot = h.images[1];
    if (!known_identifier(app.identifier) || !known_identifier(boot.identifier))
        fail(FormatErrc::UnknownIdentifier,
             "identifiers " + std::to_string(app.identifier) + "/" + std::to_string(boot.identifier));
    if (app.identifier == boot.identifier)
        fail(FormatErrc::DuplicateIdentifier, "both entries carry " + std::to_string(app.identifier));
    if (app.identifier != kAppIdentifier)
        fail(FormatErrc::WrongImageOrder, "bootloader entry precedes app entry");

    // Only the canonical contiguous layout is accepted, so that parse and
    // serialize are exact inverses.
    const std::uint64_t app_end = std::uint64_t{app.offset} + app.length;
    const std::uint64_t boot_end = std::uint64_t{boot.offset} + boot.length;
    if (app.offset != kHeaderSize)
        fail(FormatErrc::BoundsError, "app offset " + hex(app.offset) + " != 0x00000030");
    if (boot.offset != app_end)
        fail(FormatErrc::BoundsError, "bootloader offset " + hex(boot.offset) + " does not follow app payload");
    if (app_end > bytes.size() || boot_end > bytes.size())
        fail(FormatErrc::BoundsError, "payload extends past end of file (" + std::to_string(bytes.size()) + " bytes)");

    ParsedPrefix out;
    out.update.header = h;
    out.update.app_payload.assign(bytes.begin() + app.offset, bytes.begin() + static_cast<std::ptrdiff_t>(app_end));
    out.update.boot_payload.assign(bytes.begin() + boot.offset,
                                   bytes.begin() + static_cast<std::ptrdiff_t>(boot_end));
    out.container_size = static_cast<std::size_t>(boot_end);
    return out;
}

FirmwareUpdate parse_update(ByteView bytes) {
    auto parsed = parse_update_prefix(bytes);
    if (parsed.container_size != bytes.size())
        fail(FormatErrc::BoundsError,
             std::to_string(bytes.size() - parsed.container_size) + " trailing bytes after bootloader payload");
    return std::move(parsed.update);
}

std::array<std::uint8_t, kTableLength> encode_table(const UpdateHeader &h) {
    std::array<std::uint8_t, kTableLength> out{};
    store_le16(out, 0, h.table_ver);
    store_le16(out, 2, h.table_len);
    for (std::size_t i = 0; i < 2; ++i)
        encode_entry(out, kEntryBase + i * kEntrySize, h.images[i]);
    return out;
}

Bytes serialize_update(const FirmwareUpdate &u) {
    const auto &h = u.header;
    const auto &app = h.images[0];
    const auto &boot = h.images[1];
    if (h.table_ver != kTableVersion || h.table_len != kTableLength)
        fail(FormatErrc::InvariantViolation, "header version/length fields");
    if (app.identifier != kAppIdentifier || boot.identifier != kBootIdentifier)
        fail(FormatErrc::InvariantViolation, "image identifiers must be app=1, boot=2");
    if (app.length != u.app_payload.size())
        fail(FormatErrc::InvariantViolation, "app length field " + std::to_string(app.length) + " but payload has " +
                                                 std::to_string(u.app_payload.size()) + " bytes");
    if (boot.length != u.boot_payload.size())
        fail(FormatErrc::InvariantViolation, "boot length field " + std::to_string(boot.length) +
                                                 " but payload has " + std::to_string(u.boot_payload.size()) +
                                                 " bytes");
    if (app.offset != kHeaderSize || std::uint64_t{boot.offset} != std::uint64_t{app.offset} + app.length)
        fail(FormatErrc::InvariantViolation, "offsets are not contiguous from 48");

    Bytes out(kHeaderSize);
    const auto table = encode_table(h);
    std::copy(table.begin(), table.end(), out.begin());
    store_le32(out, kTableLength, h.table_checksum);
    out.insert(out.end(), u.app_payload.begin(), u.app_payload.end());
    out.insert(out.end(), u.boot_payload.begin(), u.boot_payload.end());
    return out;
}

FirmwareUpdate build_update(ByteView app, ByteView boot, std::uint32_t app_version, std::uint32_t boot_version) {
    const std::uint64_t total = kHeaderSize + std::uint64_t{app.size()} + boot.size();
    if (total > std::numeric_limits<std::uint32_t>::max())
        fail(FormatErrc::TooLarge, std::to_string(total) + " bytes does not fit 32-bit offsets");

    FirmwareUpdate u;
    u.app_payload.assign(app.begin(), app.end());
    u.boot_payload.assign(boot.begin(), boot.end());

    auto &a = u.header.images[0];
    a.identifier = kAppIdentifier;
    a.offset = kHeaderSize;
    a.length = static_cast<std::uint32_t>(app.size());
    a.checksum = crc32(app).value;
    a.version = app_version;

    auto &b = u.header.images[1];
    b.identifier = kBootIdentifier;
    b.offset = static_cast<std::uint32_t>(kHeaderSize + app.size());
    b.length = static_cast<std::uint32_t>(boot.size());
    b.checksum = crc32(boot).value;
    b.version = boot_version;

    u.header.table_checksum = crc32(encode_table(u.header)).value;
    return u;
}

} // namespace fwkit
