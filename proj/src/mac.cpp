#include "fwkit/mac.hpp"

#include <sodium.h>

#include <algorithm>
#include <mutex>

namespace fwkit {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialization failed");
    });
}

} // namespace

MacTag hmac_sha256(ByteView key, ByteView data) {
    ensure_sodium();
    crypto_auth_hmacsha256_state st;
    MacTag tag{};
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, data.data(), data.size());
    crypto_auth_hmacsha256_final(&st, tag.data());
    sodium_memzero(&st, sizeof st);
    return tag;
}

MacKey parse_mac_key(std::string_view hex_text) {
    const Bytes raw = from_hex(hex_text);
    if (raw.size() != kMacKeySize)
        throw std::invalid_argument("MAC key must be 32 bytes, got " + std::to_string(raw.size()));
    MacKey key{};
    std::copy(raw.begin(), raw.end(), key.begin());
    return key;
}

const char *to_string(MacStatus s) {
    switch (s) {
    case MacStatus::Valid:
        return "Valid";
    case MacStatus::Missing:
        return "Missing";
    case MacStatus::Mismatch:
        return "Mismatch";
    }
    return "?";
}

bool has_mac_trailer(ByteView bytes) {
    if (bytes.size() < kMacTrailerSize)
        return false;
    auto magic = bytes.subspan(bytes.size() - kMacTrailerSize, kMacMagic.size());
    return std::equal(magic.begin(), magic.end(), kMacMagic.begin());
}

Bytes attach_mac(ByteView container, const MacKey &key) {
    if (has_mac_trailer(container))
        throw MacError("AlreadyTagged: input already ends in a MAC trailer");
    const MacTag tag = hmac_sha256(key, container);
    Bytes out(container.begin(), container.end());
    out.insert(out.end(), kMacMagic.begin(), kMacMagic.end());
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

MacStatus verify_mac(ByteView bytes, const MacKey &key) {
    if (!has_mac_trailer(bytes))
        return MacStatus::Missing;
    const auto body = bytes.first(bytes.size() - kMacTrailerSize);
    const auto stored = bytes.last(kMacTagSize);
    const MacTag expected = hmac_sha256(key, body);
    return sodium_memcmp(expected.data(), stored.data(), kMacTagSize) == 0 ? MacStatus::Valid : MacStatus::Mismatch;
}

} // namespace fwkit
