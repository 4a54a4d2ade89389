#include "fwkit/checksum.hpp"
#include "fwkit/container.hpp"
#include "fwkit/fixture.hpp"
#include "fwkit/verify.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace fwkit;

namespace {

FormatErrc parse_error(ByteView b) {
    try {
        parse_update(b);
    } catch (const FormatError &e) {
        return e.code();
    }
    FAIL("parse_update accepted the input");
    return FormatErrc::InvariantViolation;
}

Bytes sample_file() {
    const Bytes app{0x01}, boot{0x02};
    return serialize_update(build_update(app, boot, 100, 200));
}

} // namespace

TEST_CASE("parse rejects input shorter than the header") {
    CHECK(parse_error({}) == FormatErrc::TooShort);
    const Bytes b(47, 0);
    CHECK(parse_error(b) == FormatErrc::TooShort);
}

TEST_CASE("parse round-trips a built file") {
    const auto bytes = sample_file();
    const auto u = parse_update(bytes);
    CHECK(u.app_payload == Bytes{0x01});
    CHECK(u.boot_payload == Bytes{0x02});
    CHECK(u.entry(ImageSlot::App).version == 100);
    CHECK(u.entry(ImageSlot::Boot).version == 200);
    CHECK(u.entry(ImageSlot::App).identifier == kAppIdentifier);
    CHECK(u.entry(ImageSlot::Boot).identifier == kBootIdentifier);
    CHECK(u.header.table_ver == 1);
    CHECK(u.header.table_len == 44);
    CHECK(serialize_update(u) == bytes);
}

TEST_CASE("layout is bit-exact") {
    const auto bytes = sample_file();
    REQUIRE(bytes.size() == 50);
    CHECK(load_le16(bytes, 0) == 1);
    CHECK(load_le16(bytes, 2) == 44);
    CHECK(load_le16(bytes, 4) == 1);       // images[0].identifier
    CHECK(load_le16(bytes, 6) == 0);       // reserved
    CHECK(load_le32(bytes, 8) == 48);      // offset
    CHECK(load_le32(bytes, 12) == 1);      // length
    CHECK(load_le32(bytes, 16) == oracle::crc32_bitwise(Bytes{0x01}));
    CHECK(load_le32(bytes, 20) == 100);    // version
    CHECK(load_le16(bytes, 24) == 2);
    CHECK(load_le32(bytes, 28) == 49);
    CHECK(load_le32(bytes, 40) == 200);
    CHECK(load_le32(bytes, 44) == oracle::crc32_bitwise(ByteView(bytes).first(44)));
    CHECK(bytes[48] == 0x01);
    CHECK(bytes[49] == 0x02);
}

TEST_CASE("header field errors") {
    SUBCASE("table_ver = 2") {
        auto b = sample_file();
        b[0] = 2;
        CHECK(parse_error(b) == FormatErrc::BadTableVersion);
    }
    SUBCASE("table_len = 48") {
        auto b = sample_file();
        b[2] = 48;
        CHECK(parse_error(b) == FormatErrc::BadTableLength);
    }
    SUBCASE("duplicate identifier") {
        auto b = sample_file();
        b[24] = 1;
        CHECK(parse_error(b) == FormatErrc::DuplicateIdentifier);
    }
    SUBCASE("unknown identifier") {
        auto b = sample_file();
        b[4] = 7;
        CHECK(parse_error(b) == FormatErrc::UnknownIdentifier);
    }
    SUBCASE("swapped identifiers") {
        auto b = sample_file();
        b[4] = 2;
        b[24] = 1;
        CHECK(parse_error(b) == FormatErrc::WrongImageOrder);
    }
}

TEST_CASE("bounds errors") {
    SUBCASE("boot payload past end of file") {
        auto b = sample_file();
        store_le32(b, 32, 5);
        CHECK(parse_error(b) == FormatErrc::BoundsError);
    }
    SUBCASE("app offset inside the header") {
        auto b = sample_file();
        store_le32(b, 8, 40);
        CHECK(parse_error(b) == FormatErrc::BoundsError);
    }
    SUBCASE("overlapping payloads") {
        auto b = sample_file();
        store_le32(b, 28, 48);
        CHECK(parse_error(b) == FormatErrc::BoundsError);
    }
    SUBCASE("offset + length overflows 32 bits") {
        auto b = sample_file();
        store_le32(b, 28, 0xFFFFFFF0u);
        store_le32(b, 32, 0x20);
        CHECK(parse_error(b) == FormatErrc::BoundsError);
    }
    SUBCASE("trailing bytes rejected by strict parse, accepted by prefix parse") {
        auto b = sample_file();
        b.push_back(0xEE);
        CHECK(parse_error(b) == FormatErrc::BoundsError);
        const auto p = parse_update_prefix(b);
        CHECK(p.container_size == 50);
    }
}

TEST_CASE("serialize checks payload lengths against the header") {
    const Bytes app{1, 2, 3, 4}, boot{};
    auto u = build_update(app, boot, 1, 1);
    u.header.images[0].length = 5;
    u.header.images[1].offset = 53;
    try {
        serialize_update(u);
        FAIL("expected InvariantViolation");
    } catch (const FormatError &e) {
        CHECK(e.code() == FormatErrc::InvariantViolation);
    }
}

TEST_CASE("empty container is 48 bytes") {
    // 2 + 2 + 2 * (2 + 2 + 4 + 4 + 4 + 4) + 4
    constexpr std::size_t expected = 2 + 2 + 2 * (2 + 2 + 4 + 4 + 4 + 4) + 4;
    static_assert(expected == 48);
    const auto bytes = serialize_update(build_update({}, {}, 0, 0));
    CHECK(bytes.size() == expected);
    CHECK(verify(bytes, VerifyPolicy::checksum_only()).accepted());
}

TEST_CASE("build_update packs contiguously and fills checksums") {
    const Bytes app(1000, 0xAA), boot(500, 0xBB);
    const auto u = build_update(app, boot, 7, 9);
    CHECK(u.entry(ImageSlot::App).offset == 48);
    CHECK(u.entry(ImageSlot::Boot).offset == 48 + 1000);
    CHECK(u.entry(ImageSlot::App).checksum == oracle::crc32_bitwise(app));
    CHECK(u.entry(ImageSlot::Boot).checksum == oracle::crc32_bitwise(boot));
    CHECK(serialize_update(u).size() == 48 + 1000 + 500);
}

TEST_CASE("reserved field survives a round trip") {
    auto b = sample_file();
    b[6] = 0x5A;
    CHECK(serialize_update(parse_update(b)) == b);
}

TEST_CASE("round-trip property over generated files") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        Bytes app(rng() % 300), boot(rng() % 300);
        for (auto &c : app)
            c = static_cast<std::uint8_t>(rng());
        for (auto &c : boot)
            c = static_cast<std::uint8_t>(rng());
        auto u = build_update(app, boot, static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()));
        // Stale checksums must round-trip too: the parser does not validate.
        u.header.table_checksum = static_cast<std::uint32_t>(rng());
        const auto bytes = serialize_update(u);
        const auto back = parse_update(bytes);
        REQUIRE(back == u);
        REQUIRE(serialize_update(back) == bytes);
    }
}

TEST_CASE("parser survives mutated input") {
    std::mt19937_64 rng(1234);
    const auto seed_file = serialize_update(gen_update_fixture({}));
    for (int i = 0; i < 3000; ++i) {
        Bytes b = seed_file;
        if (rng() % 4 == 0)
            b.resize(rng() % b.size());
        const int flips = 1 + static_cast<int>(rng() % 4);
        for (int f = 0; f < flips && !b.empty(); ++f) {
            // Bias mutations toward the header, where the interesting fields are.
            const std::size_t at = rng() % 2 ? rng() % std::min<std::size_t>(b.size(), 48) : rng() % b.size();
            b[at] = static_cast<std::uint8_t>(rng());
        }
        try {
            const auto u = parse_update(b);
            CHECK(serialize_update(u) == b);
        } catch (const FormatError &) {
        }
    }
}
