#include "fwkit/container.hpp"
#include "fwkit/fixture.hpp"
#include "fwkit/patch.hpp"
#include "fwkit/verify.hpp"

#include <doctest.h>

#include <random>

using namespace fwkit;

namespace {

const auto kChecksumOnly = VerifyPolicy::checksum_only();

FirmwareUpdate base_update() {
    UpdateFixtureSpec spec;
    spec.app.payload_size = 0x800;
    spec.app.n_strings = 8;
    spec.app.n_refs = 8;
    spec.boot.payload_size = 0x400;
    spec.boot.n_strings = 4;
    spec.boot.n_refs = 4;
    spec.app_version = 10;
    spec.boot_version = 20;
    return gen_update_fixture(spec);
}

} // namespace

TEST_CASE("set_version leaves the table checksum stale") {
    const auto u = set_version(base_update(), ImageSlot::App, 0xDEADBEEF);
    CHECK(u.entry(ImageSlot::App).version == 0xDEADBEEF);
    CHECK(verify(serialize_update(u), kChecksumOnly).cause() == RejectCause::TableChecksumMismatch);
}

TEST_CASE("set_version to the current value is a no-op") {
    const auto orig = base_update();
    const auto u = set_version(orig, ImageSlot::App, orig.entry(ImageSlot::App).version);
    CHECK(u == orig);
    CHECK(verify(serialize_update(u), kChecksumOnly).accepted());
}

TEST_CASE("set_version then resign is accepted with the new version") {
    const auto u = resign(set_version(base_update(), ImageSlot::App, 0xDEADBEEF));
    const auto r = verify(serialize_update(u), kChecksumOnly);
    REQUIRE(r.accepted());
    CHECK(r.versions()->app == 0xDEADBEEF);
    CHECK(r.versions()->boot == 20);
}

TEST_CASE("patch_bytes bounds") {
    const auto orig = base_update();
    CHECK(patch_bytes(orig, ImageSlot::Boot, 0, {}) == orig);
    CHECK(patch_bytes(orig, ImageSlot::Boot, orig.boot_payload.size(), {}) == orig);

    const Bytes two{1, 2};
    CHECK_THROWS_AS(patch_bytes(orig, ImageSlot::Boot, orig.boot_payload.size() - 1, two), PatchError);
    CHECK_THROWS_AS(patch_bytes(orig, ImageSlot::App, orig.app_payload.size() + 5, {}), PatchError);
    CHECK_THROWS_AS(patch_bytes(orig, ImageSlot::App, SIZE_MAX, two), PatchError);
}

TEST_CASE("patch one byte, resign, verify") {
    const Bytes one{0x00};
    auto u = patch_bytes(base_update(), ImageSlot::Boot, 17, one);
    CHECK(u.boot_payload[17] == 0x00);
    CHECK(verify(serialize_update(resign(u)), kChecksumOnly).accepted());
}

TEST_CASE("resign is a fixpoint on consistent files and idempotent") {
    const auto orig = base_update();
    CHECK(resign(orig) == orig);

    auto dirty = set_version(orig, ImageSlot::Boot, 77);
    dirty.app_payload[3] ^= 0xFF;
    const auto once = resign(dirty);
    CHECK(resign(once) == once);
}

TEST_CASE("resign touches only checksum fields") {
    auto dirty = set_version(base_update(), ImageSlot::Boot, 77);
    dirty.app_payload[3] ^= 0xFF;
    const auto fixed = resign(dirty);
    CHECK(fixed.app_payload == dirty.app_payload);
    CHECK(fixed.boot_payload == dirty.boot_payload);
    for (std::size_t i = 0; i < 2; ++i) {
        auto a = fixed.header.images[i];
        auto b = dirty.header.images[i];
        a.checksum = b.checksum = 0;
        CHECK(a == b);
    }
}

TEST_CASE("random single-byte payload corruptions: rejected before resign, accepted after") {
    std::mt19937_64 rng(3);
    const auto orig = base_update();
    for (int i = 0; i < 100; ++i) {
        const auto slot = rng() % 2 ? ImageSlot::App : ImageSlot::Boot;
        const auto &payload = orig.payload(slot);
        const std::size_t at = rng() % payload.size();
        const Bytes b{static_cast<std::uint8_t>(payload[at] ^ (1 + rng() % 255))};
        const auto mod = patch_bytes(orig, slot, at, b);
        CHECK_FALSE(verify(serialize_update(mod), kChecksumOnly).accepted());
        CHECK(verify(serialize_update(resign(mod)), kChecksumOnly).accepted());
    }
}
