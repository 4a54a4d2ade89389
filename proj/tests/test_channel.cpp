#include "fwkit/channel.hpp"
#include "fwkit/container.hpp"
#include "fwkit/demo.hpp"
#include "fwkit/fixture.hpp"
#include "fwkit/mac.hpp"
#include "fwkit/patch.hpp"

#include <doctest.h>
#include <httplib.h>

#include <random>

using namespace fwkit;
using namespace fwkit::channel;

namespace {

Bytes official_file(std::uint32_t app_version = 2) {
    UpdateFixtureSpec spec;
    spec.seed = 17;
    spec.app.payload_size = 0x1000;
    spec.app.n_strings = 12;
    spec.app.n_refs = 12;
    spec.boot.payload_size = 0x800;
    spec.boot.n_strings = 6;
    spec.boot.n_refs = 6;
    spec.app_version = app_version;
    return serialize_update(gen_update_fixture(spec));
}

Bytes forged_from(ByteView official, std::uint32_t version = 0xDEADBEEF) {
    auto u = parse_update_prefix(official).update;
    const Bytes evil{'e', 'v', 'i', 'l'};
    u = patch_bytes(std::move(u), ImageSlot::App, 100, evil);
    u = set_version(std::move(u), ImageSlot::App, version);
    return serialize_update(resign(std::move(u)));
}

MacKey device_key() {
    MacKey k;
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] = static_cast<std::uint8_t>(i * 7 + 1);
    return k;
}

} // namespace

TEST_CASE("manifest JSON") {
    CHECK(UpdateManifest::unavailable().to_json() == R"({"available":false})");

    const Bytes file{1, 2, 3};
    const auto m = UpdateManifest::offer(5, "http://127.0.0.1:1/firmware", file);
    const auto json = m.to_json();
    CHECK(json == R"({"available":true,"firmware_version":5,"url":"http://127.0.0.1:1/firmware","size":3,)"
                  R"("checksum":")" + hex(crc32(file).value) + R"("})");
    CHECK(UpdateManifest::from_json(json) == m);
    CHECK_THROWS_AS(UpdateManifest::from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(UpdateManifest::from_json(R"({"available":true})"), std::invalid_argument);
}

TEST_CASE("tracker state machine") {
    const auto file = official_file();
    Tracker t({1, 1}, VerifyPolicy::checksum_only());
    CHECK(t.versions() == InstalledVersions{1, 1});
    CHECK(t.state().phase == TrackerPhase::Idle);

    SUBCASE("protocol violations leave state unchanged") {
        const Bytes c(4, 0);
        CHECK(t.chunk(c) == SessionStatus::NoTransfer);
        CHECK(t.commit().status == SessionStatus::NoTransfer);
        CHECK(t.begin(kMaxTransfer + 1) == SessionStatus::TooLarge);
        CHECK(t.state().phase == TrackerPhase::Idle);

        REQUIRE(t.begin(10) == SessionStatus::Ok);
        CHECK(t.chunk(Bytes(21, 0)) == SessionStatus::ChunkTooLarge);
        CHECK(t.chunk(Bytes(8, 0)) == SessionStatus::Ok);
        CHECK(t.chunk(Bytes(3, 0)) == SessionStatus::Overflow);
        CHECK(t.state().bytes_so_far == 8);
        CHECK(t.commit().status == SessionStatus::Incomplete);
        CHECK(t.state().phase == TrackerPhase::Receiving);
        CHECK(t.versions() == InstalledVersions{1, 1});
    }

    SUBCASE("valid stream installs") {
        REQUIRE(t.begin(static_cast<std::uint32_t>(file.size())) == SessionStatus::Ok);
        for (std::size_t at = 0; at < file.size(); at += kMaxChunk)
            REQUIRE(t.chunk(ByteView(file).subspan(at, std::min(kMaxChunk, file.size() - at))) == SessionStatus::Ok);
        const auto r = t.commit();
        REQUIRE(r.report);
        CHECK(r.report->accepted());
        CHECK(t.state().phase == TrackerPhase::Installed);
        CHECK(t.versions() == InstalledVersions{2, 1});
    }

    SUBCASE("new BEGIN aborts an in-flight transfer") {
        REQUIRE(t.begin(100) == SessionStatus::Ok);
        REQUIRE(t.chunk(Bytes(20, 0xAB)) == SessionStatus::Ok);
        REQUIRE(t.begin(static_cast<std::uint32_t>(file.size())) == SessionStatus::Ok);
        CHECK(t.state().bytes_so_far == 0);
        for (std::size_t at = 0; at < file.size(); at += kMaxChunk)
            t.chunk(ByteView(file).subspan(at, std::min(kMaxChunk, file.size() - at)));
        CHECK(t.commit().report->accepted());
    }

    SUBCASE("rejected transfer keeps versions") {
        Bytes bad = file;
        bad[60] ^= 1;
        t.begin(static_cast<std::uint32_t>(bad.size()));
        for (std::size_t at = 0; at < bad.size(); at += kMaxChunk)
            t.chunk(ByteView(bad).subspan(at, std::min(kMaxChunk, bad.size() - at)));
        const auto r = t.commit();
        CHECK(r.report->cause() == RejectCause::AppImageChecksumMismatch);
        CHECK(t.state().phase == TrackerPhase::Rejected);
        CHECK(t.versions() == InstalledVersions{1, 1});
    }
}

TEST_CASE("chunking is transparent for arbitrary chunk sizes") {
    std::mt19937_64 rng(2);
    const auto file = official_file();
    for (int iter = 0; iter < 20; ++iter) {
        Tracker t({1, 1}, VerifyPolicy::checksum_only());
        t.begin(static_cast<std::uint32_t>(file.size()));
        std::size_t at = 0;
        while (at < file.size()) {
            const std::size_t n = std::min<std::size_t>(file.size() - at, rng() % (kMaxChunk + 1));
            REQUIRE(t.chunk(ByteView(file).subspan(at, n)) == SessionStatus::Ok);
            at += n;
        }
        CHECK(t.commit().report->accepted());
    }
}

TEST_CASE("tracker service wire protocol") {
    TrackerService svc({1, 1}, VerifyPolicy::checksum_only());
    TrackerClient c(svc.endpoint());
    CHECK(c.version() == InstalledVersions{1, 1});
    CHECK(c.chunk(Bytes(3, 0)) == SessionStatus::NoTransfer);
    CHECK(c.commit().status == SessionStatus::NoTransfer);

    const auto file = official_file();
    REQUIRE(c.begin(static_cast<std::uint32_t>(file.size())) == SessionStatus::Ok);
    CHECK(c.chunk(Bytes(25, 0)) == SessionStatus::ChunkTooLarge);
    for (std::size_t at = 0; at < file.size(); at += kMaxChunk)
        REQUIRE(c.chunk(ByteView(file).subspan(at, std::min(kMaxChunk, file.size() - at))) == SessionStatus::Ok);
    const auto r = c.commit();
    REQUIRE(r.report);
    CHECK(r.report->accepted());
    CHECK(c.version() == InstalledVersions{2, 1});
    CHECK(svc.snapshot().phase == TrackerPhase::Installed);
}

TEST_CASE("tracker service survives a raw unknown opcode") {
    TrackerService svc({3, 4}, VerifyPolicy::checksum_only());
    {
        auto s = net::connect(svc.endpoint());
        const Bytes junk{0x7F};
        s.write_all(junk);
        std::array<std::uint8_t, 2> reply{};
        REQUIRE(s.read_exact(reply));
        CHECK(reply[0] == op::kError);
        CHECK(reply[1] == static_cast<std::uint8_t>(SessionStatus::UnknownOpcode));
    }
    TrackerClient c(svc.endpoint());
    CHECK(c.version() == InstalledVersions{3, 4});
}

TEST_CASE("vendor server") {
    SUBCASE("nothing available") {
        VendorServer srv(UpdateManifest::unavailable(), std::nullopt);
        httplib::Client http(srv.endpoint().host, srv.endpoint().port);
        auto m = http.Get("/manifest");
        REQUIRE(m);
        CHECK(m->body == R"({"available":false})");
        auto f = http.Get("/firmware");
        REQUIRE(f);
        CHECK(f->status == 404);
    }
    SUBCASE("served bytes match the manifest") {
        const auto file = official_file();
        VendorServer srv(UpdateManifest::offer(2, "", file), file);
        httplib::Client http(srv.endpoint().host, srv.endpoint().port);
        const auto m = UpdateManifest::from_json(http.Get("/manifest")->body);
        CHECK(m.url == srv.endpoint().url("/firmware"));
        auto f = http.Get("/firmware");
        REQUIRE(f);
        CHECK(f->get_header_value("Content-Type") == "application/octet-stream");
        CHECK(crc32(as_bytes(f->body)) == m.checksum);
        CHECK(f->body.size() == m.size);
    }
    SUBCASE("inconsistent offers are refused") {
        const auto file = official_file();
        CHECK_THROWS_AS(VendorServer(UpdateManifest::offer(2, "", file), std::nullopt), std::invalid_argument);
        auto m = UpdateManifest::offer(2, "", file);
        m.size += 1;
        CHECK_THROWS_AS(VendorServer(m, file), std::invalid_argument);
    }
}

TEST_CASE("passthrough interceptor is byte-identical") {
    const auto file = official_file();
    VendorServer srv(UpdateManifest::offer(2, "", file), file);
    Interceptor mitm(srv.endpoint(), Passthrough{});
    httplib::Client direct(srv.endpoint().host, srv.endpoint().port);
    httplib::Client relayed(mitm.endpoint().host, mitm.endpoint().port);
    for (const char *path : {"/manifest", "/firmware"}) {
        auto a = direct.Get(path);
        auto b = relayed.Get(path);
        REQUIRE(a);
        REQUIRE(b);
        CHECK(a->status == b->status);
        CHECK(a->body == b->body);
        CHECK(a->get_header_value("Content-Type") == b->get_header_value("Content-Type"));
    }
}

TEST_CASE("interceptor needs an upstream unless it fabricates") {
    CHECK_THROWS_AS(Interceptor(std::nullopt, Passthrough{}), std::invalid_argument);
    CHECK_NOTHROW(Interceptor(std::nullopt, FakeAvailability{UpdateManifest::unavailable(), Bytes{1}}));
}

TEST_CASE("unreachable upstream surfaces as a sync failure") {
    int dead_port = 0;
    {
        auto l = net::listen_loopback(0, dead_port);
    }
    Interceptor mitm(net::Endpoint{"127.0.0.1", dead_port}, Passthrough{});
    TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
    const auto rep = pcd_sync(mitm.endpoint(), tracker.endpoint());
    CHECK(rep.outcome == SyncOutcome::Failed);
    CHECK(tracker.snapshot().installed == InstalledVersions{1, 1});
}

TEST_CASE("PCD sync flows") {
    const auto file = official_file();

    SUBCASE("no update available") {
        VendorServer srv(UpdateManifest::unavailable(), std::nullopt);
        TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
        const auto rep = pcd_sync(srv.endpoint(), tracker.endpoint());
        CHECK(rep.outcome == SyncOutcome::UpToDate);
        CHECK(rep.bytes_sent == 0);
    }
    SUBCASE("official v2 over v1") {
        VendorServer srv(UpdateManifest::offer(2, "", file), file);
        TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
        const auto rep = pcd_sync(srv.endpoint(), tracker.endpoint());
        CHECK(rep.outcome == SyncOutcome::Installed);
        CHECK(rep.bytes_sent == file.size());
        CHECK(rep.chunks == (file.size() + kMaxChunk - 1) / kMaxChunk);
        CHECK(rep.after == InstalledVersions{2, 1});
        CHECK(tracker.snapshot().phase == TrackerPhase::Installed);
    }
    SUBCASE("tracker already current") {
        VendorServer srv(UpdateManifest::offer(2, "", file), file);
        TrackerService tracker({2, 1}, VerifyPolicy::checksum_only());
        CHECK(pcd_sync(srv.endpoint(), tracker.endpoint()).outcome == SyncOutcome::UpToDate);
    }
    SUBCASE("official MAC-tagged update installs on a MAC tracker") {
        const auto tagged = attach_mac(file, device_key());
        VendorServer srv(UpdateManifest::offer(2, "", tagged), tagged);
        TrackerService tracker({1, 1}, VerifyPolicy::checksum_and_mac(device_key()));
        CHECK(pcd_sync(srv.endpoint(), tracker.endpoint()).outcome == SyncOutcome::Installed);
    }
}

TEST_CASE("swap attack installs forged firmware on a checksum-only tracker") {
    const auto file = official_file();
    const auto forged = forged_from(file);
    VendorServer srv(UpdateManifest::offer(2, "", file), file);
    Interceptor mitm(srv.endpoint(), SwapFirmware{forged});
    TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());

    const auto rep = pcd_sync(mitm.endpoint(), tracker.endpoint());
    CHECK(rep.outcome == SyncOutcome::Installed);
    CHECK(rep.after.app == 0xDEADBEEF);
    CHECK(rep.manifest.size == forged.size());
    CHECK(rep.manifest.checksum == crc32(forged));
    CHECK(rep.manifest.firmware_version == 2);
}

TEST_CASE("swap attack needs an official update to piggyback on") {
    const auto forged = forged_from(official_file());
    VendorServer srv(UpdateManifest::unavailable(), std::nullopt);
    Interceptor mitm(srv.endpoint(), SwapFirmware{forged});
    TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
    CHECK(pcd_sync(mitm.endpoint(), tracker.endpoint()).outcome == SyncOutcome::UpToDate);
    CHECK(tracker.snapshot().installed == InstalledVersions{1, 1});
}

TEST_CASE("fake availability installs without an official update") {
    const auto forged = forged_from(official_file());
    VendorServer srv(UpdateManifest::unavailable(), std::nullopt);
    Interceptor mitm(srv.endpoint(), FakeAvailability{UpdateManifest::offer(0xDEADBEEF, "", forged), forged});
    TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
    const auto rep = pcd_sync(mitm.endpoint(), tracker.endpoint());
    CHECK(rep.outcome == SyncOutcome::Installed);
    CHECK(rep.after.app == 0xDEADBEEF);
}

TEST_CASE("attack completeness: any offline-valid forgery installs") {
    std::mt19937_64 rng(44);
    const auto file = official_file();
    VendorServer srv(UpdateManifest::offer(2, "", file), file);
    for (int i = 0; i < 8; ++i) {
        const auto version = 3 + static_cast<std::uint32_t>(rng() % 1000);
        const auto forged = forged_from(file, version);
        REQUIRE(verify(forged, VerifyPolicy::checksum_only()).accepted());
        const bool fake = i % 2;
        std::optional<Interceptor> mitm;
        if (fake)
            mitm.emplace(srv.endpoint(), FakeAvailability{UpdateManifest::offer(version, "", forged), forged});
        else
            mitm.emplace(srv.endpoint(), SwapFirmware{forged});
        TrackerService tracker({1, 1}, VerifyPolicy::checksum_only());
        const auto rep = pcd_sync(mitm->endpoint(), tracker.endpoint());
        CHECK(rep.outcome == SyncOutcome::Installed);
        CHECK(tracker.snapshot().installed.app == version);
    }
}

TEST_CASE("defense soundness: no implemented strategy installs non-official firmware under MAC") {
    const auto key = device_key();
    const auto tagged = attach_mac(official_file(), key);
    const auto forged = forged_from(tagged);
    Bytes replayed = forged;
    replayed.insert(replayed.end(), tagged.end() - kMacTrailerSize, tagged.end());
    MacKey wrong = key;
    wrong[0] ^= 1;
    const auto self_tagged = attach_mac(forged, wrong);

    VendorServer srv(UpdateManifest::offer(2, "", tagged), tagged);
    for (const auto &evil : {forged, replayed, self_tagged}) {
        for (bool fake : {false, true}) {
            std::optional<Interceptor> mitm;
            if (fake)
                mitm.emplace(srv.endpoint(), FakeAvailability{UpdateManifest::offer(0xDEADBEEF, "", evil), evil});
            else
                mitm.emplace(srv.endpoint(), SwapFirmware{evil});
            TrackerService tracker({1, 1}, VerifyPolicy::checksum_and_mac(key));
            const auto rep = pcd_sync(mitm->endpoint(), tracker.endpoint());
            CHECK(rep.outcome == SyncOutcome::Rejected);
            CHECK(tracker.snapshot().installed == InstalledVersions{1, 1});
        }
    }
}

TEST_CASE("attack demo") {
    SUBCASE("checksum-only") {
        const auto r = run_attack_demo({});
        CHECK(r.expected_outcome);
        CHECK(r.tracker.installed.app == kAttackerVersion);
    }
    SUBCASE("fake availability") {
        const auto r = run_attack_demo({.fake_availability = true});
        CHECK(r.expected_outcome);
        CHECK(r.tracker.installed.app == kAttackerVersion);
    }
    SUBCASE("countermeasure") {
        const auto r = run_attack_demo({.countermeasure_mac = true});
        CHECK(r.expected_outcome);
        CHECK(r.tracker.installed == r.initial);
    }
}
