#include "fwkit/demo.hpp"

#include "fwkit/container.hpp"
#include "fwkit/fixture.hpp"
#include "fwkit/mac.hpp"
#include "fwkit/patch.hpp"

#include <random>

namespace fwkit {

using namespace channel;

namespace {

constexpr InstalledVersions kInitial{1, 1};
constexpr std::uint32_t kOfficialAppVersion = 2;

} // namespace

DemoResult run_attack_demo(const DemoOptions &opts) {
    DemoResult out;
    out.initial = kInitial;
    auto say = [&out](const std::string &who, const std::string &line) { out.transcript.push_back(who + ": " + line); };
    std::mt19937_64 rng(opts.seed);

    // Vendor side.
    UpdateFixtureSpec spec;
    spec.seed = opts.seed;
    spec.app_version = kOfficialAppVersion;
    spec.boot_version = kInitial.boot;
    Bytes official = serialize_update(gen_update_fixture(spec));

    std::optional<MacKey> device_key;
    if (opts.countermeasure_mac) {
        device_key.emplace();
        for (auto &b : *device_key)
            b = static_cast<std::uint8_t>(rng());
        official = attach_mac(official, *device_key);
        say("vendor", "tagged official update with the tracker's per-device key");
    }
    const auto policy =
        device_key ? VerifyPolicy::checksum_and_mac(*device_key) : VerifyPolicy::checksum_only();

    TrackerService tracker(kInitial, policy);
    say("tracker", std::string("policy ") + (device_key ? "ChecksumAndMac" : "ChecksumOnly") + ", installed app=" +
                       hex(kInitial.app) + " boot=" + hex(kInitial.boot));

    std::optional<VendorServer> server;
    if (opts.fake_availability) {
        server.emplace(UpdateManifest::unavailable(), std::nullopt);
        say("vendor", "serving manifest: no update available");
    } else {
        server.emplace(UpdateManifest::offer(kOfficialAppVersion, "", official), official);
        say("vendor", "serving official update v" + std::to_string(kOfficialAppVersion) + " (" +
                          std::to_string(official.size()) + " bytes)");
    }

    // Adversary: patch a copy of a published image, bump the version, resign.
    FirmwareUpdate evil = parse_update_prefix(official).update;
    const std::string marker = "PWNED!";
    const std::size_t at = rng() % (evil.app_payload.size() - marker.size());
    evil = patch_bytes(std::move(evil), ImageSlot::App, at, as_bytes(marker));
    evil = set_version(std::move(evil), ImageSlot::App, kAttackerVersion);
    evil = resign(std::move(evil));
    Bytes evil_file = serialize_update(evil);
    say("adversary", "patched app payload at " + hex(at) + ", set app version " + hex(kAttackerVersion) +
                         ", resigned");
    if (device_key && (rng() & 1)) {
        // Without the key the best an adversary can do is replay the stale tag.
        evil_file.insert(evil_file.end(), official.end() - kMacTrailerSize, official.end());
        say("adversary", "re-attached the official MAC trailer");
    }
    {
        const auto offline = verify(evil_file, VerifyPolicy::checksum_only());
        say("adversary", "offline checksum-only check of forged file: " + offline.summary());
    }

    Attack attack = SwapFirmware{evil_file};
    if (opts.fake_availability)
        attack = FakeAvailability{UpdateManifest::offer(kAttackerVersion, "", evil_file), evil_file};
    Interceptor mitm(server->endpoint(), std::move(attack));
    say("adversary", std::string("interceptor running, attack ") + (opts.fake_availability ? "FakeAvailability"
                                                                                           : "SwapFirmware"));

    out.sync = pcd_sync(mitm.endpoint(), tracker.endpoint());
    for (const auto &line : mitm.log())
        say("interceptor", line);
    out.transcript.insert(out.transcript.end(), out.sync.transcript.begin(), out.sync.transcript.end());

    out.tracker = tracker.snapshot();
    say("tracker", std::string("phase ") + to_string(out.tracker.phase) + ", installed app=" +
                       hex(out.tracker.installed.app) + " boot=" + hex(out.tracker.installed.boot));

    if (!device_key) {
        out.expected_outcome = out.sync.outcome == SyncOutcome::Installed &&
                               out.tracker.phase == TrackerPhase::Installed &&
                               out.sync.after.app == kAttackerVersion && out.tracker.installed.app == kAttackerVersion;
    } else {
        const bool mac_reject = out.sync.result && (out.sync.result->cause() == RejectCause::MacMissing ||
                                                    out.sync.result->cause() == RejectCause::MacMismatch);
        out.expected_outcome = out.sync.outcome == SyncOutcome::Rejected && mac_reject &&
                               out.tracker.phase == TrackerPhase::Rejected && out.sync.after == kInitial &&
                               out.tracker.installed == kInitial;
    }
    return out;
}

} // namespace fwkit
