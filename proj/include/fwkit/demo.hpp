#pragma once

// End-to-end attack scenario: a vendor server publishes an update, an
// on-path adversary substitutes a patched and resigned image with app
// version 0xDEADBEEF, and the PCD relays whatever it receives to the
// tracker.

#include "fwkit/channel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fwkit {

inline constexpr std::uint32_t kAttackerVersion = 0xDEADBEEF;

struct DemoOptions {
    bool countermeasure_mac = false;
    /// Vendor server has nothing to offer; the adversary fabricates the
    /// manifest instead of piggybacking on an official release.
    bool fake_availability = false;
    std::uint64_t seed = 1;
};

struct DemoResult {
    /// Install under checksum-only; reject with versions unchanged under MAC.
    bool expected_outcome = false;
    channel::SyncReport sync;
    channel::TrackerState tracker;
    InstalledVersions initial;
    std::vector<std::string> transcript;
};

DemoResult run_attack_demo(const DemoOptions &opts);

} // namespace fwkit
