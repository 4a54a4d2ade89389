#pragma once

// Device-side acceptance logic. Checks run in a fixed order and the first
// failure is reported:
//
//   structure -> table checksum -> app image -> boot image -> MAC (policy)
//
// verify() never throws on malformed input; a device can only refuse.

#include "fwkit/bytes.hpp"
#include "fwkit/mac.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fwkit {

enum class VerifyMode : std::uint8_t { ChecksumOnly, ChecksumAndMac };

class VerifyPolicy {
  public:
    static VerifyPolicy checksum_only() { return VerifyPolicy(VerifyMode::ChecksumOnly, std::nullopt); }
    static VerifyPolicy checksum_and_mac(const MacKey &key) { return VerifyPolicy(VerifyMode::ChecksumAndMac, key); }

    VerifyMode mode() const { return mode_; }
    const std::optional<MacKey> &mac_key() const { return key_; }

  private:
    VerifyPolicy(VerifyMode m, std::optional<MacKey> k) : mode_(m), key_(std::move(k)) {}

    VerifyMode mode_;
    std::optional<MacKey> key_;
};

enum class Verdict : std::uint8_t { Accept = 0, Reject = 1 };

// Numeric values double as the tracker wire protocol's cause byte.
enum class RejectCause : std::uint8_t {
    None = 0,
    BadTableVersion = 1,
    BadTableLength = 2,
    TableChecksumMismatch = 3,
    AppImageChecksumMismatch = 4,
    BootImageChecksumMismatch = 5,
    BoundsError = 6,
    MacMissing = 7,
    MacMismatch = 8,
    BadIdentifier = 9,
};

const char *to_string(RejectCause c);
const char *to_string(Verdict v);

struct InstalledVersions {
    std::uint32_t app = 0;
    std::uint32_t boot = 0;

    friend bool operator==(const InstalledVersions &, const InstalledVersions &) = default;
};

class VerificationReport {
  public:
    static VerificationReport accept(InstalledVersions v) { return {Verdict::Accept, RejectCause::None, v}; }
    static VerificationReport reject(RejectCause c) { return {Verdict::Reject, c, std::nullopt}; }

    Verdict verdict() const { return verdict_; }
    RejectCause cause() const { return cause_; }
    const std::optional<InstalledVersions> &versions() const { return versions_; }
    bool accepted() const { return verdict_ == Verdict::Accept; }

    /// `ACCEPT app=0x... boot=0x...` or `REJECT <cause>`.
    std::string summary() const;

    friend bool operator==(const VerificationReport &, const VerificationReport &) = default;

  private:
    VerificationReport(Verdict v, RejectCause c, std::optional<InstalledVersions> ver)
        : verdict_(v), cause_(c), versions_(ver) {}

    Verdict verdict_;
    RejectCause cause_;
    std::optional<InstalledVersions> versions_;
};

VerificationReport verify(ByteView bytes, const VerifyPolicy &policy);

} // namespace fwkit
