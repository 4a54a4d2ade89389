#pragma once

// Desk-scale update channel: vendor server, on-path interceptor, PCD
// (phone) client and tracker, talking over loopback.
//
//   PCD --HTTP--> [interceptor] --HTTP--> vendor server
//    |
//    +--framed TCP (stands in for BLE)--> tracker
//
// The PCD resolves the manifest URL's path against the endpoint it was
// given for the vendor host. An on-path adversary is modelled by handing
// the PCD the interceptor's endpoint instead of the server's.
//
// Tracker wire protocol, little-endian:
//
//   0x01 BEGIN  u32 total        -> 0x81 u8 status
//   0x02 CHUNK  u8 len, payload  -> 0x82 u8 status      (len <= 20)
//   0x03 COMMIT                  -> 0x83 u8 verdict, u8 cause
//                                   or 0xff u8 status on a protocol error
//   0x04 VERSION?                -> 0x84 u32 app, u32 boot
//   anything else                -> 0xff u8 status, connection closed

#include "fwkit/checksum.hpp"
#include "fwkit/net.hpp"
#include "fwkit/verify.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace fwkit::channel {

struct UpdateManifest {
    bool available = false;
    std::uint32_t firmware_version = 0;
    std::string url;
    std::uint64_t size = 0;
    Crc32Value checksum{};

    static UpdateManifest unavailable() { return {}; }
    static UpdateManifest offer(std::uint32_t version, std::string url, ByteView file);

    /// `{"available":false}` when unavailable, otherwise all five fields
    /// with the checksum as "0x%08x".
    std::string to_json() const;
    /// Throws std::invalid_argument on malformed documents.
    static UpdateManifest from_json(std::string_view text);

    friend bool operator==(const UpdateManifest &, const UpdateManifest &) = default;
};

// ---------------------------------------------------------------- tracker

inline constexpr std::size_t kMaxChunk = 20;
inline constexpr std::uint32_t kMaxTransfer = 16u << 20;

namespace op {
inline constexpr std::uint8_t kBegin = 0x01;
inline constexpr std::uint8_t kChunk = 0x02;
inline constexpr std::uint8_t kCommit = 0x03;
inline constexpr std::uint8_t kVersion = 0x04;
inline constexpr std::uint8_t kBeginReply = 0x81;
inline constexpr std::uint8_t kChunkReply = 0x82;
inline constexpr std::uint8_t kCommitReply = 0x83;
inline constexpr std::uint8_t kVersionReply = 0x84;
inline constexpr std::uint8_t kError = 0xff;
} // namespace op

enum class SessionStatus : std::uint8_t {
    Ok = 0,
    NoTransfer = 1,    ///< CHUNK or COMMIT without BEGIN
    Overflow = 2,      ///< CHUNK past the announced total
    ChunkTooLarge = 3, ///< CHUNK longer than 20 bytes
    Incomplete = 4,    ///< COMMIT before the announced total arrived
    TooLarge = 5,      ///< BEGIN total above kMaxTransfer
    UnknownOpcode = 6,
};

const char *to_string(SessionStatus s);

enum class TrackerPhase : std::uint8_t { Idle, Receiving, Validating, Installed, Rejected };

const char *to_string(TrackerPhase p);

struct TrackerState {
    TrackerPhase phase = TrackerPhase::Idle;
    std::uint32_t expected_size = 0;
    std::size_t bytes_so_far = 0;
    InstalledVersions installed;
    std::optional<VerificationReport> last_report;
};

/// Device-side update state machine, independent of transport. Versions
/// change only when a COMMIT verifies; protocol errors leave the state
/// untouched.
class Tracker {
  public:
    Tracker(InstalledVersions initial, VerifyPolicy policy);

    SessionStatus begin(std::uint32_t total);
    SessionStatus chunk(ByteView payload);

    struct CommitResult {
        SessionStatus status = SessionStatus::Ok;
        std::optional<VerificationReport> report;
    };
    CommitResult commit();

    InstalledVersions versions() const { return state_.installed; }
    const TrackerState &state() const { return state_; }

  private:
    VerifyPolicy policy_;
    TrackerState state_;
    Bytes buffer_;
};

/// Serves one tracker connection at a time on a loopback port.
class TrackerService {
  public:
    TrackerService(InstalledVersions initial, VerifyPolicy policy, int port = 0);
    ~TrackerService();
    TrackerService(const TrackerService &) = delete;
    TrackerService &operator=(const TrackerService &) = delete;

    net::Endpoint endpoint() const { return {"127.0.0.1", port_}; }
    TrackerState snapshot() const;
    void stop();

  private:
    void serve();
    bool handle_frame(net::Socket &conn);

    mutable std::mutex mu_;
    Tracker tracker_;
    net::Socket listener_;
    net::Socket active_;
    int port_ = 0;
    bool stopping_ = false;
    std::thread worker_;
};

/// PCD side of the tracker link.
class TrackerClient {
  public:
    explicit TrackerClient(const net::Endpoint &ep);

    SessionStatus begin(std::uint32_t total);
    SessionStatus chunk(ByteView payload);
    Tracker::CommitResult commit();
    InstalledVersions version();

  private:
    std::uint8_t expect_status(std::uint8_t reply_op);

    net::Socket sock_;
};

// ------------------------------------------------------------ HTTP nodes

/// Plain-HTTP vendor server: GET /manifest, GET /firmware.
class VendorServer {
  public:
    /// `firmware` must be present iff the manifest says available; size
    /// and checksum must match it. An empty URL is filled in with this
    /// server's /firmware address.
    VendorServer(UpdateManifest manifest, std::optional<Bytes> firmware, int port = 0);
    ~VendorServer();

    net::Endpoint endpoint() const;
    const UpdateManifest &manifest() const;
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Passthrough {};
struct SwapFirmware {
    Bytes file;
};
struct FakeAvailability {
    UpdateManifest manifest;
    Bytes file;
};
using Attack = std::variant<Passthrough, SwapFirmware, FakeAvailability>;

const char *attack_name(const Attack &a);

/// On-path HTTP adversary sitting between the PCD and the vendor server.
/// Substituted responses carry size/checksum fields matching the
/// substitute, since the adversary controls the whole response.
class Interceptor {
  public:
    Interceptor(std::optional<net::Endpoint> upstream, Attack attack, int port = 0);
    ~Interceptor();

    net::Endpoint endpoint() const;
    std::vector<std::string> log() const;
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ------------------------------------------------------------------- PCD

enum class SyncOutcome { UpToDate, Installed, Rejected, Failed };

const char *to_string(SyncOutcome o);

struct SyncReport {
    SyncOutcome outcome = SyncOutcome::Failed;
    UpdateManifest manifest;
    InstalledVersions before;
    InstalledVersions after;
    std::size_t bytes_sent = 0;
    std::size_t chunks = 0;
    std::optional<VerificationReport> result;
    std::string error;
    std::vector<std::string> transcript;
};

/// Checks the manifest, downloads newer firmware and streams it to the
/// tracker in 20-byte chunks. Performs no verification of its own.
SyncReport pcd_sync(const net::Endpoint &server, const net::Endpoint &tracker);

} // namespace fwkit::channel
