#include "fwkit/channel.hpp"

#include <array>

namespace fwkit::channel {

const char *to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::Ok:
        return "Ok";
    case SessionStatus::NoTransfer:
        return "NoTransfer";
    case SessionStatus::Overflow:
        return "Overflow";
    case SessionStatus::ChunkTooLarge:
        return "ChunkTooLarge";
    case SessionStatus::Incomplete:
        return "Incomplete";
    case SessionStatus::TooLarge:
        return "TooLarge";
    case SessionStatus::UnknownOpcode:
        return "UnknownOpcode";
    }
    return "?";
}

const char *to_string(TrackerPhase p) {
    switch (p) {
    case TrackerPhase::Idle:
        return "Idle";
    case TrackerPhase::Receiving:
        return "Receiving";
    case TrackerPhase::Validating:
        return "Validating";
    case TrackerPhase::Installed:
        return "Installed";
    case TrackerPhase::Rejected:
        return "Rejected";
    }
    return "?";
}

Tracker::Tracker(InstalledVersions initial, VerifyPolicy policy) : policy_(std::move(policy)) {
    state_.installed = initial;
}

SessionStatus Tracker::begin(std::uint32_t total) {
    if (total > kMaxTransfer)
        return SessionStatus::TooLarge;
    // A new BEGIN silently drops any transfer in flight.
    buffer_.clear();
    buffer_.reserve(total);
    state_.phase = TrackerPhase::Receiving;
    state_.expected_size = total;
    state_.bytes_so_far = 0;
    return SessionStatus::Ok;
}

SessionStatus Tracker::chunk(ByteView payload) {
    if (state_.phase != TrackerPhase::Receiving)
        return SessionStatus::NoTransfer;
    if (payload.size() > kMaxChunk)
        return SessionStatus::ChunkTooLarge;
    if (state_.bytes_so_far + payload.size() > state_.expected_size)
        return SessionStatus::Overflow;
    buffer_.insert(buffer_.end(), payload.begin(), payload.end());
    state_.bytes_so_far += payload.size();
    return SessionStatus::Ok;
}

Tracker::CommitResult Tracker::commit() {
    if (state_.phase != TrackerPhase::Receiving)
        return {SessionStatus::NoTransfer, std::nullopt};
    if (state_.bytes_so_far != state_.expected_size)
        return {SessionStatus::Incomplete, std::nullopt};

    state_.phase = TrackerPhase::Validating;
    auto report = verify(buffer_, policy_);
    if (report.accepted()) {
        state_.installed = *report.versions();
        state_.phase = TrackerPhase::Installed;
    } else {
        state_.phase = TrackerPhase::Rejected;
    }
    state_.last_report = report;
    buffer_.clear();
    return {SessionStatus::Ok, report};
}

// ---------------------------------------------------------------- service

TrackerService::TrackerService(InstalledVersions initial, VerifyPolicy policy, int port)
    : tracker_(initial, std::move(policy)) {
    listener_ = net::listen_loopback(port, port_);
    worker_ = std::thread([this] { serve(); });
}

TrackerService::~TrackerService() { stop(); }

TrackerState TrackerService::snapshot() const {
    std::lock_guard lock(mu_);
    return tracker_.state();
}

void TrackerService::stop() {
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
        listener_.shutdown();
        active_.shutdown();
    }
    if (worker_.joinable())
        worker_.join();
}

void TrackerService::serve() {
    for (;;) {
        net::Socket conn;
        try {
            conn = net::accept(listener_);
        } catch (const net::NetError &) {
            return;
        }
        {
            std::lock_guard lock(mu_);
            if (stopping_)
                return;
            active_ = std::move(conn);
        }
        try {
            while (handle_frame(active_)) {
            }
        } catch (const net::NetError &) {
            // Peer vanished mid-frame; drop the connection.
        }
        std::lock_guard lock(mu_);
        active_.close();
        if (stopping_)
            return;
    }
}

bool TrackerService::handle_frame(net::Socket &conn) {
    std::array<std::uint8_t, 1> opcode{};
    if (!conn.read_exact(opcode))
        return false;

    switch (opcode[0]) {
    case op::kBegin: {
        std::array<std::uint8_t, 4> body{};
        conn.read_exact(body);
        SessionStatus st;
        {
            std::lock_guard lock(mu_);
            st = tracker_.begin(load_le32(body, 0));
        }
        const std::array<std::uint8_t, 2> reply{op::kBeginReply, static_cast<std::uint8_t>(st)};
        conn.write_all(reply);
        return true;
    }
    case op::kChunk: {
        std::array<std::uint8_t, 1> len{};
        conn.read_exact(len);
        Bytes payload(len[0]);
        if (!payload.empty())
            conn.read_exact(payload);
        SessionStatus st;
        {
            std::lock_guard lock(mu_);
            st = tracker_.chunk(payload);
        }
        const std::array<std::uint8_t, 2> reply{op::kChunkReply, static_cast<std::uint8_t>(st)};
        conn.write_all(reply);
        return true;
    }
    case op::kCommit: {
        Tracker::CommitResult r;
        {
            std::lock_guard lock(mu_);
            r = tracker_.commit();
        }
        if (r.status != SessionStatus::Ok) {
            const std::array<std::uint8_t, 2> reply{op::kError, static_cast<std::uint8_t>(r.status)};
            conn.write_all(reply);
        } else {
            const std::array<std::uint8_t, 3> reply{op::kCommitReply, static_cast<std::uint8_t>(r.report->verdict()),
                                                    static_cast<std::uint8_t>(r.report->cause())};
            conn.write_all(reply);
        }
        return true;
    }
    case op::kVersion: {
        InstalledVersions v;
        {
            std::lock_guard lock(mu_);
            v = tracker_.versions();
        }
        std::array<std::uint8_t, 9> reply{op::kVersionReply};
        store_le32(reply, 1, v.app);
        store_le32(reply, 5, v.boot);
        conn.write_all(reply);
        return true;
    }
    default: {
        const std::array<std::uint8_t, 2> reply{op::kError, static_cast<std::uint8_t>(SessionStatus::UnknownOpcode)};
        conn.write_all(reply);
        return false;
    }
    }
}

// ----------------------------------------------------------------- client

TrackerClient::TrackerClient(const net::Endpoint &ep) : sock_(net::connect(ep)) {}

std::uint8_t TrackerClient::expect_status(std::uint8_t reply_op) {
    std::array<std::uint8_t, 2> reply{};
    if (!sock_.read_exact(reply))
        throw net::NetError("tracker closed the connection");
    if (reply[0] != reply_op && reply[0] != op::kError)
        throw net::NetError("unexpected tracker reply " + hex(reply[0], 2));
    return reply[1];
}

SessionStatus TrackerClient::begin(std::uint32_t total) {
    std::array<std::uint8_t, 5> frame{op::kBegin};
    store_le32(frame, 1, total);
    sock_.write_all(frame);
    return static_cast<SessionStatus>(expect_status(op::kBeginReply));
}

SessionStatus TrackerClient::chunk(ByteView payload) {
    if (payload.size() > 0xff)
        throw std::invalid_argument("chunk length does not fit the length byte");
    Bytes frame{op::kChunk, static_cast<std::uint8_t>(payload.size())};
    frame.insert(frame.end(), payload.begin(), payload.end());
    sock_.write_all(frame);
    return static_cast<SessionStatus>(expect_status(op::kChunkReply));
}

Tracker::CommitResult TrackerClient::commit() {
    const std::array<std::uint8_t, 1> frame{op::kCommit};
    sock_.write_all(frame);
    std::array<std::uint8_t, 1> head{};
    if (!sock_.read_exact(head))
        throw net::NetError("tracker closed the connection");
    if (head[0] == op::kError) {
        std::array<std::uint8_t, 1> st{};
        sock_.read_exact(st);
        return {static_cast<SessionStatus>(st[0]), std::nullopt};
    }
    if (head[0] != op::kCommitReply)
        throw net::NetError("unexpected tracker reply " + hex(head[0], 2));
    std::array<std::uint8_t, 2> body{};
    sock_.read_exact(body);
    const auto verdict = static_cast<Verdict>(body[0]);
    const auto cause = static_cast<RejectCause>(body[1]);
    if (verdict == Verdict::Accept)
        return {SessionStatus::Ok, VerificationReport::accept(version())};
    return {SessionStatus::Ok, VerificationReport::reject(cause)};
}

InstalledVersions TrackerClient::version() {
    const std::array<std::uint8_t, 1> frame{op::kVersion};
    sock_.write_all(frame);
    std::array<std::uint8_t, 9> reply{};
    if (!sock_.read_exact(reply) || reply[0] != op::kVersionReply)
        throw net::NetError("bad VERSION? reply");
    return {load_le32(reply, 1), load_le32(reply, 5)};
}

} // namespace fwkit::channel
