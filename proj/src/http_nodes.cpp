#include "fwkit/channel.hpp"

#include <httplib.h>
#include <json.hpp>

#include <stdexcept>

namespace fwkit::channel {

using nlohmann::ordered_json;

namespace {

constexpr const char *kOctetStream = "application/octet-stream";
constexpr const char *kJson = "application/json";

// Starts `svr` on 127.0.0.1 with a single worker so requests are handled
// one at a time. Returns the bound port.
int start_sequential(httplib::Server &svr, std::thread &worker, int port) {
    svr.new_task_queue = [] { return new httplib::ThreadPool(1); };
    svr.set_keep_alive_max_count(1);
    int bound = port == 0 ? svr.bind_to_any_port("127.0.0.1") : (svr.bind_to_port("127.0.0.1", port) ? port : -1);
    if (bound <= 0)
        throw net::NetError("cannot bind HTTP server on 127.0.0.1:" + std::to_string(port));
    worker = std::thread([&svr] { svr.listen_after_bind(); });
    svr.wait_until_ready();
    return bound;
}

void stop_server(httplib::Server &svr, std::thread &worker) {
    svr.stop();
    if (worker.joinable())
        worker.join();
}

std::unique_ptr<httplib::Client> client_for(const net::Endpoint &ep) {
    auto c = std::make_unique<httplib::Client>(ep.host, ep.port);
    c->set_connection_timeout(2);
    c->set_read_timeout(5);
    return c;
}

void check_offer(const UpdateManifest &m, const std::optional<Bytes> &firmware) {
    if (m.available != firmware.has_value())
        throw std::invalid_argument("firmware file must be present exactly when the manifest says available");
    if (!firmware)
        return;
    if (m.size != firmware->size())
        throw std::invalid_argument("manifest size " + std::to_string(m.size) + " != served file size " +
                                    std::to_string(firmware->size()));
    if (m.checksum != crc32(*firmware))
        throw std::invalid_argument("manifest checksum does not match served file");
}

// Path component of an absolute URL; relative input is returned as-is.
std::string url_path(const std::string &url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos)
        return url.empty() ? "/" : url;
    const auto slash = url.find('/', scheme + 3);
    return slash == std::string::npos ? "/" : url.substr(slash);
}

} // namespace

// --------------------------------------------------------------- manifest

UpdateManifest UpdateManifest::offer(std::uint32_t version, std::string url, ByteView file) {
    UpdateManifest m;
    m.available = true;
    m.firmware_version = version;
    m.url = std::move(url);
    m.size = file.size();
    m.checksum = crc32(file);
    return m;
}

std::string UpdateManifest::to_json() const {
    ordered_json j;
    j["available"] = available;
    if (available) {
        j["firmware_version"] = firmware_version;
        j["url"] = url;
        j["size"] = size;
        j["checksum"] = hex(checksum.value);
    }
    return j.dump();
}

UpdateManifest UpdateManifest::from_json(std::string_view text) {
    try {
        const auto j = ordered_json::parse(text);
        UpdateManifest m;
        m.available = j.at("available").get<bool>();
        if (!m.available)
            return m;
        m.firmware_version = j.at("firmware_version").get<std::uint32_t>();
        m.url = j.at("url").get<std::string>();
        m.size = j.at("size").get<std::uint64_t>();
        const Bytes crc = from_hex(j.at("checksum").get<std::string>());
        if (crc.size() != 4)
            throw std::invalid_argument("checksum must be 4 bytes");
        m.checksum.value = (std::uint32_t{crc[0]} << 24) | (std::uint32_t{crc[1]} << 16) |
                           (std::uint32_t{crc[2]} << 8) | crc[3];
        return m;
    } catch (const ordered_json::exception &e) {
        throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
    }
}

// ----------------------------------------------------------------- vendor

struct VendorServer::Impl {
    httplib::Server svr;
    std::thread worker;
    UpdateManifest manifest;
    std::optional<Bytes> firmware;
    int port = 0;
};

VendorServer::VendorServer(UpdateManifest manifest, std::optional<Bytes> firmware, int port)
    : impl_(std::make_unique<Impl>()) {
    check_offer(manifest, firmware);
    impl_->firmware = std::move(firmware);

    auto *impl = impl_.get();
    impl->svr.Get("/manifest", [impl](const httplib::Request &, httplib::Response &res) {
        res.set_content(impl->manifest.to_json(), kJson);
    });
    impl->svr.Get("/firmware", [impl](const httplib::Request &, httplib::Response &res) {
        if (!impl->firmware) {
            res.status = 404;
            return;
        }
        res.set_content(std::string(impl->firmware->begin(), impl->firmware->end()), kOctetStream);
    });

    impl->port = start_sequential(impl->svr, impl->worker, port);
    if (manifest.available && manifest.url.empty())
        manifest.url = endpoint().url("/firmware");
    impl->manifest = std::move(manifest);
}

VendorServer::~VendorServer() { stop(); }

net::Endpoint VendorServer::endpoint() const { return {"127.0.0.1", impl_->port}; }
const UpdateManifest &VendorServer::manifest() const { return impl_->manifest; }
void VendorServer::stop() { stop_server(impl_->svr, impl_->worker); }

// ------------------------------------------------------------ interceptor

const char *attack_name(const Attack &a) {
    struct Visitor {
        const char *operator()(const Passthrough &) const { return "Passthrough"; }
        const char *operator()(const SwapFirmware &) const { return "SwapFirmware"; }
        const char *operator()(const FakeAvailability &) const { return "FakeAvailability"; }
    };
    return std::visit(Visitor{}, a);
}

struct Interceptor::Impl {
    httplib::Server svr;
    std::thread worker;
    std::optional<net::Endpoint> upstream;
    Attack attack;
    int port = 0;
    mutable std::mutex mu;
    std::vector<std::string> log;

    void note(std::string line) {
        std::lock_guard lock(mu);
        log.push_back(std::move(line));
    }

    // Relays a GET verbatim. False when upstream is unreachable.
    bool relay(const std::string &path, httplib::Response &res) {
        if (!upstream) {
            res.status = 502;
            return false;
        }
        auto r = client_for(*upstream)->Get(path);
        if (!r) {
            note("GET " + path + " -> upstream unreachable");
            res.status = 502;
            return false;
        }
        res.status = r->status;
        res.body = r->body;
        if (r->has_header("Content-Type"))
            res.set_header("Content-Type", r->get_header_value("Content-Type"));
        return true;
    }

    void on_manifest(httplib::Response &res) {
        if (auto *fake = std::get_if<FakeAvailability>(&attack)) {
            res.set_content(fake->manifest.to_json(), kJson);
            note("GET /manifest -> fabricated " + fake->manifest.to_json());
            return;
        }
        if (!relay("/manifest", res))
            return;
        auto *swap = std::get_if<SwapFirmware>(&attack);
        if (!swap || res.status != 200) {
            note("GET /manifest -> relayed");
            return;
        }
        UpdateManifest m;
        try {
            m = UpdateManifest::from_json(res.body);
        } catch (const std::invalid_argument &) {
            note("GET /manifest -> relayed (unparseable)");
            return;
        }
        if (!m.available) {
            note("GET /manifest -> relayed, no official update to piggyback on");
            return;
        }
        m.size = swap->file.size();
        m.checksum = crc32(swap->file);
        res.set_content(m.to_json(), kJson);
        note("GET /manifest -> relayed with size/checksum rewritten for substitute");
    }

    void on_firmware(httplib::Response &res) {
        const Bytes *substitute = nullptr;
        if (auto *swap = std::get_if<SwapFirmware>(&attack))
            substitute = &swap->file;
        else if (auto *fake = std::get_if<FakeAvailability>(&attack))
            substitute = &fake->file;
        if (!substitute) {
            relay("/firmware", res);
            note("GET /firmware -> relayed");
            return;
        }
        res.set_content(std::string(substitute->begin(), substitute->end()), kOctetStream);
        note("GET /firmware -> substituted " + std::to_string(substitute->size()) + " bytes");
    }
};

Interceptor::Interceptor(std::optional<net::Endpoint> upstream, Attack attack, int port)
    : impl_(std::make_unique<Impl>()) {
    auto *impl = impl_.get();
    impl->upstream = std::move(upstream);
    impl->attack = std::move(attack);
    if (!impl->upstream && !std::holds_alternative<FakeAvailability>(impl->attack))
        throw std::invalid_argument(std::string(attack_name(impl->attack)) + " needs an upstream server");

    impl->svr.Get("/manifest", [impl](const httplib::Request &, httplib::Response &res) { impl->on_manifest(res); });
    impl->svr.Get("/firmware", [impl](const httplib::Request &, httplib::Response &res) { impl->on_firmware(res); });
    impl->port = start_sequential(impl->svr, impl->worker, port);

    if (auto *fake = std::get_if<FakeAvailability>(&impl->attack)) {
        auto &m = fake->manifest;
        m.available = true;
        if (m.url.empty())
            m.url = endpoint().url("/firmware");
        m.size = fake->file.size();
        m.checksum = crc32(fake->file);
    }
}

Interceptor::~Interceptor() { stop(); }

net::Endpoint Interceptor::endpoint() const { return {"127.0.0.1", impl_->port}; }

std::vector<std::string> Interceptor::log() const {
    std::lock_guard lock(impl_->mu);
    return impl_->log;
}

void Interceptor::stop() { stop_server(impl_->svr, impl_->worker); }

// -------------------------------------------------------------------- PCD

const char *to_string(SyncOutcome o) {
    switch (o) {
    case SyncOutcome::UpToDate:
        return "up-to-date";
    case SyncOutcome::Installed:
        return "installed";
    case SyncOutcome::Rejected:
        return "rejected";
    case SyncOutcome::Failed:
        return "failed";
    }
    return "?";
}

SyncReport pcd_sync(const net::Endpoint &server, const net::Endpoint &tracker) {
    SyncReport rep;
    auto say = [&rep](std::string line) { rep.transcript.push_back("pcd: " + std::move(line)); };
    auto failed = [&](std::string why) {
        rep.outcome = SyncOutcome::Failed;
        rep.error = why;
        say("error: " + why);
        return rep;
    };

    auto http = client_for(server);
    auto res = http->Get("/manifest");
    if (!res)
        return failed("GET /manifest: " + httplib::to_string(res.error()));
    if (res->status != 200)
        return failed("GET /manifest: HTTP " + std::to_string(res->status));
    try {
        rep.manifest = UpdateManifest::from_json(res->body);
    } catch (const std::invalid_argument &e) {
        return failed(e.what());
    }
    say("GET /manifest -> " + res->body);

    try {
        TrackerClient link(tracker);
        rep.before = link.version();
        rep.after = rep.before;
        say("VERSION? -> app=" + hex(rep.before.app) + " boot=" + hex(rep.before.boot));

        if (!rep.manifest.available || rep.manifest.firmware_version <= rep.before.app) {
            rep.outcome = SyncOutcome::UpToDate;
            say("up-to-date");
            return rep;
        }

        const std::string path = url_path(rep.manifest.url);
        auto fw = http->Get(path);
        if (!fw)
            return failed("GET " + path + ": " + httplib::to_string(fw.error()));
        if (fw->status != 200)
            return failed("GET " + path + ": HTTP " + std::to_string(fw->status));
        const ByteView file = as_bytes(fw->body);
        say("GET " + path + " -> " + std::to_string(file.size()) + " bytes (not checked)");
        if (file.size() > kMaxTransfer)
            return failed("firmware too large for the tracker link");

        if (auto st = link.begin(static_cast<std::uint32_t>(file.size())); st != SessionStatus::Ok)
            return failed(std::string("BEGIN: ") + to_string(st));
        for (std::size_t at = 0; at < file.size(); at += kMaxChunk) {
            const auto piece = file.subspan(at, std::min(kMaxChunk, file.size() - at));
            if (auto st = link.chunk(piece); st != SessionStatus::Ok)
                return failed(std::string("CHUNK at ") + std::to_string(at) + ": " + to_string(st));
            rep.bytes_sent += piece.size();
            ++rep.chunks;
        }
        say("streamed " + std::to_string(rep.bytes_sent) + " bytes in " + std::to_string(rep.chunks) + " chunks");

        auto commit = link.commit();
        if (commit.status != SessionStatus::Ok)
            return failed(std::string("COMMIT: ") + to_string(commit.status));
        rep.result = commit.report;
        rep.after = link.version();
        say("COMMIT -> " + rep.result->summary());
        say("VERSION? -> app=" + hex(rep.after.app) + " boot=" + hex(rep.after.boot));
        rep.outcome = rep.result->accepted() ? SyncOutcome::Installed : SyncOutcome::Rejected;
        return rep;
    } catch (const net::NetError &e) {
        return failed(std::string("tracker link: ") + e.what());
    }
}

} // namespace fwkit::channel
