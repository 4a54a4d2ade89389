#pragma once

// Minimal blocking TCP on loopback, enough for the tracker link.

#include "fwkit/bytes.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace fwkit::net {

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;

    std::string url(std::string_view path = "") const {
        return "http://" + host + ":" + std::to_string(port) + std::string(path);
    }
};

class NetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Socket {
  public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket &operator=(Socket &&o) noexcept;
    Socket(const Socket &) = delete;
    Socket &operator=(const Socket &) = delete;
    ~Socket() { close(); }

    int fd() const { return fd_; }
    explicit operator bool() const { return fd_ >= 0; }
    void close();
    /// Wakes any thread blocked on this socket without releasing the fd.
    void shutdown();

    void write_all(ByteView data);
    /// False on orderly EOF before any byte was read; throws on a short
    /// read or socket error.
    bool read_exact(std::span<std::uint8_t> out);

  private:
    int fd_ = -1;
};

/// Listening socket on 127.0.0.1; port 0 picks an ephemeral port.
Socket listen_loopback(int port, int &bound_port);
Socket accept(const Socket &listener);
Socket connect(const Endpoint &ep);

} // namespace fwkit::net
