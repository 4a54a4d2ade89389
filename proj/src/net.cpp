#include "fwkit/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace fwkit::net {

namespace {

[[noreturn]] void fail(const std::string &what) { throw NetError(what + ": " + std::strerror(errno)); }

sockaddr_in loopback(int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

} // namespace

Socket &Socket::operator=(Socket &&o) noexcept {
    if (this != &o) {
        close();
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() {
    if (fd_ >= 0)
        ::shutdown(fd_, SHUT_RDWR);
}

void Socket::write_all(ByteView data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            fail("send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

bool Socket::read_exact(std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            fail("recv");
        }
        if (n == 0) {
            if (got == 0)
                return false;
            throw NetError("connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

Socket listen_loopback(int port, int &bound_port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s)
        fail("socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    auto addr = loopback(port);
    if (::bind(s.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof addr) < 0)
        fail("bind 127.0.0.1:" + std::to_string(port));
    if (::listen(s.fd(), 8) < 0)
        fail("listen");
    socklen_t len = sizeof addr;
    ::getsockname(s.fd(), reinterpret_cast<sockaddr *>(&addr), &len);
    bound_port = ntohs(addr.sin_port);
    return s;
}

Socket accept(const Socket &listener) {
    for (;;) {
        const int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return Socket(fd);
        }
        if (errno == EINTR)
            continue;
        fail("accept");
    }
}

Socket connect(const Endpoint &ep) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s)
        fail("socket");
    sockaddr_in addr = loopback(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1)
        throw NetError("not an IPv4 address: " + ep.host);
    if (::connect(s.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof addr) < 0)
        fail("connect " + ep.host + ":" + std::to_string(ep.port));
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

} // namespace fwkit::net
