#include "fwkit/bytes.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace fwkit {

std::string hex(std::uint64_t v, int digits) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%0*llx", digits, static_cast<unsigned long long>(v));
    return buf;
}

std::string to_hex(ByteView b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

Bytes from_hex(std::string_view text) {
    std::string digits;
    for (char c : text)
        if (c != ' ' && c != '\n' && c != '\r' && c != '\t')
            digits.push_back(c);
    std::string_view d = digits;
    if (d.starts_with("0x") || d.starts_with("0X"))
        d.remove_prefix(2);
    if (d.size() % 2 != 0)
        throw std::invalid_argument("hex string has odd length");

    Bytes out;
    out.reserve(d.size() / 2);
    for (std::size_t i = 0; i < d.size(); i += 2) {
        int hi = nibble(d[i]), lo = nibble(d[i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

Bytes read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path &path, ByteView data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot create " + path.string());
    out.write(reinterpret_cast<const char *>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace fwkit
