#include "cloudshift/checksum.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "cloudshift/errors.hpp"

namespace cloudshift {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::invalid_model: return "invalid_model";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::conflict: return "conflict";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::connection: return "connection";
        case ErrorKind::cap_exceeded: return "cap_exceeded";
        case ErrorKind::length_violation: return "length_violation";
        case ErrorKind::checksum_mismatch: return "checksum_mismatch";
        case ErrorKind::unauthorized: return "unauthorized";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    Fnv1a64 h;
    h.update(bytes);
    return h.value();
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::io, "cannot open file: " + path);
    }
    Fnv1a64 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) {
        raise(ErrorKind::io, "read failure: " + path);
    }
    return h.value();
}

std::string checksum_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf, 16);
}

std::uint64_t parse_checksum_hex(std::string_view hex) {
    if (hex.size() != 16) {
        raise(ErrorKind::parse, "checksum must be 16 hex digits");
    }
    std::uint64_t v = 0;
    for (char c : hex) {
        v <<= 4;
        if (c >= '0' && c <= '9') {
            v |= static_cast<std::uint64_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v |= static_cast<std::uint64_t>(c - 'a' + 10);
        } else if (c >= 'A' && c <= 'F') {
            v |= static_cast<std::uint64_t>(c - 'A' + 10);
        } else {
            raise(ErrorKind::parse, "invalid hex digit in checksum");
        }
    }
    return v;
}

}  // namespace cloudshift
