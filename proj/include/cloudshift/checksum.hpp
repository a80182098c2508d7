#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace cloudshift {

/**
 * Streaming 64-bit FNV-1a over raw bytes.
 *
 * This is the content checksum used to verify every row blob after a
 * migration: both store kinds compute it with the same published constants,
 * so a value computed on one side is comparable on the other.
 */
class Fnv1a64 {
public:
    static constexpr std::uint64_t kOffsetBasis = 14695981039346656037ull;
    static constexpr std::uint64_t kPrime = 1099511628211ull;

    void update(const void* data, std::size_t len) noexcept {
        const auto* bytes = static_cast<const unsigned char*>(data);
        std::uint64_t h = state_;
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= kPrime;
        }
        state_ = h;
    }

    void update(std::string_view bytes) noexcept { update(bytes.data(), bytes.size()); }

    std::uint64_t value() const noexcept { return state_; }

private:
    std::uint64_t state_ = kOffsetBasis;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Streaming checksum of a file's contents. Throws Error{io} on read failure.
std::uint64_t fnv1a64_file(const std::string& path);

/// 16 lowercase hex digits, zero padded.
std::string checksum_hex(std::uint64_t value);

/// Inverse of checksum_hex. Throws Error{parse} on malformed input.
std::uint64_t parse_checksum_hex(std::string_view hex);

}  // namespace cloudshift
