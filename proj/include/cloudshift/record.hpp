#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cloudshift::store {

/// Scalar column value: text or 64-bit signed integer.
using Scalar = std::variant<std::string, std::int64_t>;

bool is_text(const Scalar& v) noexcept;
bool is_integer(const Scalar& v) noexcept;

/// Encoded size used by length checks and bytes-moved accounting:
/// UTF-8 byte count for text, 8 for integers.
std::uint64_t scalar_byte_length(const Scalar& v) noexcept;

std::string scalar_to_display(const Scalar& v);

struct BlobHandle {
    std::string table;
    std::string key;
    std::string column;
    std::uint64_t size_bytes = 0;
    std::uint64_t checksum = 0;  // FNV-1a 64 over raw bytes

    friend bool operator==(const BlobHandle&, const BlobHandle&) = default;
};

struct RowRecord {
    std::string table;
    std::string key;  // equals the primary-key column's value
    std::map<std::string, Scalar> columns;
    std::map<std::string, BlobHandle> blob_refs;

    friend bool operator==(const RowRecord&, const RowRecord&) = default;
};

struct PutAck {
    std::int64_t timestamp_ms = 0;  // server-assigned, epoch milliseconds
};

struct FetchQuery {
    std::string table;
    /// Keys to fetch; std::nullopt selects every row (ordered by key).
    std::optional<std::vector<std::string>> keys;
    /// Blob columns whose content should be inlined in the result.
    std::vector<std::string> include_blobs;
};

struct FetchedRow {
    RowRecord row;
    std::map<std::string, std::string> blob_content;  // column -> raw bytes
};

}  // namespace cloudshift::store
