#pragma once

/**
 * Uniform connector contract over the two store kinds: a local directory
 * store and an HTTP remote store. Both sides of a migration speak this
 * interface; the test suite runs the same contract checks against both.
 */

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cloudshift/model.hpp"
#include "cloudshift/record.hpp"
#include "cloudshift/shaping.hpp"

namespace cloudshift::store {

inline constexpr std::uint64_t kDefaultSizeCapBytes = 8ull << 30;  // 8 GiB

enum class EndpointKind { local, remote_http };

/// A connector target, parsed from `local:<path>` or `http://host:port`.
struct StoreEndpoint {
    EndpointKind kind = EndpointKind::local;
    std::string location;  // directory path or base URL
    std::optional<std::string> credentials;  // bearer token

    static StoreEndpoint parse(const std::string& uri);
    std::string uri() const;
};

enum class PutMode {
    create,     // fail with conflict if the target already exists
    overwrite,  // replace scalar columns (blob sub-resources persist)
    merge,      // upsert only the provided columns into the row
};

struct StoreOptions {
    std::uint64_t size_cap_bytes = kDefaultSizeCapBytes;
    std::optional<std::string> bearer_token;
    /// When set, requests advance this clock by their shaped cost and no
    /// wall-clock waiting is expected from the peer.
    VirtualClock* virtual_clock = nullptr;
    int timeout_sec = 300;
};

class StoreConnector {
public:
    virtual ~StoreConnector() = default;

    StoreConnector(const StoreConnector&) = delete;
    StoreConnector& operator=(const StoreConnector&) = delete;

    /// Store one row's scalar columns. The row's key must equal the value of
    /// the table's primary-key column whenever a schema is registered.
    virtual PutAck put_row(const RowRecord& row, PutMode mode = PutMode::create) = 0;

    /// Store a batch of rows in one request (one round trip).
    virtual PutAck put_rows(const std::string& table, const std::vector<RowRecord>& rows,
                            PutMode mode) = 0;

    /// Store blob content under an existing row. Returns a handle whose size
    /// and checksum match the input bytes.
    virtual BlobHandle put_blob(const std::string& table, const std::string& key,
                                const std::string& column, std::string_view bytes,
                                PutMode mode = PutMode::create) = 0;

    /// One fetch operation regardless of row count; increments fetch_count
    /// by exactly 1. Requested blob columns arrive inlined and are verified
    /// against their stored checksums.
    virtual std::vector<FetchedRow> fetch(const FetchQuery& query) = 0;

    /// Fetch one blob's bytes; verifies the stored checksum and increments
    /// fetch_count by exactly 1.
    virtual std::string fetch_blob(const BlobHandle& handle) = 0;

    /// Declare a table schema so the store can enforce column max lengths
    /// and the primary-key/key equality on writes.
    virtual void register_table(const model::TableDef& table) = 0;

    /// Remove a table and all its rows/blobs. Missing tables are a no-op.
    virtual void drop_table(const std::string& table) = 0;

    virtual bool ping() = 0;

    /// Fetch operations completed (fetch and fetch_blob count 1 each).
    std::uint64_t fetch_count() const noexcept {
        return fetch_counter_.load(std::memory_order_relaxed);
    }

    /// Put requests completed (a batch put counts 1; one round trip).
    std::uint64_t put_count() const noexcept {
        return put_counter_.load(std::memory_order_relaxed);
    }

    const StoreEndpoint& endpoint() const noexcept { return endpoint_; }

protected:
    explicit StoreConnector(StoreEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

    void count_fetch() noexcept { fetch_counter_.fetch_add(1, std::memory_order_relaxed); }
    void count_put() noexcept { put_counter_.fetch_add(1, std::memory_order_relaxed); }

    StoreEndpoint endpoint_;

private:
    std::atomic<std::uint64_t> fetch_counter_{0};
    std::atomic<std::uint64_t> put_counter_{0};
};

std::unique_ptr<StoreConnector> open_store(const StoreEndpoint& endpoint,
                                           const StoreOptions& options = {});
std::unique_ptr<StoreConnector> open_store(const std::string& uri,
                                           const StoreOptions& options = {});

}  // namespace cloudshift::store
