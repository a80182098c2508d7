#pragma once

/**
 * Migration planning and execution: moves rows and blobs from a source
 * endpoint to a destination endpoint under a loading strategy (lazy,
 * explicit, eager) and a method (mapped orm transfer vs column-wise
 * baseline), timing each phase per item in integer milliseconds.
 */

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cloudshift/model.hpp"
#include "cloudshift/store.hpp"

namespace cloudshift::engine {

enum class Method { baseline, orm };
enum class LoadKind { lazy, explicit_load, eager };
enum class Category { image_large, image_small, text_large, text_small };

const char* to_string(Method m) noexcept;
const char* to_string(LoadKind k) noexcept;
const char* to_string(Category c) noexcept;
std::optional<Method> parse_method(std::string_view s) noexcept;
std::optional<LoadKind> parse_load_kind(std::string_view s) noexcept;
/// Accepts full names and the short letters a (image_large) through d
/// (text_small).
std::optional<Category> parse_category(std::string_view s) noexcept;
bool is_image_category(Category c) noexcept;

struct LoadingStrategy {
    LoadKind kind = LoadKind::eager;
    /// Explicit loading: the blob-column set fetched by the one batch Load
    /// call. Columns outside the set fall back to per-item lazy fetches.
    std::vector<std::string> load_columns;
};

struct PlanOptions {
    Method method = Method::orm;
    std::optional<LoadingStrategy> strategy;  // default: eager (orm), lazy (baseline)
    std::optional<int> batch_size;            // default: 25 (orm), forced 1 (baseline)
    std::optional<Category> category;
    std::uint64_t size_cap_bytes = store::kDefaultSizeCapBytes;
    bool strict = false;
    int parallel = 1;
};

struct MigrationPlan {
    store::StoreEndpoint source;
    store::StoreEndpoint destination;
    model::ModelBundle model;
    std::string entity;
    Method method = Method::orm;
    LoadingStrategy strategy;
    int batch_size = 25;
    std::optional<Category> category;
    std::uint64_t size_cap_bytes = store::kDefaultSizeCapBytes;
    bool strict = false;
    int parallel = 1;
};

/// One input file destined for one row: its payload lands in `blob_column`,
/// the other scalar properties come from `scalars`.
struct SourceItem {
    std::string id;
    std::string path;
    std::uint64_t size_bytes = 0;
    std::string blob_column;
    std::map<std::string, store::Scalar> scalars;  // property name -> value
};

struct ItemResult {
    std::string key;
    std::uint64_t bytes_moved = 0;
    std::int64_t save_ms = 0;
    std::int64_t transfer_ms = 0;
    std::int64_t verify_ms = 0;  // verification reads, kept out of transfer_ms
    bool verified = false;
    std::optional<std::string> error;
};

struct MigrationTotals {
    std::uint64_t bytes_moved = 0;
    std::int64_t save_ms = 0;
    std::int64_t transfer_ms = 0;
    std::int64_t verify_ms = 0;
    std::size_t items = 0;
    std::size_t verified_count = 0;
    std::size_t failed_count = 0;
};

struct MigrationResult {
    std::vector<ItemResult> items;
    MigrationTotals totals;

    void recompute_totals();
    bool all_verified() const noexcept;
    std::string to_json(int indent = 2) const;
};

/**
 * Validate and freeze a migration plan. Throws when the mapping has
 * violations (attached to the message), an endpoint is unreachable, or the
 * baseline method is combined with a non-lazy strategy or a batch size
 * other than 1.
 */
MigrationPlan plan_migration(const model::ModelBundle& bundle,
                             const store::StoreEndpoint& source,
                             const store::StoreEndpoint& destination, const PlanOptions& options,
                             const std::string& entity = "");

/**
 * A plan bound to live connectors. save_phase stores items into the
 * source, transfer_phase reproduces them at the destination and verifies
 * checksums, execute runs both.
 */
class MigrationRun {
public:
    MigrationRun(MigrationPlan plan, store::StoreOptions store_options = {});
    ~MigrationRun();

    MigrationRun(const MigrationRun&) = delete;
    MigrationRun& operator=(const MigrationRun&) = delete;

    /// Store each item in the source (row + blob), measuring save_ms per
    /// item. Items above the size cap are rejected before any store call.
    std::vector<ItemResult> save_phase(const std::vector<SourceItem>& items);

    /// Transfer the given items (saved earlier in this run or a prior one).
    MigrationResult transfer_items(const std::vector<SourceItem>& items);

    /// Transfer every row already present in the source table. Adds one
    /// key-discovery fetch up front.
    MigrationResult transfer_phase();

    /// save_phase then transfer, merged into one per-item result.
    MigrationResult execute(const std::vector<SourceItem>& items);

    store::StoreConnector& source() noexcept { return *source_; }
    store::StoreConnector& destination() noexcept { return *destination_; }
    const MigrationPlan& plan() const noexcept { return plan_; }

private:
    struct ItemWork;

    void register_schemas();
    std::vector<std::string> dest_blob_columns() const;
    void transfer_batch(std::vector<ItemWork>& batch);
    void transfer_item_degraded(ItemWork& item);
    void verify_batch(std::vector<ItemWork>& batch);
    MigrationResult run_transfer(std::vector<ItemWork> work, std::int64_t discovery_ms);

    MigrationPlan plan_;
    store::StoreOptions store_options_;
    std::unique_ptr<store::StoreConnector> source_;
    std::unique_ptr<store::StoreConnector> destination_;
    std::string table_;
    const model::TableDef* table_def_ = nullptr;  // owned by plan_.model.storage
    bool schemas_registered_ = false;
};

/// Exact integer split of a shared duration across n items: the first
/// (total mod n) items receive one extra millisecond so the shares sum to
/// the measured total.
std::vector<std::int64_t> split_evenly(std::int64_t total, std::size_t n);

std::string read_file_bytes(const std::string& path);

}  // namespace cloudshift::engine
