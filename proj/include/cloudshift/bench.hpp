#pragma once

/**
 * Benchmark harness: deterministic corpus generation, paired baseline/orm
 * migrations over the four input categories, per-item efficiency deltas
 * (save, transfer, total), success/failure classification, and aggregation.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudshift/model.hpp"
#include "cloudshift/shaping.hpp"
#include "cloudshift/store.hpp"
#include "cloudshift/transfer.hpp"

namespace cloudshift::bench {

using engine::Category;
using engine::Method;

// ---------------------------------------------------------------------------
// Timing and efficiency
// ---------------------------------------------------------------------------

struct TimingRecord {
    std::string item_id;
    Category category = Category::text_small;
    Method method = Method::orm;
    std::int64_t save_ms = 0;
    std::int64_t transfer_ms = 0;
    std::int64_t total_ms = 0;  // always save_ms + transfer_ms exactly
};

TimingRecord make_timing_record(const std::string& item_id, Category category, Method method,
                                std::int64_t save_ms, std::int64_t transfer_ms);

struct TimingPair {
    TimingRecord baseline;
    TimingRecord orm;
};

/// Match records into (baseline, orm) pairs by item id. Throws
/// Error{invalid_argument} on an unpaired or duplicated item.
std::vector<TimingPair> pair_records(const std::vector<TimingRecord>& records);

struct EfficiencyRow {
    std::string item_id;
    Category category = Category::text_small;
    std::int64_t save_eff_ms = 0;      // baseline.save - orm.save
    std::int64_t transfer_eff_ms = 0;  // baseline.transfer - orm.transfer
    std::int64_t total_eff_ms = 0;     // save_eff + transfer_eff, exactly
};

std::vector<EfficiencyRow> compute_efficiency(const std::vector<TimingPair>& pairs);

enum class Outcome { success, failure };

/// Success means strictly positive total efficiency; zero is failure.
Outcome classify(const EfficiencyRow& row) noexcept;

struct CategoryCounts {
    std::uint64_t success = 0;
    std::uint64_t failure = 0;
};

struct AggregateReport {
    std::map<Category, CategoryCounts> per_category;
    double success_rate = 0.0;  // exact count ratio; 0 for empty input

    std::uint64_t total_success() const noexcept;
    std::uint64_t total_items() const noexcept;
};

/// Per-category success/failure counts plus the overall rate.
/// `extra_failures` folds in items that never produced an efficiency row
/// (failed migrations).
AggregateReport aggregate(const std::vector<EfficiencyRow>& rows,
                          const std::map<Category, std::uint64_t>& extra_failures = {});

struct OutlierFlag {
    std::string item_id;
    Category category = Category::text_small;
    std::string field;  // "save" or "transfer"
    std::int64_t baseline_ms = 0;
    std::int64_t orm_ms = 0;
    std::int64_t delta_ms = 0;
};

/// Pairs where one method's save or transfer time differs from the other's
/// by at least 200% of the faster method's time.
std::vector<OutlierFlag> flag_outliers(const std::vector<TimingPair>& pairs);

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct CorpusFile {
    std::string id;
    std::uint64_t size_bytes = 0;
    std::uint64_t checksum = 0;
};

struct CorpusManifest {
    Category category = Category::text_small;
    std::uint64_t count = 0;
    std::uint64_t size_min_bytes = 0;
    std::uint64_t size_max_bytes = 0;
    std::uint64_t seed = 0;
    std::vector<CorpusFile> files;

    std::string to_json(int indent = 2) const;
    static CorpusManifest from_json(const std::string& text);
};

/// File name inside the corpus directory (.txt or .bmp by category).
std::string corpus_file_name(Category category, const std::string& id);

/**
 * Generate `count` deterministic pseudo-random files into `dir` plus a
 * manifest.json. Text categories produce printable text, image categories
 * binary content behind a minimal BMP header. Sizes are drawn uniformly
 * from [size_min, size_max] by the seeded generator; regenerating with the
 * same arguments reproduces byte-identical files and manifest.
 */
CorpusManifest generate_corpus(Category category, std::uint64_t count,
                               std::uint64_t size_min_bytes, std::uint64_t size_max_bytes,
                               std::uint64_t seed, const std::string& dir);

CorpusManifest load_manifest(const std::string& dir);

/// Source items for a migration run: the file payload lands in Picture or
/// TextFile, the scalar properties get deterministic per-item values.
std::vector<engine::SourceItem> corpus_items(const CorpusManifest& manifest,
                                             const std::string& dir,
                                             const model::ModelBundle& model);

// ---------------------------------------------------------------------------
// Benchmark runs
// ---------------------------------------------------------------------------

struct RunEnvironment {
    store::StoreEndpoint source;
    store::StoreEndpoint destination;
    store::StoreOptions store_options;  // virtual clock, token, size cap
};

struct MethodFailure {
    std::string item_id;
    Method method = Method::orm;
    std::string error;
};

struct CategoryResult {
    Category category = Category::text_small;
    std::vector<TimingRecord> records;  // verified items, both methods
    std::vector<TimingPair> pairs;
    std::vector<EfficiencyRow> rows;
    std::vector<OutlierFlag> outliers;
    std::vector<MethodFailure> failures;
    /// Items that failed in at least one method (counted as failed cases).
    std::uint64_t failed_items = 0;
};

/// Migrate one corpus twice (baseline then orm) against fresh source/dest
/// tables, derive pairs, efficiency rows, and outliers.
CategoryResult run_benchmark(const CorpusManifest& manifest, const std::string& corpus_dir,
                             const model::ModelBundle& model, const RunEnvironment& env,
                             const std::optional<engine::LoadingStrategy>& strategy = {},
                             std::optional<int> batch_size = {});

struct BenchConfig {
    model::ModelBundle model;
    std::string source_uri;
    std::string dest_uri;
    store::ShapingProfile shaping;
    bool virtual_clock = false;
    std::optional<std::string> bearer_token;
    std::vector<Category> categories;
    std::uint64_t count = 100;
    std::uint64_t seed = 7;
    std::uint64_t small_min_bytes = 100ull * 1024;
    std::uint64_t small_max_bytes = 900ull * 1024;
    std::uint64_t large_min_bytes = 1ull << 20;
    std::uint64_t large_max_bytes = 8ull << 20;
    std::optional<engine::LoadingStrategy> strategy;
    std::optional<int> batch_size;
    int parallel = 1;
    std::string out_dir = "bench-out";
    bool reuse_corpus = false;  // skip generation when manifest already matches
};

struct BenchOutput {
    std::vector<CategoryResult> categories;
    AggregateReport report;
    std::string out_dir;
};

/**
 * Full pipeline: generate corpora, run paired migrations per category,
 * write efficiency_<category>.csv, aggregate.json, and aggregate.svg under
 * out_dir. A `local:` destination is served through an in-process shaped
 * simulator whenever shaping or the deterministic clock is requested.
 */
BenchOutput run_bench(const BenchConfig& config);

}  // namespace cloudshift::bench
