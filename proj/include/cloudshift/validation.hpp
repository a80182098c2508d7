#pragma once

/**
 * Pre-migration database parameter checks. Five checks run in a fixed
 * order (format, consistency, length, range, integrity); under the
 * `exclude` policy a record that violates one check becomes invisible to
 * every later check, under `fail` the run aborts at the first check that
 * reports anything.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudshift/model.hpp"
#include "cloudshift/record.hpp"
#include "cloudshift/store.hpp"

namespace cloudshift::validation {

enum class Check { format, consistency, length, range, integrity };

const char* to_string(Check check) noexcept;

struct Violation {
    Check check;
    std::string record_key;
    std::optional<std::string> property;
    std::string detail;
};

/// A record in conceptual space: `table` holds the entity name and column
/// names are property names (store columns are reverse-mapped on ingest).
using Record = store::RowRecord;
using RecordStream = std::vector<Record>;

struct ValidationReport {
    std::vector<Violation> violations;
    std::uint64_t records_scanned = 0;
    std::uint64_t records_excluded = 0;
    /// Qualified property ("Entity.Property") -> recommended storage kind,
    /// e.g. "uint8" or "varchar(12)".
    std::map<std::string, std::string> range_recommendations;
    bool aborted = false;

    std::string to_json(int indent = 2) const;
    std::string to_table() const;
};

// ---------------------------------------------------------------------------
// Individual checks (each runs standalone over the full stream)
// ---------------------------------------------------------------------------

/// Parse-level conformance: known entity, required properties present,
/// no unknown properties, scalar kinds as declared, key column equal to the
/// record key. At most one violation per record.
std::vector<Violation> format_check(const RecordStream& records,
                                    const model::ConceptualModel& conceptual);

/// Duplicate key values (one violation per duplicated key) and association
/// references whose target does not exist in the stream.
std::vector<Violation> consistency_check(const RecordStream& records,
                                         const model::ConceptualModel& conceptual);

/// Encoded text length (UTF-8 bytes) against the mapped column's
/// max_length, inclusive boundary; blob sizes against the transfer cap.
std::vector<Violation> length_check(const RecordStream& records,
                                    const model::MappingSpec& mapping,
                                    const model::StorageModel& storage,
                                    std::uint64_t blob_cap_bytes = store::kDefaultSizeCapBytes);

struct RangeResult {
    /// Smallest storage kind covering the observed values per property.
    std::map<std::string, std::string> recommendations;
    /// Integer values that do not fit the mapped column's declared kind.
    std::vector<Violation> violations;
};

/// Observed min/max scan. Violations are only produced when mapping and
/// storage are supplied (run_all does).
RangeResult range_check(const RecordStream& records, const model::ConceptualModel& conceptual,
                        const model::MappingSpec* mapping = nullptr,
                        const model::StorageModel* storage = nullptr);

/// Association endpoints whose referenced record is absent from the stream
/// (or excluded, when an excluded set is provided by run_all).
std::vector<Violation> integrity_check(const RecordStream& records,
                                       const model::ConceptualModel& conceptual);

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

enum class Policy { exclude, fail };

ValidationReport run_all(const RecordStream& records, const model::ModelBundle& bundle,
                         Policy policy,
                         std::uint64_t blob_cap_bytes = store::kDefaultSizeCapBytes);

/// Pull every mapped entity's rows from a store and return them in
/// conceptual space (columns renamed through the reverse mapping; unmapped
/// columns pass through verbatim so format_check can flag them).
RecordStream fetch_records(store::StoreConnector& connector, const model::ModelBundle& bundle);

/// Read records from a JSON-lines file:
/// {"entity": ..., "key": ..., "columns": {...}, "blobs": {col: {"size": N}}}
RecordStream read_records_jsonl(const std::string& path);

}  // namespace cloudshift::validation
