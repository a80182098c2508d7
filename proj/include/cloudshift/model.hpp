#pragma once

/**
 * Entity data model: a conceptual schema (entities, properties,
 * associations), a storage schema (tables, columns, keys), and the mapping
 * specification that bridges the two. Model objects are immutable once
 * built and safe to share across threads.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cloudshift::model {

// ---------------------------------------------------------------------------
// Conceptual schema
// ---------------------------------------------------------------------------

enum class PropertyKind { text, integer, binary_blob, text_blob };

const char* to_string(PropertyKind kind) noexcept;
std::optional<PropertyKind> parse_property_kind(std::string_view s) noexcept;

/// Blob kinds carry their payload out of band (one file per value).
bool is_blob(PropertyKind kind) noexcept;

struct PropertyDef {
    std::string name;
    PropertyKind kind = PropertyKind::text;
    std::optional<std::uint64_t> max_length;  // encoded bytes; absent = unbounded
    bool required = false;
    bool is_key = false;     // implies required
    bool generated = false;  // value assigned at save time when absent
};

struct AssociationDef {
    std::string name;
    std::string from_entity;
    std::string to_entity;
    std::string from_property;
    std::string to_property;
};

struct EntityDef {
    std::string name;
    std::vector<PropertyDef> properties;
    std::vector<AssociationDef> associations;

    const PropertyDef* find_property(std::string_view prop) const noexcept;
    const PropertyDef& key_property() const;
    std::vector<std::string> blob_properties() const;
    std::vector<std::string> scalar_properties() const;
};

struct ConceptualModel {
    std::vector<EntityDef> entities;

    const EntityDef* find_entity(std::string_view name) const noexcept;
};

// ---------------------------------------------------------------------------
// Storage schema
// ---------------------------------------------------------------------------

enum class StorageKind {
    varchar,  // bounded text, max_length in bytes
    text,     // unbounded text
    binary,   // unbounded binary
    int8,
    uint8,
    int16,
    uint16,
    int32,
    uint32,
    int64,
    uint64,
};

const char* to_string(StorageKind kind) noexcept;
std::optional<StorageKind> parse_storage_kind(std::string_view s) noexcept;
bool is_integer_kind(StorageKind kind) noexcept;

/// Whether a 64-bit signed value is representable in the given integer kind.
bool fits_integer_kind(StorageKind kind, std::int64_t value) noexcept;

/// Narrowest integer kind covering [lo, hi], preferring unsigned when lo >= 0.
StorageKind smallest_integer_kind(std::int64_t lo, std::int64_t hi) noexcept;

struct ColumnDef {
    std::string name;
    StorageKind storage_kind = StorageKind::varchar;
    std::optional<std::uint64_t> max_length;
    bool nullable = true;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;

    const ColumnDef* find_column(std::string_view col) const noexcept;
};

struct StorageModel {
    std::string schema_namespace = "dbo";
    std::vector<TableDef> tables;

    const TableDef* find_table(std::string_view name) const noexcept;
};

// ---------------------------------------------------------------------------
// Mapping
// ---------------------------------------------------------------------------

struct TypeTarget {
    StorageKind storage_kind = StorageKind::varchar;
    std::optional<std::uint64_t> default_max_length;
};

struct MappingSpec {
    std::map<std::string, std::string> entity_to_table;
    std::map<std::pair<std::string, std::string>, std::string> property_to_column;
    std::map<PropertyKind, TypeTarget> type_map;

    const std::string* table_for(std::string_view entity) const noexcept;
    const std::string* column_for(std::string_view entity, std::string_view prop) const noexcept;
    /// Reverse lookups, used when pulling store rows back into conceptual space.
    std::optional<std::string> entity_for_table(std::string_view table) const;
    std::optional<std::string> property_for_column(std::string_view entity,
                                                   std::string_view column) const;
};

struct MappingViolation {
    enum class Code {
        unmapped_entity,
        unmapped_property,
        missing_table,
        missing_column,
        length_overflow,
        kind_mismatch,
        incomplete_type_map,
    };

    Code code;
    std::string entity;
    std::string property;
    std::string detail;
};

const char* to_string(MappingViolation::Code code) noexcept;

/// The three schema layers of one model document.
struct ModelBundle {
    ConceptualModel conceptual;
    StorageModel storage;
    MappingSpec mapping;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// `[A-Za-z_][A-Za-z0-9_]*`, case sensitive.
bool is_identifier(std::string_view s) noexcept;

/// Fixed conceptual-kind -> storage-kind table. Every conceptual kind
/// appears exactly once.
std::map<PropertyKind, TypeTarget> default_type_map();

/**
 * Parse the `entities` section of a model document and enforce every
 * conceptual invariant: identifier syntax, unique names, exactly one key
 * property per entity, resolvable association endpoints.
 *
 * Throws Error{parse} on malformed JSON and Error{invalid_model} on
 * invariant violations.
 */
ConceptualModel build_model(const std::string& definition_json);

/// Generate a storage schema from a conceptual model through a type map
/// (same-named tables and columns, key columns non-nullable).
StorageModel derive_storage(const ConceptualModel& conceptual,
                            const std::map<PropertyKind, TypeTarget>& type_map,
                            std::string schema_namespace = "dbo");

/**
 * Name-identity mapping: each entity maps to the identically named table,
 * each property to the identically named column. `overrides` (may be null)
 * pre-seeds explicit pairs which are kept verbatim. Throws
 * Error{invalid_model} when a target is missing and no override covers it.
 * Deriving twice yields an identical MappingSpec.
 */
MappingSpec derive_default_mapping(const ConceptualModel& conceptual,
                                   const StorageModel& storage,
                                   const MappingSpec* overrides = nullptr);

/// Every mapping target must exist and every mapped property must fit its
/// column (kind-compatible, max_length not exceeding the column's).
/// Violations are returned, never thrown.
std::vector<MappingViolation> validate_mapping(const MappingSpec& spec,
                                               const ConceptualModel& conceptual,
                                               const StorageModel& storage);

/**
 * Load a full model document: JSON with top-level keys `entities`,
 * `storage`, `mapping`. `storage` and `mapping` are optional; missing
 * sections are derived. The result always passes validate_mapping cleanly.
 */
ModelBundle load_model_document(const std::string& json_text);

/// Resolve a CLI model reference: a preset name ("personnel") or a path to
/// a model document.
ModelBundle load_model_reference(const std::string& ref);

/// Serialize back to the document format; load_model_document round-trips.
std::string serialize(const ModelBundle& bundle, int indent = 2);
std::string serialize(const ConceptualModel& conceptual, int indent = 2);

/// Single-table JSON, the body of the schema registration route.
std::string serialize(const TableDef& table);
TableDef parse_table(const std::string& json_text);

/// Built-in canonical model: one Personnel entity with seven properties
/// (PersonalID key + LastName, FirstName, Address, City, TextFile, Picture).
ModelBundle personnel_preset();

bool operator==(const PropertyDef&, const PropertyDef&);
bool operator==(const AssociationDef&, const AssociationDef&);
bool operator==(const EntityDef&, const EntityDef&);
bool operator==(const ConceptualModel&, const ConceptualModel&);
bool operator==(const ColumnDef&, const ColumnDef&);
bool operator==(const TableDef&, const TableDef&);
bool operator==(const StorageModel&, const StorageModel&);
bool operator==(const TypeTarget&, const TypeTarget&);
bool operator==(const MappingSpec&, const MappingSpec&);

}  // namespace cloudshift::model
