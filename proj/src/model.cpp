#include "cloudshift/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cloudshift/errors.hpp"

namespace cloudshift::model {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

const char* to_string(PropertyKind kind) noexcept {
    switch (kind) {
        case PropertyKind::text: return "text";
        case PropertyKind::integer: return "integer";
        case PropertyKind::binary_blob: return "binary_blob";
        case PropertyKind::text_blob: return "text_blob";
    }
    return "?";
}

std::optional<PropertyKind> parse_property_kind(std::string_view s) noexcept {
    if (s == "text") return PropertyKind::text;
    if (s == "integer") return PropertyKind::integer;
    if (s == "binary_blob") return PropertyKind::binary_blob;
    if (s == "text_blob") return PropertyKind::text_blob;
    return std::nullopt;
}

bool is_blob(PropertyKind kind) noexcept {
    return kind == PropertyKind::binary_blob || kind == PropertyKind::text_blob;
}

const char* to_string(StorageKind kind) noexcept {
    switch (kind) {
        case StorageKind::varchar: return "varchar";
        case StorageKind::text: return "text";
        case StorageKind::binary: return "binary";
        case StorageKind::int8: return "int8";
        case StorageKind::uint8: return "uint8";
        case StorageKind::int16: return "int16";
        case StorageKind::uint16: return "uint16";
        case StorageKind::int32: return "int32";
        case StorageKind::uint32: return "uint32";
        case StorageKind::int64: return "int64";
        case StorageKind::uint64: return "uint64";
    }
    return "?";
}

std::optional<StorageKind> parse_storage_kind(std::string_view s) noexcept {
    static const std::pair<std::string_view, StorageKind> table[] = {
        {"varchar", StorageKind::varchar}, {"text", StorageKind::text},
        {"binary", StorageKind::binary},   {"int8", StorageKind::int8},
        {"uint8", StorageKind::uint8},     {"int16", StorageKind::int16},
        {"uint16", StorageKind::uint16},   {"int32", StorageKind::int32},
        {"uint32", StorageKind::uint32},   {"int64", StorageKind::int64},
        {"uint64", StorageKind::uint64},
    };
    for (const auto& [name, kind] : table) {
        if (s == name) return kind;
    }
    return std::nullopt;
}

bool is_integer_kind(StorageKind kind) noexcept {
    switch (kind) {
        case StorageKind::varchar:
        case StorageKind::text:
        case StorageKind::binary:
            return false;
        default:
            return true;
    }
}

bool fits_integer_kind(StorageKind kind, std::int64_t v) noexcept {
    switch (kind) {
        case StorageKind::int8: return v >= -128 && v <= 127;
        case StorageKind::uint8: return v >= 0 && v <= 255;
        case StorageKind::int16: return v >= -32768 && v <= 32767;
        case StorageKind::uint16: return v >= 0 && v <= 65535;
        case StorageKind::int32: return v >= INT32_MIN && v <= INT32_MAX;
        case StorageKind::uint32: return v >= 0 && v <= 4294967295ll;
        case StorageKind::int64: return true;
        case StorageKind::uint64: return v >= 0;
        default: return false;
    }
}

StorageKind smallest_integer_kind(std::int64_t lo, std::int64_t hi) noexcept {
    static const StorageKind ladder[] = {
        StorageKind::uint8,  StorageKind::int8,  StorageKind::uint16, StorageKind::int16,
        StorageKind::uint32, StorageKind::int32, StorageKind::uint64, StorageKind::int64,
    };
    for (StorageKind kind : ladder) {
        if (fits_integer_kind(kind, lo) && fits_integer_kind(kind, hi)) {
            return kind;
        }
    }
    return StorageKind::int64;
}

const char* to_string(MappingViolation::Code code) noexcept {
    switch (code) {
        case MappingViolation::Code::unmapped_entity: return "unmapped_entity";
        case MappingViolation::Code::unmapped_property: return "unmapped_property";
        case MappingViolation::Code::missing_table: return "missing_table";
        case MappingViolation::Code::missing_column: return "missing_column";
        case MappingViolation::Code::length_overflow: return "length_overflow";
        case MappingViolation::Code::kind_mismatch: return "kind_mismatch";
        case MappingViolation::Code::incomplete_type_map: return "incomplete_type_map";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lookups
// ---------------------------------------------------------------------------

const PropertyDef* EntityDef::find_property(std::string_view prop) const noexcept {
    for (const auto& p : properties) {
        if (p.name == prop) return &p;
    }
    return nullptr;
}

const PropertyDef& EntityDef::key_property() const {
    for (const auto& p : properties) {
        if (p.is_key) return p;
    }
    raise(ErrorKind::invalid_model, "entity '" + name + "' has no key property");
}

std::vector<std::string> EntityDef::blob_properties() const {
    std::vector<std::string> out;
    for (const auto& p : properties) {
        if (is_blob(p.kind)) out.push_back(p.name);
    }
    return out;
}

std::vector<std::string> EntityDef::scalar_properties() const {
    std::vector<std::string> out;
    for (const auto& p : properties) {
        if (!is_blob(p.kind)) out.push_back(p.name);
    }
    return out;
}

const EntityDef* ConceptualModel::find_entity(std::string_view name) const noexcept {
    for (const auto& e : entities) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

const ColumnDef* TableDef::find_column(std::string_view col) const noexcept {
    for (const auto& c : columns) {
        if (c.name == col) return &c;
    }
    return nullptr;
}

const TableDef* StorageModel::find_table(std::string_view name) const noexcept {
    for (const auto& t : tables) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const std::string* MappingSpec::table_for(std::string_view entity) const noexcept {
    auto it = entity_to_table.find(std::string(entity));
    return it == entity_to_table.end() ? nullptr : &it->second;
}

const std::string* MappingSpec::column_for(std::string_view entity,
                                           std::string_view prop) const noexcept {
    auto it = property_to_column.find({std::string(entity), std::string(prop)});
    return it == property_to_column.end() ? nullptr : &it->second;
}

std::optional<std::string> MappingSpec::entity_for_table(std::string_view table) const {
    for (const auto& [entity, tab] : entity_to_table) {
        if (tab == table) return entity;
    }
    return std::nullopt;
}

std::optional<std::string> MappingSpec::property_for_column(std::string_view entity,
                                                            std::string_view column) const {
    for (const auto& [key, col] : property_to_column) {
        if (key.first == entity && col == column) return key.second;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Identifier rules
// ---------------------------------------------------------------------------

bool is_identifier(std::string_view s) noexcept {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), tail);
}

namespace {

void require_identifier(std::string_view s, const char* what) {
    if (!is_identifier(s)) {
        raise(ErrorKind::invalid_model,
              std::string(what) + " '" + std::string(s) + "' is not a valid identifier");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Invariant enforcement
// ---------------------------------------------------------------------------

namespace {

void check_property(const PropertyDef& p, const std::string& entity) {
    require_identifier(p.name, "property name");
    if (p.max_length && *p.max_length == 0) {
        raise(ErrorKind::invalid_model,
              "property '" + entity + "." + p.name + "' has max_length 0");
    }
    if (p.is_key && !p.required) {
        raise(ErrorKind::invalid_model,
              "key property '" + entity + "." + p.name + "' must be required");
    }
}

void check_entity(const EntityDef& e) {
    require_identifier(e.name, "entity name");
    std::set<std::string> names;
    int keys = 0;
    for (const auto& p : e.properties) {
        check_property(p, e.name);
        if (!names.insert(p.name).second) {
            raise(ErrorKind::invalid_model,
                  "duplicate property name '" + p.name + "' in entity '" + e.name + "'");
        }
        if (p.is_key) ++keys;
    }
    if (keys == 0) {
        raise(ErrorKind::invalid_model, "entity '" + e.name + "' has no key property");
    }
    if (keys > 1) {
        // Composite keys are out of scope for the whole pipeline.
        raise(ErrorKind::invalid_model,
              "entity '" + e.name + "' declares " + std::to_string(keys) +
                  " key properties; exactly one is supported");
    }
}

void check_model(const ConceptualModel& m) {
    std::set<std::string> names;
    for (const auto& e : m.entities) {
        check_entity(e);
        if (!names.insert(e.name).second) {
            raise(ErrorKind::invalid_model, "duplicate entity name '" + e.name + "'");
        }
    }
    for (const auto& e : m.entities) {
        for (const auto& a : e.associations) {
            require_identifier(a.name, "association name");
            const EntityDef* from = m.find_entity(a.from_entity);
            const EntityDef* to = m.find_entity(a.to_entity);
            if (!from || !to) {
                raise(ErrorKind::invalid_model,
                      "association '" + a.name + "' references unknown entity");
            }
            if (!from->find_property(a.from_property) || !to->find_property(a.to_property)) {
                raise(ErrorKind::invalid_model,
                      "association '" + a.name + "' references unknown property");
            }
        }
    }
}

void check_storage(const StorageModel& s) {
    require_identifier(s.schema_namespace, "schema namespace");
    std::set<std::string> tables;
    for (const auto& t : s.tables) {
        require_identifier(t.name, "table name");
        if (!tables.insert(t.name).second) {
            raise(ErrorKind::invalid_model, "duplicate table name '" + t.name + "'");
        }
        std::set<std::string> cols;
        for (const auto& c : t.columns) {
            require_identifier(c.name, "column name");
            if (c.max_length && *c.max_length == 0) {
                raise(ErrorKind::invalid_model,
                      "column '" + t.name + "." + c.name + "' has max_length 0");
            }
            if (!cols.insert(c.name).second) {
                raise(ErrorKind::invalid_model,
                      "duplicate column name '" + c.name + "' in table '" + t.name + "'");
            }
        }
        for (const auto& pk : t.primary_key) {
            if (!t.find_column(pk)) {
                raise(ErrorKind::invalid_model,
                      "primary key column '" + pk + "' missing from table '" + t.name + "'");
            }
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON <-> structs
// ---------------------------------------------------------------------------

namespace {

json to_json(const PropertyDef& p) {
    json j{{"name", p.name}, {"kind", to_string(p.kind)}};
    if (p.max_length) j["max_length"] = *p.max_length;
    if (p.required) j["required"] = true;
    if (p.is_key) j["is_key"] = true;
    if (p.generated) j["generated"] = true;
    return j;
}

PropertyDef property_from_json(const json& j) {
    PropertyDef p;
    p.name = j.at("name").get<std::string>();
    auto kind = parse_property_kind(j.at("kind").get<std::string>());
    if (!kind) {
        raise(ErrorKind::invalid_model,
              "unknown property kind '" + j.at("kind").get<std::string>() + "'");
    }
    p.kind = *kind;
    if (j.contains("max_length")) p.max_length = j.at("max_length").get<std::uint64_t>();
    p.required = j.value("required", false);
    p.is_key = j.value("is_key", false);
    p.generated = j.value("generated", false);
    return p;
}

json to_json(const AssociationDef& a) {
    return json{{"name", a.name},
                {"from_entity", a.from_entity},
                {"to_entity", a.to_entity},
                {"from_property", a.from_property},
                {"to_property", a.to_property}};
}

AssociationDef association_from_json(const json& j) {
    AssociationDef a;
    a.name = j.at("name").get<std::string>();
    a.from_entity = j.at("from_entity").get<std::string>();
    a.to_entity = j.at("to_entity").get<std::string>();
    a.from_property = j.at("from_property").get<std::string>();
    a.to_property = j.at("to_property").get<std::string>();
    return a;
}

json to_json(const EntityDef& e) {
    json props = json::array();
    for (const auto& p : e.properties) props.push_back(to_json(p));
    json j{{"name", e.name}, {"properties", props}};
    if (!e.associations.empty()) {
        json assocs = json::array();
        for (const auto& a : e.associations) assocs.push_back(to_json(a));
        j["associations"] = assocs;
    }
    return j;
}

EntityDef entity_from_json(const json& j) {
    EntityDef e;
    e.name = j.at("name").get<std::string>();
    for (const auto& pj : j.at("properties")) e.properties.push_back(property_from_json(pj));
    if (j.contains("associations")) {
        for (const auto& aj : j.at("associations")) {
            e.associations.push_back(association_from_json(aj));
        }
    }
    return e;
}

json to_json(const ColumnDef& c) {
    json j{{"name", c.name}, {"storage_kind", to_string(c.storage_kind)}};
    if (c.max_length) j["max_length"] = *c.max_length;
    j["nullable"] = c.nullable;
    return j;
}

ColumnDef column_from_json(const json& j) {
    ColumnDef c;
    c.name = j.at("name").get<std::string>();
    auto kind = parse_storage_kind(j.at("storage_kind").get<std::string>());
    if (!kind) {
        raise(ErrorKind::invalid_model,
              "unknown storage kind '" + j.at("storage_kind").get<std::string>() + "'");
    }
    c.storage_kind = *kind;
    if (j.contains("max_length")) c.max_length = j.at("max_length").get<std::uint64_t>();
    c.nullable = j.value("nullable", true);
    return c;
}

json to_json(const TableDef& t) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back(to_json(c));
    return json{{"name", t.name}, {"columns", cols}, {"primary_key", t.primary_key}};
}

TableDef table_from_json(const json& j) {
    TableDef t;
    t.name = j.at("name").get<std::string>();
    for (const auto& cj : j.at("columns")) t.columns.push_back(column_from_json(cj));
    if (j.contains("primary_key")) {
        t.primary_key = j.at("primary_key").get<std::vector<std::string>>();
    }
    return t;
}

json to_json(const StorageModel& s) {
    json tables = json::array();
    for (const auto& t : s.tables) tables.push_back(to_json(t));
    return json{{"schema_namespace", s.schema_namespace}, {"tables", tables}};
}

StorageModel storage_from_json(const json& j) {
    StorageModel s;
    s.schema_namespace = j.value("schema_namespace", "dbo");
    if (j.contains("tables")) {
        for (const auto& tj : j.at("tables")) s.tables.push_back(table_from_json(tj));
    }
    return s;
}

json to_json(const MappingSpec& m) {
    json e2t = json::object();
    for (const auto& [e, t] : m.entity_to_table) e2t[e] = t;
    json p2c = json::object();
    for (const auto& [key, col] : m.property_to_column) {
        p2c[key.first + "." + key.second] = col;
    }
    json tm = json::object();
    for (const auto& [kind, target] : m.type_map) {
        json t{{"storage_kind", to_string(target.storage_kind)}};
        if (target.default_max_length) t["default_max_length"] = *target.default_max_length;
        tm[to_string(kind)] = t;
    }
    return json{{"entity_to_table", e2t}, {"property_to_column", p2c}, {"type_map", tm}};
}

MappingSpec mapping_from_json(const json& j) {
    MappingSpec m;
    if (j.contains("entity_to_table")) {
        for (const auto& [e, t] : j.at("entity_to_table").items()) {
            m.entity_to_table[e] = t.get<std::string>();
        }
    }
    if (j.contains("property_to_column")) {
        for (const auto& [key, col] : j.at("property_to_column").items()) {
            auto dot = key.find('.');
            if (dot == std::string::npos) {
                raise(ErrorKind::invalid_model,
                      "property_to_column key '" + key + "' must be Entity.Property");
            }
            m.property_to_column[{key.substr(0, dot), key.substr(dot + 1)}] =
                col.get<std::string>();
        }
    }
    if (j.contains("type_map")) {
        for (const auto& [kind_name, tj] : j.at("type_map").items()) {
            auto kind = parse_property_kind(kind_name);
            if (!kind) {
                raise(ErrorKind::invalid_model, "type_map has unknown kind '" + kind_name + "'");
            }
            TypeTarget target;
            auto skind = parse_storage_kind(tj.at("storage_kind").get<std::string>());
            if (!skind) {
                raise(ErrorKind::invalid_model, "type_map has unknown storage kind");
            }
            target.storage_kind = *skind;
            if (tj.contains("default_max_length")) {
                target.default_max_length = tj.at("default_max_length").get<std::uint64_t>();
            }
            if (m.type_map.count(*kind)) {
                raise(ErrorKind::invalid_model,
                      "type_map lists kind '" + kind_name + "' more than once");
            }
            m.type_map[*kind] = target;
        }
    }
    return m;
}

json parse_document(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        raise(ErrorKind::parse, "model document is not valid JSON");
    }
    if (!doc.is_object() || !doc.contains("entities")) {
        raise(ErrorKind::parse, "model document must be an object with an 'entities' key");
    }
    return doc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

std::map<PropertyKind, TypeTarget> default_type_map() {
    return {
        {PropertyKind::text, {StorageKind::varchar, 255}},
        {PropertyKind::integer, {StorageKind::int64, std::nullopt}},
        {PropertyKind::binary_blob, {StorageKind::binary, std::nullopt}},
        {PropertyKind::text_blob, {StorageKind::text, std::nullopt}},
    };
}

ConceptualModel build_model(const std::string& definition_json) {
    json doc = parse_document(definition_json);
    ConceptualModel m;
    for (const auto& ej : doc.at("entities")) {
        m.entities.push_back(entity_from_json(ej));
    }
    check_model(m);
    return m;
}

StorageModel derive_storage(const ConceptualModel& conceptual,
                            const std::map<PropertyKind, TypeTarget>& type_map,
                            std::string schema_namespace) {
    StorageModel storage;
    storage.schema_namespace = std::move(schema_namespace);
    for (const auto& e : conceptual.entities) {
        TableDef t;
        t.name = e.name;
        for (const auto& p : e.properties) {
            auto it = type_map.find(p.kind);
            if (it == type_map.end()) {
                raise(ErrorKind::invalid_model,
                      std::string("type_map has no entry for kind '") + to_string(p.kind) + "'");
            }
            ColumnDef c;
            c.name = p.name;
            c.storage_kind = it->second.storage_kind;
            c.max_length = p.max_length ? p.max_length : it->second.default_max_length;
            if (!c.max_length && c.storage_kind == StorageKind::varchar) {
                c.max_length = 255;
            }
            if (c.storage_kind != StorageKind::varchar && !p.max_length) {
                c.max_length = std::nullopt;
            }
            c.nullable = !p.required;
            t.columns.push_back(std::move(c));
        }
        t.primary_key.push_back(e.key_property().name);
        storage.tables.push_back(std::move(t));
    }
    check_storage(storage);
    return storage;
}

MappingSpec derive_default_mapping(const ConceptualModel& conceptual,
                                   const StorageModel& storage,
                                   const MappingSpec* overrides) {
    MappingSpec m;
    if (overrides) m = *overrides;
    if (m.type_map.empty()) m.type_map = default_type_map();

    for (const auto& e : conceptual.entities) {
        const std::string* table_name = m.table_for(e.name);
        if (!table_name) {
            if (!storage.find_table(e.name)) {
                raise(ErrorKind::invalid_model,
                      "entity '" + e.name + "' has no identically named table and no override");
            }
            m.entity_to_table[e.name] = e.name;
            table_name = m.table_for(e.name);
        }
        const TableDef* table = storage.find_table(*table_name);
        if (!table) {
            raise(ErrorKind::invalid_model,
                  "entity '" + e.name + "' maps to unknown table '" + *table_name + "'");
        }
        for (const auto& p : e.properties) {
            if (m.column_for(e.name, p.name)) continue;
            if (!table->find_column(p.name)) {
                raise(ErrorKind::invalid_model, "property '" + e.name + "." + p.name +
                                                    "' has no identically named column in table '" +
                                                    table->name + "' and no override");
            }
            m.property_to_column[{e.name, p.name}] = p.name;
        }
    }
    return m;
}

namespace {

bool kind_compatible(PropertyKind prop, StorageKind col) {
    switch (prop) {
        case PropertyKind::text:
            return col == StorageKind::varchar || col == StorageKind::text;
        case PropertyKind::integer:
            return is_integer_kind(col);
        case PropertyKind::binary_blob:
            return col == StorageKind::binary;
        case PropertyKind::text_blob:
            return col == StorageKind::text;
    }
    return false;
}

}  // namespace

std::vector<MappingViolation> validate_mapping(const MappingSpec& spec,
                                               const ConceptualModel& conceptual,
                                               const StorageModel& storage) {
    std::vector<MappingViolation> out;
    auto add = [&](MappingViolation::Code code, std::string entity, std::string property,
                   std::string detail) {
        out.push_back({code, std::move(entity), std::move(property), std::move(detail)});
    };

    for (PropertyKind kind : {PropertyKind::text, PropertyKind::integer, PropertyKind::binary_blob,
                              PropertyKind::text_blob}) {
        if (!spec.type_map.count(kind)) {
            add(MappingViolation::Code::incomplete_type_map, "", to_string(kind),
                std::string("type_map has no entry for '") + to_string(kind) + "'");
        }
    }

    for (const auto& e : conceptual.entities) {
        const std::string* table_name = spec.table_for(e.name);
        if (!table_name) {
            add(MappingViolation::Code::unmapped_entity, e.name, "", "entity is not mapped");
            continue;
        }
        const TableDef* table = storage.find_table(*table_name);
        if (!table) {
            add(MappingViolation::Code::missing_table, e.name, "",
                "mapped table '" + *table_name + "' does not exist");
            continue;
        }
        for (const auto& p : e.properties) {
            const std::string* col_name = spec.column_for(e.name, p.name);
            if (!col_name) {
                add(MappingViolation::Code::unmapped_property, e.name, p.name,
                    "property is not mapped");
                continue;
            }
            const ColumnDef* col = table->find_column(*col_name);
            if (!col) {
                add(MappingViolation::Code::missing_column, e.name, p.name,
                    "mapped column '" + *col_name + "' does not exist in table '" + table->name +
                        "'");
                continue;
            }
            if (!kind_compatible(p.kind, col->storage_kind)) {
                add(MappingViolation::Code::kind_mismatch, e.name, p.name,
                    std::string("kind '") + to_string(p.kind) + "' cannot target storage kind '" +
                        to_string(col->storage_kind) + "'");
            }
            if (p.max_length && col->max_length && *p.max_length > *col->max_length) {
                add(MappingViolation::Code::length_overflow, e.name, p.name,
                    "max_length " + std::to_string(*p.max_length) + " exceeds column max_length " +
                        std::to_string(*col->max_length));
            }
        }
    }

    // Mapping entries pointing at things the models do not declare.
    for (const auto& [entity, table] : spec.entity_to_table) {
        if (!conceptual.find_entity(entity)) {
            add(MappingViolation::Code::unmapped_entity, entity, "",
                "mapping names unknown entity '" + entity + "'");
        }
    }
    for (const auto& [key, col] : spec.property_to_column) {
        const EntityDef* e = conceptual.find_entity(key.first);
        if (!e) continue;  // already reported above
        if (!e->find_property(key.second)) {
            add(MappingViolation::Code::unmapped_property, key.first, key.second,
                "mapping names unknown property '" + key.second + "'");
        }
    }
    return out;
}

ModelBundle load_model_document(const std::string& json_text) {
    json doc = parse_document(json_text);
    ModelBundle bundle;
    bundle.conceptual = build_model(json_text);

    MappingSpec explicit_mapping;
    bool have_mapping = doc.contains("mapping");
    if (have_mapping) {
        explicit_mapping = mapping_from_json(doc.at("mapping"));
    }
    if (explicit_mapping.type_map.empty()) {
        explicit_mapping.type_map = default_type_map();
    }

    if (doc.contains("storage")) {
        bundle.storage = storage_from_json(doc.at("storage"));
        check_storage(bundle.storage);
    } else {
        bundle.storage = derive_storage(bundle.conceptual, explicit_mapping.type_map);
    }

    bundle.mapping = derive_default_mapping(bundle.conceptual, bundle.storage, &explicit_mapping);

    auto violations = validate_mapping(bundle.mapping, bundle.conceptual, bundle.storage);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "model document mapping is invalid:";
        for (const auto& v : violations) {
            msg << " [" << to_string(v.code) << " " << v.entity;
            if (!v.property.empty()) msg << "." << v.property;
            msg << ": " << v.detail << "]";
        }
        raise(ErrorKind::invalid_model, msg.str());
    }
    return bundle;
}

ModelBundle load_model_reference(const std::string& ref) {
    if (ref == "personnel") {
        return personnel_preset();
    }
    std::ifstream in(ref);
    if (!in) {
        raise(ErrorKind::io, "cannot open model document '" + ref + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model_document(buf.str());
}

std::string serialize(const ModelBundle& bundle, int indent) {
    json entities = json::array();
    for (const auto& e : bundle.conceptual.entities) entities.push_back(to_json(e));
    json doc{{"entities", entities},
             {"storage", to_json(bundle.storage)},
             {"mapping", to_json(bundle.mapping)}};
    return doc.dump(indent);
}

std::string serialize(const ConceptualModel& conceptual, int indent) {
    json entities = json::array();
    for (const auto& e : conceptual.entities) entities.push_back(to_json(e));
    return json{{"entities", entities}}.dump(indent);
}

std::string serialize(const TableDef& table) {
    return to_json(table).dump();
}

TableDef parse_table(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) {
        raise(ErrorKind::parse, "table schema is not valid JSON");
    }
    TableDef t = table_from_json(j);
    StorageModel probe;
    probe.tables.push_back(t);
    check_storage(probe);
    return t;
}

ModelBundle personnel_preset() {
    ConceptualModel conceptual;
    EntityDef personnel;
    personnel.name = "Personnel";
    personnel.properties = {
        {"PersonalID", PropertyKind::text, 64, true, true, true},
        {"LastName", PropertyKind::text, 50, false, false, false},
        {"FirstName", PropertyKind::text, 50, false, false, false},
        {"Address", PropertyKind::text, 100, false, false, false},
        {"City", PropertyKind::text, 50, false, false, false},
        {"TextFile", PropertyKind::text_blob, std::nullopt, false, false, false},
        {"Picture", PropertyKind::binary_blob, std::nullopt, false, false, false},
    };
    conceptual.entities.push_back(std::move(personnel));
    check_model(conceptual);

    ModelBundle bundle;
    bundle.conceptual = std::move(conceptual);
    bundle.storage = derive_storage(bundle.conceptual, default_type_map());
    bundle.mapping = derive_default_mapping(bundle.conceptual, bundle.storage);
    return bundle;
}

// ---------------------------------------------------------------------------
// Equality (round-trip checks)
// ---------------------------------------------------------------------------

bool operator==(const PropertyDef& a, const PropertyDef& b) {
    return a.name == b.name && a.kind == b.kind && a.max_length == b.max_length &&
           a.required == b.required && a.is_key == b.is_key && a.generated == b.generated;
}

bool operator==(const AssociationDef& a, const AssociationDef& b) {
    return a.name == b.name && a.from_entity == b.from_entity && a.to_entity == b.to_entity &&
           a.from_property == b.from_property && a.to_property == b.to_property;
}

bool operator==(const EntityDef& a, const EntityDef& b) {
    return a.name == b.name && a.properties == b.properties && a.associations == b.associations;
}

bool operator==(const ConceptualModel& a, const ConceptualModel& b) {
    return a.entities == b.entities;
}

bool operator==(const ColumnDef& a, const ColumnDef& b) {
    return a.name == b.name && a.storage_kind == b.storage_kind && a.max_length == b.max_length &&
           a.nullable == b.nullable;
}

bool operator==(const TableDef& a, const TableDef& b) {
    return a.name == b.name && a.columns == b.columns && a.primary_key == b.primary_key;
}

bool operator==(const StorageModel& a, const StorageModel& b) {
    return a.schema_namespace == b.schema_namespace && a.tables == b.tables;
}

bool operator==(const TypeTarget& a, const TypeTarget& b) {
    return a.storage_kind == b.storage_kind && a.default_max_length == b.default_max_length;
}

bool operator==(const MappingSpec& a, const MappingSpec& b) {
    return a.entity_to_table == b.entity_to_table && a.property_to_column == b.property_to_column &&
           a.type_map == b.type_map;
}

}  // namespace cloudshift::model
