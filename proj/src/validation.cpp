#include "cloudshift/validation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"

namespace cloudshift::validation {

using model::ConceptualModel;
using model::EntityDef;
using model::MappingSpec;
using model::PropertyDef;
using model::PropertyKind;
using model::StorageModel;
using nlohmann::json;
using store::Scalar;

const char* to_string(Check check) noexcept {
    switch (check) {
        case Check::format: return "format";
        case Check::consistency: return "consistency";
        case Check::length: return "length";
        case Check::range: return "range";
        case Check::integrity: return "integrity";
    }
    return "?";
}

namespace {

// Indexed violation so run_all can exclude the exact offending record even
// when keys collide.
struct Finding {
    std::size_t record_index;
    Violation violation;
};

using Live = std::vector<std::size_t>;  // indices into the stream, in order

Live all_indices(const RecordStream& records) {
    Live live(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) live[i] = i;
    return live;
}

std::string qualified(const std::string& entity, const std::string& property) {
    return entity + "." + property;
}

// Typed value token so an integer 5 never aliases the text "5" in joins.
std::string value_token(const Scalar& v) {
    if (store::is_integer(v)) {
        return "i:" + std::to_string(std::get<std::int64_t>(v));
    }
    return "s:" + std::get<std::string>(v);
}

void sort_findings(std::vector<Finding>& findings) {
    std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        const Violation& x = a.violation;
        const Violation& y = b.violation;
        if (x.record_key != y.record_key) return x.record_key < y.record_key;
        const std::string xp = x.property.value_or("");
        const std::string yp = y.property.value_or("");
        if (xp != yp) return xp < yp;
        return x.detail < y.detail;
    });
}

std::vector<Violation> strip_indices(std::vector<Finding> findings) {
    sort_findings(findings);
    std::vector<Violation> out;
    out.reserve(findings.size());
    for (auto& f : findings) out.push_back(std::move(f.violation));
    return out;
}

// --- format -----------------------------------------------------------------

std::optional<Violation> format_one(const Record& record, const ConceptualModel& conceptual) {
    const EntityDef* entity = conceptual.find_entity(record.table);
    if (!entity) {
        return Violation{Check::format, record.key, std::nullopt,
                         "unknown entity '" + record.table + "'"};
    }
    for (const PropertyDef& p : entity->properties) {
        const bool in_columns = record.columns.count(p.name) > 0;
        const bool in_blobs = record.blob_refs.count(p.name) > 0;
        if (p.required && !in_columns && !in_blobs) {
            return Violation{Check::format, record.key, p.name,
                             "required property '" + p.name + "' is missing"};
        }
    }
    for (const auto& [name, value] : record.columns) {
        const PropertyDef* p = entity->find_property(name);
        if (!p) {
            return Violation{Check::format, record.key, name,
                             "unknown property '" + name + "'"};
        }
        if (model::is_blob(p->kind)) {
            return Violation{Check::format, record.key, name,
                             "blob property '" + name + "' carries a scalar value"};
        }
        if (p->kind == PropertyKind::integer && !store::is_integer(value)) {
            return Violation{Check::format, record.key, name,
                             "property '" + name + "' must be an integer"};
        }
        if (p->kind == PropertyKind::text && !store::is_text(value)) {
            return Violation{Check::format, record.key, name,
                             "property '" + name + "' must be text"};
        }
    }
    for (const auto& [name, handle] : record.blob_refs) {
        const PropertyDef* p = entity->find_property(name);
        if (!p) {
            return Violation{Check::format, record.key, name,
                             "unknown property '" + name + "'"};
        }
        if (!model::is_blob(p->kind)) {
            return Violation{Check::format, record.key, name,
                             "scalar property '" + name + "' carries blob content"};
        }
        (void)handle;
    }
    const PropertyDef& key_prop = entity->key_property();
    auto key_col = record.columns.find(key_prop.name);
    if (key_col != record.columns.end() && !(key_col->second == Scalar{record.key})) {
        return Violation{Check::format, record.key, key_prop.name,
                         "key property '" + key_prop.name + "' does not equal the record key"};
    }
    return std::nullopt;
}

std::vector<Finding> format_impl(const RecordStream& records, const Live& live,
                                 const ConceptualModel& conceptual) {
    std::vector<Finding> out;
    for (std::size_t i : live) {
        if (auto v = format_one(records[i], conceptual)) {
            out.push_back({i, std::move(*v)});
        }
    }
    return out;
}

// --- consistency ------------------------------------------------------------

struct AssociationTargets {
    // association -> set of value tokens present on the target side
    std::map<const model::AssociationDef*, std::set<std::string>> targets;
};

std::vector<const model::AssociationDef*> all_associations(const ConceptualModel& conceptual) {
    std::vector<const model::AssociationDef*> out;
    for (const auto& e : conceptual.entities) {
        for (const auto& a : e.associations) out.push_back(&a);
    }
    return out;
}

AssociationTargets collect_targets(const RecordStream& records, const Live& live,
                                   const ConceptualModel& conceptual) {
    AssociationTargets out;
    for (const auto* assoc : all_associations(conceptual)) {
        auto& set = out.targets[assoc];
        for (std::size_t i : live) {
            const Record& r = records[i];
            if (r.table != assoc->to_entity) continue;
            auto it = r.columns.find(assoc->to_property);
            if (it != r.columns.end()) {
                set.insert(value_token(it->second));
            }
        }
    }
    return out;
}

std::vector<Finding> dangling_refs(const RecordStream& records, const Live& live,
                                   const ConceptualModel& conceptual, Check attribute_to) {
    std::vector<Finding> out;
    AssociationTargets targets = collect_targets(records, live, conceptual);
    for (const auto* assoc : all_associations(conceptual)) {
        const auto& set = targets.targets.at(assoc);
        for (std::size_t i : live) {
            const Record& r = records[i];
            if (r.table != assoc->from_entity) continue;
            auto it = r.columns.find(assoc->from_property);
            if (it == r.columns.end()) continue;
            if (!set.count(value_token(it->second))) {
                out.push_back({i, Violation{attribute_to, r.key, assoc->from_property,
                                            "association '" + assoc->name + "' references " +
                                                assoc->to_entity + "." + assoc->to_property +
                                                " = '" + store::scalar_to_display(it->second) +
                                                "', which is not present"}});
            }
        }
    }
    return out;
}

std::vector<Finding> consistency_impl(const RecordStream& records, const Live& live,
                                      const ConceptualModel& conceptual) {
    std::vector<Finding> out;

    // Duplicate keys: the first occurrence survives, later copies violate.
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    for (std::size_t i : live) {
        const Record& r = records[i];
        auto inserted = seen.insert({{r.table, r.key}, i});
        if (!inserted.second) {
            out.push_back({i, Violation{Check::consistency, r.key,
                                        conceptual.find_entity(r.table)
                                            ? std::optional<std::string>(
                                                  conceptual.find_entity(r.table)->key_property().name)
                                            : std::nullopt,
                                        "duplicate key '" + r.key + "' in entity '" + r.table +
                                            "'"}});
        }
    }

    auto dangling = dangling_refs(records, live, conceptual, Check::consistency);
    out.insert(out.end(), std::make_move_iterator(dangling.begin()),
               std::make_move_iterator(dangling.end()));
    return out;
}

// --- length -----------------------------------------------------------------

std::vector<Finding> length_impl(const RecordStream& records, const Live& live,
                                 const MappingSpec& mapping, const StorageModel& storage,
                                 std::uint64_t blob_cap_bytes) {
    std::vector<Finding> out;
    for (std::size_t i : live) {
        const Record& r = records[i];
        const std::string* table_name = mapping.table_for(r.table);
        const model::TableDef* table = table_name ? storage.find_table(*table_name) : nullptr;
        for (const auto& [prop, value] : r.columns) {
            if (!store::is_text(value)) continue;
            if (!table) continue;
            const std::string* col_name = mapping.column_for(r.table, prop);
            const model::ColumnDef* col = col_name ? table->find_column(*col_name) : nullptr;
            if (!col || !col->max_length) continue;
            const std::uint64_t bytes = std::get<std::string>(value).size();
            if (bytes > *col->max_length) {
                out.push_back({i, Violation{Check::length, r.key, prop,
                                            "value of " + std::to_string(bytes) +
                                                " bytes exceeds column max_length " +
                                                std::to_string(*col->max_length)}});
            }
        }
        for (const auto& [prop, handle] : r.blob_refs) {
            if (handle.size_bytes > blob_cap_bytes) {
                out.push_back({i, Violation{Check::length, r.key, prop,
                                            "blob of " + std::to_string(handle.size_bytes) +
                                                " bytes exceeds the transfer cap of " +
                                                std::to_string(blob_cap_bytes) + " bytes"}});
            }
        }
    }
    return out;
}

// --- range ------------------------------------------------------------------

struct RangeImplResult {
    std::map<std::string, std::string> recommendations;
    std::vector<Finding> findings;
};

RangeImplResult range_impl(const RecordStream& records, const Live& live,
                           const ConceptualModel& conceptual, const MappingSpec* mapping,
                           const StorageModel* storage) {
    RangeImplResult out;

    struct IntStats {
        std::int64_t lo = 0, hi = 0;
        bool seen = false;
    };
    struct TextStats {
        std::uint64_t max_len = 0;
        bool seen = false;
    };
    std::map<std::string, IntStats> ints;
    std::map<std::string, TextStats> texts;

    for (std::size_t i : live) {
        const Record& r = records[i];
        const EntityDef* entity = conceptual.find_entity(r.table);
        if (!entity) continue;
        for (const auto& [prop, value] : r.columns) {
            const PropertyDef* p = entity->find_property(prop);
            if (!p) continue;
            const std::string q = qualified(r.table, prop);
            if (p->kind == PropertyKind::integer && store::is_integer(value)) {
                const std::int64_t v = std::get<std::int64_t>(value);
                auto& s = ints[q];
                if (!s.seen) {
                    s = {v, v, true};
                } else {
                    s.lo = std::min(s.lo, v);
                    s.hi = std::max(s.hi, v);
                }
                if (mapping && storage) {
                    const std::string* table_name = mapping->table_for(r.table);
                    const model::TableDef* table =
                        table_name ? storage->find_table(*table_name) : nullptr;
                    const std::string* col_name = mapping->column_for(r.table, prop);
                    const model::ColumnDef* col =
                        (table && col_name) ? table->find_column(*col_name) : nullptr;
                    if (col && model::is_integer_kind(col->storage_kind) &&
                        !model::fits_integer_kind(col->storage_kind, v)) {
                        out.findings.push_back(
                            {i, Violation{Check::range, r.key, prop,
                                          "value " + std::to_string(v) +
                                              " does not fit column storage kind '" +
                                              model::to_string(col->storage_kind) + "'"}});
                    }
                }
            } else if (p->kind == PropertyKind::text && store::is_text(value)) {
                auto& s = texts[q];
                s.max_len = std::max<std::uint64_t>(s.max_len, std::get<std::string>(value).size());
                s.seen = true;
            }
        }
    }

    for (const auto& [q, s] : ints) {
        if (s.seen) {
            out.recommendations[q] = model::to_string(model::smallest_integer_kind(s.lo, s.hi));
        }
    }
    for (const auto& [q, s] : texts) {
        if (s.seen) {
            out.recommendations[q] = "varchar(" + std::to_string(s.max_len) + ")";
        }
    }
    return out;
}

// --- integrity ---------------------------------------------------------------

std::vector<Finding> integrity_impl(const RecordStream& records, const Live& live,
                                    const ConceptualModel& conceptual) {
    return dangling_refs(records, live, conceptual, Check::integrity);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public checks
// ---------------------------------------------------------------------------

std::vector<Violation> format_check(const RecordStream& records,
                                    const ConceptualModel& conceptual) {
    return strip_indices(format_impl(records, all_indices(records), conceptual));
}

std::vector<Violation> consistency_check(const RecordStream& records,
                                         const ConceptualModel& conceptual) {
    return strip_indices(consistency_impl(records, all_indices(records), conceptual));
}

std::vector<Violation> length_check(const RecordStream& records, const MappingSpec& mapping,
                                    const StorageModel& storage, std::uint64_t blob_cap_bytes) {
    return strip_indices(length_impl(records, all_indices(records), mapping, storage,
                                     blob_cap_bytes));
}

RangeResult range_check(const RecordStream& records, const ConceptualModel& conceptual,
                        const MappingSpec* mapping, const StorageModel* storage) {
    auto impl = range_impl(records, all_indices(records), conceptual, mapping, storage);
    RangeResult out;
    out.recommendations = std::move(impl.recommendations);
    out.violations = strip_indices(std::move(impl.findings));
    return out;
}

std::vector<Violation> integrity_check(const RecordStream& records,
                                       const ConceptualModel& conceptual) {
    return strip_indices(integrity_impl(records, all_indices(records), conceptual));
}

// ---------------------------------------------------------------------------
// run_all
// ---------------------------------------------------------------------------

ValidationReport run_all(const RecordStream& records, const model::ModelBundle& bundle,
                         Policy policy, std::uint64_t blob_cap_bytes) {
    ValidationReport report;
    report.records_scanned = records.size();

    Live live = all_indices(records);
    std::vector<bool> dead(records.size(), false);

    auto apply_phase = [&](std::vector<Finding> findings) -> bool {
        // returns true when the run should abort (fail policy)
        if (findings.empty()) return false;
        sort_findings(findings);
        for (const Finding& f : findings) {
            report.violations.push_back(f.violation);
        }
        if (policy == Policy::fail) {
            report.aborted = true;
            return true;
        }
        for (const Finding& f : findings) {
            dead[f.record_index] = true;
        }
        Live next;
        next.reserve(live.size());
        for (std::size_t i : live) {
            if (!dead[i]) next.push_back(i);
        }
        live = std::move(next);
        return false;
    };

    const auto& conceptual = bundle.conceptual;

    if (apply_phase(format_impl(records, live, conceptual))) return report;
    if (apply_phase(consistency_impl(records, live, conceptual))) return report;
    if (apply_phase(length_impl(records, live, bundle.mapping, bundle.storage, blob_cap_bytes))) {
        return report;
    }

    auto range = range_impl(records, live, conceptual, &bundle.mapping, &bundle.storage);
    report.range_recommendations = std::move(range.recommendations);
    if (apply_phase(std::move(range.findings))) return report;

    if (apply_phase(integrity_impl(records, live, conceptual))) return report;

    report.records_excluded =
        static_cast<std::uint64_t>(std::count(dead.begin(), dead.end(), true));
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

std::string ValidationReport::to_json(int indent) const {
    json arr = json::array();
    for (const auto& v : violations) {
        json jv{{"check", to_string(v.check)},
                {"record_key", v.record_key},
                {"detail", v.detail}};
        if (v.property) jv["property"] = *v.property;
        arr.push_back(jv);
    }
    json recs = json::object();
    for (const auto& [prop, kind] : range_recommendations) {
        recs[prop] = kind;
    }
    return json{{"violations", arr},
                {"records_scanned", records_scanned},
                {"records_excluded", records_excluded},
                {"range_recommendations", recs},
                {"aborted", aborted}}
        .dump(indent);
}

std::string ValidationReport::to_table() const {
    std::ostringstream out;
    out << "check        record           property         detail\n";
    out << "-----------  ---------------  ---------------  ------\n";
    for (const auto& v : violations) {
        std::ostringstream line;
        line.setf(std::ios::left);
        line.width(13);
        line << to_string(v.check);
        line.width(17);
        line << v.record_key.substr(0, 15);
        line.width(17);
        line << v.property.value_or("-").substr(0, 15);
        out << line.str() << v.detail << "\n";
    }
    out << "\nrecords scanned:  " << records_scanned << "\n";
    out << "records excluded: " << records_excluded << "\n";
    out << "violations:       " << violations.size() << (aborted ? "  (aborted)" : "") << "\n";
    if (!range_recommendations.empty()) {
        out << "\nrange recommendations:\n";
        for (const auto& [prop, kind] : range_recommendations) {
            out << "  " << prop << " -> " << kind << "\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Record ingestion
// ---------------------------------------------------------------------------

RecordStream fetch_records(store::StoreConnector& connector, const model::ModelBundle& bundle) {
    RecordStream out;
    for (const auto& entity : bundle.conceptual.entities) {
        const std::string* table = bundle.mapping.table_for(entity.name);
        if (!table) continue;
        store::FetchQuery query;
        query.table = *table;
        for (const auto& fetched : connector.fetch(query)) {
            Record record;
            record.table = entity.name;
            record.key = fetched.row.key;
            for (const auto& [col, value] : fetched.row.columns) {
                auto prop = bundle.mapping.property_for_column(entity.name, col);
                record.columns[prop.value_or(col)] = value;
            }
            for (const auto& [col, handle] : fetched.row.blob_refs) {
                auto prop = bundle.mapping.property_for_column(entity.name, col);
                record.blob_refs[prop.value_or(col)] = handle;
            }
            out.push_back(std::move(record));
        }
    }
    return out;
}

RecordStream read_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorKind::io, "cannot open records file '" + path + "'");
    }
    RecordStream out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            raise(ErrorKind::parse,
                  "records file line " + std::to_string(line_no) + " is not valid JSON");
        }
        Record record;
        record.table = j.at("entity").get<std::string>();
        record.key = j.at("key").get<std::string>();
        if (j.contains("columns")) {
            for (const auto& [name, value] : j.at("columns").items()) {
                if (value.is_number_integer()) {
                    record.columns[name] = value.get<std::int64_t>();
                } else if (value.is_string()) {
                    record.columns[name] = value.get<std::string>();
                } else {
                    raise(ErrorKind::parse, "records file line " + std::to_string(line_no) +
                                                ": column values must be strings or integers");
                }
            }
        }
        if (j.contains("blobs")) {
            for (const auto& [name, meta] : j.at("blobs").items()) {
                store::BlobHandle handle;
                handle.table = record.table;
                handle.key = record.key;
                handle.column = name;
                handle.size_bytes = meta.value("size", std::uint64_t{0});
                if (meta.contains("checksum")) {
                    handle.checksum = parse_checksum_hex(meta.at("checksum").get<std::string>());
                }
                record.blob_refs[name] = handle;
            }
        }
        out.push_back(std::move(record));
    }
    if (in.bad()) {
        raise(ErrorKind::io, "read failure on records file '" + path + "'");
    }
    return out;
}

}  // namespace cloudshift::validation
