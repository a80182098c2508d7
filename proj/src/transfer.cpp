#include "cloudshift/transfer.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/shaping.hpp"

namespace cloudshift::engine {

using model::EntityDef;
using nlohmann::json;
using store::FetchedRow;
using store::FetchQuery;
using store::PutMode;
using store::RowRecord;
using store::Scalar;
using store::Stopwatch;

const char* to_string(Method m) noexcept {
    return m == Method::baseline ? "baseline" : "orm";
}

const char* to_string(LoadKind k) noexcept {
    switch (k) {
        case LoadKind::lazy: return "lazy";
        case LoadKind::explicit_load: return "explicit";
        case LoadKind::eager: return "eager";
    }
    return "?";
}

const char* to_string(Category c) noexcept {
    switch (c) {
        case Category::image_large: return "image_large";
        case Category::image_small: return "image_small";
        case Category::text_large: return "text_large";
        case Category::text_small: return "text_small";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view s) noexcept {
    if (s == "baseline" || s == "old") return Method::baseline;
    if (s == "orm") return Method::orm;
    return std::nullopt;
}

std::optional<LoadKind> parse_load_kind(std::string_view s) noexcept {
    if (s == "lazy") return LoadKind::lazy;
    if (s == "explicit") return LoadKind::explicit_load;
    if (s == "eager") return LoadKind::eager;
    return std::nullopt;
}

std::optional<Category> parse_category(std::string_view s) noexcept {
    if (s == "a" || s == "image_large") return Category::image_large;
    if (s == "b" || s == "image_small") return Category::image_small;
    if (s == "c" || s == "text_large") return Category::text_large;
    if (s == "d" || s == "text_small") return Category::text_small;
    return std::nullopt;
}

bool is_image_category(Category c) noexcept {
    return c == Category::image_large || c == Category::image_small;
}

std::vector<std::int64_t> split_evenly(std::int64_t total, std::size_t n) {
    std::vector<std::int64_t> shares(n, 0);
    if (n == 0 || total <= 0) return shares;
    const std::int64_t base = total / static_cast<std::int64_t>(n);
    const std::int64_t extra = total % static_cast<std::int64_t>(n);
    for (std::size_t i = 0; i < n; ++i) {
        shares[i] = base + (static_cast<std::int64_t>(i) < extra ? 1 : 0);
    }
    return shares;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::io, "cannot open item file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// MigrationResult
// ---------------------------------------------------------------------------

void MigrationResult::recompute_totals() {
    totals = MigrationTotals{};
    totals.items = items.size();
    for (const ItemResult& item : items) {
        totals.bytes_moved += item.bytes_moved;
        totals.save_ms += item.save_ms;
        totals.transfer_ms += item.transfer_ms;
        totals.verify_ms += item.verify_ms;
        if (item.verified) ++totals.verified_count;
        if (item.error) ++totals.failed_count;
    }
}

bool MigrationResult::all_verified() const noexcept {
    return std::all_of(items.begin(), items.end(),
                       [](const ItemResult& i) { return i.verified; });
}

std::string MigrationResult::to_json(int indent) const {
    json arr = json::array();
    for (const ItemResult& item : items) {
        json ji{{"key", item.key},
                {"bytes_moved", item.bytes_moved},
                {"save_ms", item.save_ms},
                {"transfer_ms", item.transfer_ms},
                {"verify_ms", item.verify_ms},
                {"verified", item.verified}};
        if (item.error) ji["error"] = *item.error;
        arr.push_back(ji);
    }
    return json{{"items", arr},
                {"totals",
                 {{"bytes_moved", totals.bytes_moved},
                  {"save_ms", totals.save_ms},
                  {"transfer_ms", totals.transfer_ms},
                  {"verify_ms", totals.verify_ms},
                  {"items", totals.items},
                  {"verified", totals.verified_count},
                  {"failed", totals.failed_count}}}}
        .dump(indent);
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

MigrationPlan plan_migration(const model::ModelBundle& bundle,
                             const store::StoreEndpoint& source,
                             const store::StoreEndpoint& destination, const PlanOptions& options,
                             const std::string& entity) {
    MigrationPlan plan;
    plan.model = bundle;
    plan.source = source;
    plan.destination = destination;
    plan.method = options.method;
    plan.category = options.category;
    plan.size_cap_bytes = options.size_cap_bytes;
    plan.strict = options.strict;
    plan.parallel = std::max(1, options.parallel);

    if (bundle.conceptual.entities.empty()) {
        raise(ErrorKind::invalid_model, "model has no entities to migrate");
    }
    plan.entity = entity.empty() ? bundle.conceptual.entities.front().name : entity;
    const EntityDef* edef = bundle.conceptual.find_entity(plan.entity);
    if (!edef) {
        raise(ErrorKind::invalid_argument, "model has no entity named '" + plan.entity + "'");
    }

    auto violations = model::validate_mapping(bundle.mapping, bundle.conceptual, bundle.storage);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "mapping has " << violations.size() << " violation(s):";
        for (const auto& v : violations) {
            msg << " [" << model::to_string(v.code) << " " << v.entity;
            if (!v.property.empty()) msg << "." << v.property;
            msg << ": " << v.detail << "]";
        }
        raise(ErrorKind::invalid_model, msg.str());
    }

    if (options.method == Method::baseline) {
        if (options.strategy && options.strategy->kind != LoadKind::lazy) {
            raise(ErrorKind::invalid_argument,
                  "the baseline method is column-wise and lazy; it cannot use the '" +
                      std::string(to_string(options.strategy->kind)) + "' strategy");
        }
        if (options.batch_size && *options.batch_size != 1) {
            raise(ErrorKind::invalid_argument, "the baseline method transfers one row at a time");
        }
        plan.strategy = LoadingStrategy{LoadKind::lazy, {}};
        plan.batch_size = 1;
    } else {
        plan.strategy = options.strategy.value_or(LoadingStrategy{LoadKind::eager, {}});
        plan.batch_size = options.batch_size.value_or(25);
        if (plan.batch_size < 1) {
            raise(ErrorKind::invalid_argument, "batch size must be at least 1");
        }
    }

    if (plan.strategy.kind == LoadKind::explicit_load) {
        const auto blob_props = edef->blob_properties();
        if (plan.strategy.load_columns.empty()) {
            // Default Load() call covers every blob column.
            for (const auto& prop : blob_props) {
                const std::string* col = bundle.mapping.column_for(plan.entity, prop);
                plan.strategy.load_columns.push_back(col ? *col : prop);
            }
        } else {
            for (const auto& col : plan.strategy.load_columns) {
                auto prop = bundle.mapping.property_for_column(plan.entity, col);
                const model::PropertyDef* p = edef->find_property(prop.value_or(col));
                if (!p || !model::is_blob(p->kind)) {
                    raise(ErrorKind::invalid_argument,
                          "explicit load column '" + col + "' is not a blob column of entity '" +
                              plan.entity + "'");
                }
            }
        }
    }

    for (const auto& ep : {source, destination}) {
        auto probe = store::open_store(ep);
        if (!probe->ping()) {
            raise(ErrorKind::connection, "endpoint '" + ep.uri() + "' is not reachable");
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// MigrationRun
// ---------------------------------------------------------------------------

struct MigrationRun::ItemWork {
    std::string key;
    RowRecord source_row;                              // store space
    std::map<std::string, std::string> blob_bytes;     // column -> content
    std::int64_t transfer_ms = 0;
    std::int64_t verify_ms = 0;
    std::uint64_t bytes_moved = 0;
    bool verified = false;
    std::optional<std::string> error;

    bool failed() const noexcept { return error.has_value(); }
};

MigrationRun::MigrationRun(MigrationPlan plan, store::StoreOptions store_options)
    : plan_(std::move(plan)), store_options_(store_options) {
    store_options_.size_cap_bytes = plan_.size_cap_bytes;
    source_ = store::open_store(plan_.source, store_options_);
    destination_ = store::open_store(plan_.destination, store_options_);

    const std::string* table = plan_.model.mapping.table_for(plan_.entity);
    if (!table) {
        raise(ErrorKind::invalid_model, "entity '" + plan_.entity + "' is not mapped to a table");
    }
    table_ = *table;
    table_def_ = plan_.model.storage.find_table(table_);
    if (!table_def_) {
        raise(ErrorKind::invalid_model, "storage model has no table '" + table_ + "'");
    }
}

MigrationRun::~MigrationRun() = default;

void MigrationRun::register_schemas() {
    if (schemas_registered_) return;
    source_->register_table(*table_def_);
    destination_->register_table(*table_def_);
    schemas_registered_ = true;
}

std::vector<std::string> MigrationRun::dest_blob_columns() const {
    const EntityDef* edef = plan_.model.conceptual.find_entity(plan_.entity);
    std::vector<std::string> out;
    for (const auto& prop : edef->blob_properties()) {
        const std::string* col = plan_.model.mapping.column_for(plan_.entity, prop);
        out.push_back(col ? *col : prop);
    }
    return out;
}

namespace {

/// Run fn(i) for every index, optionally on a small worker pool. Items in a
/// batch may only run concurrently when the plan asks for it.
void for_each_index(std::size_t count, int parallel, const std::function<void(std::size_t)>& fn) {
    if (parallel <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(parallel, static_cast<int>(count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

std::string describe(const std::exception& e) {
    return e.what();
}

}  // namespace

// ---------------------------------------------------------------------------
// Save phase
// ---------------------------------------------------------------------------

std::vector<ItemResult> MigrationRun::save_phase(const std::vector<SourceItem>& items) {
    register_schemas();
    const EntityDef* edef = plan_.model.conceptual.find_entity(plan_.entity);
    const model::PropertyDef& key_prop = edef->key_property();
    const auto& mapping = plan_.model.mapping;

    std::vector<ItemResult> results(items.size());
    std::vector<RowRecord> rows(items.size());
    std::vector<bool> eligible(items.size(), false);
    std::uint64_t generated_seq = 0;

    for (std::size_t i = 0; i < items.size(); ++i) {
        const SourceItem& item = items[i];
        ItemResult& res = results[i];
        res.key = item.id;
        if (item.id.empty()) {
            if (key_prop.generated) {
                res.key = "G" + std::to_string(++generated_seq);
            } else {
                res.error = "item has no id and the key property is not generated";
                continue;
            }
        }
        if (item.size_bytes > plan_.size_cap_bytes) {
            res.error = "item of " + std::to_string(item.size_bytes) +
                        " bytes exceeds the size cap of " + std::to_string(plan_.size_cap_bytes) +
                        " bytes";
            continue;
        }
        RowRecord& row = rows[i];
        row.table = table_;
        row.key = res.key;
        for (const auto& [prop, value] : item.scalars) {
            const std::string* col = mapping.column_for(plan_.entity, prop);
            row.columns[col ? *col : prop] = value;
        }
        const std::string* key_col = mapping.column_for(plan_.entity, key_prop.name);
        row.columns[key_col ? *key_col : key_prop.name] = res.key;
        eligible[i] = true;
    }

    const auto chunk_bounds = [&](std::size_t start) {
        return std::min(items.size(), start + static_cast<std::size_t>(plan_.batch_size));
    };

    for (std::size_t start = 0; start < items.size(); start = chunk_bounds(start)) {
        const std::size_t end = chunk_bounds(start);
        std::vector<std::size_t> batch;
        for (std::size_t i = start; i < end; ++i) {
            if (eligible[i]) batch.push_back(i);
        }
        if (batch.empty()) continue;

        if (plan_.method == Method::orm) {
            // One savechanges-style round trip for the batch's rows.
            std::vector<RowRecord> batch_rows;
            batch_rows.reserve(batch.size());
            for (std::size_t i : batch) batch_rows.push_back(rows[i]);
            Stopwatch sw(store_options_.virtual_clock);
            try {
                source_->put_rows(table_, batch_rows, PutMode::overwrite);
                auto shares = split_evenly(sw.elapsed_ms(), batch.size());
                for (std::size_t b = 0; b < batch.size(); ++b) {
                    results[batch[b]].save_ms += shares[b];
                }
            } catch (const std::exception& e) {
                for (std::size_t i : batch) {
                    results[i].error = "save failed: " + describe(e);
                }
                continue;
            }
        }

        for_each_index(batch.size(), plan_.parallel, [&](std::size_t b) {
            const std::size_t i = batch[b];
            const SourceItem& item = items[i];
            ItemResult& res = results[i];
            try {
                Stopwatch sw(store_options_.virtual_clock);
                if (plan_.method == Method::baseline) {
                    // Column-wise save: one put per scalar column value.
                    const RowRecord& full = rows[i];
                    for (const auto& prop : edef->scalar_properties()) {
                        const std::string* col = mapping.column_for(plan_.entity, prop);
                        const std::string col_name = col ? *col : prop;
                        auto it = full.columns.find(col_name);
                        if (it == full.columns.end()) continue;
                        RowRecord single;
                        single.table = table_;
                        single.key = full.key;
                        single.columns[col_name] = it->second;
                        source_->put_row(single, PutMode::merge);
                    }
                }
                if (!item.blob_column.empty()) {
                    const std::string* col = mapping.column_for(plan_.entity, item.blob_column);
                    const std::string bytes = read_file_bytes(item.path);
                    source_->put_blob(table_, res.key, col ? *col : item.blob_column, bytes,
                                      PutMode::overwrite);
                }
                res.save_ms += sw.elapsed_ms();
            } catch (const std::exception& e) {
                res.error = "save failed: " + describe(e);
            }
        });
    }
    return results;
}

// ---------------------------------------------------------------------------
// Transfer phase
// ---------------------------------------------------------------------------

void MigrationRun::transfer_batch(std::vector<ItemWork>& batch) {
    std::vector<ItemWork*> live;
    for (ItemWork& item : batch) {
        if (!item.failed()) live.push_back(&item);
    }
    if (live.empty()) return;

    auto add_shared = [&](std::int64_t total) {
        auto shares = split_evenly(total, live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            live[i]->transfer_ms += shares[i];
        }
    };

    std::vector<std::string> keys;
    keys.reserve(live.size());
    for (ItemWork* item : live) keys.push_back(item->key);

    const std::vector<std::string> blob_cols = dest_blob_columns();

    try {
        // 1) Fetch rows from the source under the plan's loading strategy.
        FetchQuery query;
        query.table = table_;
        query.keys = keys;
        if (plan_.strategy.kind == LoadKind::eager) {
            query.include_blobs = blob_cols;
        }
        Stopwatch sw(store_options_.virtual_clock);
        std::vector<FetchedRow> rows = source_->fetch(query);
        add_shared(sw.elapsed_ms());

        std::map<std::string, FetchedRow*> by_key;
        for (FetchedRow& row : rows) by_key[row.row.key] = &row;
        for (ItemWork* item : live) {
            auto it = by_key.find(item->key);
            if (it == by_key.end()) {
                raise(ErrorKind::not_found, "source row '" + item->key + "' vanished mid-run");
            }
            item->source_row = it->second->row;
            item->blob_bytes = std::move(it->second->blob_content);
        }

        // Explicit loading: one Load() call per batch for the configured set.
        if (plan_.strategy.kind == LoadKind::explicit_load &&
            !plan_.strategy.load_columns.empty()) {
            FetchQuery load;
            load.table = table_;
            load.keys = keys;
            load.include_blobs = plan_.strategy.load_columns;
            sw.restart();
            std::vector<FetchedRow> loaded = source_->fetch(load);
            add_shared(sw.elapsed_ms());
            std::map<std::string, FetchedRow*> loaded_by_key;
            for (FetchedRow& row : loaded) loaded_by_key[row.row.key] = &row;
            for (ItemWork* item : live) {
                auto it = loaded_by_key.find(item->key);
                if (it != loaded_by_key.end()) {
                    for (auto& [col, bytes] : it->second->blob_content) {
                        item->blob_bytes[col] = std::move(bytes);
                    }
                }
            }
        }

        // 2) The orm method writes the batch's rows in one round trip.
        if (plan_.method == Method::orm) {
            std::vector<RowRecord> dest_rows;
            dest_rows.reserve(live.size());
            for (ItemWork* item : live) {
                RowRecord row = item->source_row;
                row.blob_refs.clear();
                dest_rows.push_back(std::move(row));
            }
            sw.restart();
            destination_->put_rows(table_, dest_rows, PutMode::overwrite);
            add_shared(sw.elapsed_ms());
        }

        // 3) Per-item work: lazy blob loads and destination writes.
        const EntityDef* edef = plan_.model.conceptual.find_entity(plan_.entity);
        for_each_index(live.size(), plan_.parallel, [&](std::size_t idx) {
            ItemWork& item = *live[idx];
            try {
                Stopwatch item_sw(store_options_.virtual_clock);
                for (const auto& [col, handle] : item.source_row.blob_refs) {
                    if (item.blob_bytes.count(col)) continue;
                    // Lazy path: each blob loads on first access.
                    item.blob_bytes[col] = source_->fetch_blob(handle);
                }
                if (plan_.method == Method::baseline) {
                    for (const auto& prop : edef->scalar_properties()) {
                        const std::string* col =
                            plan_.model.mapping.column_for(plan_.entity, prop);
                        const std::string col_name = col ? *col : prop;
                        auto it = item.source_row.columns.find(col_name);
                        if (it == item.source_row.columns.end()) continue;
                        RowRecord single;
                        single.table = table_;
                        single.key = item.key;
                        single.columns[col_name] = it->second;
                        destination_->put_row(single, PutMode::merge);
                    }
                }
                for (const auto& [col, bytes] : item.blob_bytes) {
                    destination_->put_blob(table_, item.key, col, bytes, PutMode::overwrite);
                }
                item.transfer_ms += item_sw.elapsed_ms();

                item.bytes_moved = 0;
                for (const auto& [col, bytes] : item.blob_bytes) {
                    item.bytes_moved += bytes.size();
                }
                for (const auto& [col, value] : item.source_row.columns) {
                    item.bytes_moved += store::scalar_byte_length(value);
                }
            } catch (const std::exception& e) {
                item.error = "transfer failed: " + describe(e);
            }
        });
    } catch (const std::exception&) {
        // A shared operation failed; isolate the poison item by degrading
        // the batch to per-item transfers. Writes are idempotent under
        // overwrite/merge, so completed items are simply redone.
        for (ItemWork* item : live) {
            if (!item->failed()) {
                transfer_item_degraded(*item);
            }
        }
    }
}

void MigrationRun::transfer_item_degraded(ItemWork& item) {
    try {
        item.blob_bytes.clear();
        Stopwatch sw(store_options_.virtual_clock);
        FetchQuery query;
        query.table = table_;
        query.keys = std::vector<std::string>{item.key};
        std::vector<FetchedRow> rows = source_->fetch(query);
        if (rows.empty()) {
            raise(ErrorKind::not_found, "source row '" + item.key + "' vanished mid-run");
        }
        item.source_row = std::move(rows.front().row);
        for (const auto& [col, handle] : item.source_row.blob_refs) {
            item.blob_bytes[col] = source_->fetch_blob(handle);
        }

        const EntityDef* edef = plan_.model.conceptual.find_entity(plan_.entity);
        if (plan_.method == Method::baseline) {
            for (const auto& prop : edef->scalar_properties()) {
                const std::string* col = plan_.model.mapping.column_for(plan_.entity, prop);
                const std::string col_name = col ? *col : prop;
                auto it = item.source_row.columns.find(col_name);
                if (it == item.source_row.columns.end()) continue;
                RowRecord single;
                single.table = table_;
                single.key = item.key;
                single.columns[col_name] = it->second;
                destination_->put_row(single, PutMode::merge);
            }
        } else {
            RowRecord row = item.source_row;
            row.blob_refs.clear();
            destination_->put_row(row, PutMode::overwrite);
        }
        for (const auto& [col, bytes] : item.blob_bytes) {
            destination_->put_blob(table_, item.key, col, bytes, PutMode::overwrite);
        }
        item.transfer_ms += sw.elapsed_ms();

        item.bytes_moved = 0;
        for (const auto& [col, bytes] : item.blob_bytes) {
            item.bytes_moved += bytes.size();
        }
        for (const auto& [col, value] : item.source_row.columns) {
            item.bytes_moved += store::scalar_byte_length(value);
        }
    } catch (const std::exception& e) {
        item.error = "transfer failed: " + describe(e);
    }
}

void MigrationRun::verify_batch(std::vector<ItemWork>& batch) {
    std::vector<ItemWork*> live;
    for (ItemWork& item : batch) {
        if (!item.failed()) live.push_back(&item);
    }
    if (live.empty()) return;

    auto compare = [&](ItemWork& item, const RowRecord& dest_row) {
        if (!(dest_row.columns == item.source_row.columns)) {
            item.error = "verification mismatch: destination columns differ for '" + item.key + "'";
            return;
        }
        for (const auto& [col, handle] : item.source_row.blob_refs) {
            auto it = dest_row.blob_refs.find(col);
            if (it == dest_row.blob_refs.end() || it->second.size_bytes != handle.size_bytes ||
                it->second.checksum != handle.checksum) {
                item.error =
                    "verification mismatch: blob '" + col + "' differs for '" + item.key + "'";
                return;
            }
        }
        item.verified = true;
    };

    FetchQuery query;
    query.table = table_;
    query.keys = std::vector<std::string>{};
    for (ItemWork* item : live) query.keys->push_back(item->key);

    try {
        Stopwatch sw(store_options_.virtual_clock);
        std::vector<FetchedRow> rows = destination_->fetch(query);
        auto shares = split_evenly(sw.elapsed_ms(), live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            live[i]->verify_ms += shares[i];
        }
        std::map<std::string, const RowRecord*> by_key;
        for (const FetchedRow& row : rows) by_key[row.row.key] = &row.row;
        for (ItemWork* item : live) {
            auto it = by_key.find(item->key);
            if (it == by_key.end()) {
                item->error = "verification failed: destination row '" + item->key + "' missing";
            } else {
                compare(*item, *it->second);
            }
        }
    } catch (const std::exception&) {
        // Verify items one by one so a single bad row cannot hide the rest.
        for (ItemWork* item : live) {
            try {
                Stopwatch sw(store_options_.virtual_clock);
                FetchQuery one;
                one.table = table_;
                one.keys = std::vector<std::string>{item->key};
                std::vector<FetchedRow> rows = destination_->fetch(one);
                item->verify_ms += sw.elapsed_ms();
                if (rows.empty()) {
                    item->error =
                        "verification failed: destination row '" + item->key + "' missing";
                } else {
                    compare(*item, rows.front().row);
                }
            } catch (const std::exception& e) {
                item->error = "verification failed: " + describe(e);
            }
        }
    }
}

MigrationResult MigrationRun::run_transfer(std::vector<ItemWork> work,
                                           std::int64_t discovery_ms) {
    register_schemas();
    MigrationResult result;

    const std::size_t n = work.size();
    auto discovery_shares = split_evenly(discovery_ms, n);
    for (std::size_t i = 0; i < n; ++i) {
        work[i].transfer_ms += discovery_shares[i];
    }

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(plan_.batch_size)) {
        const std::size_t end = std::min(n, start + static_cast<std::size_t>(plan_.batch_size));
        std::vector<ItemWork> batch(std::make_move_iterator(work.begin() + start),
                                    std::make_move_iterator(work.begin() + end));
        transfer_batch(batch);
        verify_batch(batch);
        for (ItemWork& item : batch) {
            ItemResult res;
            res.key = item.key;
            res.bytes_moved = item.bytes_moved;
            res.transfer_ms = item.transfer_ms;
            res.verify_ms = item.verify_ms;
            res.verified = item.verified;
            res.error = std::move(item.error);
            result.items.push_back(std::move(res));
        }
    }
    result.recompute_totals();
    return result;
}

MigrationResult MigrationRun::transfer_items(const std::vector<SourceItem>& items) {
    std::vector<ItemWork> work(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        work[i].key = items[i].id;
    }
    return run_transfer(std::move(work), 0);
}

MigrationResult MigrationRun::transfer_phase() {
    register_schemas();
    // Key discovery: one header-only fetch over the whole table.
    Stopwatch sw(store_options_.virtual_clock);
    FetchQuery query;
    query.table = table_;
    std::vector<FetchedRow> rows = source_->fetch(query);
    const std::int64_t discovery_ms = sw.elapsed_ms();

    std::vector<ItemWork> work(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        work[i].key = rows[i].row.key;
    }
    return run_transfer(std::move(work), discovery_ms);
}

MigrationResult MigrationRun::execute(const std::vector<SourceItem>& items) {
    std::vector<ItemResult> saved = save_phase(items);

    std::vector<ItemWork> work;
    work.reserve(items.size());
    for (ItemResult& res : saved) {
        if (res.error) continue;
        ItemWork w;
        w.key = res.key;
        work.push_back(std::move(w));
    }

    MigrationResult result = run_transfer(std::move(work), 0);

    // Merge save timings back into the per-item results, in item order.
    std::map<std::string, const ItemResult*> transferred;
    for (const ItemResult& item : result.items) {
        transferred[item.key] = &item;
    }
    MigrationResult merged;
    for (const ItemResult& save : saved) {
        if (save.error) {
            merged.items.push_back(save);
            continue;
        }
        auto it = transferred.find(save.key);
        if (it == transferred.end()) continue;
        ItemResult combined = *it->second;
        combined.save_ms = save.save_ms;
        merged.items.push_back(std::move(combined));
    }
    merged.recompute_totals();
    return merged;
}

}  // namespace cloudshift::engine
