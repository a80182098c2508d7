#include "cloudshift/bench.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/report.hpp"
#include "cloudshift/server.hpp"

namespace cloudshift::bench {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Timing and efficiency
// ---------------------------------------------------------------------------

TimingRecord make_timing_record(const std::string& item_id, Category category, Method method,
                                std::int64_t save_ms, std::int64_t transfer_ms) {
    if (save_ms < 0 || transfer_ms < 0) {
        raise(ErrorKind::invalid_argument, "raw phase times cannot be negative");
    }
    return TimingRecord{item_id, category, method, save_ms, transfer_ms, save_ms + transfer_ms};
}

std::vector<TimingPair> pair_records(const std::vector<TimingRecord>& records) {
    struct Slot {
        std::optional<TimingRecord> baseline;
        std::optional<TimingRecord> orm;
        std::size_t order = 0;
    };
    std::map<std::string, Slot> by_id;
    std::size_t order = 0;
    for (const TimingRecord& r : records) {
        Slot& slot = by_id[r.item_id];
        if (slot.baseline == std::nullopt && slot.orm == std::nullopt) {
            slot.order = order++;
        }
        auto& side = (r.method == Method::baseline) ? slot.baseline : slot.orm;
        if (side) {
            raise(ErrorKind::invalid_argument,
                  "duplicate " + std::string(engine::to_string(r.method)) + " record for item '" +
                      r.item_id + "'");
        }
        side = r;
    }

    std::vector<const std::pair<const std::string, Slot>*> ordered;
    ordered.reserve(by_id.size());
    for (const auto& entry : by_id) ordered.push_back(&entry);
    std::sort(ordered.begin(), ordered.end(),
              [](auto* a, auto* b) { return a->second.order < b->second.order; });

    std::vector<TimingPair> pairs;
    pairs.reserve(ordered.size());
    for (const auto* entry : ordered) {
        const Slot& slot = entry->second;
        if (!slot.baseline || !slot.orm) {
            raise(ErrorKind::invalid_argument,
                  "item '" + entry->first + "' is missing its " +
                      (slot.baseline ? "orm" : "baseline") + " record");
        }
        pairs.push_back(TimingPair{*slot.baseline, *slot.orm});
    }
    return pairs;
}

std::vector<EfficiencyRow> compute_efficiency(const std::vector<TimingPair>& pairs) {
    std::vector<EfficiencyRow> rows;
    rows.reserve(pairs.size());
    for (const TimingPair& pair : pairs) {
        EfficiencyRow row;
        row.item_id = pair.baseline.item_id;
        row.category = pair.baseline.category;
        row.save_eff_ms = pair.baseline.save_ms - pair.orm.save_ms;
        row.transfer_eff_ms = pair.baseline.transfer_ms - pair.orm.transfer_ms;
        row.total_eff_ms = row.save_eff_ms + row.transfer_eff_ms;
        rows.push_back(std::move(row));
    }
    return rows;
}

Outcome classify(const EfficiencyRow& row) noexcept {
    return row.total_eff_ms > 0 ? Outcome::success : Outcome::failure;
}

std::uint64_t AggregateReport::total_success() const noexcept {
    std::uint64_t n = 0;
    for (const auto& [cat, counts] : per_category) n += counts.success;
    return n;
}

std::uint64_t AggregateReport::total_items() const noexcept {
    std::uint64_t n = 0;
    for (const auto& [cat, counts] : per_category) n += counts.success + counts.failure;
    return n;
}

AggregateReport aggregate(const std::vector<EfficiencyRow>& rows,
                          const std::map<Category, std::uint64_t>& extra_failures) {
    AggregateReport report;
    for (const EfficiencyRow& row : rows) {
        auto& counts = report.per_category[row.category];
        if (classify(row) == Outcome::success) {
            ++counts.success;
        } else {
            ++counts.failure;
        }
    }
    for (const auto& [category, n] : extra_failures) {
        report.per_category[category].failure += n;
    }
    const std::uint64_t items = report.total_items();
    report.success_rate =
        items == 0 ? 0.0
                   : static_cast<double>(report.total_success()) / static_cast<double>(items);
    return report;
}

std::vector<OutlierFlag> flag_outliers(const std::vector<TimingPair>& pairs) {
    std::vector<OutlierFlag> out;
    auto consider = [&out](const TimingPair& pair, const char* field, std::int64_t baseline_ms,
                           std::int64_t orm_ms) {
        const std::int64_t delta = baseline_ms - orm_ms;
        const std::int64_t faster = std::min(baseline_ms, orm_ms);
        if (delta != 0 && std::abs(delta) >= 2 * faster) {
            out.push_back(OutlierFlag{pair.baseline.item_id, pair.baseline.category, field,
                                      baseline_ms, orm_ms, delta});
        }
    };
    for (const TimingPair& pair : pairs) {
        consider(pair, "save", pair.baseline.save_ms, pair.orm.save_ms);
        consider(pair, "transfer", pair.baseline.transfer_ms, pair.orm.transfer_ms);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kBmpHeaderSize = 54;

std::string item_id_for(Category category, std::uint64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04llu", static_cast<unsigned long long>(index));
    return std::string(engine::to_string(category)) + "_" + buf;
}

std::mt19937_64 rng_for(std::uint64_t seed, const std::string& salt) {
    return std::mt19937_64(seed ^ fnv1a64(salt));
}

std::uint64_t draw_in_range(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) return lo;
    return lo + rng() % (hi - lo + 1);
}

// Printable text: 72-character lines over a fixed charset.
void fill_text(std::string& out, std::mt19937_64& rng) {
    static constexpr char charset[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;:-";
    constexpr std::size_t charset_len = sizeof(charset) - 1;
    std::size_t column = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (column == 72) {
            out[i] = '\n';
            column = 0;
        } else {
            out[i] = charset[rng() % charset_len];
            ++column;
        }
    }
}

void put_u32le(std::string& out, std::size_t offset, std::uint32_t value) {
    for (int i = 0; i < 4; ++i) {
        out[offset + static_cast<std::size_t>(i)] = static_cast<char>((value >> (8 * i)) & 0xff);
    }
}

// Minimal 24-bit BMP header followed by pseudo-random pixel data.
void fill_image(std::string& out, std::mt19937_64& rng) {
    for (auto& c : out) {
        c = static_cast<char>(rng() & 0xff);
    }
    if (out.size() < 2) return;
    out[0] = 'B';
    out[1] = 'M';
    if (out.size() < kBmpHeaderSize) return;

    const std::uint64_t payload = out.size() - kBmpHeaderSize;
    const std::uint32_t width = 256;
    const std::uint32_t row_bytes = width * 3;
    const std::uint32_t height = static_cast<std::uint32_t>(std::max<std::uint64_t>(
        1, payload / row_bytes));

    put_u32le(out, 2, static_cast<std::uint32_t>(out.size()));  // file size
    put_u32le(out, 6, 0);                                       // reserved
    put_u32le(out, 10, kBmpHeaderSize);                         // pixel array offset
    put_u32le(out, 14, 40);                                     // DIB header size
    put_u32le(out, 18, width);
    put_u32le(out, 22, height);
    out[26] = 1;  // planes
    out[27] = 0;
    out[28] = 24;  // bits per pixel
    out[29] = 0;
    put_u32le(out, 30, 0);  // no compression
    put_u32le(out, 34, static_cast<std::uint32_t>(payload));
    put_u32le(out, 38, 2835);  // 72 dpi
    put_u32le(out, 42, 2835);
    put_u32le(out, 46, 0);
    put_u32le(out, 50, 0);
}

}  // namespace

std::string corpus_file_name(Category category, const std::string& id) {
    return id + (is_image_category(category) ? ".bmp" : ".txt");
}

std::string CorpusManifest::to_json(int indent) const {
    json files_json = json::array();
    for (const CorpusFile& f : files) {
        files_json.push_back(json{
            {"id", f.id}, {"size", f.size_bytes}, {"checksum", checksum_hex(f.checksum)}});
    }
    return json{{"category", engine::to_string(category)},
                {"count", count},
                {"size_min_bytes", size_min_bytes},
                {"size_max_bytes", size_max_bytes},
                {"seed", seed},
                {"files", files_json}}
        .dump(indent);
}

CorpusManifest CorpusManifest::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        raise(ErrorKind::parse, "corpus manifest is not valid JSON");
    }
    CorpusManifest m;
    auto category = engine::parse_category(j.at("category").get<std::string>());
    if (!category) {
        raise(ErrorKind::parse, "corpus manifest names an unknown category");
    }
    m.category = *category;
    m.count = j.at("count").get<std::uint64_t>();
    m.size_min_bytes = j.at("size_min_bytes").get<std::uint64_t>();
    m.size_max_bytes = j.at("size_max_bytes").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& fj : j.at("files")) {
        CorpusFile f;
        f.id = fj.at("id").get<std::string>();
        f.size_bytes = fj.at("size").get<std::uint64_t>();
        f.checksum = parse_checksum_hex(fj.at("checksum").get<std::string>());
        m.files.push_back(std::move(f));
    }
    return m;
}

CorpusManifest generate_corpus(Category category, std::uint64_t count,
                               std::uint64_t size_min_bytes, std::uint64_t size_max_bytes,
                               std::uint64_t seed, const std::string& dir) {
    if (count < 1) {
        raise(ErrorKind::invalid_argument, "corpus count must be at least 1");
    }
    if (size_min_bytes > size_max_bytes) {
        raise(ErrorKind::invalid_argument, "corpus size_min must not exceed size_max");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        raise(ErrorKind::io, "cannot create corpus directory '" + dir + "'");
    }

    CorpusManifest manifest;
    manifest.category = category;
    manifest.count = count;
    manifest.size_min_bytes = size_min_bytes;
    manifest.size_max_bytes = size_max_bytes;
    manifest.seed = seed;

    for (std::uint64_t i = 1; i <= count; ++i) {
        const std::string id = item_id_for(category, i);
        auto rng = rng_for(seed, id);
        const std::uint64_t size = draw_in_range(rng, size_min_bytes, size_max_bytes);

        std::string content(static_cast<std::size_t>(size), '\0');
        if (is_image_category(category)) {
            fill_image(content, rng);
        } else {
            fill_text(content, rng);
        }

        const fs::path path = fs::path(dir) / corpus_file_name(category, id);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            raise(ErrorKind::io, "cannot write corpus file '" + path.string() + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            raise(ErrorKind::io, "write failure on corpus file '" + path.string() + "'");
        }

        manifest.files.push_back(CorpusFile{id, size, fnv1a64(content)});
    }

    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    out << manifest.to_json();
    if (!out) {
        raise(ErrorKind::io, "cannot write corpus manifest");
    }
    return manifest;
}

CorpusManifest load_manifest(const std::string& dir) {
    const fs::path path = fs::path(dir) / "manifest.json";
    std::ifstream in(path);
    if (!in) {
        raise(ErrorKind::io, "cannot open corpus manifest '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return CorpusManifest::from_json(buf.str());
}

namespace {

std::string synth_name(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
    static constexpr char lower[] = "abcdefghijklmnopqrstuvwxyz";
    const std::size_t len = min_len + rng() % (max_len - min_len + 1);
    std::string out(len, 'a');
    out[0] = static_cast<char>('A' + rng() % 26);
    for (std::size_t i = 1; i < len; ++i) {
        out[i] = lower[rng() % 26];
    }
    return out;
}

}  // namespace

std::vector<engine::SourceItem> corpus_items(const CorpusManifest& manifest,
                                             const std::string& dir,
                                             const model::ModelBundle& model) {
    const bool image = is_image_category(manifest.category);
    const model::EntityDef& entity = model.conceptual.entities.front();
    const bool has_text_file = entity.find_property("TextFile") != nullptr;
    const bool has_picture = entity.find_property("Picture") != nullptr;

    std::vector<engine::SourceItem> items;
    items.reserve(manifest.files.size());
    for (const CorpusFile& f : manifest.files) {
        engine::SourceItem item;
        item.id = f.id;
        item.path = (fs::path(dir) / corpus_file_name(manifest.category, f.id)).string();
        item.size_bytes = f.size_bytes;
        if (image && has_picture) {
            item.blob_column = "Picture";
        } else if (!image && has_text_file) {
            item.blob_column = "TextFile";
        } else {
            item.blob_column = entity.blob_properties().empty()
                                   ? std::string{}
                                   : entity.blob_properties().front();
        }

        auto rng = rng_for(manifest.seed, f.id + ":scalars");
        if (entity.find_property("LastName")) {
            item.scalars["LastName"] = synth_name(rng, 5, 12);
        }
        if (entity.find_property("FirstName")) {
            item.scalars["FirstName"] = synth_name(rng, 4, 10);
        }
        if (entity.find_property("Address")) {
            item.scalars["Address"] =
                std::to_string(1 + rng() % 9999) + " " + synth_name(rng, 6, 14) + " St";
        }
        if (entity.find_property("City")) {
            item.scalars["City"] = synth_name(rng, 4, 12);
        }
        items.push_back(std::move(item));
    }
    return items;
}

// ---------------------------------------------------------------------------
// Benchmark runs
// ---------------------------------------------------------------------------

CategoryResult run_benchmark(const CorpusManifest& manifest, const std::string& corpus_dir,
                             const model::ModelBundle& model, const RunEnvironment& env,
                             const std::optional<engine::LoadingStrategy>& strategy,
                             std::optional<int> batch_size) {
    CategoryResult result;
    result.category = manifest.category;

    const std::vector<engine::SourceItem> items = corpus_items(manifest, corpus_dir, model);
    const std::string* table = model.mapping.table_for(model.conceptual.entities.front().name);
    std::map<std::string, bool> item_failed;

    for (Method method : {Method::baseline, Method::orm}) {
        // Fresh stores per method: both sides start empty so each method
        // times its own save and transfer.
        {
            auto src = store::open_store(env.source, env.store_options);
            auto dst = store::open_store(env.destination, env.store_options);
            if (table) {
                src->drop_table(*table);
                dst->drop_table(*table);
            }
        }

        engine::PlanOptions options;
        options.method = method;
        options.category = manifest.category;
        if (method == Method::orm) {
            options.strategy = strategy;
            options.batch_size = batch_size;
        }
        engine::MigrationPlan plan =
            engine::plan_migration(model, env.source, env.destination, options);
        engine::MigrationRun run(std::move(plan), env.store_options);
        engine::MigrationResult migration = run.execute(items);

        for (const engine::ItemResult& item : migration.items) {
            if (item.error || !item.verified) {
                result.failures.push_back(MethodFailure{
                    item.key, method, item.error.value_or("verification did not pass")});
                item_failed[item.key] = true;
                continue;
            }
            result.records.push_back(make_timing_record(item.key, manifest.category, method,
                                                        item.save_ms, item.transfer_ms));
        }
    }

    // Pair only items that survived both methods.
    std::vector<TimingRecord> pairable;
    for (const TimingRecord& r : result.records) {
        if (!item_failed.count(r.item_id)) pairable.push_back(r);
    }
    result.failed_items = item_failed.size();
    result.pairs = pair_records(pairable);
    result.rows = compute_efficiency(result.pairs);
    result.outliers = flag_outliers(result.pairs);
    return result;
}

BenchOutput run_bench(const BenchConfig& config) {
    if (config.categories.empty()) {
        raise(ErrorKind::invalid_argument, "no benchmark categories selected");
    }
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) {
        raise(ErrorKind::io, "cannot create output directory '" + config.out_dir + "'");
    }

    RunEnvironment env;
    env.store_options.bearer_token = config.bearer_token;

    store::VirtualClock clock;
    if (config.virtual_clock) {
        env.store_options.virtual_clock = &clock;
    }

    env.source = store::StoreEndpoint::parse(config.source_uri);
    store::StoreEndpoint dest = store::StoreEndpoint::parse(config.dest_uri);

    // Shaping (and the deterministic clock) need the simulator in front of
    // the destination; serve a local destination in process.
    std::unique_ptr<store::SimulatorServer> simulator;
    const bool needs_simulator = !config.shaping.unlimited() || config.virtual_clock;
    if (needs_simulator) {
        if (dest.kind != store::EndpointKind::local) {
            raise(ErrorKind::invalid_argument,
                  "shaping flags apply to a local: destination served by the bench itself; "
                  "start a remote simulator with the desired profile instead");
        }
        store::ServerConfig server_config;
        server_config.root = dest.location;
        server_config.shaping = config.shaping;
        server_config.virtual_mode = config.virtual_clock;
        server_config.bearer_token = config.bearer_token;
        simulator = std::make_unique<store::SimulatorServer>(std::move(server_config));
        simulator->start("127.0.0.1", 0);
        dest = store::StoreEndpoint::parse(simulator->base_url());
        dest.credentials = config.bearer_token;
    }
    env.destination = dest;

    BenchOutput output;
    output.out_dir = config.out_dir;

    std::map<Category, std::uint64_t> extra_failures;
    std::vector<EfficiencyRow> all_rows;

    for (Category category : config.categories) {
        const bool large =
            category == Category::image_large || category == Category::text_large;
        const std::uint64_t lo = large ? config.large_min_bytes : config.small_min_bytes;
        const std::uint64_t hi = large ? config.large_max_bytes : config.small_max_bytes;

        const std::string corpus_dir =
            (fs::path(config.out_dir) / "corpus" / engine::to_string(category)).string();

        CorpusManifest manifest;
        bool generated = false;
        if (config.reuse_corpus && fs::exists(fs::path(corpus_dir) / "manifest.json")) {
            manifest = load_manifest(corpus_dir);
            generated = manifest.count == config.count && manifest.seed == config.seed &&
                        manifest.size_min_bytes == lo && manifest.size_max_bytes == hi;
        }
        if (!generated) {
            manifest = generate_corpus(category, config.count, lo, hi, config.seed, corpus_dir);
        }

        CategoryResult result = run_benchmark(manifest, corpus_dir, config.model, env,
                                              config.strategy, config.batch_size);

        report::write_efficiency_csv(
            (fs::path(config.out_dir) /
             ("efficiency_" + std::string(engine::to_string(category)) + ".csv"))
                .string(),
            result.rows);

        if (result.failed_items > 0) {
            extra_failures[category] = result.failed_items;
        }
        all_rows.insert(all_rows.end(), result.rows.begin(), result.rows.end());
        output.categories.push_back(std::move(result));
    }

    output.report = aggregate(all_rows, extra_failures);
    report::write_aggregate_json((fs::path(config.out_dir) / "aggregate.json").string(),
                                 output.report);
    report::write_aggregate_svg((fs::path(config.out_dir) / "aggregate.svg").string(),
                                output.report);
    if (simulator) {
        simulator->stop();
    }
    return output;
}

}  // namespace cloudshift::bench
