/**
 * cloudshift — entity-mapped data migration between stores, plus the
 * benchmark harness comparing the mapped (orm) method against the
 * column-wise baseline.
 *
 * Subcommands: model | validate | serve | migrate | bench | report
 * Exit codes:  0 success, 1 domain failure, 2 usage error.
 */

#include <CLI11.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cloudshift/bench.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/model.hpp"
#include "cloudshift/report.hpp"
#include "cloudshift/server.hpp"
#include "cloudshift/store.hpp"
#include "cloudshift/transfer.hpp"
#include "cloudshift/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cloudshift;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// Config document
// ---------------------------------------------------------------------------

const std::set<std::string>& allowed_config_keys() {
    static const std::set<std::string> keys = {
        "version",      "model",          "source",          "dest",
        "method",       "strategy",       "load_columns",    "batch_size",
        "latency_ms",   "bandwidth",      "jitter_ms",       "categories",
        "count",        "seed",           "out",             "policy",
        "strict",       "parallel",       "virtual_clock",   "items",
        "records",      "bind",           "root",            "size_cap_bytes",
        "small_min_bytes", "small_max_bytes", "large_min_bytes", "large_max_bytes",
        "reuse_corpus",
    };
    return keys;
}

/// Flag > config file > built-in default.
class Settings {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            raise(ErrorKind::invalid_argument, "cannot open config file '" + path + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        config_ = json::parse(buf.str(), nullptr, false);
        if (config_.is_discarded() || !config_.is_object()) {
            raise(ErrorKind::invalid_argument, "config file is not a JSON object");
        }
        if (!config_.contains("version")) {
            raise(ErrorKind::invalid_argument, "config file must carry a 'version' field");
        }
        if (config_.at("version").get<int>() != 1) {
            raise(ErrorKind::invalid_argument, "unsupported config version");
        }
        for (const auto& [key, value] : config_.items()) {
            if (!allowed_config_keys().count(key)) {
                raise(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
            }
        }
    }

    template <typename T>
    T pick(const CLI::Option* opt, const T& flag_value, const char* key, const T& fallback) const {
        if (opt && opt->count() > 0) return flag_value;
        if (config_.is_object() && config_.contains(key)) {
            return config_.at(key).get<T>();
        }
        return fallback;
    }

    bool pick_flag(const CLI::Option* opt, bool flag_value, const char* key,
                   bool fallback) const {
        if (opt && opt->count() > 0) return flag_value;
        if (config_.is_object() && config_.contains(key)) {
            return config_.at(key).get<bool>();
        }
        return fallback;
    }

private:
    json config_;
};

std::optional<std::string> token_from_env() {
    const char* token = std::getenv("CLOUDSHIFT_TOKEN");
    if (token && *token) return std::string(token);
    return std::nullopt;
}

std::vector<std::string> split_csv_arg(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

engine::LoadingStrategy make_strategy(const std::string& kind_name,
                                      const std::string& load_columns) {
    auto kind = engine::parse_load_kind(kind_name);
    if (!kind) {
        raise(ErrorKind::invalid_argument,
              "strategy must be lazy, explicit, or eager (got '" + kind_name + "')");
    }
    engine::LoadingStrategy strategy;
    strategy.kind = *kind;
    strategy.load_columns = split_csv_arg(load_columns);
    return strategy;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorKind::io, "cannot write '" + path + "'");
    }
    out << text;
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

void print_model(const model::ModelBundle& bundle) {
    for (const auto& entity : bundle.conceptual.entities) {
        const std::string* table = bundle.mapping.table_for(entity.name);
        std::cout << "entity " << entity.name;
        if (table) std::cout << "  ->  table " << bundle.storage.schema_namespace << "." << *table;
        std::cout << "\n";
        for (const auto& p : entity.properties) {
            std::cout << "  " << p.name << " : " << model::to_string(p.kind);
            if (p.max_length) std::cout << "(" << *p.max_length << ")";
            if (p.is_key) std::cout << "  [key]";
            if (p.required) std::cout << "  [required]";
            if (p.generated) std::cout << "  [generated]";
            const std::string* col = bundle.mapping.column_for(entity.name, p.name);
            if (col && *col != p.name) std::cout << "  -> column " << *col;
            std::cout << "\n";
        }
        for (const auto& a : entity.associations) {
            std::cout << "  association " << a.name << ": " << a.from_entity << "."
                      << a.from_property << " -> " << a.to_entity << "." << a.to_property << "\n";
        }
        std::cout << "  properties: " << entity.properties.size()
                  << ", keys: 1, blob columns: " << entity.blob_properties().size() << "\n";
    }
}

int cmd_model(const std::string& model_ref, bool print, const std::string& out_path) {
    model::ModelBundle bundle = model::load_model_reference(model_ref);
    if (print || out_path.empty()) {
        print_model(bundle);
    }
    if (!out_path.empty()) {
        write_text_file(out_path, model::serialize(bundle) + "\n");
        std::cout << "model document written to " << out_path << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& model_ref, const std::string& source_uri,
                 const std::string& records_path, const std::string& policy_name,
                 const std::string& out_dir, std::uint64_t cap_bytes) {
    model::ModelBundle bundle = model::load_model_reference(model_ref);

    validation::Policy policy;
    if (policy_name == "exclude") {
        policy = validation::Policy::exclude;
    } else if (policy_name == "fail") {
        policy = validation::Policy::fail;
    } else {
        raise(ErrorKind::invalid_argument, "policy must be 'exclude' or 'fail'");
    }

    validation::RecordStream records;
    if (!records_path.empty()) {
        records = validation::read_records_jsonl(records_path);
    } else if (!source_uri.empty()) {
        store::StoreOptions options;
        options.bearer_token = token_from_env();
        auto connector = store::open_store(source_uri, options);
        records = validation::fetch_records(*connector, bundle);
    } else {
        raise(ErrorKind::invalid_argument, "validate needs --source or --records");
    }

    validation::ValidationReport report = validation::run_all(records, bundle, policy, cap_bytes);
    std::cout << report.to_table();
    if (out_dir.empty()) {
        std::cout << report.to_json() << "\n";
    } else {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "validation_report.json").string(),
                        report.to_json() + "\n");
    }

    if (policy == validation::Policy::fail && !report.violations.empty()) {
        return kExitDomain;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) {
        raise(ErrorKind::invalid_argument, "--bind must be host:port");
    }
    const std::string host = bind.substr(0, colon);
    const int port = std::atoi(bind.c_str() + colon + 1);
    if (host.empty() || port < 0 || port > 65535) {
        raise(ErrorKind::invalid_argument, "--bind must be host:port");
    }
    return {host, port};
}

int cmd_serve(const std::string& root, std::int64_t latency_ms, std::uint64_t bandwidth,
              std::int64_t jitter_ms, const std::string& bind, bool virtual_mode,
              std::uint64_t cap_bytes) {
    store::ServerConfig config;
    config.root = root;
    config.shaping.per_request_latency_ms = latency_ms;
    if (bandwidth > 0) config.shaping.bandwidth_bytes_per_sec = bandwidth;
    config.shaping.jitter_ms = jitter_ms;
    config.virtual_mode = virtual_mode;
    config.bearer_token = token_from_env();
    config.size_cap_bytes = cap_bytes;

    auto [host, port] = parse_bind(bind);
    store::SimulatorServer server(std::move(config));
    std::cout << "serving " << root << " on http://" << host << ":" << port
              << (virtual_mode ? " (deterministic clock mode)" : "") << "\n"
              << "latency " << latency_ms << " ms, jitter " << jitter_ms << " ms, bandwidth "
              << (bandwidth > 0 ? std::to_string(bandwidth) + " B/s" : std::string("unlimited"))
              << "\n";
    server.run(host, port);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// migrate
// ---------------------------------------------------------------------------

int cmd_migrate(const std::string& model_ref,
                const std::string& source_uri, const std::string& dest_uri,
                const std::string& method_name, const std::string& strategy_name,
                const std::string& load_columns, int batch, bool strict, int parallel,
                const std::string& items_dir, const std::string& out_dir,
                std::uint64_t cap_bytes) {
    model::ModelBundle bundle = model::load_model_reference(model_ref);

    auto method = engine::parse_method(method_name);
    if (!method) {
        raise(ErrorKind::invalid_argument, "method must be 'orm' or 'baseline'");
    }

    engine::PlanOptions options;
    options.method = *method;
    if (!strategy_name.empty()) {
        options.strategy = make_strategy(strategy_name, load_columns);
    }
    if (batch >= 0) options.batch_size = batch;
    options.strict = strict;
    options.parallel = parallel;
    options.size_cap_bytes = cap_bytes;

    store::StoreEndpoint source = store::StoreEndpoint::parse(source_uri);
    store::StoreEndpoint dest = store::StoreEndpoint::parse(dest_uri);
    source.credentials = token_from_env();
    dest.credentials = source.credentials;

    engine::MigrationPlan plan = engine::plan_migration(bundle, source, dest, options);

    store::StoreOptions store_options;
    store_options.bearer_token = token_from_env();
    store_options.size_cap_bytes = cap_bytes;
    engine::MigrationRun run(std::move(plan), store_options);

    engine::MigrationResult result;
    if (!items_dir.empty()) {
        bench::CorpusManifest manifest = bench::load_manifest(items_dir);
        auto items = bench::corpus_items(manifest, items_dir, bundle);
        result = run.execute(items);
    } else {
        result = run.transfer_phase();
    }

    const std::string rendered = result.to_json();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "migration_result.json").string(), rendered + "\n");
    }
    std::cout << rendered << "\n";
    std::cerr << "items " << result.totals.items << ", verified " << result.totals.verified_count
              << ", failed " << result.totals.failed_count << ", moved "
              << result.totals.bytes_moved << " bytes\n";

    if (strict && result.totals.failed_count > 0) {
        return kExitDomain;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const bench::BenchConfig& config) {
    bench::BenchOutput output = bench::run_bench(config);

    for (const auto& category : output.categories) {
        std::cout << "\n== " << engine::to_string(category.category) << " (top 10 by TTTE)\n";
        std::cout << report::render_top_rows(category.rows);
        if (!category.outliers.empty()) {
            std::cout << "outliers (>= 200% apart): " << category.outliers.size() << "\n";
            for (const auto& flag : category.outliers) {
                std::cout << "  " << flag.item_id << " " << flag.field << ": baseline "
                          << flag.baseline_ms << " ms vs orm " << flag.orm_ms << " ms\n";
            }
        }
        for (const auto& failure : category.failures) {
            std::cout << "failed: " << failure.item_id << " ["
                      << engine::to_string(failure.method) << "] " << failure.error << "\n";
        }
    }
    std::cout << "\n" << report::render_aggregate(output.report);
    std::cout << "reports written under " << output.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const std::string& in_dir, const std::string& out_dir) {
    std::vector<bench::EfficiencyRow> all_rows;
    bool any = false;
    for (engine::Category category :
         {engine::Category::image_large, engine::Category::image_small,
          engine::Category::text_large, engine::Category::text_small}) {
        const fs::path path =
            fs::path(in_dir) / ("efficiency_" + std::string(engine::to_string(category)) + ".csv");
        if (!fs::exists(path)) continue;
        any = true;
        auto rows = report::read_efficiency_csv(path.string(), category);
        std::cout << "\n== " << engine::to_string(category) << " (top 10 by TTTE, "
                  << rows.size() << " rows)\n";
        std::cout << report::render_top_rows(rows);
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
    if (!any) {
        raise(ErrorKind::invalid_argument,
              "no efficiency_<category>.csv files found under '" + in_dir + "'");
    }
    bench::AggregateReport aggregate = bench::aggregate(all_rows);
    std::cout << "\n" << report::render_aggregate(aggregate);

    const std::string target = out_dir.empty() ? in_dir : out_dir;
    fs::create_directories(target);
    report::write_aggregate_json((fs::path(target) / "aggregate.json").string(), aggregate);
    report::write_aggregate_svg((fs::path(target) / "aggregate.svg").string(), aggregate);
    std::cout << "aggregate.json and aggregate.svg written under " << target << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cloudshift — entity-mapped data migration engine and benchmark harness"};
    app.require_subcommand(0, 1);

    // --- model ---
    auto* model_cmd = app.add_subcommand("model", "Inspect a data model or export its document");
    std::string model_ref = "personnel";
    bool model_print = false;
    std::string model_out;
    model_cmd->add_option("--model", model_ref, "Preset name or model document path");
    model_cmd->add_flag("--print", model_print, "Print the resolved model");
    model_cmd->add_option("--out", model_out, "Write the full model document to this path");

    // --- validate ---
    auto* validate_cmd =
        app.add_subcommand("validate", "Run the pre-migration checks against a record source");
    std::string v_model = "personnel", v_source, v_records, v_policy = "exclude", v_out,
                v_config;
    std::uint64_t v_cap = store::kDefaultSizeCapBytes;
    validate_cmd->add_option("--model", v_model, "Preset name or model document path");
    validate_cmd->add_option("--source", v_source, "Record source endpoint (local:<dir> or http://...)");
    validate_cmd->add_option("--records", v_records, "JSON-lines records file instead of an endpoint");
    validate_cmd->add_option("--policy", v_policy, "exclude | fail");
    validate_cmd->add_option("--out", v_out, "Directory for validation_report.json");
    validate_cmd->add_option("--cap-bytes", v_cap, "Blob size cap for the length check");
    validate_cmd->add_option("--config", v_config, "JSON config file (flags win)");

    // --- serve ---
    auto* serve_cmd = app.add_subcommand("serve", "Run the shaped store simulator");
    std::string s_root, s_bind = "127.0.0.1:8080", s_config;
    std::int64_t s_latency = 0, s_jitter = 0;
    std::uint64_t s_bandwidth = 0, s_cap = store::kDefaultSizeCapBytes;
    bool s_virtual = false;
    serve_cmd->add_option("--root", s_root, "Directory to serve");
    serve_cmd->add_option("--latency-ms", s_latency, "Per-request latency in milliseconds");
    serve_cmd->add_option("--bandwidth", s_bandwidth, "Blob bandwidth cap in bytes/s (0 = unlimited)");
    serve_cmd->add_option("--jitter-ms", s_jitter, "Extra uniform latency jitter in milliseconds");
    serve_cmd->add_option("--bind", s_bind, "host:port to bind");
    serve_cmd->add_flag("--virtual", s_virtual,
                        "Deterministic clock mode: report request costs instead of sleeping");
    serve_cmd->add_option("--cap-bytes", s_cap, "Blob size cap");
    serve_cmd->add_option("--config", s_config, "JSON config file (flags win)");

    // --- migrate ---
    auto* migrate_cmd = app.add_subcommand("migrate", "Migrate rows and blobs between endpoints");
    std::string m_model = "personnel", m_source, m_dest, m_method = "orm", m_strategy = "eager",
                m_load, m_items, m_out, m_config;
    int m_batch = 25, m_parallel = 1;
    bool m_strict = false;
    std::uint64_t m_cap = store::kDefaultSizeCapBytes;
    migrate_cmd->add_option("--model", m_model, "Preset name or model document path");
    migrate_cmd->add_option("--source", m_source, "Source endpoint");
    migrate_cmd->add_option("--dest", m_dest, "Destination endpoint");
    migrate_cmd->add_option("--method", m_method, "orm | baseline");
    migrate_cmd->add_option("--strategy", m_strategy, "lazy | explicit | eager (orm only)");
    migrate_cmd->add_option("--load", m_load,
                            "Blob columns for the explicit strategy's Load call (CSV)");
    migrate_cmd->add_option("--batch", m_batch, "Rows per batch (orm only)");
    migrate_cmd->add_flag("--strict", m_strict, "Exit nonzero when any item fails");
    migrate_cmd->add_option("--parallel", m_parallel, "Concurrent item transfers inside a batch");
    migrate_cmd->add_option("--items", m_items,
                            "Corpus directory to save into the source first (save phase)");
    migrate_cmd->add_option("--out", m_out, "Directory for migration_result.json");
    migrate_cmd->add_option("--cap-bytes", m_cap, "Item size cap in bytes");
    migrate_cmd->add_option("--config", m_config, "JSON config file (flags win)");

    // --- bench ---
    auto* bench_cmd =
        app.add_subcommand("bench", "Paired baseline/orm benchmark over generated corpora");
    std::string b_categories = "a,b,c,d", b_source, b_dest, b_strategy = "eager", b_load,
                b_out = "bench-out", b_config, b_model = "personnel";
    std::uint64_t b_count = 100, b_seed = 7, b_bandwidth = 0;
    std::uint64_t b_small_min = 100ull * 1024, b_small_max = 900ull * 1024;
    std::uint64_t b_large_min = 1ull << 20, b_large_max = 8ull << 20;
    std::int64_t b_latency = 0, b_jitter = 0;
    int b_batch = 25, b_parallel = 1;
    bool b_virtual = false, b_reuse = false;
    bench_cmd->add_option("--categories", b_categories,
                          "CSV of a|b|c|d or image_large|image_small|text_large|text_small");
    bench_cmd->add_option("--count", b_count, "Files per category");
    bench_cmd->add_option("--seed", b_seed, "Corpus generator seed");
    bench_cmd->add_option("--source", b_source, "Source endpoint");
    bench_cmd->add_option("--dest", b_dest, "Destination endpoint");
    bench_cmd->add_option("--strategy", b_strategy, "Loading strategy for the orm method");
    bench_cmd->add_option("--load", b_load, "Blob columns for the explicit Load call (CSV)");
    bench_cmd->add_option("--batch", b_batch, "Rows per batch for the orm method");
    bench_cmd->add_option("--latency-ms", b_latency, "Destination shaping: per-request latency");
    bench_cmd->add_option("--bandwidth", b_bandwidth,
                          "Destination shaping: blob bandwidth in bytes/s (0 = unlimited)");
    bench_cmd->add_option("--jitter-ms", b_jitter, "Destination shaping: latency jitter");
    bench_cmd->add_flag("--virtual-clock", b_virtual,
                        "Deterministic clock mode (exact reproducibility)");
    bench_cmd->add_option("--parallel", b_parallel, "Concurrent item transfers inside a batch");
    bench_cmd->add_option("--small-min-bytes", b_small_min, "Small-category minimum file size");
    bench_cmd->add_option("--small-max-bytes", b_small_max, "Small-category maximum file size");
    bench_cmd->add_option("--large-min-bytes", b_large_min, "Large-category minimum file size");
    bench_cmd->add_option("--large-max-bytes", b_large_max, "Large-category maximum file size");
    bench_cmd->add_flag("--reuse-corpus", b_reuse, "Reuse an existing matching corpus");
    bench_cmd->add_option("--out", b_out, "Output directory");
    bench_cmd->add_option("--model", b_model, "Preset name or model document path");
    bench_cmd->add_option("--config", b_config, "JSON config file (flags win)");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "Render summary tables and the aggregate chart");
    std::string r_in = "bench-out", r_out;
    report_cmd->add_option("--in", r_in, "Directory holding efficiency_<category>.csv files");
    report_cmd->add_option("--out", r_out, "Directory for aggregate.json/svg (defaults to --in)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (model_cmd->parsed()) {
            return cmd_model(model_ref, model_print, model_out);
        }
        if (validate_cmd->parsed()) {
            Settings settings;
            if (!v_config.empty()) settings.load(v_config);
            const std::string model_v =
                settings.pick(validate_cmd->get_option("--model"), v_model, "model",
                              std::string("personnel"));
            const std::string source =
                settings.pick(validate_cmd->get_option("--source"), v_source, "source",
                              std::string());
            const std::string records =
                settings.pick(validate_cmd->get_option("--records"), v_records, "records",
                              std::string());
            const std::string policy =
                settings.pick(validate_cmd->get_option("--policy"), v_policy, "policy",
                              std::string("exclude"));
            const std::string out =
                settings.pick(validate_cmd->get_option("--out"), v_out, "out", std::string());
            const std::uint64_t cap = settings.pick(validate_cmd->get_option("--cap-bytes"), v_cap,
                                                    "size_cap_bytes", store::kDefaultSizeCapBytes);
            return cmd_validate(model_v, source, records, policy, out, cap);
        }
        if (serve_cmd->parsed()) {
            Settings settings;
            if (!s_config.empty()) settings.load(s_config);
            const std::string root =
                settings.pick(serve_cmd->get_option("--root"), s_root, "root", std::string());
            if (root.empty()) {
                std::cerr << "serve needs --root\n";
                return kExitUsage;
            }
            return cmd_serve(
                root,
                settings.pick(serve_cmd->get_option("--latency-ms"), s_latency, "latency_ms",
                              std::int64_t{0}),
                settings.pick(serve_cmd->get_option("--bandwidth"), s_bandwidth, "bandwidth",
                              std::uint64_t{0}),
                settings.pick(serve_cmd->get_option("--jitter-ms"), s_jitter, "jitter_ms",
                              std::int64_t{0}),
                settings.pick(serve_cmd->get_option("--bind"), s_bind, "bind",
                              std::string("127.0.0.1:8080")),
                settings.pick_flag(serve_cmd->get_option("--virtual"), s_virtual, "virtual_clock",
                                   false),
                settings.pick(serve_cmd->get_option("--cap-bytes"), s_cap, "size_cap_bytes",
                              store::kDefaultSizeCapBytes));
        }
        if (migrate_cmd->parsed()) {
            Settings settings;
            if (!m_config.empty()) settings.load(m_config);
            const std::string model_m = settings.pick(migrate_cmd->get_option("--model"), m_model,
                                                      "model", std::string("personnel"));
            const std::string source = settings.pick(migrate_cmd->get_option("--source"),
                                                     m_source, "source", std::string());
            const std::string dest =
                settings.pick(migrate_cmd->get_option("--dest"), m_dest, "dest", std::string());
            if (source.empty() || dest.empty()) {
                std::cerr << "migrate needs --source and --dest\n";
                return kExitUsage;
            }
            return cmd_migrate(
                model_m, source, dest,
                settings.pick(migrate_cmd->get_option("--method"), m_method, "method",
                              std::string("orm")),
                settings.pick(migrate_cmd->get_option("--strategy"), m_strategy, "strategy",
                              std::string()),
                settings.pick(migrate_cmd->get_option("--load"), m_load, "load_columns",
                              std::string()),
                settings.pick(migrate_cmd->get_option("--batch"), m_batch, "batch_size", -1),
                settings.pick_flag(migrate_cmd->get_option("--strict"), m_strict, "strict", false),
                settings.pick(migrate_cmd->get_option("--parallel"), m_parallel, "parallel", 1),
                settings.pick(migrate_cmd->get_option("--items"), m_items, "items",
                              std::string()),
                settings.pick(migrate_cmd->get_option("--out"), m_out, "out", std::string()),
                settings.pick(migrate_cmd->get_option("--cap-bytes"), m_cap, "size_cap_bytes",
                              store::kDefaultSizeCapBytes));
        }
        if (bench_cmd->parsed()) {
            Settings settings;
            if (!b_config.empty()) settings.load(b_config);

            bench::BenchConfig config;
            config.model = model::load_model_reference(settings.pick(
                bench_cmd->get_option("--model"), b_model, "model", std::string("personnel")));
            config.source_uri = settings.pick(bench_cmd->get_option("--source"), b_source,
                                              "source", std::string());
            config.dest_uri =
                settings.pick(bench_cmd->get_option("--dest"), b_dest, "dest", std::string());
            if (config.source_uri.empty() || config.dest_uri.empty()) {
                std::cerr << "bench needs --source and --dest\n";
                return kExitUsage;
            }
            const std::string categories = settings.pick(bench_cmd->get_option("--categories"),
                                                         b_categories, "categories",
                                                         std::string("a,b,c,d"));
            for (const std::string& name : split_csv_arg(categories)) {
                auto category = engine::parse_category(name);
                if (!category) {
                    std::cerr << "unknown category '" << name << "'\n";
                    return kExitUsage;
                }
                config.categories.push_back(*category);
            }
            config.count =
                settings.pick(bench_cmd->get_option("--count"), b_count, "count",
                              std::uint64_t{100});
            config.seed =
                settings.pick(bench_cmd->get_option("--seed"), b_seed, "seed", std::uint64_t{7});
            config.shaping.per_request_latency_ms = settings.pick(
                bench_cmd->get_option("--latency-ms"), b_latency, "latency_ms", std::int64_t{0});
            const std::uint64_t bandwidth = settings.pick(bench_cmd->get_option("--bandwidth"),
                                                          b_bandwidth, "bandwidth",
                                                          std::uint64_t{0});
            if (bandwidth > 0) config.shaping.bandwidth_bytes_per_sec = bandwidth;
            config.shaping.jitter_ms = settings.pick(bench_cmd->get_option("--jitter-ms"),
                                                     b_jitter, "jitter_ms", std::int64_t{0});
            config.virtual_clock = settings.pick_flag(bench_cmd->get_option("--virtual-clock"),
                                                      b_virtual, "virtual_clock", false);
            config.bearer_token = token_from_env();
            const std::string strategy_name = settings.pick(
                bench_cmd->get_option("--strategy"), b_strategy, "strategy", std::string("eager"));
            const std::string load = settings.pick(bench_cmd->get_option("--load"), b_load,
                                                   "load_columns", std::string());
            config.strategy = make_strategy(strategy_name, load);
            config.batch_size =
                settings.pick(bench_cmd->get_option("--batch"), b_batch, "batch_size", 25);
            config.parallel =
                settings.pick(bench_cmd->get_option("--parallel"), b_parallel, "parallel", 1);
            config.small_min_bytes = settings.pick(bench_cmd->get_option("--small-min-bytes"),
                                                   b_small_min, "small_min_bytes", b_small_min);
            config.small_max_bytes = settings.pick(bench_cmd->get_option("--small-max-bytes"),
                                                   b_small_max, "small_max_bytes", b_small_max);
            config.large_min_bytes = settings.pick(bench_cmd->get_option("--large-min-bytes"),
                                                   b_large_min, "large_min_bytes", b_large_min);
            config.large_max_bytes = settings.pick(bench_cmd->get_option("--large-max-bytes"),
                                                   b_large_max, "large_max_bytes", b_large_max);
            config.reuse_corpus = settings.pick_flag(bench_cmd->get_option("--reuse-corpus"),
                                                     b_reuse, "reuse_corpus", false);
            config.out_dir = settings.pick(bench_cmd->get_option("--out"), b_out, "out",
                                           std::string("bench-out"));
            return cmd_bench(config);
        }
        if (report_cmd->parsed()) {
            return cmd_report(r_in, r_out);
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return (e.kind() == ErrorKind::invalid_argument) ? kExitUsage : kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }

    std::cerr << app.help();
    return kExitUsage;
}
