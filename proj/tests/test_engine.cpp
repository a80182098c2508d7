#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <memory>
#include <random>

#include "cloudshift/bench.hpp"
#include "cloudshift/checksum.hpp"
#include "cloudshift/errors.hpp"
#include "cloudshift/report.hpp"
#include "cloudshift/server.hpp"
#include "cloudshift/store.hpp"
#include "cloudshift/transfer.hpp"
#include "test_support.hpp"

using namespace cloudshift;
using namespace cloudshift::engine;
using testsupport::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error to be thrown");
    return ErrorKind::io;
}

std::vector<SourceItem> make_items(const TempDir& dir, int n, std::size_t bytes_each,
                                   const std::string& blob_column = "Picture") {
    std::mt19937_64 rng(4242);
    std::vector<SourceItem> items;
    for (int i = 1; i <= n; ++i) {
        SourceItem item;
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%03d", i);
        item.id = "item" + std::string(buf);
        item.path = dir.sub(item.id + ".bin");
        testsupport::write_file(item.path, testsupport::random_bytes(rng, bytes_each));
        item.size_bytes = bytes_each;
        item.blob_column = blob_column;
        item.scalars["LastName"] = std::string("Name") + buf;
        item.scalars["FirstName"] = std::string("First") + buf;
        item.scalars["Address"] = std::string("12 Elm St");
        item.scalars["City"] = std::string("Town");
        items.push_back(std::move(item));
    }
    return items;
}

struct LocalPair {
    TempDir dir{"engine"};
    model::ModelBundle bundle = model::personnel_preset();

    store::StoreEndpoint source() const {
        return store::StoreEndpoint::parse("local:" + (dir.path() / "src").string());
    }
    store::StoreEndpoint dest() const {
        return store::StoreEndpoint::parse("local:" + (dir.path() / "dst").string());
    }
};

/// Source local (unshaped), destination behind a 20 ms virtual simulator.
struct ShapedFixture {
    TempDir dir{"shaped"};
    model::ModelBundle bundle = model::personnel_preset();
    store::VirtualClock clock;
    std::unique_ptr<store::SimulatorServer> server;

    explicit ShapedFixture(std::int64_t latency_ms = 20) {
        store::ServerConfig config;
        config.root = (dir.path() / "dst").string();
        config.shaping.per_request_latency_ms = latency_ms;
        config.virtual_mode = true;
        server = std::make_unique<store::SimulatorServer>(std::move(config));
        server->start("127.0.0.1", 0);
    }

    ~ShapedFixture() { server->stop(); }

    store::StoreEndpoint source() const {
        return store::StoreEndpoint::parse("local:" + (dir.path() / "src").string());
    }
    store::StoreEndpoint dest() const { return store::StoreEndpoint::parse(server->base_url()); }
    store::StoreOptions options() {
        store::StoreOptions o;
        o.virtual_clock = &clock;
        return o;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

TEST_CASE("plan_migration validates method and strategy combinations") {
    LocalPair fx;

    SUBCASE("orm + eager + batch 25 is a valid plan") {
        PlanOptions options;
        options.method = Method::orm;
        options.strategy = LoadingStrategy{LoadKind::eager, {}};
        options.batch_size = 25;
        MigrationPlan plan = plan_migration(fx.bundle, fx.source(), fx.dest(), options);
        CHECK(plan.batch_size == 25);
        CHECK(plan.strategy.kind == LoadKind::eager);
        CHECK(plan.entity == "Personnel");
    }

    SUBCASE("baseline forces lazy and batch 1") {
        PlanOptions options;
        options.method = Method::baseline;
        MigrationPlan plan = plan_migration(fx.bundle, fx.source(), fx.dest(), options);
        CHECK(plan.strategy.kind == LoadKind::lazy);
        CHECK(plan.batch_size == 1);
    }

    SUBCASE("baseline + eager is rejected") {
        PlanOptions options;
        options.method = Method::baseline;
        options.strategy = LoadingStrategy{LoadKind::eager, {}};
        CHECK(kind_of([&] { plan_migration(fx.bundle, fx.source(), fx.dest(), options); }) ==
              ErrorKind::invalid_argument);
    }

    SUBCASE("baseline + batch > 1 is rejected") {
        PlanOptions options;
        options.method = Method::baseline;
        options.batch_size = 5;
        CHECK(kind_of([&] { plan_migration(fx.bundle, fx.source(), fx.dest(), options); }) ==
              ErrorKind::invalid_argument);
    }

    SUBCASE("a mapping violation rejects the plan and is attached") {
        model::ModelBundle broken = fx.bundle;
        for (auto& p : broken.conceptual.entities[0].properties) {
            if (p.name == "LastName") p.max_length = 100;  // column stays at 50
        }
        try {
            plan_migration(broken, fx.source(), fx.dest(), PlanOptions{});
            FAIL("expected rejection");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::invalid_model);
            CHECK(std::string(e.what()).find("length_overflow") != std::string::npos);
            CHECK(std::string(e.what()).find("LastName") != std::string::npos);
        }
    }

    SUBCASE("unreachable endpoint is rejected") {
        auto unreachable = store::StoreEndpoint::parse("http://127.0.0.1:1");
        CHECK(kind_of([&] {
                  plan_migration(fx.bundle, fx.source(), unreachable, PlanOptions{});
              }) == ErrorKind::connection);
    }

    SUBCASE("explicit load columns must be blob columns") {
        PlanOptions options;
        options.strategy = LoadingStrategy{LoadKind::explicit_load, {"City"}};
        CHECK(kind_of([&] { plan_migration(fx.bundle, fx.source(), fx.dest(), options); }) ==
              ErrorKind::invalid_argument);
    }
}

// ---------------------------------------------------------------------------
// Save phase
// ---------------------------------------------------------------------------

TEST_CASE("save_phase stores rows and blobs with nonnegative timings") {
    LocalPair fx;
    auto items = make_items(fx.dir, 10, 2048);

    PlanOptions options;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
    auto saved = run.save_phase(items);
    REQUIRE(saved.size() == 10);
    for (const auto& s : saved) {
        CHECK_FALSE(s.error.has_value());
        CHECK(s.save_ms >= 0);
    }

    auto rows = run.source().fetch(store::FetchQuery{"Personnel", std::nullopt, {"Picture"}});
    REQUIRE(rows.size() == 10);
    CHECK(rows[0].blob_content.at("Picture").size() == 2048);
    CHECK(std::get<std::string>(rows[0].row.columns.at("PersonalID")) == rows[0].row.key);
}

TEST_CASE("save_phase rejects oversized items before any store call") {
    LocalPair fx;
    auto items = make_items(fx.dir, 2, 2048);

    PlanOptions options;
    options.size_cap_bytes = 1024;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
    auto saved = run.save_phase(items);
    REQUIRE(saved.size() == 2);
    CHECK(saved[0].error.has_value());
    CHECK(saved[0].error->find("cap") != std::string::npos);

    // no rows were written for the rejected items
    auto rows = run.source().fetch(store::FetchQuery{"Personnel", std::nullopt, {}});
    CHECK(rows.empty());
}

TEST_CASE("save_phase: empty item set produces an empty result") {
    LocalPair fx;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), PlanOptions{}), {});
    CHECK(run.save_phase({}).empty());
    CHECK(run.execute({}).items.empty());
}

TEST_CASE("generated keys are assigned at save time when the id is absent") {
    LocalPair fx;
    auto items = make_items(fx.dir, 1, 64);
    items[0].id.clear();  // PersonalID is a generated key in the preset

    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), PlanOptions{}), {});
    auto saved = run.save_phase(items);
    REQUIRE(saved.size() == 1);
    CHECK_FALSE(saved[0].error.has_value());
    CHECK_FALSE(saved[0].key.empty());
    auto rows = run.source().fetch(store::FetchQuery{"Personnel", std::nullopt, {}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].row.key == saved[0].key);
}

// ---------------------------------------------------------------------------
// Loading-strategy fetch counts (instrumented connector)
// ---------------------------------------------------------------------------

namespace {

/// Save N items with BOTH blob columns populated, then transfer under the
/// given strategy and return the source fetch count of the transfer run.
std::uint64_t transfer_fetch_count(LoadKind kind, int n, int batch,
                                   std::vector<std::string> load_columns = {}) {
    LocalPair fx;
    auto items = make_items(fx.dir, n, 512);

    {
        MigrationRun setup(plan_migration(fx.bundle, fx.source(), fx.dest(), PlanOptions{}), {});
        auto saved = setup.save_phase(items);
        for (const auto& s : saved) REQUIRE_FALSE(s.error.has_value());
        // second blob column per row
        for (const auto& item : items) {
            setup.source().put_blob("Personnel", item.id, "TextFile", "text for " + item.id,
                                    store::PutMode::overwrite);
        }
    }

    PlanOptions options;
    options.method = Method::orm;
    options.strategy = LoadingStrategy{kind, std::move(load_columns)};
    options.batch_size = batch;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
    MigrationResult result = run.transfer_items(items);
    for (const auto& item : result.items) {
        REQUIRE(item.verified);
    }
    return run.source().fetch_count();
}

}  // namespace

TEST_CASE("strategy fetch counts over 10 rows with 2 blob columns, batch 10") {
    // eager: one combined fetch per batch
    CHECK(transfer_fetch_count(LoadKind::eager, 10, 10) == 1);
    // explicit with one Load call covering both columns: rows + set
    CHECK(transfer_fetch_count(LoadKind::explicit_load, 10, 10, {"TextFile", "Picture"}) == 2);
    // lazy: rows, then each blob on first access (N x B)
    CHECK(transfer_fetch_count(LoadKind::lazy, 10, 10) == 1 + 10 * 2);
}

TEST_CASE("strategy fetch counts follow the batch formula") {
    // N=9, batch=4 -> 3 row batches
    CHECK(transfer_fetch_count(LoadKind::eager, 9, 4) == 3);
    CHECK(transfer_fetch_count(LoadKind::explicit_load, 9, 4, {"TextFile", "Picture"}) == 3 + 3);
    CHECK(transfer_fetch_count(LoadKind::lazy, 9, 4) == 3 + 9 * 2);
}

// ---------------------------------------------------------------------------
// Method request counts (destination put instrumentation)
// ---------------------------------------------------------------------------

TEST_CASE("method destination put counts: baseline is column-wise, orm is batched") {
    const int n = 10;

    auto run_method = [&](Method method, int batch) {
        LocalPair fx;
        auto items = make_items(fx.dir, n, 256);
        PlanOptions options;
        options.method = method;
        if (method == Method::orm) options.batch_size = batch;
        MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
        MigrationResult result = run.execute(items);
        for (const auto& item : result.items) REQUIRE(item.verified);
        return std::pair<std::uint64_t, std::uint64_t>(run.destination().put_count(),
                                                       run.source().put_count());
    };

    // Schema registration is not a data put, so the counters carry row and
    // blob puts only.
    const auto [baseline_puts, baseline_src_puts] = run_method(Method::baseline, 1);
    // 5 scalar columns + 1 blob column per row, destination side
    CHECK(baseline_puts == static_cast<std::uint64_t>(n * (5 + 1)));
    // source save side is column-wise too
    CHECK(baseline_src_puts == static_cast<std::uint64_t>(n * (5 + 1)));

    const auto [orm_puts, orm_src_puts] = run_method(Method::orm, 4);
    // ceil(10/4)=3 batched row puts + 10 blob puts
    CHECK(orm_puts == static_cast<std::uint64_t>(3 + n));
    CHECK(orm_src_puts == static_cast<std::uint64_t>(3 + n));

    // baseline issues strictly more destination requests
    CHECK(baseline_puts > orm_puts);
}

// ---------------------------------------------------------------------------
// Timing under the deterministic clock
// ---------------------------------------------------------------------------

TEST_CASE("amortized batch timing splits exactly and sums to the measured total") {
    ShapedFixture fx(20);
    auto items = make_items(fx.dir, 10, 300);

    PlanOptions options;
    options.method = Method::orm;
    options.strategy = LoadingStrategy{LoadKind::eager, {}};
    options.batch_size = 10;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), fx.options());
    MigrationResult result = run.execute(items);
    REQUIRE(result.items.size() == 10);

    // Shared cost: one batched dest row put (20 ms virtual); the source is
    // local so its fetch costs 0. Each item then pays its own blob put (20).
    for (const auto& item : result.items) {
        CHECK(item.verified);
        CHECK(item.transfer_ms == 22);  // 20/10 = 2 share + 20 own
        CHECK(item.save_ms == 0);       // local source, virtual clock
        CHECK(item.verify_ms == 2);     // one 20 ms verification fetch, split
    }
    CHECK(result.totals.transfer_ms == 220);

    SUBCASE("a remainder distributes one extra millisecond to the first items") {
        auto shares = split_evenly(20, 3);
        CHECK(shares == std::vector<std::int64_t>{7, 7, 6});
        CHECK(split_evenly(0, 3) == std::vector<std::int64_t>{0, 0, 0});
        CHECK(split_evenly(5, 1) == std::vector<std::int64_t>{5});
        CHECK(split_evenly(7, 10)[0] == 1);
    }
}

TEST_CASE("baseline pays one shaped request per column value") {
    ShapedFixture fx(20);
    auto items = make_items(fx.dir, 4, 300);

    PlanOptions options;
    options.method = Method::baseline;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), fx.options());
    MigrationResult result = run.execute(items);
    REQUIRE(result.items.size() == 4);
    for (const auto& item : result.items) {
        CHECK(item.verified);
        // 5 scalar column puts + 1 blob put, 20 ms each, destination side
        CHECK(item.transfer_ms == 6 * 20);
    }
}

TEST_CASE("orm beats baseline on every item under per-request latency") {
    ShapedFixture fx(20);
    auto items = make_items(fx.dir, 8, 400);

    auto run_method = [&](Method method) {
        // fresh destination table per method
        auto dst = store::open_store(fx.dest(), fx.options());
        dst->drop_table("Personnel");
        auto src = store::open_store(fx.source(), fx.options());
        src->drop_table("Personnel");

        PlanOptions options;
        options.method = method;
        MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options),
                         fx.options());
        return run.execute(items);
    };

    MigrationResult baseline = run_method(Method::baseline);
    MigrationResult orm = run_method(Method::orm);
    REQUIRE(baseline.items.size() == orm.items.size());
    for (std::size_t i = 0; i < orm.items.size(); ++i) {
        const auto total_b = baseline.items[i].save_ms + baseline.items[i].transfer_ms;
        const auto total_o = orm.items[i].save_ms + orm.items[i].transfer_ms;
        CHECK(total_o < total_b);
    }
}

TEST_CASE("monotone shaping: more latency never lowers an item's transfer time") {
    auto run_with_latency = [](std::int64_t latency) {
        ShapedFixture fx(latency);
        auto items = make_items(fx.dir, 6, 256);
        PlanOptions options;
        options.method = Method::orm;
        options.batch_size = 3;
        MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options),
                         fx.options());
        return run.execute(items);
    };

    MigrationResult base = run_with_latency(0);
    MigrationResult slow = run_with_latency(20);
    MigrationResult slower = run_with_latency(40);
    REQUIRE(base.items.size() == slow.items.size());
    for (std::size_t i = 0; i < base.items.size(); ++i) {
        CHECK(base.items[i].transfer_ms <= slow.items[i].transfer_ms);
        CHECK(slow.items[i].transfer_ms <= slower.items[i].transfer_ms);
    }
}

// ---------------------------------------------------------------------------
// Fidelity and failure isolation
// ---------------------------------------------------------------------------

TEST_CASE("migrated content is byte-identical at the destination") {
    LocalPair fx;
    auto items = make_items(fx.dir, 6, 1500);

    PlanOptions options;
    options.batch_size = 4;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
    MigrationResult result = run.execute(items);
    CHECK(result.all_verified());

    for (const auto& item : items) {
        auto rows = run.destination().fetch(
            store::FetchQuery{"Personnel", std::vector<std::string>{item.id}, {"Picture"}});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].blob_content.at("Picture") == testsupport::read_file(item.path));
    }
}

TEST_CASE("a corrupted source blob fails only its own item") {
    for (LoadKind kind : {LoadKind::eager, LoadKind::lazy}) {
        CAPTURE(static_cast<int>(kind));
        LocalPair fx;
        auto items = make_items(fx.dir, 10, 800);

        PlanOptions options;
        options.method = Method::orm;
        options.strategy = LoadingStrategy{kind, {}};
        options.batch_size = 5;
        MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});

        auto saved = run.save_phase(items);
        for (const auto& s : saved) REQUIRE_FALSE(s.error.has_value());

        // flip one byte of item004's stored blob
        testsupport::corrupt_file(
            (fx.dir.path() / "src" / "Personnel" / "item004" / "Picture.blob").string());

        MigrationResult result = run.transfer_items(items);
        REQUIRE(result.items.size() == 10);
        int verified = 0, failed = 0;
        for (const auto& item : result.items) {
            if (item.verified) ++verified;
            if (item.error) {
                ++failed;
                CHECK(item.key == "item004");
                CHECK(item.error->find("checksum") != std::string::npos);
            }
        }
        CHECK(verified == 9);
        CHECK(failed == 1);
        CHECK(result.totals.failed_count == 1);
    }
}

TEST_CASE("transfer_phase discovers keys already present in the source") {
    LocalPair fx;
    auto items = make_items(fx.dir, 5, 200);
    {
        MigrationRun seed(plan_migration(fx.bundle, fx.source(), fx.dest(), PlanOptions{}), {});
        auto saved = seed.save_phase(items);
        for (const auto& s : saved) REQUIRE_FALSE(s.error.has_value());
    }

    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), PlanOptions{}), {});
    MigrationResult result = run.transfer_phase();
    CHECK(result.items.size() == 5);
    CHECK(result.all_verified());
    CHECK(result.totals.bytes_moved > 5 * 200);  // blobs plus scalar columns
}

TEST_CASE("parallel transfers inside a batch preserve fidelity") {
    LocalPair fx;
    auto items = make_items(fx.dir, 12, 900);
    PlanOptions options;
    options.batch_size = 6;
    options.parallel = 4;
    MigrationRun run(plan_migration(fx.bundle, fx.source(), fx.dest(), options), {});
    MigrationResult result = run.execute(items);
    CHECK(result.all_verified());
    CHECK(result.items.size() == 12);
}

// ---------------------------------------------------------------------------
// Efficiency math (bench module)
// ---------------------------------------------------------------------------

TEST_CASE("efficiency rows reproduce the published delta arithmetic") {
    using namespace cloudshift::bench;

    // save_eff 6478 and transfer_eff 13048 must total 19526
    TimingPair first{make_timing_record("r1", Category::image_large, Method::baseline, 6478, 13048),
                     make_timing_record("r1", Category::image_large, Method::orm, 0, 0)};
    // save_eff -994 and transfer_eff 1557 must total 563
    TimingPair second{make_timing_record("r2", Category::image_large, Method::baseline, 0, 1557),
                      make_timing_record("r2", Category::image_large, Method::orm, 994, 0)};

    auto rows = compute_efficiency({first, second});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].save_eff_ms == 6478);
    CHECK(rows[0].transfer_eff_ms == 13048);
    CHECK(rows[0].total_eff_ms == 19526);
    CHECK(rows[1].save_eff_ms == -994);
    CHECK(rows[1].transfer_eff_ms == 1557);
    CHECK(rows[1].total_eff_ms == 563);

    SUBCASE("identical methods yield all-zero deltas") {
        TimingPair same{make_timing_record("r3", Category::text_small, Method::baseline, 5, 7),
                        make_timing_record("r3", Category::text_small, Method::orm, 5, 7)};
        auto zero = compute_efficiency({same});
        CHECK(zero[0].save_eff_ms == 0);
        CHECK(zero[0].transfer_eff_ms == 0);
        CHECK(zero[0].total_eff_ms == 0);
    }

    SUBCASE("additivity holds on randomized pairs") {
        std::mt19937_64 rng(11);
        std::vector<TimingPair> pairs;
        for (int i = 0; i < 200; ++i) {
            pairs.push_back(TimingPair{
                make_timing_record("x" + std::to_string(i), Category::text_large,
                                   Method::baseline, static_cast<std::int64_t>(rng() % 20000),
                                   static_cast<std::int64_t>(rng() % 20000)),
                make_timing_record("x" + std::to_string(i), Category::text_large, Method::orm,
                                   static_cast<std::int64_t>(rng() % 20000),
                                   static_cast<std::int64_t>(rng() % 20000))});
        }
        for (const auto& row : compute_efficiency(pairs)) {
            CHECK(row.total_eff_ms == row.save_eff_ms + row.transfer_eff_ms);
        }
    }
}

TEST_CASE("classification: strictly positive total efficiency is success") {
    using namespace cloudshift::bench;
    EfficiencyRow row;
    row.total_eff_ms = 563;
    CHECK(classify(row) == Outcome::success);
    row.total_eff_ms = -582;  // Image KB row: -74 + -508
    CHECK(classify(row) == Outcome::failure);
    row.total_eff_ms = 0;
    CHECK(classify(row) == Outcome::failure);
}

TEST_CASE("timing record construction enforces the total identity") {
    using namespace cloudshift::bench;
    TimingRecord r = make_timing_record("a", Category::text_small, Method::orm, 3, 4);
    CHECK(r.total_ms == 7);
    CHECK_THROWS_AS((void)make_timing_record("a", Category::text_small, Method::orm, -1, 4),
                    Error);
}

TEST_CASE("pairing requires exactly one record per method per item") {
    using namespace cloudshift::bench;
    std::vector<TimingRecord> records;
    for (int i = 0; i < 10; ++i) {
        const std::string id = "i" + std::to_string(i);
        records.push_back(make_timing_record(id, Category::text_small, Method::baseline, i, i));
        records.push_back(make_timing_record(id, Category::text_small, Method::orm, i, i));
    }
    CHECK(pair_records(records).size() == 10);  // 20 records, 10 pairs

    records.push_back(make_timing_record("odd", Category::text_small, Method::orm, 1, 1));
    CHECK_THROWS_AS((void)pair_records(records), Error);
}

TEST_CASE("aggregate counts and the exact success rate") {
    using namespace cloudshift::bench;
    std::vector<EfficiencyRow> rows;
    for (int i = 0; i < 100; ++i) {
        EfficiencyRow row;
        row.item_id = "i" + std::to_string(i);
        row.category = (i % 2) ? Category::image_small : Category::text_small;
        row.total_eff_ms = (i < 80) ? 10 : (i < 90 ? 0 : -5);
        rows.push_back(row);
    }
    AggregateReport report = aggregate(rows);
    CHECK(report.total_items() == 100);
    CHECK(report.total_success() == 80);
    CHECK(report.success_rate == 0.80);  // 80/100 rounds to the same double as 0.80

    SUBCASE("all positive yields rate 1.0") {
        rows.resize(80);
        CHECK(aggregate(rows).success_rate == 1.0);
    }
    SUBCASE("empty input defines rate 0") {
        AggregateReport empty = aggregate({});
        CHECK(empty.total_items() == 0);
        CHECK(empty.success_rate == 0.0);
    }
    SUBCASE("failed migrations fold in as failures") {
        AggregateReport merged = aggregate(rows, {{Category::text_small, 10}});
        CHECK(merged.total_items() == 110);
        CHECK(merged.per_category.at(Category::text_small).failure >= 10);
    }
}

TEST_CASE("outlier flags trip at a 200% spread") {
    using namespace cloudshift::bench;
    std::vector<TimingPair> pairs;
    // baseline save 300 vs orm save 6778: flagged, orm is >2x slower
    pairs.push_back(TimingPair{
        make_timing_record("slow_orm", Category::image_large, Method::baseline, 300, 50),
        make_timing_record("slow_orm", Category::image_large, Method::orm, 6778, 50)});
    // equal times: never flagged
    pairs.push_back(
        TimingPair{make_timing_record("equal", Category::image_large, Method::baseline, 100, 100),
                   make_timing_record("equal", Category::image_large, Method::orm, 100, 100)});
    // zero on both sides: not flagged
    pairs.push_back(
        TimingPair{make_timing_record("zero", Category::image_large, Method::baseline, 0, 10),
                   make_timing_record("zero", Category::image_large, Method::orm, 0, 10)});

    auto flags = flag_outliers(pairs);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].item_id == "slow_orm");
    CHECK(flags[0].field == "save");
    CHECK(flags[0].delta_ms == 300 - 6778);

    CHECK(flag_outliers({}).empty());
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

TEST_CASE("corpus generation is deterministic and category-shaped") {
    using namespace cloudshift::bench;
    TempDir dir("corpus");

    CorpusManifest a =
        generate_corpus(Category::text_small, 20, 1000, 5000, 7, dir.sub("one"));
    CorpusManifest b =
        generate_corpus(Category::text_small, 20, 1000, 5000, 7, dir.sub("two"));
    CHECK(a.to_json() == b.to_json());
    CHECK(testsupport::read_file(dir.sub("one") + "/manifest.json") ==
          testsupport::read_file(dir.sub("two") + "/manifest.json"));

    SUBCASE("sizes stay in range and content matches the manifest checksums") {
        for (const auto& f : a.files) {
            CHECK(f.size_bytes >= 1000);
            CHECK(f.size_bytes <= 5000);
            const std::string content =
                testsupport::read_file(dir.sub("one") + "/" + corpus_file_name(a.category, f.id));
            CHECK(content.size() == f.size_bytes);
            CHECK(fnv1a64(content) == f.checksum);
        }
    }

    SUBCASE("text corpora are printable") {
        const std::string content = testsupport::read_file(
            dir.sub("one") + "/" + corpus_file_name(a.category, a.files[0].id));
        for (char c : content) {
            const bool printable = (c >= 0x20 && c < 0x7f) || c == '\n';
            REQUIRE(printable);
        }
    }

    SUBCASE("image corpora carry the BMP magic") {
        CorpusManifest img =
            generate_corpus(Category::image_large, 3, 4096, 8192, 7, dir.sub("img"));
        for (const auto& f : img.files) {
            const std::string content = testsupport::read_file(
                dir.sub("img") + "/" + corpus_file_name(img.category, f.id));
            REQUIRE(content.size() >= 2);
            CHECK(content[0] == 'B');
            CHECK(content[1] == 'M');
        }
    }

    SUBCASE("a different seed changes the content") {
        CorpusManifest c =
            generate_corpus(Category::text_small, 20, 1000, 5000, 8, dir.sub("three"));
        CHECK(c.to_json() != a.to_json());
    }

    SUBCASE("count zero is rejected") {
        CHECK_THROWS_AS(
            (void)generate_corpus(Category::text_small, 0, 1000, 5000, 7, dir.sub("zero")),
            Error);
    }

    SUBCASE("manifest round-trips and loads back") {
        CorpusManifest reloaded = load_manifest(dir.sub("one"));
        CHECK(reloaded.to_json() == a.to_json());
    }
}

// ---------------------------------------------------------------------------
// run_benchmark end to end (small, deterministic)
// ---------------------------------------------------------------------------

TEST_CASE("run_benchmark pairs every item and the harness cannot emit a broken row") {
    using namespace cloudshift::bench;
    ShapedFixture fx(10);

    const std::string corpus_dir = fx.dir.sub("corpus");
    CorpusManifest manifest =
        generate_corpus(Category::text_small, 10, 500, 1500, 7, corpus_dir);

    RunEnvironment env;
    env.source = fx.source();
    env.destination = fx.dest();
    env.store_options = fx.options();

    CategoryResult result = run_benchmark(manifest, corpus_dir, fx.bundle, env);
    CHECK(result.records.size() == 20);  // 10 items x 2 methods
    CHECK(result.pairs.size() == 10);
    CHECK(result.failures.empty());
    for (const auto& row : result.rows) {
        CHECK(row.total_eff_ms == row.save_eff_ms + row.transfer_eff_ms);
    }
    for (const auto& record : result.records) {
        CHECK(record.total_ms == record.save_ms + record.transfer_ms);
        CHECK(record.save_ms >= 0);
        CHECK(record.transfer_ms >= 0);
    }

    SUBCASE("deterministic clock mode reproduces identical outcomes") {
        // fresh stores, same seed and profile
        ShapedFixture fx2(10);
        const std::string corpus2 = fx2.dir.sub("corpus");
        CorpusManifest manifest2 =
            generate_corpus(Category::text_small, 10, 500, 1500, 7, corpus2);
        RunEnvironment env2;
        env2.source = fx2.source();
        env2.destination = fx2.dest();
        env2.store_options = fx2.options();
        CategoryResult again = run_benchmark(manifest2, corpus2, fx2.bundle, env2);

        REQUIRE(again.rows.size() == result.rows.size());
        for (std::size_t i = 0; i < again.rows.size(); ++i) {
            CHECK(again.rows[i].item_id == result.rows[i].item_id);
            CHECK(again.rows[i].save_eff_ms == result.rows[i].save_eff_ms);
            CHECK(again.rows[i].transfer_eff_ms == result.rows[i].transfer_eff_ms);
            CHECK(again.rows[i].total_eff_ms == result.rows[i].total_eff_ms);
            CHECK(bench::classify(again.rows[i]) == bench::classify(result.rows[i]));
        }
    }
}

// ---------------------------------------------------------------------------
// CSV and SVG emission
// ---------------------------------------------------------------------------

TEST_CASE("efficiency CSV carries the published column headers and round-trips") {
    using namespace cloudshift::bench;
    TempDir dir("csv");
    std::vector<EfficiencyRow> rows;
    EfficiencyRow row;
    row.item_id = "text_small_0001";
    row.category = Category::text_small;
    row.save_eff_ms = 6478;
    row.transfer_eff_ms = 13048;
    row.total_eff_ms = 19526;
    rows.push_back(row);
    row.item_id = "text_small_0002";
    row.save_eff_ms = -994;
    row.transfer_eff_ms = 1557;
    row.total_eff_ms = 563;
    rows.push_back(row);

    const std::string path = dir.sub("efficiency_text_small.csv");
    report::write_efficiency_csv(path, rows);

    const std::string text = testsupport::read_file(path);
    CHECK(text.rfind("item_id,STE,TTE,TTTE\n", 0) == 0);
    CHECK(text.find("text_small_0001,6478,13048,19526") != std::string::npos);

    auto reread = report::read_efficiency_csv(path, Category::text_small);
    REQUIRE(reread.size() == 2);
    CHECK(reread[1].save_eff_ms == -994);
    CHECK(reread[1].total_eff_ms == 563);

    SUBCASE("a missing TTTE column is a schema error") {
        testsupport::write_file(dir.sub("bad.csv"), "item_id,STE,TTE\nx,1,2\n");
        CHECK(kind_of([&] { report::read_efficiency_csv(dir.sub("bad.csv"),
                                                        Category::text_small); }) ==
              ErrorKind::parse);
    }
    SUBCASE("a short row is a schema error") {
        testsupport::write_file(dir.sub("short.csv"), "item_id,STE,TTE,TTTE\nx,1,2\n");
        CHECK(kind_of([&] { report::read_efficiency_csv(dir.sub("short.csv"),
                                                        Category::text_small); }) ==
              ErrorKind::parse);
    }
}

TEST_CASE("aggregate SVG enumerates every category with success and failure bars") {
    using namespace cloudshift::bench;
    AggregateReport report;
    report.per_category[Category::image_large] = {62, 38};
    report.per_category[Category::image_small] = {70, 30};
    report.per_category[Category::text_large] = {85, 15};
    report.per_category[Category::text_small] = {90, 10};
    report.success_rate = 0.7675;

    const std::string svg = report::aggregate_to_svg(report);
    for (const char* name : {"image_large", "image_small", "text_large", "text_small"}) {
        CHECK(svg.find(name) != std::string::npos);
    }
    CHECK(svg.find("class=\"success\"") != std::string::npos);
    CHECK(svg.find("class=\"failure\"") != std::string::npos);
    CHECK(svg.find("<svg") != std::string::npos);
}
