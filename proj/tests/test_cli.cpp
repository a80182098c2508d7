#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "cloudshift/bench.hpp"
#include "cloudshift/report.hpp"
#include "test_support.hpp"

using testsupport::TempDir;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

const std::string& binary() {
    static const std::string path = [] {
        const char* env = std::getenv("CLOUDSHIFT_BIN");
        REQUIRE_MESSAGE(env != nullptr, "CLOUDSHIFT_BIN must point at the cloudshift binary");
        return std::string(env);
    }();
    return path;
}

RunResult run_cli(const std::string& args) {
    const std::string command = binary() + " " + args + " 2>&1";
    FILE* pipe = ::popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = ::fread(buf, 1, sizeof(buf), pipe)) > 0) {
        result.output.append(buf, n);
    }
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace

TEST_CASE("no arguments prints usage and exits 2") {
    RunResult r = run_cli("");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("Usage") != std::string::npos);
    CHECK(r.output.find("bench") != std::string::npos);
}

TEST_CASE("unknown subcommands and flags exit 2") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("model --no-such-flag").exit_code == 2);
}

TEST_CASE("model --model personnel --print lists the canonical entity") {
    RunResult r = run_cli("model --model personnel --print");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("Personnel") != std::string::npos);
    CHECK(r.output.find("PersonalID") != std::string::npos);
    CHECK(r.output.find("properties: 7") != std::string::npos);
    for (const char* name :
         {"LastName", "FirstName", "Address", "City", "TextFile", "Picture"}) {
        CHECK(r.output.find(name) != std::string::npos);
    }
}

TEST_CASE("model --out exports a loadable document") {
    TempDir dir("cli_model");
    RunResult r = run_cli("model --model personnel --out " + dir.sub("doc.json"));
    CHECK(r.exit_code == 0);
    RunResult reload = run_cli("model --model " + dir.sub("doc.json") + " --print");
    CHECK(reload.exit_code == 0);
    CHECK(reload.output.find("PersonalID") != std::string::npos);
}

TEST_CASE("every subcommand's --help enumerates its flags") {
    struct Expectation {
        const char* name;
        std::vector<const char*> flags;
    };
    const std::vector<Expectation> expectations = {
        {"model", {"--model", "--print", "--out"}},
        {"validate",
         {"--model", "--source", "--records", "--policy", "--out", "--cap-bytes", "--config"}},
        {"serve",
         {"--root", "--latency-ms", "--bandwidth", "--jitter-ms", "--bind", "--virtual",
          "--cap-bytes", "--config"}},
        {"migrate",
         {"--model", "--source", "--dest", "--method", "--strategy", "--load", "--batch",
          "--strict", "--parallel", "--items", "--out", "--cap-bytes", "--config"}},
        {"bench",
         {"--categories", "--count", "--seed", "--source", "--dest", "--strategy", "--load",
          "--batch", "--latency-ms", "--bandwidth", "--jitter-ms", "--virtual-clock",
          "--parallel", "--small-min-bytes", "--small-max-bytes", "--large-min-bytes",
          "--large-max-bytes", "--reuse-corpus", "--out", "--model", "--config"}},
        {"report", {"--in", "--out"}},
    };
    for (const auto& exp : expectations) {
        CAPTURE(exp.name);
        RunResult r = run_cli(std::string(exp.name) + " --help");
        CHECK(r.exit_code == 0);
        for (const char* flag : exp.flags) {
            CAPTURE(flag);
            CHECK(r.output.find(flag) != std::string::npos);
        }
    }
}

TEST_CASE("config precedence: flags beat the config file, config beats defaults") {
    TempDir dir("cli_prec");
    testsupport::write_file(dir.sub("config.json"), R"({
      "version": 1,
      "count": 2,
      "seed": 9,
      "source": "local:)" + dir.sub("src") + R"(",
      "dest": "local:)" + dir.sub("dst") + R"(",
      "out": ")" + dir.sub("out") + R"("
    })");

    // --count 3 on the command line must beat the config's 2; seed 9 and the
    // endpoints come from the config.
    RunResult r = run_cli("bench --config " + dir.sub("config.json") +
                          " --categories d --count 3 --virtual-clock --latency-ms 5"
                          " --small-min-bytes 300 --small-max-bytes 600");
    CHECK(r.exit_code == 0);

    const std::string manifest = testsupport::read_file(
        dir.sub("out") + "/corpus/text_small/manifest.json");
    CHECK(manifest.find("\"count\": 3") != std::string::npos);
    CHECK(manifest.find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("config files with unknown keys or no version are rejected") {
    TempDir dir("cli_badcfg");
    testsupport::write_file(dir.sub("unknown.json"), R"({"version":1,"typo_key":5})");
    CHECK(run_cli("bench --config " + dir.sub("unknown.json")).exit_code == 2);

    testsupport::write_file(dir.sub("nover.json"), R"({"count":5})");
    CHECK(run_cli("bench --config " + dir.sub("nover.json")).exit_code == 2);
}

TEST_CASE("validate: exclude policy exits 0, fail policy exits 1 on violations") {
    TempDir dir("cli_validate");
    testsupport::write_file(
        dir.sub("records.jsonl"),
        R"({"entity":"Personnel","key":"P1","columns":{"PersonalID":"P1","Zip":"74000"}})"
        "\n"
        R"({"entity":"Personnel","key":"P2","columns":{"PersonalID":"P2"}})"
        "\n");

    RunResult exclude = run_cli("validate --model personnel --records " +
                                dir.sub("records.jsonl") + " --policy exclude --out " +
                                dir.sub("out"));
    CHECK(exclude.exit_code == 0);
    CHECK(exclude.output.find("Zip") != std::string::npos);
    CHECK(testsupport::read_file(dir.sub("out") + "/validation_report.json")
              .find("\"records_scanned\": 2") != std::string::npos);

    RunResult fail = run_cli("validate --model personnel --records " + dir.sub("records.jsonl") +
                             " --policy fail");
    CHECK(fail.exit_code == 1);

    RunResult clean = run_cli("validate --model personnel --records " +
                              dir.sub("records.jsonl") + " --policy fail --cap-bytes 1");
    // cap change does not matter here; the format violation still fails first
    CHECK(clean.exit_code == 1);
}

TEST_CASE("validate over a store endpoint") {
    TempDir dir("cli_validate_store");
    // stage two rows through a migrate save (items corpus)
    using namespace cloudshift;
    bench::CorpusManifest manifest =
        bench::generate_corpus(engine::Category::text_small, 2, 200, 400, 3, dir.sub("corpus"));
    RunResult stage = run_cli("migrate --model personnel --source local:" + dir.sub("src") +
                              " --dest local:" + dir.sub("dst") + " --items " +
                              dir.sub("corpus"));
    CHECK(stage.exit_code == 0);

    RunResult r = run_cli("validate --model personnel --source local:" + dir.sub("src"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("records scanned:  2") != std::string::npos);
    CHECK(r.output.find("violations:       0") != std::string::npos);
}

TEST_CASE("migrate moves a corpus and reports per-item results") {
    TempDir dir("cli_migrate");
    using namespace cloudshift;
    bench::generate_corpus(engine::Category::image_small, 3, 500, 900, 11, dir.sub("corpus"));

    RunResult r = run_cli("migrate --model personnel --source local:" + dir.sub("src") +
                          " --dest local:" + dir.sub("dst") + " --items " + dir.sub("corpus") +
                          " --out " + dir.sub("out") + " --strict");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"verified\": true") != std::string::npos);
    const std::string json = testsupport::read_file(dir.sub("out") + "/migration_result.json");
    CHECK(json.find("\"failed\": 0") != std::string::npos);
    CHECK(json.find("image_small_0001") != std::string::npos);

    SUBCASE("baseline + eager is a usage error (exit 2)") {
        RunResult bad = run_cli("migrate --model personnel --source local:" + dir.sub("src") +
                                " --dest local:" + dir.sub("dst") +
                                " --method baseline --strategy eager");
        CHECK(bad.exit_code == 2);
    }
    SUBCASE("transfer-only run over the already-saved source") {
        RunResult again = run_cli("migrate --model personnel --source local:" + dir.sub("src") +
                                  " --dest local:" + dir.sub("dst2"));
        CHECK(again.exit_code == 0);
        CHECK(again.output.find("\"items\": 3") != std::string::npos);
    }
}

TEST_CASE("serve requires --root") {
    CHECK(run_cli("serve").exit_code == 2);
}

TEST_CASE("report renders tables and writes the aggregate artifacts") {
    TempDir dir("cli_report");
    using namespace cloudshift;

    std::vector<bench::EfficiencyRow> rows;
    for (int i = 0; i < 12; ++i) {
        bench::EfficiencyRow row;
        row.item_id = "text_small_" + std::to_string(i);
        row.category = engine::Category::text_small;
        row.save_eff_ms = i;
        row.transfer_eff_ms = (i % 3 == 0) ? -2 * i : 100 + i;
        row.total_eff_ms = row.save_eff_ms + row.transfer_eff_ms;
        rows.push_back(row);
    }
    report::write_efficiency_csv(dir.sub("efficiency_text_small.csv"), rows);

    RunResult r = run_cli("report --in " + dir.str());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("text_small") != std::string::npos);
    CHECK(r.output.find("TTTE") != std::string::npos);
    CHECK(testsupport::read_file(dir.sub("aggregate.json")).find("success_rate") !=
          std::string::npos);
    CHECK(testsupport::read_file(dir.sub("aggregate.svg")).find("<svg") != std::string::npos);

    SUBCASE("top-10 rendering truncates to ten rows") {
        std::size_t data_lines = 0;
        std::istringstream in(r.output);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("text_small_", 0) == 0) ++data_lines;
        }
        CHECK(data_lines == 10);
    }

    SUBCASE("a CSV missing the TTTE column is rejected") {
        TempDir bad("cli_report_bad");
        testsupport::write_file(bad.sub("efficiency_text_small.csv"), "item_id,STE,TTE\nx,1,2\n");
        CHECK(run_cli("report --in " + bad.str()).exit_code == 1);
    }

    SUBCASE("an empty directory is an error") {
        TempDir empty("cli_report_empty");
        CHECK(run_cli("report --in " + empty.str()).exit_code == 2);
    }
}

TEST_CASE("bench writes efficiency CSVs per category and the aggregate pair") {
    TempDir dir("cli_bench");
    RunResult r = run_cli("bench --categories b,d --count 2 --seed 5 --source local:" +
                          dir.sub("src") + " --dest local:" + dir.sub("dst") +
                          " --virtual-clock --latency-ms 10" +
                          " --small-min-bytes 400 --small-max-bytes 800 --out " + dir.sub("out"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("success rate") != std::string::npos);
    CHECK(testsupport::read_file(dir.sub("out") + "/efficiency_image_small.csv")
              .rfind("item_id,STE,TTE,TTTE\n", 0) == 0);
    CHECK(testsupport::read_file(dir.sub("out") + "/efficiency_text_small.csv")
              .find("text_small_0002") != std::string::npos);
    CHECK(testsupport::read_file(dir.sub("out") + "/aggregate.json").find("image_small") !=
          std::string::npos);
    CHECK(testsupport::read_file(dir.sub("out") + "/aggregate.svg").find("image_small") !=
          std::string::npos);
}
