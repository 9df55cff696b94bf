#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dockmeta/subprocess.hpp"
#include "support/corpus_builder.hpp"

using namespace dockmeta;
namespace ts = dockmeta::testsupport;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::string& corpus_dir() {
    static std::string dir = [] {
        std::string d = ts::scratch_dir("dockmeta_cli_corpus");
        ts::build_synthetic_corpus(d);
        return d;
    }();
    return dir;
}

CommandResult run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> argv = {DOCKMETA_BIN};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_command(argv);
}

int run_pipeline(const std::string& out, const std::string& jobs = "1") {
    CommandResult scan = run_cli({"scan", "--corpus", corpus_dir(),
                                  "--registry-fixture",
                                  ts::fixture_path("registry.json"), "--cutoff",
                                  "2024-01-01", "--out", out, "--jobs", jobs});
    if (scan.exit_code != 0) return scan.exit_code;
    CommandResult classify =
        run_cli({"classify", "--cutoff", "2024-01-01", "--out", out});
    if (classify.exit_code != 0) return classify.exit_code;
    CommandResult groups = run_cli({"groups", "--out", out});
    if (groups.exit_code != 0) return groups.exit_code;
    CommandResult recommend =
        run_cli({"recommend", "--out", out, "--advisories",
                 ts::fixture_path("advisories.json")});
    return recommend.exit_code;
}

ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    ordered_json doc;
    in >> doc;
    return doc;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("full pipeline over the synthetic corpus") {
    std::string out = ts::scratch_dir("dockmeta_cli_out");
    REQUIRE(run_pipeline(out) == 0);

    for (const char* name :
         {"registry_snapshot.json", "timelines.json", "extraction.json",
          "domains.json", "classification.json", "classification.txt",
          "groups.json", "recommendations/index.json"})
        CHECK(fs::exists(fs::path(out) / name));

    ordered_json classification = load_json(out + "/classification.json");
    const auto& tally = classification.at("status_tally");
    CHECK(tally.at("dormant").at("count") == 1);
    CHECK(tally.at("all_packages_deleted").at("count") == 2);
    CHECK(tally.at("multiple_versions").at("count") == 1);
    CHECK(tally.at("no_package_updated").at("count") == 7);
    CHECK(tally.at("package_updated").at("count") == 4);
    CHECK(tally.at("total").at("count") == 15);
    const auto& classes = classification.at("class_tally");
    CHECK(classes.at("with_update").at("count") == 4);
    CHECK(classes.at("no_update").at("count") == 7);
    CHECK(classes.at("other").at("count") == 3);
    CHECK(classes.at("total").at("count") == 14);

    ordered_json groups = load_json(out + "/groups.json");
    CHECK(groups.at("groups").size() == 5);
    const auto& group_tally = groups.at("class_tally");
    CHECK(group_tally.at("comparable") == 2);
    CHECK(group_tally.at("equivalent") == 1);
    CHECK(group_tally.at("incomparable") == 1);
    CHECK(group_tally.at("no_update") == 1);

    ordered_json domains = load_json(out + "/domains.json");
    // repo13's head Dockerfile no longer downloads anything, so 13 of the
    // 14 repos reference github.com; example.com appears in repo03 and
    // repo14.
    CHECK(domains.at("domains").at("github.com").get<int>() == 13);
    CHECK(domains.at("domains").at("example.com").get<int>() == 2);

    ordered_json index = load_json(out + "/recommendations/index.json");
    REQUIRE(index.at("recommendations").size() == 3);
    int held = 0, ready = 0;
    for (const auto& rec : index.at("recommendations")) {
        std::string status = rec.at("status").get<std::string>();
        if (status == "held") {
            ++held;
            CHECK(rec.at("repo") == "repo05");
        } else if (status == "ready") {
            ++ready;
        }
        CHECK(fs::exists(fs::path(out) / "recommendations" /
                         rec.at("patch_file").get<std::string>()));
        CHECK(fs::exists(fs::path(out) / "recommendations" /
                         rec.at("message_file").get<std::string>()));
    }
    CHECK(held == 1);
    CHECK(ready == 2);

    CommandResult report = run_cli({"report", "--out", out});
    CHECK(report.exit_code == 0);
    CHECK(report.out.find("Repositories: 14") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "report.txt"));
}

TEST_CASE("rerun and parallel run produce byte-identical artifacts") {
    std::string out1 = ts::scratch_dir("dockmeta_cli_det1");
    std::string out2 = ts::scratch_dir("dockmeta_cli_det2");
    std::string out4 = ts::scratch_dir("dockmeta_cli_det4");
    REQUIRE(run_pipeline(out1) == 0);
    REQUIRE(run_pipeline(out2) == 0);
    REQUIRE(run_pipeline(out4, "4") == 0);

    std::vector<std::string> files = {
        "registry_snapshot.json", "timelines.json",      "extraction.json",
        "domains.json",           "classification.json", "classification.txt",
        "groups.json",            "recommendations/index.json"};
    for (const auto& name : files) {
        CAPTURE(name);
        std::string a = slurp(out1 + "/" + name);
        CHECK(a == slurp(out2 + "/" + name));
        CHECK(a == slurp(out4 + "/" + name));
    }
}

TEST_CASE("missing corpus or registry is a usage error") {
    std::string out = ts::scratch_dir("dockmeta_cli_usage");
    CommandResult missing_corpus =
        run_cli({"scan", "--corpus", "/nonexistent/corpus",
                 "--registry-fixture", ts::fixture_path("registry.json"),
                 "--out", out});
    CHECK(missing_corpus.exit_code == 2);

    CommandResult no_registry =
        run_cli({"scan", "--corpus", corpus_dir(), "--out", out});
    CHECK(no_registry.exit_code == 2);

    CommandResult bad_cutoff = run_cli(
        {"scan", "--corpus", corpus_dir(), "--registry-fixture",
         ts::fixture_path("registry.json"), "--cutoff", "garbage", "--out",
         out});
    CHECK(bad_cutoff.exit_code == 2);

    CommandResult no_subcommand = run_cli({});
    CHECK(no_subcommand.exit_code == 2);
}

TEST_CASE("later stages without artifacts are usage errors") {
    std::string out = ts::scratch_dir("dockmeta_cli_noartifacts");
    CHECK(run_cli({"classify", "--out", out}).exit_code == 2);
    CHECK(run_cli({"groups", "--out", out}).exit_code == 2);
    CHECK(run_cli({"recommend", "--out", out}).exit_code == 2);
    CHECK(run_cli({"report", "--out", out}).exit_code == 2);
}

TEST_CASE("empty corpus scans cleanly to empty artifacts") {
    std::string empty = ts::scratch_dir("dockmeta_cli_empty");
    std::string out = ts::scratch_dir("dockmeta_cli_empty_out");
    CommandResult scan = run_cli({"scan", "--corpus", empty,
                                  "--registry-fixture",
                                  ts::fixture_path("registry.json"), "--out",
                                  out});
    CHECK(scan.exit_code == 0);
    CHECK(scan.err.find("no git repositories") != std::string::npos);
    ordered_json timelines = load_json(out + "/timelines.json");
    CHECK(timelines.at("repos").empty());
    CHECK(run_cli({"classify", "--cutoff", "none", "--out", out}).exit_code ==
          0);
}

TEST_CASE("a broken repository surfaces as exit code 1") {
    std::string corpus = ts::scratch_dir("dockmeta_cli_broken");
    fs::create_directories(fs::path(corpus) / "broken" / ".git");
    std::string out = ts::scratch_dir("dockmeta_cli_broken_out");
    CommandResult scan = run_cli({"scan", "--corpus", corpus,
                                  "--registry-fixture",
                                  ts::fixture_path("registry.json"), "--out",
                                  out});
    CHECK(scan.exit_code == 1);
    CHECK(scan.err.find("error") != std::string::npos);
}

TEST_CASE("pre-exported timelines JSON can replace the corpus") {
    std::string out = ts::scratch_dir("dockmeta_cli_export_src");
    REQUIRE(run_pipeline(out) == 0);

    std::string out2 = ts::scratch_dir("dockmeta_cli_export_dst");
    CommandResult scan = run_cli({"scan", "--corpus", out + "/timelines.json",
                                  "--registry-fixture",
                                  ts::fixture_path("registry.json"), "--out",
                                  out2});
    REQUIRE(scan.exit_code == 0);
    CHECK(slurp(out + "/timelines.json") == slurp(out2 + "/timelines.json"));
    CHECK(run_cli({"classify", "--cutoff", "2024-01-01", "--out", out2})
              .exit_code == 0);
    CHECK(slurp(out + "/classification.json") ==
          slurp(out2 + "/classification.json"));
}
