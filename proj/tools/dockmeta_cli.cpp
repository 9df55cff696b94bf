#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "dockmeta/pipeline.hpp"

namespace {

using dockmeta::RunConfig;
using dockmeta::StageResult;

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

/// Same calendar date one year earlier, at UTC midnight.
std::string default_cutoff_text() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    tm.tm_year -= 1;
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buffer;
}

void print_diagnostics(const dockmeta::Diagnostics& diags) {
    for (const auto& d : diags) {
        std::ostream& os = std::cerr;
        os << (d.severity == dockmeta::Severity::error ? "error" : "warning");
        if (!d.span.path.empty()) {
            os << " [" << d.span.path;
            if (d.span.start_line > 0) os << ":" << d.span.start_line;
            os << "]";
        }
        os << ": " << d.message << "\n";
    }
}

struct CommonFlags {
    std::string corpus;
    std::string registry_fixture;
    bool live = false;
    std::string cutoff;
    std::string out = "out";
    std::string cache_dir;
    std::string advisories;
    bool lenient_from = false;
    bool keep_unresolved = false;
    int jobs = 0;
};

void add_common_options(CLI::App* cmd, CommonFlags& flags, bool wants_corpus) {
    if (wants_corpus) {
        cmd->add_option("--corpus", flags.corpus,
                        "Directory of repository checkouts, or a pre-exported "
                        "timelines JSON file")
            ->required();
        cmd->add_option("--registry-fixture", flags.registry_fixture,
                        "Version registry fixture (JSON)");
        cmd->add_flag("--live", flags.live,
                      "Fetch tag and release data over the network instead of "
                      "reading a fixture");
        cmd->add_option("--cache-dir", flags.cache_dir,
                        "Cache directory for live fetches (also "
                        "DOCKMETA_CACHE_DIR)");
        cmd->add_option("--jobs", flags.jobs,
                        "Worker threads for repository mining (default: "
                        "available cores)");
        cmd->add_flag("--lenient-from", flags.lenient_from,
                      "Keep analyzing files whose first instruction is not "
                      "FROM");
        cmd->add_flag("--keep-unresolved", flags.keep_unresolved,
                      "Keep URLs containing unresolved variables in the "
                      "extraction output");
    }
    cmd->add_option("--cutoff", flags.cutoff,
                    "Dormancy cutoff date, YYYY-MM-DD (default: one year "
                    "before today; 'none' disables)");
    cmd->add_option("--out", flags.out, "Artifact directory")
        ->capture_default_str();
    cmd->add_option("--advisories", flags.advisories,
                    "Known-bad version list (JSON), holds matching "
                    "recommendations");
}

int finish(const StageResult& result) {
    print_diagnostics(result.diagnostics);
    return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dockerfile version-pin mining and update recommendation"};
    app.require_subcommand(1);

    CommonFlags scan_flags, classify_flags, groups_flags, recommend_flags,
        report_flags;

    CLI::App* scan = app.add_subcommand(
        "scan", "Mine the corpus into timeline and extraction artifacts");
    add_common_options(scan, scan_flags, true);

    CLI::App* classify = app.add_subcommand(
        "classify", "Classify Dockerfile histories and repositories");
    add_common_options(classify, classify_flags, false);

    CLI::App* groups = app.add_subcommand(
        "groups", "Build shared package groups across repositories");
    add_common_options(groups, groups_flags, false);

    CLI::App* recommend = app.add_subcommand(
        "recommend", "Plan version-bump patches and maintainer messages");
    add_common_options(recommend, recommend_flags, false);

    CLI::App* report =
        app.add_subcommand("report", "Summarize all artifacts into one report");
    add_common_options(report, report_flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // Treat every command-line problem as a usage error; CLI11's own
        // codes distinguish help (0) from failures.
        return code == 0 ? 0 : 2;
    }

    auto build_config = [](const CommonFlags& flags) -> RunConfig {
        RunConfig config;
        config.corpus_dir = flags.corpus;
        config.registry_fixture = flags.registry_fixture;
        config.live = flags.live;
        config.token = env_or("GITHUB_TOKEN", "");
        std::string cutoff_text =
            flags.cutoff.empty() ? default_cutoff_text() : flags.cutoff;
        if (cutoff_text != "none") {
            config.cutoff = dockmeta::parse_date(cutoff_text);
            config.cutoff_text = cutoff_text;
        }
        config.output_dir = flags.out;
        config.cache_dir = flags.cache_dir.empty()
                               ? env_or("DOCKMETA_CACHE_DIR", "")
                               : flags.cache_dir;
        config.advisories_path = flags.advisories;
        config.lenient_from = flags.lenient_from;
        config.keep_unresolved = flags.keep_unresolved;
        unsigned cores = std::thread::hardware_concurrency();
        config.jobs = flags.jobs > 0
                          ? flags.jobs
                          : static_cast<int>(cores > 0 ? cores : 1);
        return config;
    };

    auto check_cutoff = [](const CommonFlags& flags,
                           const RunConfig& config) -> bool {
        if (!flags.cutoff.empty() && flags.cutoff != "none" &&
            !config.cutoff) {
            std::cerr << "error: --cutoff expects YYYY-MM-DD or 'none', got '"
                      << flags.cutoff << "'\n";
            return false;
        }
        return true;
    };

    try {
        if (scan->parsed()) {
            RunConfig config = build_config(scan_flags);
            if (!check_cutoff(scan_flags, config)) return 2;
            if (!config.live && config.registry_fixture.empty()) {
                std::cerr << "error: scan needs --registry-fixture or --live\n";
                return 2;
            }
            return finish(dockmeta::run_scan(config));
        }
        if (classify->parsed()) {
            RunConfig config = build_config(classify_flags);
            if (!check_cutoff(classify_flags, config)) return 2;
            return finish(dockmeta::run_classify(config));
        }
        if (groups->parsed()) {
            return finish(dockmeta::run_groups(build_config(groups_flags)));
        }
        if (recommend->parsed()) {
            return finish(
                dockmeta::run_recommend(build_config(recommend_flags)));
        }
        if (report->parsed()) {
            return finish(dockmeta::run_report(build_config(report_flags)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
