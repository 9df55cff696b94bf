#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dockmeta/groups.hpp"
#include "dockmeta/history.hpp"
#include "dockmeta/recommend.hpp"
#include "dockmeta/registry.hpp"

namespace dockmeta {

struct RunConfig {
    std::string corpus_dir;       // directory of git checkouts, or a
                                  // pre-exported timelines JSON file
    std::string registry_fixture; // fixture path; empty in live mode
    bool live = false;
    std::string token;                  // API token for live mode
    std::optional<std::int64_t> cutoff; // unix seconds, UTC midnight
    std::string cutoff_text;            // YYYY-MM-DD, echoed in reports
    std::string output_dir;
    std::string cache_dir;
    std::string advisories_path;
    bool lenient_from = false;
    bool keep_unresolved = false;
    int jobs = 1;
};

/// exit_code: 0 clean, 1 finished with repo-level errors, 2 unusable config.
struct StageResult {
    int exit_code = 0;
    Diagnostics diagnostics;
};

/// Mines every corpus repository and writes registry_snapshot.json,
/// timelines.json, extraction.json and domains.json. Later stages read only
/// these artifacts, never the corpus.
StageResult run_scan(const RunConfig& config);
/// Reads timelines.json; writes classification.json and classification.txt.
StageResult run_classify(const RunConfig& config);
/// Reads timelines.json, classification.json, registry_snapshot.json;
/// writes groups.json.
StageResult run_groups(const RunConfig& config);
/// Reads the above plus groups.json; writes recommendations/.
StageResult run_recommend(const RunConfig& config);
/// Summarizes all artifacts into report.txt (also printed to stdout).
StageResult run_report(const RunConfig& config);

// Artifact (de)serialization, shared with tests.
nlohmann::ordered_json timelines_to_json(const std::vector<RepoTimelines>& repos);
std::vector<RepoTimelines> timelines_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json groups_to_json(const GroupingResult& grouping);
GroupingResult groups_from_json(const nlohmann::ordered_json& doc);

/// "YYYY-MM-DD" to unix seconds at UTC midnight.
std::optional<std::int64_t> parse_date(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path); // throws on failure
nlohmann::ordered_json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::ordered_json& doc);

} // namespace dockmeta
