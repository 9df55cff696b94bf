#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dockmeta/dockerfile.hpp"
#include "dockmeta/groups.hpp"
#include "dockmeta/history.hpp"
#include "dockmeta/package.hpp"
#include "dockmeta/registry.hpp"

namespace dockmeta {

enum class RecommendationStatus {
    ready,
    held,            // target version flagged by an advisory
    unverifiable,    // rewritten file failed re-validation
    ambiguous_edit,  // a shared variable also feeds something not updated
    unlocatable_tag, // pinned version not found literally or via a variable
};

struct PackageBump {
    PackageIdentity identity;
    std::string from_tag;
    std::string to_tag;
    std::vector<SourceSpan> edit_sites;
};

/// A textual rewrite confined to one instruction's lines. Replacements
/// apply in order, each replacing every occurrence inside the span.
struct PlannedEdit {
    SourceSpan site;
    std::vector<std::pair<std::string, std::string>> replacements;
    std::string reason;
};

struct Recommendation {
    std::string repo;
    std::string dockerfile;
    std::string group_key;
    std::vector<PackageBump> bumps;
    std::vector<std::string> evidence_repos; // members already at the target
    RecommendationStatus status = RecommendationStatus::ready;
    std::vector<std::string> cautions;
    std::vector<PlannedEdit> edits;
    std::string rewritten_text; // full updated Dockerfile
    std::string patch;          // unified diff; empty when planning failed
    std::string message;        // maintainer-facing pull-request text
    Diagnostics diagnostics;
};

/// Known-bad versions: {"owner/repo": ["tag", ...]}.
class AdvisorySet {
public:
    static AdvisorySet from_json(const nlohmann::ordered_json& doc);
    static AdvisorySet load_file(const std::string& path);

    void flag(const PackageIdentity& id, const std::string& tag);
    bool contains(const PackageIdentity& id, const std::string& tag) const;
    bool empty() const { return flagged_.empty(); }

private:
    std::map<PackageIdentity, std::set<std::string>> flagged_;
};

struct RecommendOptions {
    AdvisorySet advisories;
    ParseOptions parse;
    bool keep_unresolved = false;
};

/// Plans version-bump patches for comparable groups: every member below the
/// group's unique maximal combination gets a rewrite of its Dockerfile at
/// head, verified by re-extracting the result.
std::vector<Recommendation> recommend_for_groups(
    const GroupingResult& grouping, const std::vector<RepoTimelines>& repos,
    const RegistrySnapshot& registry, const RecommendOptions& opts);

/// Minimal unified diff (3 context lines, no timestamps) between two texts
/// of the same file.
std::string make_unified_diff(const std::string& path,
                              const std::string& old_text,
                              const std::string& new_text);

std::string_view to_string(RecommendationStatus s);

} // namespace dockmeta
