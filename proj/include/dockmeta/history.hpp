#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dockmeta/dockerfile.hpp"
#include "dockmeta/package.hpp"
#include "dockmeta/registry.hpp"
#include "dockmeta/span.hpp"

namespace dockmeta {

/// State of one Dockerfile at one commit that touched it. packages holds
/// only references that validated against the registry. A deletion yields a
/// snapshot with empty text and no packages.
struct Snapshot {
    std::string commit;
    std::int64_t timestamp = 0;
    std::string text;
    bool parse_valid = true;
    bool deleted = false;
    std::vector<PinnedPackage> packages;

    /// Distinct (identity, tag) pairs, order-stable.
    std::vector<std::pair<PackageIdentity, std::string>> distinct_pins() const;
};

enum class DockerfileStatus {
    dormant,
    all_packages_deleted,
    multiple_versions,
    no_package_updated,
    package_updated,
};

enum class RepoClass { with_update, no_update, other };

struct DockerfileTimeline {
    std::string repo;
    std::string path; // current path; follows renames
    bool present_at_head = true;
    std::vector<Snapshot> snapshots; // chronological

    /// A timeline takes part in classification once any snapshot pinned at
    /// least one validated package.
    bool analyzed() const;
};

struct RepoTimelines {
    std::string repo;
    std::vector<DockerfileTimeline> timelines; // sorted by path
    std::int64_t last_commit = 0; // newest first-parent commit, unix seconds
    Diagnostics diagnostics;
};

struct HistoryOptions {
    std::optional<std::int64_t> cutoff; // unix seconds; enables dormancy
    ParseOptions parse;
    bool keep_unresolved = false;
    /// When set, every matched identity is collected before validation;
    /// live mode uses this first pass to know what to fetch.
    std::set<PackageIdentity>* collect_identities = nullptr;
};

/// Walks first-parent history and rebuilds every Dockerfile's timeline.
/// Renames carry the timeline along; a rename away from a Dockerfile name
/// counts as a deletion.
RepoTimelines analyze_repo(const std::string& repo_dir,
                           const std::string& repo_name,
                           const RegistrySnapshot& registry,
                           const HistoryOptions& opts);

/// Requires timeline.analyzed(). Checks in priority order: dormant (the
/// whole repository saw no commit at or after the cutoff), all packages
/// deleted, multiple versions in one snapshot, updated between consecutive
/// snapshots, never updated.
DockerfileStatus classify_timeline(const DockerfileTimeline& timeline,
                                   std::int64_t repo_last_commit,
                                   std::optional<std::int64_t> cutoff);

/// with_update when any Dockerfile updated a package; no_update when every
/// analyzed Dockerfile pinned packages and never touched them; other
/// otherwise. No analyzed Dockerfiles at all also means other.
RepoClass classify_repo(const std::vector<DockerfileStatus>& statuses,
                        Diagnostics* diags = nullptr);

std::string_view to_string(DockerfileStatus s);
std::string_view to_string(RepoClass c);

} // namespace dockmeta
