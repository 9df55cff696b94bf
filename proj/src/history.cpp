#include "dockmeta/history.hpp"

#include <algorithm>
#include <set>

#include "dockmeta/extract.hpp"
#include "dockmeta/git.hpp"

namespace dockmeta {

std::vector<std::pair<PackageIdentity, std::string>> Snapshot::distinct_pins()
    const {
    std::vector<std::pair<PackageIdentity, std::string>> pins;
    for (const auto& pkg : packages) {
        auto pin = std::make_pair(pkg.ref.identity, pkg.ref.tag);
        if (std::find(pins.begin(), pins.end(), pin) == pins.end())
            pins.push_back(std::move(pin));
    }
    return pins;
}

bool DockerfileTimeline::analyzed() const {
    return std::any_of(snapshots.begin(), snapshots.end(),
                       [](const Snapshot& s) { return !s.packages.empty(); });
}

namespace {

Snapshot build_snapshot(const std::string& text, const std::string& path,
                        const std::string& commit, std::int64_t timestamp,
                        const RegistrySnapshot& registry,
                        const HistoryOptions& opts, Diagnostics& diags) {
    Snapshot snap;
    snap.commit = commit;
    snap.timestamp = timestamp;
    snap.text = text;

    DockerfileAst ast = parse_dockerfile(sanitize_utf8(text), path, opts.parse);
    if (!ast.valid) {
        snap.parse_valid = false;
        diags.push_back({SourceSpan{path, 0, 0}, Severity::warning,
                         "not a valid Dockerfile at commit " + commit +
                             "; no packages recorded"});
        return snap;
    }

    VarEnv env = build_env(ast);
    ExtractionResult extraction = extract_urls(ast, env);
    for (const auto& url : extraction.urls) {
        if (!url.fully_resolved && !opts.keep_unresolved) continue;
        auto ref = match_github_url(url.url);
        if (!ref) continue;
        if (opts.collect_identities) opts.collect_identities->insert(ref->identity);
        ValidationStatus status = validate(*ref, registry);
        if (status != ValidationStatus::valid) {
            diags.push_back(
                {url.span, Severity::warning,
                 std::string(status == ValidationStatus::invalid
                                 ? "package reference failed validation: "
                                 : "package not in registry: ") +
                     ref->identity.full() + "@" + ref->tag + " at commit " +
                     commit});
            continue;
        }
        PinnedPackage pkg;
        pkg.ref = std::move(*ref);
        pkg.location = url.span;
        pkg.dockerfile = path;
        pkg.commit = commit;
        snap.packages.push_back(std::move(pkg));
    }
    return snap;
}

Snapshot deletion_snapshot(const std::string& commit, std::int64_t timestamp) {
    Snapshot snap;
    snap.commit = commit;
    snap.timestamp = timestamp;
    snap.deleted = true;
    return snap;
}

struct TimelineBuilder {
    DockerfileTimeline timeline;
    bool open = true;
};

} // namespace

RepoTimelines analyze_repo(const std::string& repo_dir,
                           const std::string& repo_name,
                           const RegistrySnapshot& registry,
                           const HistoryOptions& opts) {
    RepoTimelines result;
    result.repo = repo_name;

    std::vector<CommitInfo> commits;
    try {
        commits = first_parent_history(repo_dir);
    } catch (const GitError& e) {
        result.diagnostics.push_back(
            {SourceSpan{repo_dir, 0, 0}, Severity::error, e.what()});
        return result;
    }
    if (commits.empty()) {
        result.diagnostics.push_back({SourceSpan{repo_dir, 0, 0},
                                      Severity::warning,
                                      "repository has no commits"});
        return result;
    }
    result.last_commit = commits.back().timestamp;

    std::vector<TimelineBuilder> builders;
    std::map<std::string, std::size_t> open_by_path;

    auto open_timeline = [&](const std::string& path) -> TimelineBuilder& {
        auto it = open_by_path.find(path);
        if (it != open_by_path.end()) return builders[it->second];
        builders.push_back(TimelineBuilder{});
        builders.back().timeline.repo = repo_name;
        builders.back().timeline.path = path;
        open_by_path[path] = builders.size() - 1;
        return builders.back();
    };
    auto close_timeline = [&](const std::string& path, const CommitInfo& at) {
        auto it = open_by_path.find(path);
        if (it == open_by_path.end()) return;
        TimelineBuilder& b = builders[it->second];
        b.timeline.snapshots.push_back(deletion_snapshot(at.id, at.timestamp));
        b.timeline.present_at_head = false;
        b.open = false;
        open_by_path.erase(it);
    };
    auto record = [&](const std::string& path, const CommitInfo& at) {
        auto blob = read_blob(repo_dir, at.id, path);
        if (!blob) {
            result.diagnostics.push_back(
                {SourceSpan{path, 0, 0}, Severity::warning,
                 "cannot read " + path + " at commit " + at.id});
            return;
        }
        TimelineBuilder& b = open_timeline(path);
        b.timeline.snapshots.push_back(build_snapshot(
            *blob, path, at.id, at.timestamp, registry, opts,
            result.diagnostics));
    };

    for (std::size_t i = 0; i < commits.size(); ++i) {
        const CommitInfo& commit = commits[i];
        std::vector<FileChange> changes;
        try {
            changes = changes_in_commit(repo_dir, commit.id, i == 0);
        } catch (const GitError& e) {
            result.diagnostics.push_back(
                {SourceSpan{repo_dir, 0, 0}, Severity::error, e.what()});
            continue;
        }
        for (const auto& change : changes) {
            bool new_is_df = is_dockerfile_name(change.path);
            switch (change.status) {
                case 'R': {
                    bool old_is_df = is_dockerfile_name(change.old_path);
                    if (old_is_df && new_is_df) {
                        auto it = open_by_path.find(change.old_path);
                        if (it != open_by_path.end()) {
                            std::size_t idx = it->second;
                            open_by_path.erase(it);
                            builders[idx].timeline.path = change.path;
                            open_by_path[change.path] = idx;
                        }
                        record(change.path, commit);
                    } else if (old_is_df) {
                        close_timeline(change.old_path, commit);
                    } else if (new_is_df) {
                        record(change.path, commit);
                    }
                    break;
                }
                case 'D':
                    if (new_is_df) close_timeline(change.path, commit);
                    break;
                case 'A':
                case 'M':
                case 'T':
                case 'C':
                    if (new_is_df) record(change.path, commit);
                    break;
                default:
                    break;
            }
        }
    }

    for (auto& b : builders) result.timelines.push_back(std::move(b.timeline));
    std::sort(result.timelines.begin(), result.timelines.end(),
              [](const DockerfileTimeline& a, const DockerfileTimeline& b) {
                  if (a.path != b.path) return a.path < b.path;
                  return a.snapshots.front().timestamp <
                         b.snapshots.front().timestamp;
              });
    return result;
}

DockerfileStatus classify_timeline(const DockerfileTimeline& timeline,
                                   std::int64_t repo_last_commit,
                                   std::optional<std::int64_t> cutoff) {
    const auto& snaps = timeline.snapshots;

    if (cutoff && repo_last_commit < *cutoff) return DockerfileStatus::dormant;

    if (!snaps.empty() && snaps.back().packages.empty())
        return DockerfileStatus::all_packages_deleted;

    for (const auto& snap : snaps) {
        std::map<PackageIdentity, std::set<std::string>> tags_here;
        for (const auto& [id, tag] : snap.distinct_pins())
            tags_here[id].insert(tag);
        for (const auto& [id, tags] : tags_here)
            if (tags.size() > 1) return DockerfileStatus::multiple_versions;
    }

    // An update means the tag changed between consecutive snapshots that
    // both pin the package; remove-then-readd at another tag does not count.
    for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
        std::map<PackageIdentity, std::string> before, after;
        for (const auto& [id, tag] : snaps[i].distinct_pins())
            before.emplace(id, tag);
        for (const auto& [id, tag] : snaps[i + 1].distinct_pins())
            after.emplace(id, tag);
        for (const auto& [id, tag] : before) {
            auto it = after.find(id);
            if (it != after.end() && it->second != tag)
                return DockerfileStatus::package_updated;
        }
    }

    return DockerfileStatus::no_package_updated;
}

RepoClass classify_repo(const std::vector<DockerfileStatus>& statuses,
                        Diagnostics* diags) {
    if (statuses.empty()) {
        if (diags)
            diags->push_back({SourceSpan{}, Severity::warning,
                              "repository has no analyzable Dockerfiles"});
        return RepoClass::other;
    }
    bool any_update = false;
    bool all_unchanged = true;
    for (auto s : statuses) {
        if (s == DockerfileStatus::package_updated) any_update = true;
        if (s != DockerfileStatus::no_package_updated) all_unchanged = false;
    }
    if (any_update) return RepoClass::with_update;
    if (all_unchanged) return RepoClass::no_update;
    return RepoClass::other;
}

std::string_view to_string(DockerfileStatus s) {
    switch (s) {
        case DockerfileStatus::dormant: return "dormant";
        case DockerfileStatus::all_packages_deleted:
            return "all_packages_deleted";
        case DockerfileStatus::multiple_versions: return "multiple_versions";
        case DockerfileStatus::no_package_updated: return "no_package_updated";
        case DockerfileStatus::package_updated: return "package_updated";
    }
    return "unknown";
}

std::string_view to_string(RepoClass c) {
    switch (c) {
        case RepoClass::with_update: return "with_update";
        case RepoClass::no_update: return "no_update";
        case RepoClass::other: return "other";
    }
    return "unknown";
}

} // namespace dockmeta
