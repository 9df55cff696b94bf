#include "dockmeta/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "dockmeta/extract.hpp"

namespace dockmeta {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::optional<std::int64_t> parse_date(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3)
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = m - 1;
    tm.tm_mday = d;
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) return std::nullopt;
    return static_cast<std::int64_t>(t);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

void write_json_file(const std::string& path, const ordered_json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// timeline (de)serialization

ordered_json timelines_to_json(const std::vector<RepoTimelines>& repos) {
    ordered_json doc;
    doc["repos"] = ordered_json::array();
    for (const auto& repo : repos) {
        ordered_json repo_doc;
        repo_doc["repo"] = repo.repo;
        repo_doc["last_commit"] = repo.last_commit;
        repo_doc["timelines"] = ordered_json::array();
        for (const auto& timeline : repo.timelines) {
            ordered_json t;
            t["path"] = timeline.path;
            t["present_at_head"] = timeline.present_at_head;
            t["snapshots"] = ordered_json::array();
            for (const auto& snap : timeline.snapshots) {
                ordered_json s;
                s["commit"] = snap.commit;
                s["timestamp"] = snap.timestamp;
                s["deleted"] = snap.deleted;
                s["parse_valid"] = snap.parse_valid;
                s["text"] = snap.text;
                s["packages"] = ordered_json::array();
                for (const auto& pkg : snap.packages) {
                    ordered_json p;
                    p["package"] = pkg.ref.identity.full();
                    p["tag"] = pkg.ref.tag;
                    p["pattern"] = std::string(to_string(pkg.ref.pattern));
                    if (pkg.ref.asset_file) p["asset_file"] = *pkg.ref.asset_file;
                    p["url"] = pkg.ref.url;
                    p["start_line"] = pkg.location.start_line;
                    p["end_line"] = pkg.location.end_line;
                    s["packages"].push_back(std::move(p));
                }
                t["snapshots"].push_back(std::move(s));
            }
            repo_doc["timelines"].push_back(std::move(t));
        }
        doc["repos"].push_back(std::move(repo_doc));
    }
    return doc;
}

std::vector<RepoTimelines> timelines_from_json(const ordered_json& doc) {
    std::vector<RepoTimelines> repos;
    if (!doc.is_object() || !doc.contains("repos"))
        throw std::runtime_error("timelines document lacks a 'repos' array");
    for (const auto& repo_doc : doc.at("repos")) {
        RepoTimelines repo;
        repo.repo = repo_doc.at("repo").get<std::string>();
        repo.last_commit = repo_doc.value("last_commit", std::int64_t{0});
        for (const auto& t : repo_doc.at("timelines")) {
            DockerfileTimeline timeline;
            timeline.repo = repo.repo;
            timeline.path = t.at("path").get<std::string>();
            timeline.present_at_head = t.value("present_at_head", true);
            for (const auto& s : t.at("snapshots")) {
                Snapshot snap;
                snap.commit = s.at("commit").get<std::string>();
                snap.timestamp = s.at("timestamp").get<std::int64_t>();
                snap.deleted = s.value("deleted", false);
                snap.parse_valid = s.value("parse_valid", true);
                snap.text = s.value("text", std::string());
                for (const auto& p : s.value("packages", ordered_json::array())) {
                    PinnedPackage pkg;
                    auto id =
                        PackageIdentity::parse(p.at("package").get<std::string>());
                    if (!id)
                        throw std::runtime_error(
                            "bad package identity in timelines JSON");
                    pkg.ref.identity = *id;
                    pkg.ref.tag = p.at("tag").get<std::string>();
                    auto pattern =
                        pattern_from_string(p.at("pattern").get<std::string>());
                    if (!pattern)
                        throw std::runtime_error(
                            "bad pattern in timelines JSON");
                    pkg.ref.pattern = *pattern;
                    if (p.contains("asset_file"))
                        pkg.ref.asset_file = p.at("asset_file").get<std::string>();
                    pkg.ref.url = p.at("url").get<std::string>();
                    pkg.location = SourceSpan{timeline.path,
                                              p.value("start_line", 0),
                                              p.value("end_line", 0)};
                    pkg.dockerfile = timeline.path;
                    pkg.commit = snap.commit;
                    snap.packages.push_back(std::move(pkg));
                }
                timeline.snapshots.push_back(std::move(snap));
            }
            repo.timelines.push_back(std::move(timeline));
        }
        repos.push_back(std::move(repo));
    }
    return repos;
}

// ---------------------------------------------------------------------------
// group (de)serialization

namespace {

ordered_json combination_to_json(const Combination& combo) {
    ordered_json doc = ordered_json::object();
    for (const auto& [id, tag] : combo) doc[id.full()] = tag;
    return doc;
}

Combination combination_from_json(const ordered_json& doc) {
    Combination combo;
    for (const auto& [key, tag] : doc.items()) {
        auto id = PackageIdentity::parse(key);
        if (!id)
            throw std::runtime_error("bad identity in combination: " + key);
        combo[*id] = tag.get<std::string>();
    }
    return combo;
}

} // namespace

ordered_json groups_to_json(const GroupingResult& grouping) {
    ordered_json doc;
    doc["groups"] = ordered_json::array();
    std::map<std::string, int> tally = {{"no_update", 0},
                                        {"equivalent", 0},
                                        {"incomparable", 0},
                                        {"comparable", 0}};
    for (const auto& group : grouping.groups) {
        ordered_json g;
        g["key"] = group.key();
        g["packages"] = ordered_json::array();
        for (const auto& id : group.identities) g["packages"].push_back(id.full());
        g["class"] = std::string(to_string(group.cls));
        ++tally[std::string(to_string(group.cls))];
        g["members"] = ordered_json::array();
        for (const auto& member : group.members) {
            ordered_json m;
            m["repo"] = member.repo;
            m["dockerfile"] = member.dockerfile;
            m["commit"] = member.commit;
            m["drifted"] = member.drifted;
            m["combination"] = combination_to_json(member.combo);
            g["members"].push_back(std::move(m));
        }
        g["join"] = combination_to_json(group.join);
        g["max_combination"] = group.unique_max
                                   ? combination_to_json(*group.unique_max)
                                   : ordered_json(nullptr);
        g["metrics"] = {{"repos_with_differences", group.repos_with_differences},
                        {"max_version_difference", group.max_version_difference}};
        doc["groups"].push_back(std::move(g));
    }
    ordered_json tally_doc;
    for (const auto& [cls, count] : tally) tally_doc[cls] = count;
    doc["class_tally"] = std::move(tally_doc);
    return doc;
}

GroupingResult groups_from_json(const ordered_json& doc) {
    GroupingResult result;
    for (const auto& g : doc.at("groups")) {
        PackageGroup group;
        for (const auto& key : g.at("packages")) {
            auto id = PackageIdentity::parse(key.get<std::string>());
            if (!id) throw std::runtime_error("bad identity in groups JSON");
            group.identities.push_back(*id);
        }
        std::string cls = g.at("class").get<std::string>();
        if (cls == "no_update")
            group.cls = GroupClass::no_update;
        else if (cls == "equivalent")
            group.cls = GroupClass::equivalent;
        else if (cls == "incomparable")
            group.cls = GroupClass::incomparable;
        else if (cls == "comparable")
            group.cls = GroupClass::comparable;
        else
            throw std::runtime_error("bad group class: " + cls);
        for (const auto& m : g.at("members")) {
            GroupMember member;
            member.repo = m.at("repo").get<std::string>();
            member.dockerfile = m.at("dockerfile").get<std::string>();
            member.commit = m.value("commit", std::string());
            member.drifted = m.value("drifted", false);
            member.combo = combination_from_json(m.at("combination"));
            group.members.push_back(std::move(member));
        }
        group.join = combination_from_json(g.value("join", ordered_json::object()));
        if (g.contains("max_combination") && !g.at("max_combination").is_null())
            group.unique_max = combination_from_json(g.at("max_combination"));
        group.repos_with_differences =
            g.at("metrics").value("repos_with_differences", 0);
        group.max_version_difference =
            g.at("metrics").value("max_version_difference", 0);
        result.groups.push_back(std::move(group));
    }
    return result;
}

// ---------------------------------------------------------------------------
// scan

namespace {

struct CorpusRepo {
    std::string name;
    std::string path;
};

bool looks_like_git_repo(const fs::path& dir) {
    if (fs::exists(dir / ".git")) return true;
    return fs::exists(dir / "HEAD") && fs::exists(dir / "objects");
}

std::vector<CorpusRepo> discover_repos(const std::string& corpus_dir,
                                       Diagnostics& diags) {
    std::vector<CorpusRepo> repos;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (!entry.is_directory()) continue;
        if (looks_like_git_repo(entry.path())) {
            repos.push_back({entry.path().filename().string(),
                             entry.path().string()});
        } else {
            diags.push_back({SourceSpan{entry.path().string(), 0, 0},
                             Severity::warning,
                             "not a git repository, skipped"});
        }
    }
    std::sort(repos.begin(), repos.end(),
              [](const CorpusRepo& a, const CorpusRepo& b) {
                  return a.name < b.name;
              });
    return repos;
}

std::vector<RepoTimelines> mine_corpus(const std::vector<CorpusRepo>& repos,
                                       const RegistrySnapshot& registry,
                                       const HistoryOptions& opts, int jobs) {
    std::vector<RepoTimelines> results(repos.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < repos.size();)
            results[i] =
                analyze_repo(repos[i].path, repos[i].name, registry, opts);
    };
    int n = std::max(1, jobs);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return results;
}

std::set<PackageIdentity> collect_corpus_identities(
    const std::vector<CorpusRepo>& repos, const HistoryOptions& base_opts) {
    std::set<PackageIdentity> ids;
    RegistrySnapshot empty;
    for (const auto& repo : repos) {
        HistoryOptions opts = base_opts;
        opts.collect_identities = &ids;
        analyze_repo(repo.path, repo.name, empty, opts);
    }
    return ids;
}

std::set<PackageIdentity> identities_in_timelines(
    const std::vector<RepoTimelines>& repos) {
    std::set<PackageIdentity> ids;
    for (const auto& repo : repos)
        for (const auto& timeline : repo.timelines)
            for (const auto& snap : timeline.snapshots)
                for (const auto& pkg : snap.packages)
                    ids.insert(pkg.ref.identity);
    return ids;
}

void append_diags(StageResult& result, const Diagnostics& diags) {
    for (const auto& d : diags) {
        result.diagnostics.push_back(d);
        if (d.severity == Severity::error)
            result.exit_code = std::max(result.exit_code, 1);
    }
}

ordered_json extraction_report(const std::vector<RepoTimelines>& repos,
                               const RegistrySnapshot& registry,
                               const ParseOptions& parse_opts,
                               std::vector<std::pair<std::string, std::string>>&
                                   repo_urls_out) {
    ordered_json doc;
    doc["repos"] = ordered_json::array();
    for (const auto& repo : repos) {
        ordered_json repo_doc;
        repo_doc["repo"] = repo.repo;
        repo_doc["dockerfiles"] = ordered_json::array();
        for (const auto& timeline : repo.timelines) {
            if (!timeline.present_at_head || timeline.snapshots.empty())
                continue;
            const Snapshot& head = timeline.snapshots.back();
            if (head.deleted) continue;
            DockerfileAst ast =
                parse_dockerfile(sanitize_utf8(head.text), timeline.path,
                                 parse_opts);
            VarEnv env = build_env(ast);
            ExtractionResult extraction = extract_urls(ast, env);

            ordered_json df;
            df["path"] = timeline.path;
            df["valid"] = ast.valid;
            df["urls"] = ordered_json::array();
            for (const auto& url : extraction.urls) {
                ordered_json u;
                u["url"] = url.url;
                u["source_kind"] = std::string(to_string(url.kind));
                u["line"] = url.span.start_line;
                u["fully_resolved"] = url.fully_resolved;
                if (auto ref = match_github_url(url.url)) {
                    ordered_json p;
                    p["package"] = ref->identity.full();
                    p["tag"] = ref->tag;
                    p["pattern"] = std::string(to_string(ref->pattern));
                    switch (validate(*ref, registry)) {
                        case ValidationStatus::valid:
                            p["validation"] = "valid";
                            break;
                        case ValidationStatus::invalid:
                            p["validation"] = "invalid";
                            break;
                        case ValidationStatus::unknown_package:
                            p["validation"] = "unknown_package";
                            break;
                    }
                    u["match"] = std::move(p);
                } else {
                    u["match"] = nullptr;
                }
                repo_urls_out.emplace_back(repo.repo, url.url);
                df["urls"].push_back(std::move(u));
            }
            repo_doc["dockerfiles"].push_back(std::move(df));
        }
        doc["repos"].push_back(std::move(repo_doc));
    }
    return doc;
}

} // namespace

StageResult run_scan(const RunConfig& config) {
    StageResult result;
    if (config.corpus_dir.empty() || !fs::exists(config.corpus_dir)) {
        result.exit_code = 2;
        result.diagnostics.push_back({SourceSpan{}, Severity::error,
                                      "corpus path does not exist: " +
                                          config.corpus_dir});
        return result;
    }
    if (!config.live) {
        if (config.registry_fixture.empty() ||
            !fs::exists(config.registry_fixture)) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error,
                 "registry fixture not found: " + config.registry_fixture});
            return result;
        }
    }
    fs::create_directories(config.output_dir);

    HistoryOptions opts;
    opts.cutoff = config.cutoff;
    opts.parse.lenient_from = config.lenient_from;
    opts.keep_unresolved = config.keep_unresolved;

    bool corpus_is_export = fs::is_regular_file(config.corpus_dir);
    std::vector<CorpusRepo> corpus;
    if (!corpus_is_export)
        corpus = discover_repos(config.corpus_dir, result.diagnostics);

    RegistrySnapshot registry;
    if (config.live) {
        std::set<PackageIdentity> ids;
        std::vector<RepoTimelines> exported;
        if (corpus_is_export) {
            exported = timelines_from_json(read_json_file(config.corpus_dir));
            ids = identities_in_timelines(exported);
        } else {
            ids = collect_corpus_identities(corpus, opts);
        }
        FetchOptions fopts;
        fopts.token = config.token;
        fopts.cache_dir = config.cache_dir;
        FetchOutcome outcome = fetch_live(ids, fopts);
        registry = std::move(outcome.snapshot);
        for (const auto& [id, message] : outcome.errors) {
            result.exit_code = std::max(result.exit_code, 1);
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error,
                 "registry fetch failed for " + id + ": " + message});
        }
    } else {
        try {
            registry = RegistrySnapshot::load_file(config.registry_fixture);
        } catch (const RegistryError& e) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error, e.what()});
            return result;
        }
    }

    std::vector<RepoTimelines> timelines;
    if (corpus_is_export) {
        timelines = timelines_from_json(read_json_file(config.corpus_dir));
    } else {
        if (corpus.empty())
            result.diagnostics.push_back(
                {SourceSpan{config.corpus_dir, 0, 0}, Severity::warning,
                 "corpus contains no git repositories"});
        timelines = mine_corpus(corpus, registry, opts, config.jobs);
    }
    for (const auto& repo : timelines) append_diags(result, repo.diagnostics);

    fs::path out(config.output_dir);
    write_json_file((out / "registry_snapshot.json").string(),
                    registry.to_json());
    write_json_file((out / "timelines.json").string(),
                    timelines_to_json(timelines));

    std::vector<std::pair<std::string, std::string>> repo_urls;
    write_json_file((out / "extraction.json").string(),
                    extraction_report(timelines, registry, opts.parse,
                                      repo_urls));

    Diagnostics domain_diags;
    ordered_json domains_doc;
    domains_doc["domains"] = ordered_json::object();
    for (const auto& [domain, count] :
         domain_histogram(repo_urls, &domain_diags))
        domains_doc["domains"][domain] = count;
    append_diags(result, domain_diags);
    write_json_file((out / "domains.json").string(), domains_doc);
    return result;
}

// ---------------------------------------------------------------------------
// classify

namespace {

struct TallyRow {
    int count = 0;
    double percent = 0.0;
};

double rounded_percent(int count, int total) {
    if (total <= 0) return 0.0;
    return std::round(1000.0 * count / total) / 10.0;
}

std::string format_table(const std::string& header, const std::string& label,
                         const std::vector<std::pair<std::string, int>>& rows,
                         int total) {
    std::size_t width = label.size();
    for (const auto& [name, count] : rows) width = std::max(width, name.size());
    std::ostringstream os;
    os << header << "\n\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-*s  %6s  %8s\n",
                  static_cast<int>(width), label.c_str(), "count", "percent");
    os << line;
    for (const auto& [name, count] : rows) {
        std::snprintf(line, sizeof(line), "  %-*s  %6d  %7.1f%%\n",
                      static_cast<int>(width), name.c_str(), count,
                      rounded_percent(count, total));
        os << line;
    }
    std::snprintf(line, sizeof(line), "  %-*s  %6d  %7.1f%%\n",
                  static_cast<int>(width), "total", total,
                  total > 0 ? 100.0 : 0.0);
    os << line;
    return os.str();
}

const std::vector<DockerfileStatus> all_statuses = {
    DockerfileStatus::dormant, DockerfileStatus::all_packages_deleted,
    DockerfileStatus::multiple_versions, DockerfileStatus::no_package_updated,
    DockerfileStatus::package_updated};

const std::vector<RepoClass> all_classes = {
    RepoClass::with_update, RepoClass::no_update, RepoClass::other};

} // namespace

StageResult run_classify(const RunConfig& config) {
    StageResult result;
    fs::path out(config.output_dir);
    fs::path timelines_path = out / "timelines.json";
    if (!fs::exists(timelines_path)) {
        result.exit_code = 2;
        result.diagnostics.push_back(
            {SourceSpan{}, Severity::error,
             "missing artifact (run scan first): " + timelines_path.string()});
        return result;
    }
    auto repos = timelines_from_json(read_json_file(timelines_path.string()));

    ordered_json doc;
    doc["cutoff"] = config.cutoff ? ordered_json(config.cutoff_text)
                                  : ordered_json(nullptr);
    doc["dockerfiles"] = ordered_json::array();
    doc["not_analyzed"] = ordered_json::array();
    doc["repos"] = ordered_json::array();

    std::map<DockerfileStatus, int> status_counts;
    std::map<RepoClass, int> class_counts;
    int analyzed_total = 0;

    for (const auto& repo : repos) {
        std::vector<DockerfileStatus> statuses;
        for (const auto& timeline : repo.timelines) {
            if (!timeline.analyzed()) {
                doc["not_analyzed"].push_back(
                    {{"repo", repo.repo}, {"path", timeline.path}});
                continue;
            }
            DockerfileStatus status =
                classify_timeline(timeline, repo.last_commit, config.cutoff);
            statuses.push_back(status);
            ++status_counts[status];
            ++analyzed_total;
            doc["dockerfiles"].push_back(
                {{"repo", repo.repo},
                 {"path", timeline.path},
                 {"status", std::string(to_string(status))}});
        }
        Diagnostics class_diags;
        RepoClass cls = classify_repo(statuses, &class_diags);
        append_diags(result, class_diags);
        ++class_counts[cls];
        doc["repos"].push_back(
            {{"repo", repo.repo}, {"class", std::string(to_string(cls))}});
    }

    ordered_json status_tally;
    for (auto status : all_statuses) {
        int count = status_counts[status];
        status_tally[std::string(to_string(status))] = {
            {"count", count}, {"percent", rounded_percent(count, analyzed_total)}};
    }
    status_tally["total"] = {{"count", analyzed_total},
                             {"percent", analyzed_total > 0 ? 100.0 : 0.0}};
    doc["status_tally"] = std::move(status_tally);

    int repo_total = static_cast<int>(repos.size());
    ordered_json class_tally;
    for (auto cls : all_classes) {
        int count = class_counts[cls];
        class_tally[std::string(to_string(cls))] = {
            {"count", count}, {"percent", rounded_percent(count, repo_total)}};
    }
    class_tally["total"] = {{"count", repo_total},
                            {"percent", repo_total > 0 ? 100.0 : 0.0}};
    doc["class_tally"] = std::move(class_tally);

    write_json_file((out / "classification.json").string(), doc);

    std::vector<std::pair<std::string, int>> status_rows;
    for (auto status : all_statuses)
        status_rows.emplace_back(std::string(to_string(status)),
                                 status_counts[status]);
    std::vector<std::pair<std::string, int>> class_rows;
    for (auto cls : all_classes)
        class_rows.emplace_back(std::string(to_string(cls)),
                                class_counts[cls]);

    std::string text =
        format_table("Dockerfile status classification (dormancy cutoff: " +
                         (config.cutoff ? config.cutoff_text : "none") + ")",
                     "status", status_rows, analyzed_total) +
        "\n" +
        format_table("Repository classification", "class", class_rows,
                     repo_total);
    write_text_file((out / "classification.txt").string(), text);
    return result;
}

// ---------------------------------------------------------------------------
// groups

StageResult run_groups(const RunConfig& config) {
    StageResult result;
    fs::path out(config.output_dir);
    for (const char* name :
         {"timelines.json", "classification.json", "registry_snapshot.json"}) {
        if (!fs::exists(out / name)) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error,
                 "missing artifact (run earlier stages first): " +
                     (out / name).string()});
            return result;
        }
    }
    auto repos = timelines_from_json(
        read_json_file((out / "timelines.json").string()));
    auto registry = RegistrySnapshot::from_json(
        read_json_file((out / "registry_snapshot.json").string()));
    auto classification =
        read_json_file((out / "classification.json").string());

    std::map<std::string, RepoClass> repo_classes;
    for (const auto& entry : classification.at("repos")) {
        std::string cls = entry.at("class").get<std::string>();
        RepoClass parsed = RepoClass::other;
        if (cls == "with_update") parsed = RepoClass::with_update;
        else if (cls == "no_update") parsed = RepoClass::no_update;
        repo_classes[entry.at("repo").get<std::string>()] = parsed;
    }

    GroupingResult grouping = build_groups(repos, repo_classes, registry);
    append_diags(result, grouping.diagnostics);
    write_json_file((out / "groups.json").string(), groups_to_json(grouping));
    return result;
}

// ---------------------------------------------------------------------------
// recommend

namespace {

std::string sanitize_filename(const std::string& path) {
    std::string out = path;
    for (char& c : out)
        if (c == '/' || c == '\\') c = '_';
    return out;
}

} // namespace

StageResult run_recommend(const RunConfig& config) {
    StageResult result;
    fs::path out(config.output_dir);
    for (const char* name :
         {"timelines.json", "groups.json", "registry_snapshot.json"}) {
        if (!fs::exists(out / name)) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error,
                 "missing artifact (run earlier stages first): " +
                     (out / name).string()});
            return result;
        }
    }
    auto repos = timelines_from_json(
        read_json_file((out / "timelines.json").string()));
    auto registry = RegistrySnapshot::from_json(
        read_json_file((out / "registry_snapshot.json").string()));
    auto grouping =
        groups_from_json(read_json_file((out / "groups.json").string()));

    RecommendOptions opts;
    opts.parse.lenient_from = config.lenient_from;
    opts.keep_unresolved = config.keep_unresolved;
    if (!config.advisories_path.empty()) {
        try {
            opts.advisories = AdvisorySet::load_file(config.advisories_path);
        } catch (const std::exception& e) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error, e.what()});
            return result;
        }
    }

    auto recommendations =
        recommend_for_groups(grouping, repos, registry, opts);
    for (const auto& rec : recommendations)
        append_diags(result, rec.diagnostics);

    fs::path rec_dir = out / "recommendations";
    fs::remove_all(rec_dir);
    fs::create_directories(rec_dir);

    std::map<std::string, std::string> messages; // repo -> message.md body
    ordered_json index;
    index["recommendations"] = ordered_json::array();
    for (const auto& rec : recommendations) {
        ordered_json entry;
        entry["repo"] = rec.repo;
        entry["dockerfile"] = rec.dockerfile;
        entry["group"] = rec.group_key;
        entry["status"] = std::string(to_string(rec.status));
        entry["changes"] = ordered_json::array();
        for (const auto& bump : rec.bumps) {
            ordered_json change;
            change["package"] = bump.identity.full();
            change["from"] = bump.from_tag;
            change["to"] = bump.to_tag;
            change["edit_lines"] = ordered_json::array();
            for (const auto& site : bump.edit_sites)
                change["edit_lines"].push_back(
                    {site.start_line, site.end_line});
            entry["changes"].push_back(std::move(change));
        }
        entry["evidence"] = rec.evidence_repos;
        entry["cautions"] = rec.cautions;

        if (!rec.patch.empty()) {
            fs::path repo_dir = rec_dir / rec.repo;
            fs::create_directories(repo_dir);
            std::string patch_name = sanitize_filename(rec.dockerfile) + ".patch";
            write_text_file((repo_dir / patch_name).string(), rec.patch);
            entry["patch_file"] = rec.repo + "/" + patch_name;
        } else {
            entry["patch_file"] = nullptr;
        }
        if (!rec.message.empty()) {
            auto& body = messages[rec.repo];
            if (!body.empty()) body += "\n---\n\n";
            body += rec.message;
            entry["message_file"] = rec.repo + "/message.md";
        }
        index["recommendations"].push_back(std::move(entry));
    }
    for (const auto& [repo, body] : messages) {
        fs::path repo_dir = rec_dir / repo;
        fs::create_directories(repo_dir);
        write_text_file((repo_dir / "message.md").string(), body);
    }
    write_json_file((rec_dir / "index.json").string(), index);
    return result;
}

// ---------------------------------------------------------------------------
// report

StageResult run_report(const RunConfig& config) {
    StageResult result;
    fs::path out(config.output_dir);
    for (const char* name : {"timelines.json", "classification.json"}) {
        if (!fs::exists(out / name)) {
            result.exit_code = 2;
            result.diagnostics.push_back(
                {SourceSpan{}, Severity::error,
                 "missing artifact (run earlier stages first): " +
                     (out / name).string()});
            return result;
        }
    }
    auto classification =
        read_json_file((out / "classification.json").string());

    std::ostringstream os;
    os << "Corpus pipeline report\n";
    os << "======================\n\n";

    int repo_total = classification.at("class_tally").at("total").at("count");
    int df_total = classification.at("status_tally").at("total").at("count");
    os << "Repositories: " << repo_total << "\n";
    os << "Dockerfiles analyzed: " << df_total;
    os << " (not analyzed: " << classification.at("not_analyzed").size()
       << ")\n\n";

    if (fs::exists(out / "domains.json")) {
        auto domains = read_json_file((out / "domains.json").string());
        std::vector<std::pair<std::string, int>> rows;
        for (const auto& [domain, count] : domains.at("domains").items())
            rows.emplace_back(domain, count.get<int>());
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        os << "Source domains by repository count:\n";
        for (const auto& [domain, count] : rows) {
            char line[160];
            std::snprintf(line, sizeof(line), "  %-30s %5d\n", domain.c_str(),
                          count);
            os << line;
        }
        os << "\n";
    }

    os << read_text_file((out / "classification.txt").string()) << "\n";

    if (fs::exists(out / "groups.json")) {
        auto groups = read_json_file((out / "groups.json").string());
        os << "Package groups: " << groups.at("groups").size() << "\n";
        for (const auto& [cls, count] : groups.at("class_tally").items()) {
            char line[160];
            std::snprintf(line, sizeof(line), "  %-14s %5d\n", cls.c_str(),
                          count.get<int>());
            os << line;
        }
        os << "\n";
        for (const auto& g : groups.at("groups")) {
            os << "  " << g.at("key").get<std::string>() << "  ["
               << g.at("class").get<std::string>() << "]"
               << "  members=" << g.at("members").size()
               << "  repos_with_differences="
               << g.at("metrics").at("repos_with_differences").get<int>()
               << "  max_version_difference="
               << g.at("metrics").at("max_version_difference").get<int>()
               << "\n";
        }
        os << "\n";
    }

    fs::path index_path = out / "recommendations" / "index.json";
    if (fs::exists(index_path)) {
        auto index = read_json_file(index_path.string());
        os << "Recommendations: " << index.at("recommendations").size() << "\n";
        for (const auto& rec : index.at("recommendations")) {
            os << "  " << rec.at("repo").get<std::string>() << " "
               << rec.at("dockerfile").get<std::string>() << " ["
               << rec.at("status").get<std::string>() << "]";
            std::string sep = " ";
            for (const auto& change : rec.at("changes")) {
                os << sep << change.at("package").get<std::string>() << " "
                   << change.at("from").get<std::string>() << " -> "
                   << change.at("to").get<std::string>();
                sep = ", ";
            }
            os << "\n";
        }
    }

    std::string text = os.str();
    write_text_file((out / "report.txt").string(), text);
    std::cout << text;
    return result;
}

} // namespace dockmeta
