#include <doctest.h>

#include <string>

#include "dockmeta/history.hpp"
#include "support/corpus_builder.hpp"

using namespace dockmeta;
namespace ts = dockmeta::testsupport;

namespace {

RegistrySnapshot fixture_registry() {
    return RegistrySnapshot::load_file(ts::fixture_path("registry.json"));
}

PinnedPackage pin(const std::string& full, const std::string& tag) {
    PinnedPackage pkg;
    pkg.ref.identity = *PackageIdentity::parse(full);
    pkg.ref.tag = tag;
    pkg.ref.pattern = UrlPattern::archive;
    pkg.ref.url = "https://github.com/" + full + "/archive/" + tag + ".tar.gz";
    return pkg;
}

Snapshot snap_at(std::int64_t ts_sec, std::vector<PinnedPackage> pkgs) {
    Snapshot snap;
    snap.commit = "c" + std::to_string(ts_sec);
    snap.timestamp = ts_sec;
    snap.packages = std::move(pkgs);
    return snap;
}

} // namespace

TEST_CASE("mining a repo with two commits yields one two-snapshot timeline") {
    std::string dir = ts::scratch_dir("dockmeta_hist_basic");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::write_file(dir, "README.md", "not a dockerfile\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.1.tar.gz\n");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RegistrySnapshot registry = fixture_registry();
    RepoTimelines repo = analyze_repo(dir, "basic", registry, {});
    REQUIRE(repo.timelines.size() == 1);
    const DockerfileTimeline& timeline = repo.timelines[0];
    CHECK(timeline.path == "Dockerfile");
    CHECK(timeline.present_at_head);
    REQUIRE(timeline.snapshots.size() == 2);
    CHECK(timeline.snapshots[0].packages.size() == 1);
    CHECK(timeline.snapshots[0].packages[0].ref.tag == "v1.0");
    CHECK(timeline.snapshots[1].packages[0].ref.tag == "v1.1");
    CHECK(timeline.snapshots[0].timestamp < timeline.snapshots[1].timestamp);
    CHECK(repo.last_commit == timeline.snapshots[1].timestamp);
    CHECK(timeline.analyzed());
}

TEST_CASE("unchanged commits add no snapshots") {
    std::string dir = ts::scratch_dir("dockmeta_hist_untouched");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    ts::write_file(dir, "other.txt", "x\n");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    CHECK(repo.timelines[0].snapshots.size() == 1);
    CHECK(repo.last_commit > repo.timelines[0].snapshots[0].timestamp);
}

TEST_CASE("deletion closes the timeline") {
    std::string dir = ts::scratch_dir("dockmeta_hist_delete");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    ts::remove_file(dir, "Dockerfile");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    const DockerfileTimeline& timeline = repo.timelines[0];
    CHECK_FALSE(timeline.present_at_head);
    REQUIRE(timeline.snapshots.size() == 2);
    CHECK(timeline.snapshots[1].deleted);
    CHECK(timeline.snapshots[1].packages.empty());
}

TEST_CASE("rename between dockerfile names carries the timeline") {
    std::string dir = ts::scratch_dir("dockmeta_hist_rename");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    // Byte-identical move so git detects a clean rename.
    ts::remove_file(dir, "Dockerfile");
    ts::write_file(dir, "build.Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    const DockerfileTimeline& timeline = repo.timelines[0];
    CHECK(timeline.path == "build.Dockerfile");
    CHECK(timeline.present_at_head);
    CHECK(timeline.snapshots.size() == 2);
}

TEST_CASE("rename to a non-dockerfile name counts as deletion") {
    std::string dir = ts::scratch_dir("dockmeta_hist_rename_away");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    ts::remove_file(dir, "Dockerfile");
    ts::write_file(dir, "container-build.txt",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    CHECK_FALSE(repo.timelines[0].present_at_head);
    CHECK(repo.timelines[0].snapshots.back().deleted);
}

TEST_CASE("invalid file versions record no packages but stay in the timeline") {
    std::string dir = ts::scratch_dir("dockmeta_hist_invalid");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile", "RUN no-from-first\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v1.0.tar.gz\n");
    ts::commit_all(dir, "2024-03-02 10:00:00 +0000", "two");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    REQUIRE(repo.timelines[0].snapshots.size() == 2);
    CHECK_FALSE(repo.timelines[0].snapshots[0].parse_valid);
    CHECK(repo.timelines[0].snapshots[0].packages.empty());
    CHECK(repo.timelines[0].snapshots[1].packages.size() == 1);
}

TEST_CASE("unvalidated references produce diagnostics, not packages") {
    std::string dir = ts::scratch_dir("dockmeta_hist_unvalidated");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/acme/libfoo/archive/v9.9.tar.gz\n"
                   "RUN wget https://github.com/un/known/archive/v1.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");

    RepoTimelines repo = analyze_repo(dir, "r", fixture_registry(), {});
    REQUIRE(repo.timelines.size() == 1);
    CHECK(repo.timelines[0].snapshots[0].packages.empty());
    CHECK_FALSE(repo.timelines[0].analyzed());
    CHECK(repo.diagnostics.size() >= 2);
}

TEST_CASE("identity collector sees matches before validation") {
    std::string dir = ts::scratch_dir("dockmeta_hist_collect");
    ts::init_repo(dir);
    ts::write_file(dir, "Dockerfile",
                   "FROM alpine\n"
                   "RUN wget https://github.com/un/known/archive/v1.tar.gz\n");
    ts::commit_all(dir, "2024-03-01 10:00:00 +0000", "one");

    std::set<PackageIdentity> ids;
    HistoryOptions opts;
    opts.collect_identities = &ids;
    RegistrySnapshot empty;
    analyze_repo(dir, "r", empty, opts);
    REQUIRE(ids.size() == 1);
    CHECK(ids.begin()->full() == "un/known");
}

TEST_CASE("missing directory yields an error diagnostic") {
    RepoTimelines repo =
        analyze_repo("/nonexistent/path/xyz", "gone", RegistrySnapshot{}, {});
    CHECK(repo.timelines.empty());
    REQUIRE(!repo.diagnostics.empty());
    CHECK(repo.diagnostics[0].severity == Severity::error);
}

// ---------------------------------------------------------------------------
// classification on hand-built timelines

TEST_CASE("status priority: dormancy is repo-level and wins") {
    DockerfileTimeline timeline;
    timeline.snapshots = {snap_at(100, {pin("acme/libfoo", "v1.0")}),
                          snap_at(200, {pin("acme/libfoo", "v1.1")})};
    // Repo idle since before the cutoff: dormant despite the update.
    CHECK(classify_timeline(timeline, 200, 1000) ==
          DockerfileStatus::dormant);
    // Cutoff disabled or satisfied: the update shows through.
    CHECK(classify_timeline(timeline, 200, std::nullopt) ==
          DockerfileStatus::package_updated);
    CHECK(classify_timeline(timeline, 200, 150) ==
          DockerfileStatus::package_updated);
}

TEST_CASE("raising the cutoff never revives a dormant file") {
    DockerfileTimeline timeline;
    timeline.snapshots = {snap_at(100, {pin("acme/libfoo", "v1.0")})};
    for (std::int64_t cutoff = 101; cutoff < 131; ++cutoff) {
        CHECK(classify_timeline(timeline, 100, cutoff) ==
              DockerfileStatus::dormant);
    }
}

TEST_CASE("empty final snapshot means all packages deleted") {
    DockerfileTimeline timeline;
    timeline.snapshots = {snap_at(100, {pin("acme/libfoo", "v1.0")}),
                          snap_at(200, {})};
    CHECK(classify_timeline(timeline, 200, std::nullopt) ==
          DockerfileStatus::all_packages_deleted);
}

TEST_CASE("same package at two tags in one snapshot is multiple_versions") {
    DockerfileTimeline timeline;
    timeline.snapshots = {
        snap_at(100, {pin("acme/libfoo", "v1.0"), pin("acme/libfoo", "v1.1"),
                      pin("acme/libbar", "2.0")})};
    CHECK(classify_timeline(timeline, 100, std::nullopt) ==
          DockerfileStatus::multiple_versions);
}

TEST_CASE("duplicate pins at the same tag are not multiple versions") {
    DockerfileTimeline timeline;
    timeline.snapshots = {
        snap_at(100, {pin("acme/libfoo", "v1.0"), pin("acme/libfoo", "v1.0")})};
    CHECK(classify_timeline(timeline, 100, std::nullopt) ==
          DockerfileStatus::no_package_updated);
}

TEST_CASE("update requires a changed tag across consecutive snapshots") {
    DockerfileTimeline updated;
    updated.snapshots = {snap_at(100, {pin("acme/libfoo", "v1.0")}),
                         snap_at(200, {pin("acme/libfoo", "v1.1")})};
    CHECK(classify_timeline(updated, 200, std::nullopt) ==
          DockerfileStatus::package_updated);

    // Removed, then re-added at another tag: no consecutive pair pins it
    // in both snapshots, so this never counts as an update.
    DockerfileTimeline readded;
    readded.snapshots = {
        snap_at(100, {pin("acme/libfoo", "v1.0"), pin("acme/libbar", "2.0")}),
        snap_at(200, {pin("acme/libbar", "2.0")}),
        snap_at(300, {pin("acme/libfoo", "v2.0"), pin("acme/libbar", "2.0")})};
    CHECK(classify_timeline(readded, 300, std::nullopt) ==
          DockerfileStatus::no_package_updated);
}

TEST_CASE("repo classification follows dockerfile statuses") {
    using S = DockerfileStatus;
    Diagnostics diags;
    CHECK(classify_repo({S::package_updated, S::dormant}) ==
          RepoClass::with_update);
    CHECK(classify_repo({S::no_package_updated, S::no_package_updated}) ==
          RepoClass::no_update);
    CHECK(classify_repo({S::no_package_updated, S::all_packages_deleted}) ==
          RepoClass::other);
    CHECK(classify_repo({S::dormant}) == RepoClass::other);
    CHECK(classify_repo({}, &diags) == RepoClass::other);
    CHECK(diags.size() == 1);
}
