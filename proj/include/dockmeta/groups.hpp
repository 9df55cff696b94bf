#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dockmeta/history.hpp"
#include "dockmeta/package.hpp"
#include "dockmeta/registry.hpp"

namespace dockmeta {

/// One tag per package identity; the version state of a Dockerfile
/// restricted to a package set.
using Combination = std::map<PackageIdentity, std::string>;

/// Product order over tag positions, component by component.
enum class CombinationOrder { less, equal, greater, incomparable };

/// Both combinations must cover the same identities with registry-known
/// tags; nullopt otherwise.
std::optional<CombinationOrder> compare_combinations(
    const Combination& a, const Combination& b,
    const RegistrySnapshot& registry);

/// Absolute positional difference between two tags in the package's tag
/// list; nullopt when either tag is unknown.
std::optional<int> tag_distance(const RegistrySnapshot& registry,
                                const PackageIdentity& id,
                                const std::string& from, const std::string& to);

enum class GroupClass { no_update, equivalent, incomparable, comparable };

struct GroupMember {
    std::string repo;
    std::string dockerfile;
    std::string commit; // snapshot the combination was read from
    Combination combo;
    /// Set when that Dockerfile's package set no longer matches the group
    /// at its final snapshot.
    bool drifted = false;
};

struct PackageGroup {
    std::vector<PackageIdentity> identities; // sorted
    std::vector<GroupMember> members;        // sorted by repo
    GroupClass cls = GroupClass::incomparable;

    /// Componentwise maximum over member combinations.
    Combination join;
    /// join, when some member already sits at it; recommendation target.
    std::optional<Combination> unique_max;
    int repos_with_differences = 0;
    int max_version_difference = 0;

    std::string key() const; // "owner/repo+owner/repo", sorted
};

struct GroupingResult {
    std::vector<PackageGroup> groups; // sorted by key
    Diagnostics diagnostics;
};

/// Finds package sets shared between repositories classed with_update or
/// no_update and classifies each group. A repo joins a group when any
/// snapshot of one of its Dockerfiles pinned exactly that identity set,
/// each identity at a single tag; the member combination comes from the
/// newest such snapshot.
GroupingResult build_groups(const std::vector<RepoTimelines>& repos,
                            const std::map<std::string, RepoClass>& repo_classes,
                            const RegistrySnapshot& registry);

std::string_view to_string(GroupClass c);
std::string_view to_string(CombinationOrder o);

} // namespace dockmeta
