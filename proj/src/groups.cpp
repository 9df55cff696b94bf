#include "dockmeta/groups.hpp"

#include <algorithm>

namespace dockmeta {

std::optional<CombinationOrder> compare_combinations(
    const Combination& a, const Combination& b,
    const RegistrySnapshot& registry) {
    if (a.size() != b.size()) return std::nullopt;
    bool any_less = false, any_greater = false;
    for (const auto& [id, tag_a] : a) {
        auto it = b.find(id);
        if (it == b.end()) return std::nullopt;
        auto pos_a = registry.tag_position(id, tag_a);
        auto pos_b = registry.tag_position(id, it->second);
        if (!pos_a || !pos_b) return std::nullopt;
        if (*pos_a < *pos_b) any_less = true;
        if (*pos_a > *pos_b) any_greater = true;
    }
    if (any_less && any_greater) return CombinationOrder::incomparable;
    if (any_less) return CombinationOrder::less;
    if (any_greater) return CombinationOrder::greater;
    return CombinationOrder::equal;
}

std::optional<int> tag_distance(const RegistrySnapshot& registry,
                                const PackageIdentity& id,
                                const std::string& from,
                                const std::string& to) {
    auto pos_from = registry.tag_position(id, from);
    auto pos_to = registry.tag_position(id, to);
    if (!pos_from || !pos_to) return std::nullopt;
    return std::abs(*pos_to - *pos_from);
}

std::string PackageGroup::key() const {
    std::string out;
    for (const auto& id : identities) {
        if (!out.empty()) out.push_back('+');
        out += id.full();
    }
    return out;
}

namespace {

struct Candidate {
    std::string repo;
    std::string dockerfile;
    std::string commit;
    std::int64_t timestamp = 0;
    Combination combo;
    bool at_final_state = false; // set still matches at the last snapshot
};

std::set<PackageIdentity> identity_set(const Snapshot& snap) {
    std::set<PackageIdentity> ids;
    for (const auto& [id, tag] : snap.distinct_pins()) ids.insert(id);
    return ids;
}

} // namespace

GroupingResult build_groups(const std::vector<RepoTimelines>& repos,
                            const std::map<std::string, RepoClass>& repo_classes,
                            const RegistrySnapshot& registry) {
    GroupingResult result;

    // set of identities -> repo -> candidate snapshots
    std::map<std::set<PackageIdentity>, std::map<std::string, std::vector<Candidate>>>
        by_set;

    for (const auto& repo : repos) {
        auto cls_it = repo_classes.find(repo.repo);
        if (cls_it == repo_classes.end() || cls_it->second == RepoClass::other)
            continue;
        for (const auto& timeline : repo.timelines) {
            if (timeline.snapshots.empty()) continue;
            std::set<PackageIdentity> final_set =
                identity_set(timeline.snapshots.back());
            for (const auto& snap : timeline.snapshots) {
                auto pins = snap.distinct_pins();
                if (pins.empty()) continue;

                Combination combo;
                bool ambiguous = false;
                for (const auto& [id, tag] : pins) {
                    auto [it, inserted] = combo.emplace(id, tag);
                    if (!inserted && it->second != tag) {
                        ambiguous = true;
                        break;
                    }
                }
                if (ambiguous || combo.size() < 2) continue;

                std::set<PackageIdentity> ids;
                for (const auto& [id, tag] : combo) ids.insert(id);

                Candidate cand;
                cand.repo = repo.repo;
                cand.dockerfile = timeline.path;
                cand.commit = snap.commit;
                cand.timestamp = snap.timestamp;
                cand.combo = std::move(combo);
                cand.at_final_state = (ids == final_set);
                by_set[ids][repo.repo].push_back(std::move(cand));
            }
        }
    }

    for (auto& [ids, per_repo] : by_set) {
        if (per_repo.size() < 2) continue;

        PackageGroup group;
        group.identities.assign(ids.begin(), ids.end());

        for (auto& [repo_name, candidates] : per_repo) {
            // Newest snapshot wins; on a timestamp tie the lexicographically
            // first path keeps selection deterministic.
            const Candidate* best = nullptr;
            for (const auto& cand : candidates) {
                if (!best || cand.timestamp > best->timestamp ||
                    (cand.timestamp == best->timestamp &&
                     cand.dockerfile < best->dockerfile))
                    best = &cand;
            }
            GroupMember member;
            member.repo = best->repo;
            member.dockerfile = best->dockerfile;
            member.commit = best->commit;
            member.combo = best->combo;
            member.drifted = !best->at_final_state;
            group.members.push_back(std::move(member));
        }
        std::sort(group.members.begin(), group.members.end(),
                  [](const GroupMember& a, const GroupMember& b) {
                      return a.repo < b.repo;
                  });

        bool all_no_update = true;
        for (const auto& member : group.members) {
            auto it = repo_classes.find(member.repo);
            if (it == repo_classes.end() || it->second != RepoClass::no_update)
                all_no_update = false;
        }

        bool any_incomparable = false;
        bool all_equal = true;
        for (std::size_t i = 0; i < group.members.size(); ++i) {
            for (std::size_t j = i + 1; j < group.members.size(); ++j) {
                auto order = compare_combinations(group.members[i].combo,
                                                  group.members[j].combo,
                                                  registry);
                if (!order) {
                    result.diagnostics.push_back(
                        {SourceSpan{}, Severity::warning,
                         "combination comparison failed in group " +
                             group.key()});
                    any_incomparable = true;
                    all_equal = false;
                    continue;
                }
                if (*order == CombinationOrder::incomparable)
                    any_incomparable = true;
                if (*order != CombinationOrder::equal) all_equal = false;
            }
        }
        if (all_no_update)
            group.cls = GroupClass::no_update;
        else if (all_equal)
            group.cls = GroupClass::equivalent;
        else if (any_incomparable)
            group.cls = GroupClass::incomparable;
        else
            group.cls = GroupClass::comparable;

        for (const auto& id : group.identities) {
            int max_pos = -1, min_pos = -1;
            std::string max_tag;
            for (const auto& member : group.members) {
                auto pos = registry.tag_position(id, member.combo.at(id));
                if (!pos) continue;
                if (max_pos < 0 || *pos > max_pos) {
                    max_pos = *pos;
                    max_tag = member.combo.at(id);
                }
                if (min_pos < 0 || *pos < min_pos) min_pos = *pos;
            }
            if (max_pos >= 0) {
                group.join[id] = max_tag;
                group.max_version_difference =
                    std::max(group.max_version_difference, max_pos - min_pos);
            }
        }
        for (const auto& member : group.members)
            if (member.combo != group.join) ++group.repos_with_differences;
        for (const auto& member : group.members) {
            if (member.combo == group.join) {
                group.unique_max = group.join;
                break;
            }
        }

        result.groups.push_back(std::move(group));
    }

    std::sort(result.groups.begin(), result.groups.end(),
              [](const PackageGroup& a, const PackageGroup& b) {
                  return a.key() < b.key();
              });
    return result;
}

std::string_view to_string(GroupClass c) {
    switch (c) {
        case GroupClass::no_update: return "no_update";
        case GroupClass::equivalent: return "equivalent";
        case GroupClass::incomparable: return "incomparable";
        case GroupClass::comparable: return "comparable";
    }
    return "unknown";
}

std::string_view to_string(CombinationOrder o) {
    switch (o) {
        case CombinationOrder::less: return "less";
        case CombinationOrder::equal: return "equal";
        case CombinationOrder::greater: return "greater";
        case CombinationOrder::incomparable: return "incomparable";
    }
    return "unknown";
}

} // namespace dockmeta
