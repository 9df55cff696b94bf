#include "dockmeta/recommend.hpp"

#include <algorithm>
#include <fstream>

#include "dockmeta/extract.hpp"

namespace dockmeta {

using nlohmann::ordered_json;

AdvisorySet AdvisorySet::from_json(const ordered_json& doc) {
    if (!doc.is_object())
        throw std::runtime_error("advisory document must be a JSON object");
    AdvisorySet set;
    for (const auto& [key, tags] : doc.items()) {
        auto id = PackageIdentity::parse(key);
        if (!id)
            throw std::runtime_error("advisory key '" + key +
                                     "' is not of the form owner/repo");
        if (!tags.is_array())
            throw std::runtime_error("advisory entry for '" + key +
                                     "' must be an array of tags");
        for (const auto& tag : tags) {
            if (!tag.is_string())
                throw std::runtime_error("non-string tag in advisory entry '" +
                                         key + "'");
            set.flag(*id, tag.get<std::string>());
        }
    }
    return set;
}

AdvisorySet AdvisorySet::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open advisory file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
    }
    return from_json(doc);
}

void AdvisorySet::flag(const PackageIdentity& id, const std::string& tag) {
    flagged_[id].insert(tag);
}

bool AdvisorySet::contains(const PackageIdentity& id,
                           const std::string& tag) const {
    auto it = flagged_.find(id);
    return it != flagged_.end() && it->second.count(tag) > 0;
}

namespace {

std::vector<std::string> split_lines_keep(const std::string& text,
                                          bool& ends_with_newline) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(pos));
            ends_with_newline = false;
            return lines;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    ends_with_newline = true;
    return lines;
}

std::string replace_all(std::string text, const std::string& from,
                        const std::string& to) {
    if (from.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

/// Tag with any non-numeric prefix removed: v1.2 becomes 1.2. Empty when
/// the tag has no digits.
std::string numeric_core(const std::string& tag) {
    auto pos = tag.find_first_of("0123456789");
    return pos == std::string::npos ? std::string() : tag.substr(pos);
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
        out += names[i];
    }
    return out;
}

struct UrlEntry {
    std::string url;
    SourceSpan span;
    std::vector<std::string> var_names;
    std::optional<PackageRef> ref;
};

std::vector<UrlEntry> collect_entries(const DockerfileAst& ast,
                                      const VarEnv& env,
                                      bool keep_unresolved) {
    std::vector<UrlEntry> entries;
    for (const auto& url : extract_urls(ast, env).urls) {
        if (!url.fully_resolved && !keep_unresolved) continue;
        UrlEntry entry;
        entry.url = url.url;
        entry.span = url.span;
        entry.var_names = url.var_names;
        entry.ref = match_github_url(url.url);
        entries.push_back(std::move(entry));
    }
    return entries;
}

const Instruction* find_instruction(const DockerfileAst& ast,
                                    const SourceSpan& span) {
    for (const auto& inst : ast.instructions)
        if (inst.span == span) return &inst;
    for (const auto& inst : ast.instructions)
        if (inst.span.start_line <= span.start_line &&
            span.start_line <= inst.span.end_line)
            return &inst;
    return nullptr;
}

std::string apply_edits(const std::string& text,
                        std::vector<PlannedEdit> edits) {
    // Byte offset of each line start, 1-based line numbers.
    std::vector<std::size_t> starts = {0, 0};
    for (std::size_t i = 0; i < text.size(); ++i)
        if (text[i] == '\n') starts.push_back(i + 1);
    auto line_begin = [&](int line) {
        return static_cast<std::size_t>(line) < starts.size()
                   ? starts[static_cast<std::size_t>(line)]
                   : text.size();
    };
    auto line_end = [&](int line) {
        return static_cast<std::size_t>(line) + 1 < starts.size()
                   ? starts[static_cast<std::size_t>(line) + 1]
                   : text.size();
    };

    // Bottom-up so earlier offsets stay valid.
    std::sort(edits.begin(), edits.end(),
              [](const PlannedEdit& a, const PlannedEdit& b) {
                  return a.site.start_line > b.site.start_line;
              });
    std::string out = text;
    for (const auto& edit : edits) {
        std::size_t begin = line_begin(edit.site.start_line);
        std::size_t end = line_end(edit.site.end_line);
        if (begin >= end) continue;
        std::string chunk = out.substr(begin, end - begin);
        for (const auto& [from, to] : edit.replacements)
            chunk = replace_all(chunk, from, to);
        out = out.substr(0, begin) + chunk + out.substr(end);
    }
    return out;
}

/// Validated (identity, tag) pins of a text, used to confirm a rewrite.
std::set<std::pair<std::string, std::string>> validated_pins(
    const std::string& text, const std::string& path,
    const RegistrySnapshot& registry, const RecommendOptions& opts) {
    std::set<std::pair<std::string, std::string>> pins;
    DockerfileAst ast = parse_dockerfile(sanitize_utf8(text), path, opts.parse);
    if (!ast.valid) return pins;
    VarEnv env = build_env(ast);
    for (const auto& entry : collect_entries(ast, env, opts.keep_unresolved)) {
        if (!entry.ref) continue;
        if (validate(*entry.ref, registry) == ValidationStatus::valid)
            pins.emplace(entry.ref->identity.full(), entry.ref->tag);
    }
    return pins;
}

std::string compose_message(const std::vector<PackageBump>& bumps,
                            const std::vector<std::string>& evidence,
                            const std::vector<std::string>& cautions) {
    std::vector<std::string> phrases;
    for (const auto& bump : bumps)
        phrases.push_back(bump.identity.full() + " from " + bump.from_tag +
                          " to " + bump.to_tag);
    std::string msg = "In this pull request, I am updating " +
                      join_names(phrases) + ".\n";
    if (!evidence.empty()) {
        msg += "Since these updates are being done in " + join_names(evidence) +
               ", I'm wondering if this project can update the packages as "
               "well.\n";
    }
    for (const auto& caution : cautions) msg += "\n" + caution + "\n";
    return msg;
}

Recommendation plan_member(const PackageGroup& group, const GroupMember& member,
                           const Combination& target,
                           const std::vector<std::string>& evidence,
                           const RepoTimelines* repo,
                           const RegistrySnapshot& registry,
                           const RecommendOptions& opts) {
    Recommendation rec;
    rec.repo = member.repo;
    rec.dockerfile = member.dockerfile;
    rec.group_key = group.key();
    for (const auto& [id, to_tag] : target) {
        const std::string& from_tag = member.combo.at(id);
        if (from_tag != to_tag)
            rec.bumps.push_back({id, from_tag, to_tag, {}});
    }
    rec.evidence_repos = evidence;

    auto fail = [&](RecommendationStatus status, const std::string& why) {
        rec.status = status;
        rec.diagnostics.push_back({SourceSpan{member.dockerfile, 0, 0},
                                   Severity::warning, why});
        rec.message = compose_message(rec.bumps, rec.evidence_repos, {});
        return rec;
    };

    const DockerfileTimeline* timeline = nullptr;
    if (repo) {
        for (const auto& t : repo->timelines)
            if (t.path == member.dockerfile) timeline = &t;
    }
    if (!timeline || timeline->snapshots.empty())
        return fail(RecommendationStatus::unlocatable_tag,
                    "Dockerfile history not found");
    if (member.drifted || !timeline->present_at_head)
        return fail(RecommendationStatus::ambiguous_edit,
                    "package set changed since the grouped snapshot");

    const std::string& text = timeline->snapshots.back().text;
    DockerfileAst ast = parse_dockerfile(sanitize_utf8(text), member.dockerfile,
                                         opts.parse);
    if (!ast.valid)
        return fail(RecommendationStatus::unlocatable_tag,
                    "Dockerfile no longer parses at head");
    VarEnv env = build_env(ast);
    auto entries = collect_entries(ast, env, opts.keep_unresolved);

    std::map<std::pair<int, int>, PlannedEdit> edits;
    auto add_edit = [&](const SourceSpan& site,
                        std::pair<std::string, std::string> replacement,
                        const std::string& reason) {
        auto key = std::make_pair(site.start_line, site.end_line);
        auto [it, inserted] = edits.try_emplace(key);
        if (inserted) {
            it->second.site = site;
            it->second.reason = reason;
        }
        auto& reps = it->second.replacements;
        if (std::find(reps.begin(), reps.end(), replacement) == reps.end())
            reps.push_back(std::move(replacement));
    };

    for (auto& bump : rec.bumps) {
        std::vector<const UrlEntry*> pins;
        for (const auto& entry : entries)
            if (entry.ref && entry.ref->identity == bump.identity &&
                entry.ref->tag == bump.from_tag)
                pins.push_back(&entry);
        if (pins.empty())
            return fail(RecommendationStatus::unlocatable_tag,
                        "no pinned URL for " + bump.identity.full() + "@" +
                            bump.from_tag + " at head");

        std::string core_from = numeric_core(bump.from_tag);
        std::string core_to = numeric_core(bump.to_tag);
        auto note_site = [&](const SourceSpan& site) {
            if (std::find(bump.edit_sites.begin(), bump.edit_sites.end(),
                          site) == bump.edit_sites.end())
                bump.edit_sites.push_back(site);
        };

        for (const UrlEntry* pin : pins) {
            const Instruction* inst = find_instruction(ast, pin->span);
            if (!inst)
                return fail(RecommendationStatus::unlocatable_tag,
                            "instruction for " + pin->url + " not found");

            if (inst->raw_text.find(bump.from_tag) != std::string::npos) {
                if (pin->ref->asset_file) {
                    // Asset names may embed the tag without its prefix;
                    // rewrite the whole file name first.
                    const std::string& old_asset = *pin->ref->asset_file;
                    std::string new_asset =
                        replace_all(old_asset, bump.from_tag, bump.to_tag);
                    if (new_asset == old_asset && !core_from.empty() &&
                        core_from != bump.from_tag && !core_to.empty())
                        new_asset = replace_all(old_asset, core_from, core_to);
                    if (new_asset != old_asset)
                        add_edit(inst->span, {old_asset, new_asset},
                                 "release asset name");
                }
                add_edit(inst->span, {bump.from_tag, bump.to_tag},
                         "version pin");
                note_site(inst->span);
                continue;
            }

            bool located = false;
            for (const auto& name : pin->var_names) {
                const VarEnv::Binding* binding = env.find(name);
                if (!binding) continue;
                std::string bind_from, bind_to;
                if (binding->value == bump.from_tag) {
                    bind_from = bump.from_tag;
                    bind_to = bump.to_tag;
                } else if (!core_from.empty() && binding->value == core_from &&
                           core_from != bump.from_tag && !core_to.empty()) {
                    bind_from = core_from;
                    bind_to = core_to;
                } else {
                    continue;
                }

                for (const auto& other : entries) {
                    if (std::find(other.var_names.begin(),
                                  other.var_names.end(),
                                  name) == other.var_names.end())
                        continue;
                    bool same_bump = other.ref &&
                                     other.ref->identity == bump.identity &&
                                     other.ref->tag == bump.from_tag;
                    if (!same_bump)
                        return fail(RecommendationStatus::ambiguous_edit,
                                    "variable " + name +
                                        " also feeds an unrelated URL: " +
                                        other.url);
                }

                add_edit(binding->span, {bind_from, bind_to},
                         "variable " + name);
                note_site(binding->span);
                located = true;
                break;
            }
            if (!located)
                return fail(RecommendationStatus::unlocatable_tag,
                            "cannot locate " + bump.from_tag +
                                " for URL: " + pin->url);
        }
    }

    for (const auto& [key, edit] : edits) rec.edits.push_back(edit);
    rec.rewritten_text = apply_edits(text, rec.edits);
    rec.patch = make_unified_diff(member.dockerfile, text, rec.rewritten_text);
    if (rec.patch.empty())
        return fail(RecommendationStatus::unverifiable,
                    "planned edits produced no change");

    // The rewritten file must pin exactly the target combination.
    auto pins_after =
        validated_pins(rec.rewritten_text, member.dockerfile, registry, opts);
    std::set<std::pair<std::string, std::string>> expected;
    for (const auto& [id, tag] : target) expected.emplace(id.full(), tag);
    if (pins_after != expected) {
        rec.status = RecommendationStatus::unverifiable;
        rec.diagnostics.push_back(
            {SourceSpan{member.dockerfile, 0, 0}, Severity::warning,
             "re-extraction of the rewritten file does not yield the target "
             "combination"});
    }

    if (rec.status == RecommendationStatus::ready) {
        for (const auto& bump : rec.bumps) {
            if (opts.advisories.contains(bump.identity, bump.to_tag)) {
                rec.status = RecommendationStatus::held;
                rec.cautions.push_back(
                    "Caution: " + bump.identity.full() + " " + bump.to_tag +
                    " is flagged by an advisory; please review before "
                    "updating.");
            }
        }
    }

    rec.message = compose_message(rec.bumps, rec.evidence_repos, rec.cautions);
    return rec;
}

} // namespace

std::string make_unified_diff(const std::string& path,
                              const std::string& old_text,
                              const std::string& new_text) {
    if (old_text == new_text) return "";
    bool old_nl = true, new_nl = true;
    std::vector<std::string> a = split_lines_keep(old_text, old_nl);
    std::vector<std::string> b = split_lines_keep(new_text, new_nl);

    std::string out = "--- a/" + path + "\n+++ b/" + path + "\n";
    constexpr int context = 3;

    auto emit_line = [&](char prefix, const std::vector<std::string>& lines,
                         std::size_t idx, bool ends_nl) {
        out += prefix;
        out += lines[idx];
        out += '\n';
        if (idx + 1 == lines.size() && !ends_nl)
            out += "\\ No newline at end of file\n";
    };

    if (a.size() != b.size()) {
        // Replacement edits keep line counts equal; anything else falls back
        // to one whole-file hunk.
        out += "@@ -1," + std::to_string(a.size()) + " +1," +
               std::to_string(b.size()) + " @@\n";
        for (std::size_t i = 0; i < a.size(); ++i) emit_line('-', a, i, old_nl);
        for (std::size_t i = 0; i < b.size(); ++i) emit_line('+', b, i, new_nl);
        return out;
    }

    std::vector<bool> changed(a.size(), false);
    for (std::size_t i = 0; i < a.size(); ++i) changed[i] = a[i] != b[i];

    std::size_t i = 0;
    while (i < a.size()) {
        if (!changed[i]) {
            ++i;
            continue;
        }
        // Hunk: changes separated by at most 2*context equal lines merge.
        std::size_t first = i, last = i;
        std::size_t j = i + 1;
        std::size_t gap = 0;
        while (j < a.size() && gap <= 2 * static_cast<std::size_t>(context)) {
            if (changed[j]) {
                last = j;
                gap = 0;
            } else {
                ++gap;
            }
            ++j;
        }
        std::size_t lo = first >= context ? first - context : 0;
        std::size_t hi = std::min(a.size(), last + 1 + context);
        out += "@@ -" + std::to_string(lo + 1) + "," + std::to_string(hi - lo) +
               " +" + std::to_string(lo + 1) + "," + std::to_string(hi - lo) +
               " @@\n";
        std::size_t k = lo;
        while (k < hi) {
            if (!changed[k]) {
                emit_line(' ', a, k, old_nl);
                ++k;
                continue;
            }
            std::size_t run_end = k;
            while (run_end < hi && changed[run_end]) ++run_end;
            for (std::size_t r = k; r < run_end; ++r) emit_line('-', a, r, old_nl);
            for (std::size_t r = k; r < run_end; ++r) emit_line('+', b, r, new_nl);
            k = run_end;
        }
        i = last + 1;
    }
    return out;
}

std::vector<Recommendation> recommend_for_groups(
    const GroupingResult& grouping, const std::vector<RepoTimelines>& repos,
    const RegistrySnapshot& registry, const RecommendOptions& opts) {
    std::map<std::string, const RepoTimelines*> repo_index;
    for (const auto& repo : repos) repo_index[repo.repo] = &repo;

    std::vector<Recommendation> recs;
    for (const auto& group : grouping.groups) {
        if (group.cls != GroupClass::comparable) continue;
        if (!group.unique_max) continue;
        const Combination& target = *group.unique_max;

        std::vector<std::string> evidence;
        for (const auto& member : group.members)
            if (member.combo == target) evidence.push_back(member.repo);

        for (const auto& member : group.members) {
            if (member.combo == target) continue;
            auto it = repo_index.find(member.repo);
            recs.push_back(plan_member(group, member, target, evidence,
                                       it == repo_index.end() ? nullptr
                                                              : it->second,
                                       registry, opts));
        }
    }
    std::sort(recs.begin(), recs.end(),
              [](const Recommendation& a, const Recommendation& b) {
                  if (a.repo != b.repo) return a.repo < b.repo;
                  if (a.dockerfile != b.dockerfile)
                      return a.dockerfile < b.dockerfile;
                  return a.group_key < b.group_key;
              });
    return recs;
}

std::string_view to_string(RecommendationStatus s) {
    switch (s) {
        case RecommendationStatus::ready: return "ready";
        case RecommendationStatus::held: return "held";
        case RecommendationStatus::unverifiable: return "unverifiable";
        case RecommendationStatus::ambiguous_edit: return "ambiguous_edit";
        case RecommendationStatus::unlocatable_tag: return "unlocatable_tag";
    }
    return "unknown";
}

} // namespace dockmeta
