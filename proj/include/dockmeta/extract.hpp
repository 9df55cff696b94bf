#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dockmeta/dockerfile.hpp"
#include "dockmeta/shell.hpp"
#include "dockmeta/span.hpp"

namespace dockmeta {

/// Flat variable environment collected from ARG defaults, ENV lines and
/// shell assignments inside RUN, in instruction order.
struct VarEnv {
    struct Binding {
        enum class Origin { arg_default, env, shell_assignment };
        std::string value;
        Origin origin = Origin::env;
        SourceSpan span;
    };

    std::vector<std::pair<std::string, Binding>> entries;
    Diagnostics diagnostics;

    /// Latest binding for name, or nullptr when unbound.
    const Binding* find(std::string_view name) const;
};

inline constexpr std::string_view unresolved_sentinel_prefix = "${UNRESOLVED:";

enum class UnboundPolicy { empty_string, sentinel };

/// Expands a word's segments against env. Unbound names follow policy:
/// empty_string for environment construction, sentinel for URL assembly.
/// fully_resolved (when given) is cleared if any name stayed unbound.
/// used_names collects every referenced variable name, bound or not.
std::string resolve_word(const ShellWord& word, const VarEnv& env, UnboundPolicy policy,
                         bool* fully_resolved = nullptr, Diagnostics* diags = nullptr,
                         const SourceSpan& at = {},
                         std::vector<std::string>* used_names = nullptr);

std::string resolve_segments(const std::vector<WordPart>& parts, const VarEnv& env,
                             UnboundPolicy policy, bool* fully_resolved = nullptr,
                             Diagnostics* diags = nullptr, const SourceSpan& at = {},
                             std::vector<std::string>* used_names = nullptr);

VarEnv build_env(const DockerfileAst& ast);

struct ExtractedUrl {
    enum class SourceKind { add, curl, wget };
    std::string url;
    SourceKind kind = SourceKind::add;
    SourceSpan span;
    bool fully_resolved = true;
    std::vector<std::string> var_names; // variables the URL depends on
};

struct ExtractionResult {
    std::vector<ExtractedUrl> urls;
    Diagnostics diagnostics;
};

/// Harvests http(s) URLs from ADD sources and curl/wget arguments with
/// variables substituted.
ExtractionResult extract_urls(const DockerfileAst& ast, const VarEnv& env);

std::string_view to_string(ExtractedUrl::SourceKind k);

/// Host part of a URL, lowercased, without userinfo or port. nullopt when
/// the URL has no parsable host.
std::optional<std::string> url_host(std::string_view url);

/// Repositories per domain. Input pairs are (repository id, url); a
/// repository counts at most once per domain.
std::map<std::string, int> domain_histogram(
    const std::vector<std::pair<std::string, std::string>>& repo_urls,
    Diagnostics* diags = nullptr);

} // namespace dockmeta
