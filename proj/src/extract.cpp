#include "dockmeta/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include <json.hpp>

namespace dockmeta {

namespace {

bool valid_var_name(std::string_view name) {
    if (name.empty())
        return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_')
        return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

void bind(VarEnv& env, std::string name, std::string value, VarEnv::Binding::Origin origin,
          const SourceSpan& span) {
    env.entries.emplace_back(std::move(name),
                             VarEnv::Binding{std::move(value), origin, span});
}

// Legacy `ENV NAME value...`: value is the raw remainder after the first
// whitespace run, quotes kept verbatim.
void parse_env_legacy(VarEnv& env, const Instruction& inst) {
    std::string_view args = inst.raw_args;
    size_t name_end = args.find_first_of(" \t");
    std::string name(args.substr(0, name_end));
    if (!valid_var_name(name)) {
        env.diagnostics.push_back(
            {inst.span, Severity::warning, "malformed ENV name: " + name});
        return;
    }
    if (name_end == std::string_view::npos) {
        env.diagnostics.push_back(
            {inst.span, Severity::warning, "ENV without a value: " + name});
        return;
    }
    size_t value_start = args.find_first_not_of(" \t", name_end);
    std::string_view value_text =
        value_start == std::string_view::npos ? std::string_view{} : args.substr(value_start);
    auto parts = scan_variable_segments(value_text);
    std::string value =
        resolve_segments(parts, env, UnboundPolicy::empty_string, nullptr,
                         &env.diagnostics, inst.span);
    bind(env, std::move(name), std::move(value), VarEnv::Binding::Origin::env, inst.span);
}

void parse_pairs(VarEnv& env, const Instruction& inst, VarEnv::Binding::Origin origin,
                 bool require_value) {
    for (const auto& word : split_words_simple(inst.raw_args)) {
        bool has_eq = !word.parts.empty() &&
                      word.parts.front().kind == WordPart::Kind::literal &&
                      word.parts.front().text.find('=') != std::string::npos;
        if (!has_eq) {
            // ARG NAME without default declares but binds nothing.
            if (require_value) {
                env.diagnostics.push_back({inst.span, Severity::warning,
                                           "malformed " + inst.keyword +
                                               " pair: " + word.raw});
            } else if (!valid_var_name(word.literal_text())) {
                env.diagnostics.push_back({inst.span, Severity::warning,
                                           "malformed ARG name: " + word.raw});
            }
            continue;
        }
        const std::string& first = word.parts.front().text;
        size_t split = first.find('=');
        std::string name = first.substr(0, split);
        if (!valid_var_name(name)) {
            env.diagnostics.push_back(
                {inst.span, Severity::warning, "malformed variable name: " + name});
            continue;
        }
        std::vector<WordPart> value_parts;
        value_parts.push_back(
            {WordPart::Kind::literal, first.substr(split + 1), false, std::nullopt});
        value_parts.insert(value_parts.end(), word.parts.begin() + 1, word.parts.end());
        std::string value = resolve_segments(value_parts, env, UnboundPolicy::empty_string,
                                             nullptr, &env.diagnostics, inst.span);
        bind(env, std::move(name), std::move(value), origin, inst.span);
    }
}

bool consumes_next_token(ExtractedUrl::SourceKind kind, std::string_view flag) {
    static const std::array<std::string_view, 6> wget_flags = {"-O", "-o", "-P",
                                                               "--header",
                                                               "--user-agent", "-U"};
    static const std::array<std::string_view, 9> curl_flags = {
        "-o", "-H", "-d", "--data", "-u", "-A", "-X", "--output", "--header"};
    if (kind == ExtractedUrl::SourceKind::wget)
        return std::find(wget_flags.begin(), wget_flags.end(), flag) != wget_flags.end();
    if (kind == ExtractedUrl::SourceKind::curl)
        return std::find(curl_flags.begin(), curl_flags.end(), flag) != curl_flags.end();
    return false;
}

bool contains_whitespace(std::string_view s) {
    return s.find_first_of(" \t\n\r") != std::string_view::npos;
}

void check_candidate(ExtractionResult& out, const VarEnv& env, const ShellWord& word,
                     ExtractedUrl::SourceKind kind, const SourceSpan& span) {
    bool fully = true;
    std::vector<std::string> used;
    std::string url = resolve_word(word, env, UnboundPolicy::sentinel, &fully,
                                   &out.diagnostics, span, &used);
    if (!url.starts_with("http"))
        return;
    if (contains_whitespace(url)) {
        out.diagnostics.push_back(
            {span, Severity::warning, "substituted URL contains whitespace, skipped"});
        return;
    }
    out.urls.push_back({std::move(url), kind, span, fully, std::move(used)});
}

void extract_from_add(ExtractionResult& out, const VarEnv& env, const Instruction& inst) {
    std::string_view args = inst.raw_args;
    size_t first = args.find_first_not_of(" \t");
    if (first != std::string_view::npos && args[first] == '[') {
        // JSON array form: ADD ["src", "dst"]
        auto parsed = nlohmann::json::parse(args.substr(first), nullptr, false);
        if (parsed.is_array() && !parsed.empty() && parsed.front().is_string()) {
            ShellWord word;
            word.parts = scan_variable_segments(parsed.front().get<std::string>());
            word.raw = parsed.front().get<std::string>();
            check_candidate(out, env, word, ExtractedUrl::SourceKind::add, inst.span);
            return;
        }
        out.diagnostics.push_back(
            {inst.span, Severity::warning, "unparsable ADD JSON form"});
        return;
    }
    for (const auto& word : split_words_simple(args)) {
        if (word.raw.starts_with("--"))
            continue; // ADD flags such as --chown
        check_candidate(out, env, word, ExtractedUrl::SourceKind::add, inst.span);
        return; // only the first source is checked
    }
}

void extract_from_run(ExtractionResult& out, const VarEnv& env, const Instruction& inst) {
    ShellList list = parse_shell(inst.raw_args);
    for (const auto& cmd : list.commands) {
        size_t start = 0;
        if (!cmd.argv.empty() && !cmd.argv[0].has_var_ref() &&
            cmd.argv[0].literal_text() == "sudo")
            start = 1;
        if (start >= cmd.argv.size())
            continue;
        std::string name = resolve_word(cmd.argv[start], env, UnboundPolicy::empty_string);
        ExtractedUrl::SourceKind kind;
        if (name == "curl")
            kind = ExtractedUrl::SourceKind::curl;
        else if (name == "wget")
            kind = ExtractedUrl::SourceKind::wget;
        else
            continue;
        for (size_t i = start + 1; i < cmd.argv.size(); ++i) {
            bool fully = true;
            std::string token = resolve_word(cmd.argv[i], env, UnboundPolicy::sentinel,
                                             &fully, nullptr, inst.span);
            if (token.empty())
                continue;
            if (token[0] == '-') {
                if (consumes_next_token(kind, token))
                    ++i; // this flag's value is never a URL
                continue;
            }
            check_candidate(out, env, cmd.argv[i], kind, inst.span);
        }
    }
}

} // namespace

const VarEnv::Binding* VarEnv::find(std::string_view name) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
        if (it->first == name)
            return &it->second;
    return nullptr;
}

std::string resolve_segments(const std::vector<WordPart>& parts, const VarEnv& env,
                             UnboundPolicy policy, bool* fully_resolved,
                             Diagnostics* diags, const SourceSpan& at,
                             std::vector<std::string>* used_names) {
    std::string out;
    for (const auto& part : parts) {
        if (part.kind == WordPart::Kind::literal) {
            out += part.text;
            continue;
        }
        if (used_names &&
            std::find(used_names->begin(), used_names->end(), part.text) ==
                used_names->end())
            used_names->push_back(part.text);
        if (const auto* binding = env.find(part.text)) {
            out += binding->value;
            continue;
        }
        if (part.default_value) {
            out += *part.default_value;
            continue;
        }
        if (fully_resolved)
            *fully_resolved = false;
        if (diags)
            diags->push_back(
                {at, Severity::warning, "unbound variable: " + part.text});
        if (policy == UnboundPolicy::sentinel) {
            out += unresolved_sentinel_prefix;
            out += part.text;
            out += '}';
        }
    }
    return out;
}

std::string resolve_word(const ShellWord& word, const VarEnv& env, UnboundPolicy policy,
                         bool* fully_resolved, Diagnostics* diags, const SourceSpan& at,
                         std::vector<std::string>* used_names) {
    return resolve_segments(word.parts, env, policy, fully_resolved, diags, at,
                            used_names);
}

VarEnv build_env(const DockerfileAst& ast) {
    VarEnv env;
    for (const auto& inst : ast.instructions) {
        if (inst.keyword == "ARG") {
            parse_pairs(env, inst, VarEnv::Binding::Origin::arg_default, false);
        } else if (inst.keyword == "ENV") {
            std::string_view args = inst.raw_args;
            size_t name_end = args.find_first_of(" \t");
            std::string_view head = args.substr(0, name_end);
            if (head.find('=') != std::string_view::npos)
                parse_pairs(env, inst, VarEnv::Binding::Origin::env, true);
            else
                parse_env_legacy(env, inst);
        } else if (inst.keyword == "RUN" && !inst.has_heredoc) {
            for (const auto& a : collect_assignments(parse_shell(inst.raw_args))) {
                std::string value =
                    resolve_word(a.value, env, UnboundPolicy::empty_string, nullptr,
                                 &env.diagnostics, inst.span);
                bind(env, a.name, std::move(value),
                     VarEnv::Binding::Origin::shell_assignment, inst.span);
            }
        }
    }
    return env;
}

ExtractionResult extract_urls(const DockerfileAst& ast, const VarEnv& env) {
    ExtractionResult out;
    for (const auto& inst : ast.instructions) {
        if (inst.keyword == "ADD")
            extract_from_add(out, env, inst);
        else if (inst.keyword == "RUN" && !inst.has_heredoc)
            extract_from_run(out, env, inst);
    }
    return out;
}

std::string_view to_string(ExtractedUrl::SourceKind k) {
    switch (k) {
    case ExtractedUrl::SourceKind::add: return "ADD";
    case ExtractedUrl::SourceKind::curl: return "curl";
    case ExtractedUrl::SourceKind::wget: return "wget";
    }
    return "?";
}

std::optional<std::string> url_host(std::string_view url) {
    size_t scheme = url.find("://");
    if (scheme == std::string_view::npos)
        return std::nullopt;
    size_t start = scheme + 3;
    size_t end = url.find_first_of("/?#", start);
    std::string_view authority =
        url.substr(start, end == std::string_view::npos ? url.size() - start : end - start);
    size_t at = authority.find_last_of('@');
    if (at != std::string_view::npos)
        authority = authority.substr(at + 1);
    size_t colon = authority.find(':');
    if (colon != std::string_view::npos)
        authority = authority.substr(0, colon);
    if (authority.empty())
        return std::nullopt;
    std::string host(authority);
    std::transform(host.begin(), host.end(), host.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return host;
}

std::map<std::string, int> domain_histogram(
    const std::vector<std::pair<std::string, std::string>>& repo_urls,
    Diagnostics* diags) {
    std::map<std::string, int> counts;
    std::set<std::pair<std::string, std::string>> seen; // (domain, repo)
    for (const auto& [repo, url] : repo_urls) {
        auto host = url_host(url);
        if (!host) {
            if (diags)
                diags->push_back(
                    {{}, Severity::warning, "URL without a parsable host: " + url});
            continue;
        }
        if (seen.emplace(*host, repo).second)
            ++counts[*host];
    }
    return counts;
}

} // namespace dockmeta
