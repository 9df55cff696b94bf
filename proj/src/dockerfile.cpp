#include "dockmeta/dockerfile.hpp"

#include <algorithm>
#include <cctype>

namespace dockmeta {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view strip_terminator(std::string_view line) {
    if (!line.empty() && line.back() == '\n')
        line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

bool is_blank(std::string_view content) {
    return std::all_of(content.begin(), content.end(), is_space);
}

bool is_comment(std::string_view content) {
    size_t i = 0;
    while (i < content.size() && is_space(content[i]))
        ++i;
    return i < content.size() && content[i] == '#';
}

// Odd number of trailing backslashes means the line continues.
bool has_continuation(std::string_view content) {
    size_t n = 0;
    for (auto it = content.rbegin(); it != content.rend() && *it == '\\'; ++it)
        ++n;
    return n % 2 == 1;
}

bool is_keyword_char(char c, bool first) {
    if (first)
        return std::isalpha(static_cast<unsigned char>(c)) != 0;
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Finds "<<WORD" / "<<-'WORD'" heredoc markers at word starts and returns the
// delimiters in order of appearance.
std::vector<std::string> heredoc_delimiters(std::string_view args) {
    std::vector<std::string> out;
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != '<' || args[i + 1] != '<')
            continue;
        if (i > 0 && !is_space(args[i - 1]))
            continue;
        size_t j = i + 2;
        if (j < args.size() && args[j] == '-')
            ++j;
        char quote = 0;
        if (j < args.size() && (args[j] == '\'' || args[j] == '"'))
            quote = args[j++];
        size_t start = j;
        while (j < args.size() &&
               (std::isalnum(static_cast<unsigned char>(args[j])) || args[j] == '_'))
            ++j;
        if (j == start)
            continue;
        if (std::isdigit(static_cast<unsigned char>(args[start])))
            continue;
        if (quote && (j >= args.size() || args[j] != quote))
            continue;
        out.emplace_back(args.substr(start, j - start));
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_physical_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos + 1));
        pos = nl + 1;
    }
    return lines;
}

} // namespace

std::string sanitize_utf8(std::string_view bytes) {
    static constexpr std::string_view replacement = "\xef\xbf\xbd";
    std::string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        size_t len;
        if (c < 0x80)
            len = 1;
        else if ((c & 0xe0) == 0xc0 && c >= 0xc2)
            len = 2;
        else if ((c & 0xf0) == 0xe0)
            len = 3;
        else if ((c & 0xf8) == 0xf0 && c <= 0xf4)
            len = 4;
        else {
            out += replacement;
            ++i;
            continue;
        }
        if (i + len > bytes.size()) {
            out += replacement;
            ++i;
            continue;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xc0) != 0x80) {
                ok = false;
                break;
            }
        }
        // Reject overlong encodings and surrogates.
        if (ok && len == 3) {
            unsigned char c1 = static_cast<unsigned char>(bytes[i + 1]);
            if ((c == 0xe0 && c1 < 0xa0) || (c == 0xed && c1 > 0x9f))
                ok = false;
        }
        if (ok && len == 4) {
            unsigned char c1 = static_cast<unsigned char>(bytes[i + 1]);
            if ((c == 0xf0 && c1 < 0x90) || (c == 0xf4 && c1 > 0x8f))
                ok = false;
        }
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out += replacement;
            ++i;
        }
    }
    return out;
}

bool is_dockerfile_name(std::string_view filename) {
    size_t slash = filename.find_last_of('/');
    std::string_view base =
        slash == std::string_view::npos ? filename : filename.substr(slash + 1);
    return base.find("dockerfile") != std::string_view::npos ||
           base.find("Dockerfile") != std::string_view::npos;
}

DockerfileAst parse_dockerfile(std::string_view raw, const std::string& path,
                               const ParseOptions& options) {
    DockerfileAst ast;
    std::string text = sanitize_utf8(raw);
    if (text != raw) {
        ast.parse_diagnostics.push_back(
            {{path, 1, 1}, Severity::warning, "invalid UTF-8 bytes replaced"});
    }

    auto lines = split_physical_lines(text);
    size_t i = 0;
    while (i < lines.size()) {
        int line_no = static_cast<int>(i) + 1;
        std::string_view content = strip_terminator(lines[i]);

        if (is_blank(content)) {
            ast.dropped.push_back(
                {DroppedLine::Kind::blank, line_no, std::string(lines[i])});
            ++i;
            continue;
        }
        if (is_comment(content)) {
            ast.dropped.push_back(
                {DroppedLine::Kind::comment, line_no, std::string(lines[i])});
            ++i;
            continue;
        }

        size_t k = 0;
        while (k < content.size() && is_space(content[k]))
            ++k;
        size_t kw_start = k;
        while (k < content.size() && is_keyword_char(content[k], k == kw_start))
            ++k;
        bool keyword_ok = k > kw_start && (k == content.size() || is_space(content[k]));
        if (!keyword_ok) {
            ast.dropped.push_back(
                {DroppedLine::Kind::invalid, line_no, std::string(lines[i])});
            ast.parse_diagnostics.push_back({{path, line_no, line_no},
                                             Severity::error,
                                             "line is not a Dockerfile instruction"});
            ++i;
            continue;
        }

        Instruction inst;
        inst.keyword.assign(content.substr(kw_start, k - kw_start));
        std::transform(inst.keyword.begin(), inst.keyword.end(), inst.keyword.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        inst.span = {path, line_no, line_no};
        inst.raw_text.assign(lines[i]);

        while (k < content.size() && is_space(content[k]) && content[k] != '\r')
            ++k;
        std::string logical(content.substr(k));

        bool open = has_continuation(content);
        if (open)
            logical.pop_back(); // the continuation backslash
        ++i;
        while (open && i < lines.size()) {
            int cont_no = static_cast<int>(i) + 1;
            std::string_view cont = strip_terminator(lines[i]);
            if (is_comment(cont)) {
                ast.dropped.push_back(
                    {DroppedLine::Kind::comment, cont_no, std::string(lines[i])});
                ++i;
                continue;
            }
            if (is_blank(cont)) {
                ast.dropped.push_back(
                    {DroppedLine::Kind::blank, cont_no, std::string(lines[i])});
                ast.parse_diagnostics.push_back({{path, cont_no, cont_no},
                                                 Severity::warning,
                                                 "empty continuation line"});
                ++i;
                continue;
            }
            inst.raw_text.append(lines[i]);
            inst.span.end_line = cont_no;
            open = has_continuation(cont);
            logical.append(cont.substr(0, open ? cont.size() - 1 : cont.size()));
            ++i;
        }
        if (open) {
            ast.parse_diagnostics.push_back({{path, inst.span.end_line, inst.span.end_line},
                                             Severity::warning,
                                             "line continuation at end of file"});
        }

        inst.raw_args = logical;

        // Heredoc bodies are carried verbatim and never shell-parsed.
        if (inst.keyword == "RUN" || inst.keyword == "COPY" || inst.keyword == "ADD") {
            auto delims = heredoc_delimiters(inst.raw_args);
            for (const auto& delim : delims) {
                inst.has_heredoc = true;
                bool closed = false;
                while (i < lines.size()) {
                    std::string_view body = strip_terminator(lines[i]);
                    inst.raw_text.append(lines[i]);
                    inst.raw_args.push_back('\n');
                    inst.raw_args.append(body);
                    inst.span.end_line = static_cast<int>(i) + 1;
                    ++i;
                    size_t lead = body.find_first_not_of('\t');
                    std::string_view trimmed =
                        lead == std::string_view::npos ? std::string_view{} : body.substr(lead);
                    if (trimmed == delim) {
                        closed = true;
                        break;
                    }
                }
                if (!closed) {
                    ast.parse_diagnostics.push_back(
                        {inst.span, Severity::error, "unterminated heredoc <<" + delim});
                    break;
                }
            }
            if (inst.has_heredoc) {
                ast.parse_diagnostics.push_back(
                    {inst.span, Severity::warning, "heredoc body not analyzed"});
            }
        }

        ast.instructions.push_back(std::move(inst));
    }

    bool has_error = std::any_of(
        ast.parse_diagnostics.begin(), ast.parse_diagnostics.end(),
        [](const Diagnostic& d) { return d.severity == Severity::error; });

    const Instruction* first = nullptr;
    for (const auto& inst : ast.instructions) {
        if (options.lenient_from && inst.keyword == "ARG")
            continue;
        first = &inst;
        break;
    }
    ast.valid = !has_error && first != nullptr && first->keyword == "FROM";
    return ast;
}

} // namespace dockmeta
