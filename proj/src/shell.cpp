#include "dockmeta/shell.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dockmeta {

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_blank_char(char c) {
    return c == ' ' || c == '\t' || c == '\r';
}

// Control keywords we do not interpret; seeing one in command position
// degrades the parse.
bool is_control_keyword(const std::string& w) {
    static const std::array<std::string_view, 14> kws = {
        "if", "then", "elif", "else", "fi",   "for",  "while",
        "do", "done", "case", "esac", "until", "select", "function"};
    return std::find(kws.begin(), kws.end(), w) != kws.end();
}

struct Tokenizer {
    std::string_view text;
    size_t pos = 0;
    ShellList& out;
    bool split_operators = true;

    explicit Tokenizer(std::string_view t, ShellList& o) : text(t), out(o) {}

    bool is_operator_char(char c) const {
        return split_operators && (c == '&' || c == '|' || c == ';' || c == '(' ||
                                   c == ')' || c == '<' || c == '>');
    }

    char peek(size_t ahead = 0) const {
        return pos + ahead < text.size() ? text[pos + ahead] : '\0';
    }
    bool done() const { return pos >= text.size(); }

    void warn(const std::string& msg) {
        out.diagnostics.push_back({{}, Severity::warning, msg});
    }

    // Parses $NAME, ${NAME}, ${NAME:-default}, $(...), $$, $1, bare $.
    // Appends the resulting part(s) to the word. pos is on '$'.
    void scan_dollar(ShellWord& word, bool in_double_quotes) {
        size_t start = pos;
        ++pos; // '$'
        if (done()) {
            append_literal(word, "$");
            return;
        }
        char c = peek();
        if (c == '{') {
            ++pos;
            size_t name_start = pos;
            while (!done() && is_name_char(peek()))
                ++pos;
            std::string name(text.substr(name_start, pos - name_start));
            bool valid_name = !name.empty() && is_name_start(name[0]);
            if (valid_name && peek() == '}') {
                ++pos;
                word.parts.push_back(
                    {WordPart::Kind::var_ref, std::move(name), true, std::nullopt});
                return;
            }
            if (valid_name && peek() == ':' && peek(1) == '-') {
                pos += 2;
                size_t def_start = pos;
                while (!done() && peek() != '}')
                    ++pos;
                std::string def(text.substr(def_start, pos - def_start));
                if (!done())
                    ++pos; // '}'
                else
                    warn("unterminated ${...} expansion");
                word.parts.push_back(
                    {WordPart::Kind::var_ref, std::move(name), true, std::move(def)});
                return;
            }
            // ${NAME%x}, ${#NAME}, ... : preserved verbatim, not interpreted.
            int depth = 1;
            while (!done() && depth > 0) {
                if (peek() == '{')
                    ++depth;
                else if (peek() == '}')
                    --depth;
                ++pos;
            }
            out.degraded = true;
            append_literal(word, std::string(text.substr(start, pos - start)));
            return;
        }
        if (c == '(') {
            // Command substitution: kept as literal text.
            int depth = 0;
            do {
                if (peek() == '(')
                    ++depth;
                else if (peek() == ')')
                    --depth;
                ++pos;
            } while (!done() && depth > 0);
            if (depth > 0)
                warn("unterminated command substitution");
            out.degraded = true;
            append_literal(word, std::string(text.substr(start, pos - start)));
            return;
        }
        if (is_name_start(c)) {
            size_t name_start = pos;
            while (!done() && is_name_char(peek()))
                ++pos;
            word.parts.push_back({WordPart::Kind::var_ref,
                                  std::string(text.substr(name_start, pos - name_start)),
                                  false, std::nullopt});
            return;
        }
        (void)in_double_quotes;
        append_literal(word, "$");
    }

    static void append_literal(ShellWord& word, std::string_view s) {
        if (!word.parts.empty() && word.parts.back().kind == WordPart::Kind::literal)
            word.parts.back().text.append(s);
        else
            word.parts.push_back({WordPart::Kind::literal, std::string(s), false, std::nullopt});
    }

    // Scans one word token. pos is on its first character.
    ShellWord scan_word() {
        ShellWord word;
        size_t start = pos;
        bool saw_single = false, saw_double = false, saw_bare = false;
        while (!done()) {
            char c = peek();
            if (is_blank_char(c) || c == '\n')
                break;
            if (is_operator_char(c))
                break;
            if (c == '\'') {
                saw_single = true;
                ++pos;
                size_t lit_start = pos;
                while (!done() && peek() != '\'')
                    ++pos;
                append_literal(word, text.substr(lit_start, pos - lit_start));
                if (done())
                    warn("unterminated single quote");
                else
                    ++pos;
                continue;
            }
            if (c == '"') {
                saw_double = true;
                ++pos;
                bool closed = false;
                while (!done()) {
                    char d = peek();
                    if (d == '"') {
                        ++pos;
                        closed = true;
                        break;
                    }
                    if (d == '\\') {
                        char e = peek(1);
                        if (e == '"' || e == '$' || e == '\\' || e == '`') {
                            append_literal(word, std::string_view(&text[pos + 1], 1));
                            pos += 2;
                            continue;
                        }
                        if (e == '\n') {
                            pos += 2; // line continuation
                            continue;
                        }
                        append_literal(word, "\\");
                        ++pos;
                        continue;
                    }
                    if (d == '$') {
                        scan_dollar(word, true);
                        continue;
                    }
                    if (d == '`') {
                        scan_backtick(word);
                        continue;
                    }
                    size_t lit_start = pos;
                    while (!done() && peek() != '"' && peek() != '\\' && peek() != '$' &&
                           peek() != '`')
                        ++pos;
                    append_literal(word, text.substr(lit_start, pos - lit_start));
                }
                if (!closed)
                    warn("unterminated double quote");
                // An empty "" still denotes an (empty, quoted) word.
                if (word.parts.empty())
                    word.parts.push_back({WordPart::Kind::literal, "", false, std::nullopt});
                continue;
            }
            if (c == '\\') {
                char e = peek(1);
                if (e == '\n') {
                    pos += 2;
                    continue;
                }
                if (e == '\0') {
                    append_literal(word, "\\");
                    ++pos;
                    continue;
                }
                saw_bare = true;
                append_literal(word, std::string_view(&text[pos + 1], 1));
                pos += 2;
                continue;
            }
            if (c == '$') {
                saw_bare = true;
                scan_dollar(word, false);
                continue;
            }
            if (c == '`') {
                saw_bare = true;
                scan_backtick(word);
                continue;
            }
            saw_bare = true;
            size_t lit_start = pos;
            while (!done()) {
                char d = peek();
                if (is_blank_char(d) || d == '\n' || is_operator_char(d) || d == '\'' ||
                    d == '"' || d == '\\' || d == '$' || d == '`')
                    break;
                ++pos;
            }
            append_literal(word, text.substr(lit_start, pos - lit_start));
        }
        if (saw_single && !saw_double && !saw_bare)
            word.quoted = Quoting::single;
        else if (saw_double && !saw_single && !saw_bare)
            word.quoted = Quoting::double_quoted;
        word.raw.assign(text.substr(start, pos - start));
        return word;
    }

    void scan_backtick(ShellWord& word) {
        size_t start = pos;
        ++pos;
        while (!done() && peek() != '`')
            ++pos;
        if (done())
            warn("unterminated backtick substitution");
        else
            ++pos;
        out.degraded = true;
        append_literal(word, std::string(text.substr(start, pos - start)));
    }
};

// Splits a word of the form NAME=value. Returns nullopt when the word is not
// an assignment (quoted start, no '=', bad name).
std::optional<Assignment> split_assignment(const ShellWord& word) {
    if (word.parts.empty() || word.parts.front().kind != WordPart::Kind::literal)
        return std::nullopt;
    if (!word.raw.empty() && (word.raw[0] == '\'' || word.raw[0] == '"'))
        return std::nullopt;
    const std::string& first = word.parts.front().text;
    size_t eq = first.find('=');
    if (eq == std::string::npos || eq == 0)
        return std::nullopt;
    std::string name = first.substr(0, eq);
    if (!is_name_start(name[0]))
        return std::nullopt;
    if (!std::all_of(name.begin(), name.end(), is_name_char))
        return std::nullopt;
    Assignment a;
    a.name = std::move(name);
    a.value.quoted = word.quoted;
    a.value.raw = word.raw.substr(std::min(word.raw.size(), eq + 1));
    a.value.parts.push_back(
        {WordPart::Kind::literal, first.substr(eq + 1), false, std::nullopt});
    a.value.parts.insert(a.value.parts.end(), word.parts.begin() + 1, word.parts.end());
    return a;
}

ShellCommand make_command(std::vector<ShellWord> tokens, ShellList& out) {
    ShellCommand cmd;
    size_t i = 0;
    while (i < tokens.size()) {
        auto a = split_assignment(tokens[i]);
        if (!a)
            break;
        cmd.assignments.push_back(std::move(*a));
        ++i;
    }
    for (; i < tokens.size(); ++i)
        cmd.argv.push_back(std::move(tokens[i]));
    if (!cmd.argv.empty() && !cmd.argv.front().has_var_ref() &&
        is_control_keyword(cmd.argv.front().literal_text()))
        out.degraded = true;
    return cmd;
}

} // namespace

bool ShellWord::has_var_ref() const {
    return std::any_of(parts.begin(), parts.end(), [](const WordPart& p) {
        return p.kind == WordPart::Kind::var_ref;
    });
}

std::string ShellWord::literal_text() const {
    std::string s;
    for (const auto& p : parts)
        if (p.kind == WordPart::Kind::literal)
            s += p.text;
    return s;
}

std::string_view to_string(Connector c) {
    switch (c) {
    case Connector::and_and: return "&&";
    case Connector::or_or: return "||";
    case Connector::semicolon: return ";";
    case Connector::pipe: return "|";
    case Connector::background: return "&";
    case Connector::newline: return "\n";
    }
    return "?";
}

ShellList parse_shell(std::string_view text) {
    ShellList out;
    Tokenizer tok(text, out);

    std::vector<ShellWord> pending;
    std::optional<Connector> pending_connector;

    auto flush = [&](std::optional<Connector> next) {
        if (!pending.empty()) {
            if (!out.commands.empty())
                out.connectors.push_back(pending_connector.value_or(Connector::semicolon));
            out.commands.push_back(make_command(std::move(pending), out));
            pending.clear();
            pending_connector.reset();
        } else if (pending_connector && next) {
            out.diagnostics.push_back(
                {{}, Severity::warning, "empty command between connectors"});
        }
        if (next)
            pending_connector = next;
    };

    while (!tok.done()) {
        char c = tok.peek();
        if (is_blank_char(c)) {
            ++tok.pos;
            continue;
        }
        if (c == '\n') {
            ++tok.pos;
            if (!pending.empty())
                flush(Connector::newline);
            continue;
        }
        if (c == '&') {
            if (tok.peek(1) == '&') {
                tok.pos += 2;
                flush(Connector::and_and);
            } else {
                ++tok.pos;
                flush(Connector::background);
            }
            continue;
        }
        if (c == '|') {
            if (tok.peek(1) == '|') {
                tok.pos += 2;
                flush(Connector::or_or);
            } else {
                ++tok.pos;
                flush(Connector::pipe);
            }
            continue;
        }
        if (c == ';') {
            ++tok.pos;
            flush(Connector::semicolon);
            continue;
        }
        if (c == '(' || c == ')' || c == '<' || c == '>') {
            // Subshells and redirections: operator survives as a literal word.
            out.degraded = true;
            size_t start = tok.pos;
            if ((c == '<' || c == '>') && tok.peek(1) == c)
                tok.pos += 2;
            else
                ++tok.pos;
            ShellWord w;
            w.raw.assign(text.substr(start, tok.pos - start));
            w.parts.push_back({WordPart::Kind::literal, w.raw, false, std::nullopt});
            pending.push_back(std::move(w));
            continue;
        }
        pending.push_back(tok.scan_word());
    }
    bool had_trailing_op = pending.empty() && pending_connector.has_value() &&
                           (*pending_connector == Connector::and_and ||
                            *pending_connector == Connector::or_or ||
                            *pending_connector == Connector::pipe);
    flush(std::nullopt);
    if (had_trailing_op)
        out.diagnostics.push_back({{}, Severity::warning, "trailing connector"});
    return out;
}

std::vector<ShellWord> split_words_simple(std::string_view text) {
    ShellList scratch;
    Tokenizer tok(text, scratch);
    tok.split_operators = false;
    std::vector<ShellWord> words;
    while (!tok.done()) {
        char c = tok.peek();
        if (is_blank_char(c) || c == '\n') {
            ++tok.pos;
            continue;
        }
        words.push_back(tok.scan_word());
    }
    return words;
}

std::vector<WordPart> scan_variable_segments(std::string_view text) {
    ShellList scratch;
    Tokenizer tok(text, scratch);
    ShellWord word;
    while (!tok.done()) {
        if (tok.peek() == '$') {
            tok.scan_dollar(word, false);
            continue;
        }
        size_t start = tok.pos;
        while (!tok.done() && tok.peek() != '$')
            ++tok.pos;
        Tokenizer::append_literal(word, text.substr(start, tok.pos - start));
    }
    return std::move(word.parts);
}

std::vector<Assignment> collect_assignments(const ShellList& list) {
    std::vector<Assignment> out;
    for (const auto& cmd : list.commands) {
        for (const auto& a : cmd.assignments)
            out.push_back(a);
        if (cmd.argv.empty() || cmd.argv.front().has_var_ref())
            continue;
        if (cmd.argv.front().literal_text() != "export")
            continue;
        for (size_t i = 1; i < cmd.argv.size(); ++i)
            if (auto a = split_assignment(cmd.argv[i]))
                out.push_back(std::move(*a));
    }
    return out;
}

} // namespace dockmeta
