#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dockmeta/span.hpp"

namespace dockmeta {

/// Segment of a shell word: literal text or a variable reference.
struct WordPart {
    enum class Kind { literal, var_ref };
    Kind kind = Kind::literal;
    std::string text; // literal bytes, or the variable name
    bool has_braces = false;
    std::optional<std::string> default_value; // ${NAME:-default}

    bool operator==(const WordPart&) const = default;
};

enum class Quoting { none, single, double_quoted };

struct ShellWord {
    std::vector<WordPart> parts;
    Quoting quoted = Quoting::none;
    std::string raw; // original token text

    bool has_var_ref() const;
    /// Concatenation of the literal parts; complete only when !has_var_ref().
    std::string literal_text() const;
};

struct Assignment {
    std::string name;
    ShellWord value;
};

/// One simple command: optional NAME=value prefixes plus argv words.
struct ShellCommand {
    std::vector<Assignment> assignments;
    std::vector<ShellWord> argv;
};

enum class Connector { and_and, or_or, semicolon, pipe, background, newline };

struct ShellList {
    std::vector<ShellCommand> commands;
    std::vector<Connector> connectors; // size == commands.size() - 1 when non-empty
    bool degraded = false; // input used constructs outside the supported subset
    Diagnostics diagnostics;
};

/// Best-effort parse of a RUN argument string. Total: any input yields a
/// ShellList; constructs outside the subset survive as literal words with
/// the degraded flag set.
ShellList parse_shell(std::string_view text);

/// Prefix and standalone assignments plus `export NAME=value` arguments,
/// in source order.
std::vector<Assignment> collect_assignments(const ShellList& list);

std::string_view to_string(Connector c);

/// Splits plain text into literal and $NAME / ${NAME} / ${NAME:-default}
/// segments. Quotes are not interpreted; used for ENV-style value strings.
std::vector<WordPart> scan_variable_segments(std::string_view text);

/// Whitespace-separated words with quote, escape and $ handling but no
/// shell operators; used for ENV / ARG / ADD argument lines.
std::vector<ShellWord> split_words_simple(std::string_view text);

} // namespace dockmeta
