#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dockmeta/span.hpp"

namespace dockmeta {

/// One top-level Dockerfile instruction. RUN arguments stay a flat string
/// here; shell structure is recovered later by parse_shell.
struct Instruction {
    std::string keyword;   // normalized to uppercase
    std::string raw_args;  // argument text with continuations joined
    SourceSpan span;
    std::string raw_text;  // exact source bytes of the instruction's lines
    bool has_heredoc = false;
};

/// A physical line the parser dropped from the instruction stream.
struct DroppedLine {
    enum class Kind { comment, blank, invalid };
    Kind kind;
    int line = 0;         // 1-based physical line number
    std::string text;     // exact bytes including terminator
};

struct DockerfileAst {
    std::vector<Instruction> instructions;
    std::vector<DroppedLine> dropped;
    bool valid = false;
    Diagnostics parse_diagnostics;
};

struct ParseOptions {
    // Skip leading ARG instructions when deciding FROM-first validity.
    bool lenient_from = false;
};

/// Total over arbitrary bytes: invalid UTF-8 is replaced, nothing throws.
DockerfileAst parse_dockerfile(std::string_view text, const std::string& path,
                               const ParseOptions& options = {});

/// Filename filter for Dockerfile discovery: basename contains
/// "dockerfile" or "Dockerfile" as a substring.
bool is_dockerfile_name(std::string_view filename);

/// Replaces ill-formed UTF-8 sequences with U+FFFD. Identity on valid input.
std::string sanitize_utf8(std::string_view bytes);

} // namespace dockmeta
