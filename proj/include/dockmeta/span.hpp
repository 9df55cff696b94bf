#pragma once

#include <string>
#include <vector>

namespace dockmeta {

/// Location of a construct in a source file, 1-based and inclusive.
struct SourceSpan {
    std::string path;
    int start_line = 0;
    int end_line = 0;

    bool operator==(const SourceSpan&) const = default;
};

enum class Severity { warning, error };

struct Diagnostic {
    SourceSpan span;
    Severity severity = Severity::warning;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

} // namespace dockmeta
