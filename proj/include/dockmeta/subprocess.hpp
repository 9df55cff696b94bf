#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dockmeta {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;

    bool ok() const { return exit_code == 0; }
};

/// Runs argv[0] with the given arguments, no shell involved. Output is
/// captured as raw bytes. cwd and extra_env apply to the child only.
CommandResult run_command(
    const std::vector<std::string>& argv, const std::string& cwd = "",
    const std::vector<std::pair<std::string, std::string>>& extra_env = {});

} // namespace dockmeta
