#include "dockmeta/git.hpp"

#include <charconv>

#include "dockmeta/subprocess.hpp"

namespace dockmeta {

namespace {

std::vector<std::string> git_argv(const std::string& repo_dir,
                                  std::initializer_list<std::string> rest) {
    std::vector<std::string> argv = {"git", "-C", repo_dir, "-c",
                                     "core.quotePath=false"};
    argv.insert(argv.end(), rest.begin(), rest.end());
    return argv;
}

/// Undoes git's C-style quoting, used for paths containing control bytes
/// even with quotePath off.
std::string unquote_path(const std::string& s) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') return s;
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        char c = s[i];
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        ++i;
        if (i + 1 > s.size()) break;
        char e = s[i];
        switch (e) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case '\\': out.push_back('\\'); break;
            case '"': out.push_back('"'); break;
            default:
                if (e >= '0' && e <= '7') {
                    int v = 0, digits = 0;
                    while (digits < 3 && i + 1 < s.size() + 1 && s[i] >= '0' &&
                           s[i] <= '7') {
                        v = v * 8 + (s[i] - '0');
                        ++i;
                        ++digits;
                    }
                    --i;
                    out.push_back(static_cast<char>(v));
                } else {
                    out.push_back(e);
                }
        }
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

} // namespace

std::vector<CommitInfo> first_parent_history(const std::string& repo_dir) {
    auto result = run_command(git_argv(
        repo_dir,
        {"log", "--first-parent", "--reverse", "--format=%H%x09%ct"}));
    if (!result.ok()) {
        if (result.err.find("does not have any commits") != std::string::npos ||
            result.err.find("bad default revision") != std::string::npos)
            return {};
        throw GitError("git log failed in " + repo_dir + ": " + result.err);
    }
    std::vector<CommitInfo> commits;
    for (const auto& line : split_lines(result.out)) {
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        CommitInfo info;
        info.id = line.substr(0, tab);
        std::string_view ts(line.data() + tab + 1, line.size() - tab - 1);
        std::from_chars(ts.data(), ts.data() + ts.size(), info.timestamp);
        commits.push_back(std::move(info));
    }
    return commits;
}

std::vector<FileChange> changes_in_commit(const std::string& repo_dir,
                                          const std::string& commit,
                                          bool is_root) {
    std::vector<std::string> tail = {"diff-tree", "-r", "-M", "--no-commit-id"};
    if (is_root) {
        tail.push_back("--root");
        tail.push_back(commit);
    } else {
        tail.push_back(commit + "^");
        tail.push_back(commit);
    }
    std::vector<std::string> argv = {"git", "-C", repo_dir, "-c",
                                     "core.quotePath=false"};
    argv.insert(argv.end(), tail.begin(), tail.end());
    auto result = run_command(argv);
    if (!result.ok())
        throw GitError("git diff-tree failed for " + commit + " in " +
                       repo_dir + ": " + result.err);

    std::vector<FileChange> changes;
    for (const auto& line : split_lines(result.out)) {
        // :100644 100644 abc def M\tpath[\tnew_path]
        if (line.empty() || line[0] != ':') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        std::string meta = line.substr(0, tab);
        auto last_space = meta.rfind(' ');
        if (last_space == std::string::npos) continue;
        std::string status_token = meta.substr(last_space + 1);
        if (status_token.empty()) continue;

        FileChange change;
        change.status = status_token[0];
        std::string rest = line.substr(tab + 1);
        auto tab2 = rest.find('\t');
        if ((change.status == 'R' || change.status == 'C') &&
            tab2 != std::string::npos) {
            change.old_path = unquote_path(rest.substr(0, tab2));
            change.path = unquote_path(rest.substr(tab2 + 1));
        } else {
            change.path = unquote_path(rest);
        }
        changes.push_back(std::move(change));
    }
    return changes;
}

std::optional<std::string> read_blob(const std::string& repo_dir,
                                     const std::string& commit,
                                     const std::string& path) {
    auto result =
        run_command(git_argv(repo_dir, {"cat-file", "blob", commit + ":" + path}));
    if (!result.ok()) return std::nullopt;
    return result.out;
}

} // namespace dockmeta
