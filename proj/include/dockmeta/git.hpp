#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dockmeta {

class GitError : public std::runtime_error {
public:
    explicit GitError(const std::string& what) : std::runtime_error(what) {}
};

struct CommitInfo {
    std::string id;
    std::int64_t timestamp = 0; // committer time, unix seconds
};

/// One path touched by a commit. status is git's letter (A, M, D, R, C, T);
/// old_path is set for renames and copies.
struct FileChange {
    char status = '?';
    std::string path;
    std::string old_path;
};

/// First-parent history, oldest first. Empty for a repo with no commits.
std::vector<CommitInfo> first_parent_history(const std::string& repo_dir);

/// Changes between the commit and its first parent (the whole tree for a
/// root commit). Rename detection is on.
std::vector<FileChange> changes_in_commit(const std::string& repo_dir,
                                          const std::string& commit,
                                          bool is_root);

/// Raw blob bytes at commit:path, or nullopt when absent.
std::optional<std::string> read_blob(const std::string& repo_dir,
                                     const std::string& commit,
                                     const std::string& path);

} // namespace dockmeta
