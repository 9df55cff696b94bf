#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "dockmeta/span.hpp"

namespace dockmeta {

class RegistrySnapshot;

/// GitHub owner/repo pair, lowercased on construction (GitHub names are
/// case-insensitive).
struct PackageIdentity {
    std::string owner;
    std::string repo;

    static PackageIdentity make(std::string_view owner, std::string_view repo);
    /// Parses "owner/repo". nullopt when the shape is wrong.
    static std::optional<PackageIdentity> parse(std::string_view full);

    std::string full() const { return owner + "/" + repo; }
    auto operator<=>(const PackageIdentity&) const = default;
};

enum class UrlPattern { release, archive };

/// A version-pinned package reference recovered from a URL.
struct PackageRef {
    PackageIdentity identity;
    std::string tag; // verbatim, case preserved
    UrlPattern pattern = UrlPattern::archive;
    std::optional<std::string> asset_file; // release pattern only
    std::string url; // matched URL with query/fragment stripped

    bool operator==(const PackageRef&) const = default;
};

/// A package reference pinned at a concrete source location.
struct PinnedPackage {
    PackageRef ref;
    SourceSpan location;
    std::string dockerfile;
    std::string commit;
};

/// Recognizes the release-download and source-archive URL shapes on
/// github.com. Percent-encoded path segments are decoded before matching;
/// query strings and fragments are stripped (recorded in diags).
std::optional<PackageRef> match_github_url(std::string_view url,
                                           Diagnostics* diags = nullptr);

enum class ValidationStatus { valid, invalid, unknown_package };

/// Release refs are valid when the full URL is in the package's release
/// asset list; archive refs when the tag is in the tag list (case-sensitive).
ValidationStatus validate(const PackageRef& ref, const RegistrySnapshot& registry);

std::string_view to_string(UrlPattern p);
std::optional<UrlPattern> pattern_from_string(std::string_view s);

} // namespace dockmeta
