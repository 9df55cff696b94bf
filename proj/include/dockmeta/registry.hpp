#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dockmeta/package.hpp"

namespace dockmeta {

/// Tag list is ordered oldest to newest; positions define the version order
/// used by distance metrics.
struct PackageInfo {
    std::vector<std::string> tags;
    std::set<std::string> release_asset_urls;
    std::string fetched_on; // YYYY-MM-DD, empty for fixtures

    std::optional<int> tag_position(std::string_view tag) const;
};

class RegistryError : public std::runtime_error {
public:
    explicit RegistryError(const std::string& what) : std::runtime_error(what) {}
};

class RegistrySnapshot {
public:
    /// Throws RegistryError on duplicate tags within the list.
    void add_package(const PackageIdentity& id, PackageInfo info);

    const PackageInfo* find(const PackageIdentity& id) const;
    std::optional<int> tag_position(const PackageIdentity& id,
                                    std::string_view tag) const;
    bool has_tag(const PackageIdentity& id, std::string_view tag) const;

    std::size_t size() const { return packages_.size(); }
    const std::map<PackageIdentity, PackageInfo>& packages() const {
        return packages_;
    }

    nlohmann::ordered_json to_json() const;
    static RegistrySnapshot from_json(const nlohmann::ordered_json& doc);

    /// Loads a fixture file: {"owner/repo": {"tags": [...],
    /// "release_asset_urls": [...]}}. Throws RegistryError naming the
    /// offending key on malformed input.
    static RegistrySnapshot load_file(const std::string& path);
    void save_file(const std::string& path) const;

private:
    std::map<PackageIdentity, PackageInfo> packages_;
};

/// Orders dotted/numbered tags by comparing alternating numeric and
/// non-numeric runs; numeric runs compare as integers. Ties broken by the
/// raw string so the order is total.
int compare_versionish(std::string_view a, std::string_view b);
bool version_less(std::string_view a, std::string_view b);

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Returns nullopt on transport failure (no response at all).
using HttpTransport = std::function<std::optional<HttpResponse>(
    const std::string& url,
    const std::vector<std::pair<std::string, std::string>>& headers)>;

struct FetchOptions {
    std::string token;     // empty: anonymous requests
    std::string cache_dir; // empty: caching disabled
    std::string today;     // cache-key date YYYY-MM-DD; empty: current UTC day
    HttpTransport transport;              // empty: real HTTPS client
    std::function<void(int)> sleep_ms;    // empty: actually sleeps
    int max_attempts = 4;
};

struct FetchOutcome {
    RegistrySnapshot snapshot;
    std::map<std::string, std::string> errors; // "owner/repo" -> message
    int http_requests = 0; // cache hits make no requests
};

/// Fetches tag and release-asset lists for each identity from the GitHub
/// API. Tags are sorted oldest-to-newest with version_less. Results are
/// cached per identity and day under cache_dir.
FetchOutcome fetch_live(const std::set<PackageIdentity>& ids,
                        const FetchOptions& opts);

/// Real HTTPS transport (TLS via the system trust store).
HttpTransport default_github_transport();

std::string current_utc_date();

} // namespace dockmeta
