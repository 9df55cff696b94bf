#include "dockmeta/registry.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace dockmeta {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::optional<int> PackageInfo::tag_position(std::string_view tag) const {
    auto it = std::find(tags.begin(), tags.end(), tag);
    if (it == tags.end()) return std::nullopt;
    return static_cast<int>(it - tags.begin());
}

void RegistrySnapshot::add_package(const PackageIdentity& id, PackageInfo info) {
    std::set<std::string_view> seen;
    for (const auto& tag : info.tags) {
        if (!seen.insert(tag).second)
            throw RegistryError("duplicate tag '" + tag + "' for package '" +
                                id.full() + "'");
    }
    packages_[id] = std::move(info);
}

const PackageInfo* RegistrySnapshot::find(const PackageIdentity& id) const {
    auto it = packages_.find(id);
    return it == packages_.end() ? nullptr : &it->second;
}

std::optional<int> RegistrySnapshot::tag_position(const PackageIdentity& id,
                                                  std::string_view tag) const {
    const PackageInfo* info = find(id);
    if (!info) return std::nullopt;
    return info->tag_position(tag);
}

bool RegistrySnapshot::has_tag(const PackageIdentity& id,
                               std::string_view tag) const {
    return tag_position(id, tag).has_value();
}

ordered_json RegistrySnapshot::to_json() const {
    ordered_json doc = ordered_json::object();
    for (const auto& [id, info] : packages_) {
        ordered_json entry;
        entry["tags"] = info.tags;
        entry["release_asset_urls"] =
            std::vector<std::string>(info.release_asset_urls.begin(),
                                     info.release_asset_urls.end());
        if (!info.fetched_on.empty()) entry["fetched_on"] = info.fetched_on;
        doc[id.full()] = std::move(entry);
    }
    return doc;
}

RegistrySnapshot RegistrySnapshot::from_json(const ordered_json& doc) {
    if (!doc.is_object())
        throw RegistryError("registry document must be a JSON object");
    RegistrySnapshot snap;
    for (const auto& [key, entry] : doc.items()) {
        auto id = PackageIdentity::parse(key);
        if (!id)
            throw RegistryError("registry key '" + key +
                                "' is not of the form owner/repo");
        if (!entry.is_object())
            throw RegistryError("registry entry for '" + key +
                                "' must be an object");
        PackageInfo info;
        if (entry.contains("tags")) {
            if (!entry["tags"].is_array())
                throw RegistryError("'tags' for '" + key + "' must be an array");
            for (const auto& t : entry["tags"]) {
                if (!t.is_string())
                    throw RegistryError("non-string tag for '" + key + "'");
                info.tags.push_back(t.get<std::string>());
            }
        }
        if (entry.contains("release_asset_urls")) {
            if (!entry["release_asset_urls"].is_array())
                throw RegistryError("'release_asset_urls' for '" + key +
                                    "' must be an array");
            for (const auto& u : entry["release_asset_urls"]) {
                if (!u.is_string())
                    throw RegistryError("non-string asset URL for '" + key + "'");
                info.release_asset_urls.insert(u.get<std::string>());
            }
        }
        if (entry.contains("fetched_on") && entry["fetched_on"].is_string())
            info.fetched_on = entry["fetched_on"].get<std::string>();
        snap.add_package(*id, std::move(info));
    }
    return snap;
}

RegistrySnapshot RegistrySnapshot::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RegistryError("cannot open registry file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw RegistryError("invalid JSON in " + path + ": " + e.what());
    }
    return from_json(doc);
}

void RegistrySnapshot::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw RegistryError("cannot write registry file: " + path);
    out << to_json().dump(2) << '\n';
}

int compare_versionish(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ia = i, jb = j;
            while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia])))
                ++ia;
            while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb])))
                ++jb;
            std::string_view na = a.substr(i, ia - i);
            std::string_view nb = b.substr(j, jb - j);
            std::string_view ta = na.substr(
                std::min(na.find_first_not_of('0'), na.size() - 1));
            std::string_view tb = nb.substr(
                std::min(nb.find_first_not_of('0'), nb.size() - 1));
            if (ta.size() != tb.size())
                return ta.size() < tb.size() ? -1 : 1;
            if (int c = ta.compare(tb); c != 0) return c < 0 ? -1 : 1;
            i = ia;
            j = jb;
        } else if (!da && !db) {
            if (a[i] != b[j]) return a[i] < b[j] ? -1 : 1;
            ++i;
            ++j;
        } else {
            // Numeric runs sort before non-numeric ones, so 1.2 < 1.2rc.
            return da ? -1 : 1;
        }
    }
    if (i < a.size()) return 1;
    if (j < b.size()) return -1;
    if (int c = a.compare(b); c != 0) return c < 0 ? -1 : 1;
    return 0;
}

bool version_less(std::string_view a, std::string_view b) {
    return compare_versionish(a, b) < 0;
}

std::string current_utc_date() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

namespace {

std::string cache_file_name(const PackageIdentity& id, const std::string& day) {
    std::string name = id.owner + "__" + id.repo + "__" + day + ".json";
    // Identities come from URLs; keep the file name shell-safe.
    for (char& c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
              c == '_' || c == '-'))
            c = '_';
    }
    return name;
}

struct ApiError {
    std::string message;
};

/// Requests one page list endpoint with retry/backoff on 403/429/5xx.
/// Returns the parsed array, or ApiError via the out parameter.
std::optional<ordered_json> get_json_array(
    const FetchOptions& opts, const HttpTransport& transport,
    const std::function<void(int)>& sleep_ms, int& request_count,
    const std::string& url, std::string& error) {
    std::vector<std::pair<std::string, std::string>> headers = {
        {"Accept", "application/vnd.github+json"},
        {"User-Agent", "dockmeta"},
    };
    if (!opts.token.empty())
        headers.emplace_back("Authorization", "Bearer " + opts.token);

    int delay = 1000;
    for (int attempt = 1; attempt <= std::max(1, opts.max_attempts); ++attempt) {
        ++request_count;
        auto resp = transport(url, headers);
        if (!resp) {
            error = "network failure for " + url;
        } else if (resp->status == 200) {
            try {
                auto doc = ordered_json::parse(resp->body);
                if (!doc.is_array()) {
                    error = "unexpected non-array response from " + url;
                    return std::nullopt;
                }
                return doc;
            } catch (const std::exception& e) {
                error = std::string("bad JSON from ") + url + ": " + e.what();
                return std::nullopt;
            }
        } else if (resp->status == 404) {
            error = "not found: " + url;
            return std::nullopt;
        } else if (resp->status == 403 || resp->status == 429 ||
                   resp->status >= 500) {
            std::ostringstream os;
            os << "HTTP " << resp->status << " from " << url;
            error = os.str();
        } else {
            std::ostringstream os;
            os << "HTTP " << resp->status << " from " << url;
            error = os.str();
            return std::nullopt;
        }
        if (attempt < opts.max_attempts) {
            sleep_ms(delay);
            delay *= 2;
        }
    }
    return std::nullopt;
}

std::optional<PackageInfo> fetch_one(const FetchOptions& opts,
                                     const HttpTransport& transport,
                                     const std::function<void(int)>& sleep_ms,
                                     int& request_count,
                                     const PackageIdentity& id,
                                     std::string& error) {
    const std::string base =
        "https://api.github.com/repos/" + id.owner + "/" + id.repo;
    PackageInfo info;

    // Tag pages arrive newest-first; collect then sort oldest-first.
    std::vector<std::string> tags;
    for (int page = 1;; ++page) {
        std::ostringstream url;
        url << base << "/tags?per_page=100&page=" << page;
        auto doc = get_json_array(opts, transport, sleep_ms, request_count,
                                  url.str(), error);
        if (!doc) return std::nullopt;
        for (const auto& item : *doc) {
            if (item.contains("name") && item["name"].is_string())
                tags.push_back(item["name"].get<std::string>());
        }
        if (doc->size() < 100) break;
    }
    std::sort(tags.begin(), tags.end(), version_less);
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    info.tags = std::move(tags);

    for (int page = 1;; ++page) {
        std::ostringstream url;
        url << base << "/releases?per_page=100&page=" << page;
        auto doc = get_json_array(opts, transport, sleep_ms, request_count,
                                  url.str(), error);
        if (!doc) return std::nullopt;
        for (const auto& rel : *doc) {
            if (!rel.contains("assets") || !rel["assets"].is_array()) continue;
            for (const auto& asset : rel["assets"]) {
                if (asset.contains("browser_download_url") &&
                    asset["browser_download_url"].is_string())
                    info.release_asset_urls.insert(
                        asset["browser_download_url"].get<std::string>());
            }
        }
        if (doc->size() < 100) break;
    }
    return info;
}

} // namespace

FetchOutcome fetch_live(const std::set<PackageIdentity>& ids,
                        const FetchOptions& opts) {
    FetchOutcome out;
    HttpTransport transport =
        opts.transport ? opts.transport : default_github_transport();
    std::function<void(int)> sleep_ms = opts.sleep_ms;
    if (!sleep_ms)
        sleep_ms = [](int ms) {
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        };
    std::string day = opts.today.empty() ? current_utc_date() : opts.today;

    if (!opts.cache_dir.empty()) fs::create_directories(opts.cache_dir);

    for (const auto& id : ids) {
        fs::path cache_path;
        if (!opts.cache_dir.empty()) {
            cache_path = fs::path(opts.cache_dir) / cache_file_name(id, day);
            if (fs::exists(cache_path)) {
                try {
                    std::ifstream in(cache_path);
                    ordered_json doc;
                    in >> doc;
                    PackageInfo info;
                    for (const auto& t : doc.at("tags"))
                        info.tags.push_back(t.get<std::string>());
                    for (const auto& u : doc.at("release_asset_urls"))
                        info.release_asset_urls.insert(u.get<std::string>());
                    info.fetched_on = day;
                    out.snapshot.add_package(id, std::move(info));
                    continue;
                } catch (const std::exception&) {
                    // fall through to refetch on a corrupt cache entry
                }
            }
        }

        std::string error;
        auto info = fetch_one(opts, transport, sleep_ms, out.http_requests, id,
                              error);
        if (!info) {
            out.errors[id.full()] = error;
            continue;
        }
        info->fetched_on = day;
        if (!cache_path.empty()) {
            ordered_json doc;
            doc["tags"] = info->tags;
            doc["release_asset_urls"] = std::vector<std::string>(
                info->release_asset_urls.begin(), info->release_asset_urls.end());
            std::ofstream cache_out(cache_path);
            cache_out << doc.dump(2) << '\n';
        }
        out.snapshot.add_package(id, std::move(*info));
    }
    return out;
}

} // namespace dockmeta
