#include "dockmeta/package.hpp"

#include <algorithm>
#include <cctype>

#include "dockmeta/registry.hpp"

namespace dockmeta {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

/// Decodes %XX escapes; malformed escapes are kept verbatim.
std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex_value(s[i + 1]);
            int lo = hex_value(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::size_t first,
                 std::size_t last_exclusive) {
    std::string out;
    for (std::size_t i = first; i < last_exclusive; ++i) {
        if (i > first) out.push_back('/');
        out += parts[i];
    }
    return out;
}

std::optional<std::string> strip_archive_suffix(std::string_view name) {
    for (std::string_view suffix : {".tar.gz", ".zip"}) {
        if (name.size() > suffix.size() && name.ends_with(suffix))
            return std::string(name.substr(0, name.size() - suffix.size()));
    }
    return std::nullopt;
}

} // namespace

PackageIdentity PackageIdentity::make(std::string_view owner,
                                      std::string_view repo) {
    return PackageIdentity{lower(owner), lower(repo)};
}

std::optional<PackageIdentity> PackageIdentity::parse(std::string_view full) {
    auto slash = full.find('/');
    if (slash == std::string_view::npos || slash == 0 ||
        slash + 1 == full.size())
        return std::nullopt;
    if (full.find('/', slash + 1) != std::string_view::npos)
        return std::nullopt;
    return make(full.substr(0, slash), full.substr(slash + 1));
}

std::optional<PackageRef> match_github_url(std::string_view url,
                                           Diagnostics* diags) {
    std::string stripped(url);
    auto cut = stripped.find_first_of("?#");
    if (cut != std::string::npos) {
        stripped.resize(cut);
        if (diags)
            diags->push_back({SourceSpan{}, Severity::warning,
                              "query/fragment stripped before package match: " +
                                  std::string(url)});
    }

    auto scheme_end = stripped.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    std::string scheme = lower(stripped.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https") return std::nullopt;

    std::size_t host_begin = scheme_end + 3;
    std::size_t path_begin = stripped.find('/', host_begin);
    if (path_begin == std::string::npos) return std::nullopt;
    std::string host = lower(stripped.substr(host_begin, path_begin - host_begin));
    if (auto at = host.rfind('@'); at != std::string::npos)
        host = host.substr(at + 1);
    if (auto colon = host.rfind(':'); colon != std::string::npos)
        host = host.substr(0, colon);
    if (host != "github.com") return std::nullopt;

    // Split then decode: an encoded slash inside a segment must not create
    // new segments.
    std::vector<std::string> seg;
    std::size_t pos = path_begin + 1;
    while (pos <= stripped.size()) {
        auto next = stripped.find('/', pos);
        if (next == std::string::npos) next = stripped.size();
        seg.push_back(percent_decode(
            std::string_view(stripped).substr(pos, next - pos)));
        pos = next + 1;
    }
    while (!seg.empty() && seg.back().empty()) seg.pop_back();

    if (seg.size() < 2 || seg[0].empty() || seg[1].empty()) return std::nullopt;
    PackageIdentity id = PackageIdentity::make(seg[0], seg[1]);

    // /OWNER/REPO/releases/download/TAG.../FILE
    if (seg.size() >= 6 && seg[2] == "releases" && seg[3] == "download") {
        std::string tag = join(seg, 4, seg.size() - 1);
        const std::string& file = seg.back();
        if (tag.empty() || file.empty()) return std::nullopt;
        PackageRef ref;
        ref.identity = id;
        ref.tag = tag;
        ref.pattern = UrlPattern::release;
        ref.asset_file = file;
        ref.url = stripped;
        return ref;
    }

    // /OWNER/REPO/archive/refs/tags/TAG(.zip|.tar.gz), long form first so the
    // short form cannot claim "refs" as part of the tag.
    if (seg.size() >= 6 && seg[2] == "archive" && seg[3] == "refs" &&
        seg[4] == "tags") {
        std::string rest = join(seg, 5, seg.size());
        if (auto tag = strip_archive_suffix(rest); tag && !tag->empty()) {
            PackageRef ref;
            ref.identity = id;
            ref.tag = *tag;
            ref.pattern = UrlPattern::archive;
            ref.url = stripped;
            return ref;
        }
        return std::nullopt;
    }

    // /OWNER/REPO/archive/TAG(.zip|.tar.gz)
    if (seg.size() >= 4 && seg[2] == "archive") {
        std::string rest = join(seg, 3, seg.size());
        if (auto tag = strip_archive_suffix(rest); tag && !tag->empty()) {
            PackageRef ref;
            ref.identity = id;
            ref.tag = *tag;
            ref.pattern = UrlPattern::archive;
            ref.url = stripped;
            return ref;
        }
    }
    return std::nullopt;
}

ValidationStatus validate(const PackageRef& ref,
                          const RegistrySnapshot& registry) {
    const PackageInfo* info = registry.find(ref.identity);
    if (!info) return ValidationStatus::unknown_package;
    if (ref.pattern == UrlPattern::release)
        return info->release_asset_urls.count(ref.url) ? ValidationStatus::valid
                                                       : ValidationStatus::invalid;
    return info->tag_position(ref.tag) ? ValidationStatus::valid
                                       : ValidationStatus::invalid;
}

std::string_view to_string(UrlPattern p) {
    return p == UrlPattern::release ? "release" : "archive";
}

std::optional<UrlPattern> pattern_from_string(std::string_view s) {
    if (s == "release") return UrlPattern::release;
    if (s == "archive") return UrlPattern::archive;
    return std::nullopt;
}

} // namespace dockmeta
