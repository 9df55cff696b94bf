// Real-network transport, isolated here so the rest of the registry code
// stays testable without TLS or sockets.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dockmeta/registry.hpp"

namespace dockmeta {

HttpTransport default_github_transport() {
    return [](const std::string& url,
              const std::vector<std::pair<std::string, std::string>>& headers)
               -> std::optional<HttpResponse> {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return std::nullopt;
        auto path_begin = url.find('/', scheme_end + 3);
        std::string origin =
            path_begin == std::string::npos ? url : url.substr(0, path_begin);
        std::string path =
            path_begin == std::string::npos ? "/" : url.substr(path_begin);

        httplib::Client client(origin);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(30, 0);
        client.set_follow_location(true);

        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);

        auto res = client.Get(path, hdrs);
        if (!res) return std::nullopt;
        return HttpResponse{res->status, res->body};
    };
}

} // namespace dockmeta
