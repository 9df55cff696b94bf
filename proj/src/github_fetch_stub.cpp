// Used when the build has no TLS stack; live fetches report network failure
// and everything else keeps working.
#include "dockmeta/registry.hpp"

namespace dockmeta {

HttpTransport default_github_transport() {
    return [](const std::string&,
              const std::vector<std::pair<std::string, std::string>>&)
               -> std::optional<HttpResponse> { return std::nullopt; };
}

} // namespace dockmeta
