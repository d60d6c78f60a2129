#pragma once

#include <string>

#include <json.hpp>

namespace qrag {

struct HttpEndpoint {
    std::string base_url;      // scheme://host[:port]
    double timeout_s = 30.0;
    std::string auth_token;    // sent as "Authorization: Bearer <token>" when set
    int retries = 0;           // extra attempts after a transport failure
};

// POST with a JSON body, expecting a JSON body back. Throws BackendError on
// transport failure (after retries), non-200 status, or an unparseable
// response.
nlohmann::json post_backend_json(const HttpEndpoint& endpoint, const std::string& path,
                                 const nlohmann::json& body);

}  // namespace qrag
