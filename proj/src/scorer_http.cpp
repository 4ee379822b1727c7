#include <string>

#include <httplib.h>

#include "forge/scorer.hpp"

namespace forge::scorer {

HttpTransport::HttpTransport(std::string base_url) : port_(80) {
    // Accepted forms: "host", "host:port", "http://host:port".
    std::string rest = base_url;
    if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    }
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
        host_ = rest;
    } else {
        host_ = rest.substr(0, colon);
        port_ = std::stoi(rest.substr(colon + 1));
    }
    if (host_.empty()) {
        throw ConfigInvalid("empty scorer host in url: " + base_url);
    }
}

std::string HttpTransport::send(const std::string& request_line) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    auto result = client.Post("/score", request_line, "application/json");
    if (!result) {
        throw TransportError("scorer endpoint unreachable: " + host_ + ":" +
                             std::to_string(port_));
    }
    if (result->status != 200) {
        throw TransportError("scorer returned status " + std::to_string(result->status));
    }
    return result->body;
}

}  // namespace forge::scorer
