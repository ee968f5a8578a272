#include "dopi/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

namespace dopi {

using nlohmann::json;

void RemoteAdapterConfig::validate() const {
    if (endpoint.empty()) throw DataError("BAD_CONFIG", "remote adapter endpoint is not configured");
    if (timeout_ms <= 0) throw DataError("BAD_CONFIG", "remote adapter timeout must be positive");
    if (retries < 0) throw DataError("BAD_CONFIG", "remote adapter retries must be non-negative");
}

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw DataError("BAD_CONFIG", "malformed endpoint URL '" + url + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

} // namespace

std::string remote_complete(const RemoteAdapterConfig& config, const std::string& role_prompt,
                            const std::string& payload) {
    config.validate();
    const auto ep = split_endpoint(config.endpoint);

    const json body{{"model", config.model},
                    {"messages", json::array({{{"role", "system"}, {"content", role_prompt}},
                                              {{"role", "user"}, {"content", payload}}})}};
    httplib::Headers headers;
    if (!config.credential_env.empty()) {
        if (const char* token = std::getenv(config.credential_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    const auto sec = config.timeout_ms / 1000;
    const auto usec = (config.timeout_ms % 1000) * 1000;
    const int attempts = config.retries + 1;
    TransportError last(TransportError::Kind::Connection, 0, "no attempt made");
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        httplib::Client client(ep.origin);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(ep.path, headers, body.dump(), "application/json");
        const auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && elapsed >= config.timeout_ms);
            last = TransportError(timed_out ? TransportError::Kind::Timeout : TransportError::Kind::Connection, attempt,
                                  "request to " + config.endpoint + " failed after " + std::to_string(attempt) +
                                      " attempt(s): " + httplib::to_string(err));
            continue;
        }
        if (res->status != 200) {
            last = TransportError(TransportError::Kind::HttpStatus, attempt,
                                  "request to " + config.endpoint + " returned HTTP " + std::to_string(res->status),
                                  res->status);
            continue;
        }
        try {
            const auto reply = json::parse(res->body);
            if (!reply.is_object() || !reply.contains("text") || !reply.at("text").is_string())
                throw TransportError(TransportError::Kind::BadResponse, attempt, "reply has no string field 'text'");
            return reply.at("text").get<std::string>();
        } catch (const json::exception& e) {
            throw TransportError(TransportError::Kind::BadResponse, attempt, std::string("reply is not JSON: ") + e.what());
        }
    }
    throw last;
}

} // namespace dopi
