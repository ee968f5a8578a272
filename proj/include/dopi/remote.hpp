#pragma once

#include <string>

#include "dopi/error.hpp"

namespace dopi {

struct RemoteAdapterConfig {
    // http://host[:port][/path]
    std::string endpoint;
    std::string model = "default";
    int timeout_ms = 10000;
    // Name of the environment variable holding a bearer token; read per call.
    std::string credential_env;
    int retries = 0;

    void validate() const;
};

class TransportError : public Error {
public:
    enum class Kind { Timeout, Connection, HttpStatus, BadResponse };

    TransportError(Kind kind, int attempts, const std::string& message, int status = 0)
        : Error(kind == Kind::Timeout ? "TIMEOUT" : "TRANSPORT_ERROR", message),
          kind_(kind), attempts_(attempts), status_(status) {}

    Kind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }
    int status() const noexcept { return status_; }

private:
    Kind kind_;
    int attempts_;
    int status_;
};

// POSTs {model, messages:[{role:"system"}, {role:"user"}]} and returns the
// reply's "text" field verbatim. Makes at most retries + 1 attempts.
std::string remote_complete(const RemoteAdapterConfig& config, const std::string& role_prompt,
                            const std::string& payload);

} // namespace dopi
