#pragma once

#include <cstdint>
#include <string>

#include "steam/net.hpp"

namespace steam {

/// Outcome of one POST. `ok` means a 2xx response arrived in time.
struct HttpResult {
    bool ok{false};
    int status{0};
};

/// Minimal HTTP/1.1 POST client. With keep_alive the TCP connection persists
/// across calls and is re-established transparently after a failure; without
/// it every call opens and closes its own connection. No retries: a failed
/// delivery is reported once and the next packet starts fresh.
class HttpClient {
public:
    HttpClient(const std::string& url, int timeout_ms, bool keep_alive);

    bool valid() const { return valid_; }
    const net::HttpUrl& url() const { return url_; }

    HttpResult post(const std::string& body, const std::string& content_type);

private:
    bool ensure_connected();
    HttpResult exchange(const std::string& request);

    net::HttpUrl url_;
    int timeout_ms_;
    bool keep_alive_;
    bool valid_{false};
    net::Socket conn_;
};

}  // namespace steam
