#include "steam/http_client.hpp"

#include <sys/socket.h>

#include <cctype>
#include <cstdlib>

namespace steam {

HttpClient::HttpClient(const std::string& url, int timeout_ms, bool keep_alive)
    : timeout_ms_(timeout_ms), keep_alive_(keep_alive) {
    if (auto parsed = net::parse_http_url(url)) {
        url_ = *parsed;
        valid_ = true;
    }
}

bool HttpClient::ensure_connected() {
    if (conn_.valid()) return true;
    conn_ = net::tcp_connect(url_.host, url_.port, timeout_ms_);
    return conn_.valid();
}

HttpResult HttpClient::post(const std::string& body, const std::string& content_type) {
    if (!valid_) return {};

    std::string request;
    request.reserve(body.size() + 256);
    request += "POST " + url_.path + " HTTP/1.1\r\n";
    request += "Host: " + url_.host + ":" + std::to_string(url_.port) + "\r\n";
    request += "Content-Type: " + content_type + "\r\n";
    request += "Content-Length: " + std::to_string(body.size()) + "\r\n";
    request += keep_alive_ ? "Connection: keep-alive\r\n" : "Connection: close\r\n";
    request += "\r\n";
    request += body;

    HttpResult result = exchange(request);
    if (!result.ok && keep_alive_ && !conn_.valid()) {
        // The reused connection may have been closed by the peer between
        // packets; one fresh attempt keeps that benign case invisible.
        result = exchange(request);
    }
    if (!keep_alive_) conn_.reset();
    return result;
}

HttpResult HttpClient::exchange(const std::string& request) {
    if (!ensure_connected()) return {};
    if (!net::send_all(conn_.fd(), request)) {
        conn_.reset();
        return {};
    }

    // Read headers, then drain the body so a kept-alive stream stays framed.
    std::string response;
    std::size_t header_end = std::string::npos;
    char buf[2048];
    while (header_end == std::string::npos) {
        ssize_t n = ::recv(conn_.fd(), buf, sizeof(buf), 0);
        if (n <= 0) {
            conn_.reset();
            return {};
        }
        response.append(buf, static_cast<std::size_t>(n));
        header_end = response.find("\r\n\r\n");
        if (response.size() > 64 * 1024) break;
    }
    if (header_end == std::string::npos) {
        conn_.reset();
        return {};
    }

    int status = 0;
    if (response.rfind("HTTP/1.", 0) == 0 && response.size() > 12) {
        status = std::atoi(response.c_str() + 9);
    }

    std::size_t content_length = 0;
    {
        std::string lower;
        lower.reserve(header_end);
        for (std::size_t i = 0; i < header_end; ++i) {
            lower += static_cast<char>(std::tolower(static_cast<unsigned char>(response[i])));
        }
        std::size_t pos = lower.find("content-length:");
        if (pos != std::string::npos) {
            content_length = std::strtoull(response.c_str() + pos + 15, nullptr, 10);
        }
    }

    std::size_t have = response.size() - (header_end + 4);
    while (have < content_length) {
        ssize_t n = ::recv(conn_.fd(), buf, sizeof(buf), 0);
        if (n <= 0) {
            conn_.reset();
            return {};
        }
        have += static_cast<std::size_t>(n);
    }

    HttpResult out;
    out.status = status;
    out.ok = status >= 200 && status < 300;
    if (!out.ok) conn_.reset();
    return out;
}

}  // namespace steam
