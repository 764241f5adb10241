#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace steam::net {

/// Move-only owner of a POSIX socket descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() { reset(); }

    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void reset();
    int release() {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }

private:
    int fd_{-1};
};

/// Connects via IPv4/IPv6 name resolution. Invalid socket on failure.
Socket tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms);

/// Listening socket with SO_REUSEADDR. Throws BindError. port 0 picks an
/// ephemeral port; bound_port receives the actual one when non-null.
Socket tcp_listen(std::uint16_t port, std::uint16_t* bound_port = nullptr);

/// Blocks until all bytes are written. False on error/peer close.
bool send_all(int fd, std::string_view data);

/// Waits for readability: 1 ready, 0 timeout, -1 error.
int wait_readable(int fd, int timeout_ms);

/// Parsed form of http://host[:port]/path.
struct HttpUrl {
    std::string host;
    std::uint16_t port{80};
    std::string path{"/"};
};

/// std::nullopt unless the scheme is http.
std::optional<HttpUrl> parse_http_url(const std::string& url);

}  // namespace steam::net
