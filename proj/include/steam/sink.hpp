#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "steam/net.hpp"

namespace steam {

/// Minimal HTTP server standing in for the dashboards a deployment would
/// publish to: accepts POSTs, stores each body in arrival order, answers 200,
/// and counts accepted connections (the connection-reuse observable).
class HttpSink {
public:
    /// Binds immediately (port 0 picks a free one) and serves on background
    /// threads. Throws BindError.
    explicit HttpSink(std::uint16_t port, std::string log_path = {});
    ~HttpSink();

    HttpSink(const HttpSink&) = delete;
    HttpSink& operator=(const HttpSink&) = delete;

    std::uint16_t port() const { return port_; }

    std::uint64_t connections_accepted() const { return connections_.load(); }
    std::uint64_t requests_received() const { return requests_.load(); }

    std::vector<std::string> bodies() const;

    /// Stops accepting, closes the listener, joins all handlers.
    void stop();

private:
    void accept_loop();
    void handle_connection(net::Socket conn);

    net::Socket listener_;
    std::uint16_t port_{0};
    std::string log_path_;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> connections_{0};
    std::atomic<std::uint64_t> requests_{0};

    mutable std::mutex mutex_;
    std::vector<std::string> bodies_;

    std::thread accept_thread_;
    std::vector<std::thread> handlers_;
    std::mutex handlers_mutex_;
};

}  // namespace steam
