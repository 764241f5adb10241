#include "steam/sink.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <fstream>

namespace steam {

HttpSink::HttpSink(std::uint16_t port, std::string log_path)
    : log_path_(std::move(log_path)) {
    listener_ = net::tcp_listen(port, &port_);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

HttpSink::~HttpSink() { stop(); }

void HttpSink::stop() {
    if (stopping_.exchange(true)) return;
    listener_.reset();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> handlers;
    {
        std::lock_guard<std::mutex> lock(handlers_mutex_);
        handlers.swap(handlers_);
    }
    for (auto& t : handlers) {
        if (t.joinable()) t.join();
    }
}

std::vector<std::string> HttpSink::bodies() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return bodies_;
}

void HttpSink::accept_loop() {
    while (!stopping_.load()) {
        int ready = net::wait_readable(listener_.fd(), 100);
        if (ready < 0) break;
        if (ready == 0) continue;
        int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd < 0) {
            if (stopping_.load()) break;
            continue;
        }
        ++connections_;
        std::lock_guard<std::mutex> lock(handlers_mutex_);
        handlers_.emplace_back([this, fd] { handle_connection(net::Socket(fd)); });
    }
}

void HttpSink::handle_connection(net::Socket conn) {
    std::string buffer;
    char chunk[4096];

    while (!stopping_.load()) {
        // Gather one full request head.
        std::size_t header_end;
        while ((header_end = buffer.find("\r\n\r\n")) == std::string::npos) {
            int ready = net::wait_readable(conn.fd(), 100);
            if (ready < 0) return;
            if (ready == 0) {
                if (stopping_.load()) return;
                continue;
            }
            ssize_t n = ::recv(conn.fd(), chunk, sizeof(chunk), 0);
            if (n <= 0) return;
            buffer.append(chunk, static_cast<std::size_t>(n));
        }

        std::string head = buffer.substr(0, header_end);
        std::string lower;
        lower.reserve(head.size());
        for (char c : head) {
            lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }

        std::size_t content_length = 0;
        if (std::size_t pos = lower.find("content-length:"); pos != std::string::npos) {
            content_length = std::strtoull(head.c_str() + pos + 15, nullptr, 10);
        }
        bool close_requested = lower.find("connection: close") != std::string::npos;

        std::size_t body_start = header_end + 4;
        while (buffer.size() - body_start < content_length) {
            int ready = net::wait_readable(conn.fd(), 100);
            if (ready < 0) return;
            if (ready == 0) {
                if (stopping_.load()) return;
                continue;
            }
            ssize_t n = ::recv(conn.fd(), chunk, sizeof(chunk), 0);
            if (n <= 0) return;
            buffer.append(chunk, static_cast<std::size_t>(n));
        }

        std::string body = buffer.substr(body_start, content_length);
        buffer.erase(0, body_start + content_length);
        ++requests_;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            bodies_.push_back(body);
            if (!log_path_.empty()) {
                std::ofstream log(log_path_, std::ios::app | std::ios::binary);
                log << body;
                if (body.empty() || body.back() != '\n') log << '\n';
            }
        }

        std::string response = "HTTP/1.1 200 OK\r\nContent-Length: 2\r\n";
        response += close_requested ? "Connection: close\r\n" : "Connection: keep-alive\r\n";
        response += "\r\nok";
        if (!net::send_all(conn.fd(), response)) return;
        if (close_requested) return;
    }
}

}  // namespace steam
