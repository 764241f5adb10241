#include "steam/input.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "steam/errors.hpp"
#include "steam/net.hpp"

namespace steam {

void FrameQueue::push(Frame frame) {
    std::unique_lock<std::mutex> lock(mutex_);
    not_full_.wait(lock, [this] { return frames_.size() < capacity_ || closed_; });
    if (closed_) return;
    frames_.push_back(std::move(frame));
    not_empty_.notify_one();
}

std::optional<Frame> FrameQueue::pop() {
    std::unique_lock<std::mutex> lock(mutex_);
    not_empty_.wait(lock, [this] { return !frames_.empty() || closed_; });
    if (frames_.empty()) return std::nullopt;
    Frame out = std::move(frames_.front());
    frames_.pop_front();
    not_full_.notify_one();
    return out;
}

void FrameQueue::close() {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
}

bool FrameQueue::closed() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return closed_;
}

namespace {

std::int64_t monotonic_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

InputSummary run_file_input(const InputSpec& spec, const std::atomic<bool>& stop,
                            const std::function<void(Frame)>& on_frame) {
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + spec.path + "'");

    InputSummary summary;
    auto next_due = std::chrono::steady_clock::now();
    const bool throttled = spec.rate > 0.0;
    const auto interval =
        throttled ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(1.0 / spec.rate))
                  : std::chrono::steady_clock::duration::zero();

    std::string line;
    while (!stop.load() && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (throttled) {
            // Sleep in slices so a stop request interrupts the pacing.
            while (!stop.load()) {
                auto now = std::chrono::steady_clock::now();
                if (now >= next_due) break;
                auto remaining = next_due - now;
                std::this_thread::sleep_for(
                    std::min(remaining, std::chrono::steady_clock::duration(
                                            std::chrono::milliseconds(20))));
            }
            if (stop.load()) break;
            next_due += interval;
        }
        Frame frame;
        frame.raw_bytes = line.size() + 1;
        frame.arrival_ns = monotonic_ns();
        frame.text = line;
        summary.frames += 1;
        summary.bytes_in += frame.raw_bytes;
        on_frame(std::move(frame));
    }
    return summary;
}

InputSummary run_tcp_input(const InputSpec& spec, const std::atomic<bool>& stop,
                           const std::function<void(Frame)>& on_frame) {
    net::Socket listener = net::tcp_listen(spec.port);  // throws BindError

    InputSummary summary;
    while (!stop.load()) {
        int ready = net::wait_readable(listener.fd(), 100);
        if (ready < 0) break;
        if (ready == 0) continue;
        int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd < 0) continue;
        net::Socket conn(fd);

        std::string buffer;
        char chunk[4096];
        while (!stop.load()) {
            int readable = net::wait_readable(conn.fd(), 100);
            if (readable < 0) break;
            if (readable == 0) continue;
            ssize_t n = ::recv(conn.fd(), chunk, sizeof(chunk), 0);
            if (n <= 0) break;  // disconnect: fall back to listening
            std::int64_t stamp = monotonic_ns();
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t start = 0;
            std::size_t nl;
            while ((nl = buffer.find('\n', start)) != std::string::npos) {
                std::string_view line(buffer.data() + start, nl - start);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                Frame frame;
                frame.raw_bytes = (nl - start) + 1;
                frame.arrival_ns = stamp;
                frame.text = std::string(line);
                summary.frames += 1;
                summary.bytes_in += frame.raw_bytes;
                on_frame(std::move(frame));
                start = nl + 1;
            }
            buffer.erase(0, start);
        }
    }
    return summary;
}

}  // namespace

InputSummary run_input(const InputSpec& spec, const std::atomic<bool>& stop,
                       const std::function<void(Frame)>& on_frame) {
    return spec.kind == InputKind::File ? run_file_input(spec, stop, on_frame)
                                        : run_tcp_input(spec, stop, on_frame);
}

}  // namespace steam
