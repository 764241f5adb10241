#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

namespace steam {

enum class InputKind : std::uint8_t { Tcp, File };

struct InputSpec {
    InputKind kind{InputKind::File};
    std::uint16_t port{0};   // tcp
    std::string path;        // file
    double rate{0.0};        // packets/s for file replay; 0 = unthrottled
};

/// One delimiter-stripped frame plus its arrival stamp and wire size.
struct Frame {
    std::string text;
    std::int64_t arrival_ns{0};
    std::uint64_t raw_bytes{0};  // frame length + the newline delimiter
};

struct InputSummary {
    std::uint64_t frames{0};
    std::uint64_t bytes_in{0};
};

/// Bounded FIFO handing frames from the reader thread to the pipeline
/// thread. push blocks when full (back-pressure); pop blocks until a frame
/// arrives or the queue is closed and drained.
class FrameQueue {
public:
    explicit FrameQueue(std::size_t capacity = 1024) : capacity_(capacity) {}

    void push(Frame frame);
    std::optional<Frame> pop();

    /// Wakes every waiter; subsequent pushes are dropped.
    void close();
    bool closed() const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<Frame> frames_;
    bool closed_{false};
};

/// Blocking frame source. Delivers newline-delimited frames to `on_frame` in
/// arrival order until EOF (file) or `stop` (both kinds). TCP serves one
/// client at a time and keeps listening across disconnects. Throws BindError
/// (tcp) or IoError (file) at startup.
InputSummary run_input(const InputSpec& spec, const std::atomic<bool>& stop,
                       const std::function<void(Frame)>& on_frame);

}  // namespace steam
