#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "steam/analytics.hpp"
#include "steam/bench.hpp"
#include "steam/config.hpp"
#include "steam/endpoint.hpp"
#include "steam/input.hpp"
#include "steam/window.hpp"

namespace steam {

/// End-of-run accounting across all layers.
struct RunSummary {
    std::uint64_t packets_in{0};
    std::uint64_t packets_dropped{0};
    std::uint64_t bytes_in{0};
    std::uint64_t bytes_out{0};
    std::vector<EndpointStats> endpoints;
    expr::EvalStats eval;
    double wall_seconds{0};
    std::string bench_warning;
};

/// The configured device: window + functions + endpoints + benchmark,
/// driving parse -> window -> analyze -> enrich -> dispatch per frame.
/// Single-threaded over process_frame; run() adds one reader thread feeding
/// a bounded queue.
class Pipeline {
public:
    /// Binds the config: compiles functions/conditions/templates, opens file
    /// endpoints and the benchmark log, prepares HTTP clients. Throws
    /// ConfigError/IoError on startup problems.
    explicit Pipeline(const PipelineConfig& config);

    /// Runs one frame through every layer and records its metrics.
    void process_frame(const Frame& frame);

    /// Consumes the configured input until EOF (file) or `stop` (tcp and
    /// file), then flushes endpoints and the benchmark log.
    RunSummary run(std::atomic<bool>& stop);

    /// Summary of everything processed so far (also valid after run()).
    RunSummary summary() const;

    /// Flushes endpoints and the benchmark log mid-run.
    void flush();

    const SlidingWindow& window() const { return window_; }
    const std::vector<MetricRecord>& bench_records() const { return bench_.records(); }

private:
    PipelineConfig config_;
    SlidingWindow window_;
    FunctionSet functions_;
    std::vector<std::optional<NumericFormat>> result_formats_;
    std::vector<std::unique_ptr<Endpoint>> endpoints_;
    BenchRecorder bench_;
    CpuMemSampler sampler_;
    expr::EvalStats eval_stats_;

    std::uint64_t packets_in_{0};
    std::uint64_t packets_dropped_{0};
    std::uint64_t bytes_in_{0};
    std::uint64_t bytes_out_{0};
    double wall_seconds_{0};

    // Per-layer nanosecond accumulators. Records carry integer microseconds;
    // reporting each packet as the growth of the accumulator's µs floor keeps
    // column totals exact even when per-packet work is far below 1 µs (plain
    // per-packet division would truncate every sample to zero).
    DurationAccumulator input_time_;
    DurationAccumulator processing_time_;
    DurationAccumulator output_time_;
};

}  // namespace steam
