#include "steam/pipeline.hpp"

#include <chrono>
#include <thread>

#include "steam/errors.hpp"
#include "steam/frame_parser.hpp"
#include "steam/render.hpp"

namespace steam {

namespace {

std::int64_t monotonic_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& config)
    : config_(config),
      window_(config.batchlen),
      functions_(FunctionSet::build(config.functions, config.parser.columns,
                                    config.batchlen)),
      bench_(config.bench_log),
      sampler_(config.cpu_scope) {
    config_.parser.validate();

    std::vector<std::string> universe = config_.parser.columns;
    for (const auto& id : functions_.result_ids()) universe.push_back(id);

    for (const auto& spec : functions_.specs()) result_formats_.push_back(spec.format);

    for (const auto& spec : config_.endpoints) {
        endpoints_.push_back(Endpoint::build(spec, universe));
    }
}

void Pipeline::process_frame(const Frame& frame) {
    ++packets_in_;
    bytes_in_ += frame.raw_bytes;

    MetricRecord record;
    record.packet_id = packets_in_;
    record.bytes_in = frame.raw_bytes;

    std::int64_t t0 = monotonic_ns();
    DataPacket packet;
    bool parsed = true;
    try {
        packet = parse_frame(config_.parser, frame.text, frame.arrival_ns);
        packet.set_raw_bytes(frame.raw_bytes);
    } catch (const FrameArityError&) {
        parsed = false;
    }
    std::int64_t t1 = monotonic_ns();
    record.t_input_us = input_time_.add_ns(t1 - t0);

    if (!parsed) {
        ++packets_dropped_;
        record.t_total_us = record.t_input_us;
        record.cpu_pct = sampler_.cpu();
        record.mem_kb = sampler_.memory_kb();
        bench_.record(record);
        return;
    }

    window_.push(std::move(packet));
    auto results = functions_.evaluate(window_, window_.newest(), &eval_stats_);
    DataPacket enriched = enrich(window_.newest(), results, result_formats_);
    std::int64_t t2 = monotonic_ns();
    record.t_processing_us = processing_time_.add_ns(t2 - t1);

    std::uint64_t out = dispatch(endpoints_, enriched, &eval_stats_);
    std::int64_t t3 = monotonic_ns();
    record.t_output_us = output_time_.add_ns(t3 - t2);

    bytes_out_ += out;
    record.bytes_out = out;
    record.t_total_us = record.t_input_us + record.t_processing_us + record.t_output_us;
    record.cpu_pct = sampler_.cpu();
    record.mem_kb = sampler_.memory_kb();
    bench_.record(record);
}

RunSummary Pipeline::run(std::atomic<bool>& stop) {
    auto started = std::chrono::steady_clock::now();

    FrameQueue queue(config_.queue_capacity);
    std::exception_ptr reader_error;

    std::thread reader([&] {
        try {
            run_input(config_.input, stop, [&](Frame frame) { queue.push(std::move(frame)); });
        } catch (...) {
            reader_error = std::current_exception();
        }
        queue.close();
    });

    while (auto frame = queue.pop()) {
        process_frame(*frame);
    }
    reader.join();

    flush();
    wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  started)
                        .count();

    if (reader_error) std::rethrow_exception(reader_error);
    return summary();
}

RunSummary Pipeline::summary() const {
    RunSummary out;
    out.packets_in = packets_in_;
    out.packets_dropped = packets_dropped_;
    out.bytes_in = bytes_in_;
    out.bytes_out = bytes_out_;
    for (const auto& ep : endpoints_) out.endpoints.push_back(ep->stats());
    out.eval = eval_stats_;
    out.wall_seconds = wall_seconds_;
    out.bench_warning = bench_.warning();
    return out;
}

void Pipeline::flush() {
    for (auto& ep : endpoints_) ep->flush();
    bench_.flush();
}

}  // namespace steam
