#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace steam {

/// One benchmark sample per processed packet. cpu_pct/mem_kb use -1 as the
/// "no sample" sentinel (first packet, or platform query failure).
struct MetricRecord {
    std::uint64_t packet_id{0};
    std::uint64_t t_input_us{0};
    std::uint64_t t_processing_us{0};
    std::uint64_t t_output_us{0};
    std::uint64_t t_total_us{0};
    double cpu_pct{-1.0};
    double mem_kb{-1.0};
    std::uint64_t bytes_in{0};
    std::uint64_t bytes_out{0};
};

/// Converts a stream of nanosecond durations into whole-microsecond report
/// values without losing sub-microsecond remainders: each add_ns() returns
/// how much the running total's microsecond floor grew, so the reported
/// values always sum to floor(total_ns / 1000) even when individual
/// durations are well under a microsecond.
class DurationAccumulator {
public:
    std::uint64_t add_ns(std::int64_t delta_ns) {
        total_ns_ += delta_ns;
        auto total_us = static_cast<std::uint64_t>(total_ns_ / 1000);
        std::uint64_t increment = total_us - reported_us_;
        reported_us_ = total_us;
        return increment;
    }

private:
    std::int64_t total_ns_{0};
    std::uint64_t reported_us_{0};
};

/// Whether utilization covers the whole machine (the reference tooling's
/// semantics) or only this process.
enum class CpuScope : std::uint8_t { System, Process };

/// Interval CPU% and used-memory delta from /proc. The first cpu() call
/// establishes the baseline and reports -1.
class CpuMemSampler {
public:
    explicit CpuMemSampler(CpuScope scope = CpuScope::System);

    /// Utilization over the interval since the previous call, in [0,100];
    /// -1 when undefined (first call or read failure).
    double cpu();

    /// Used memory in kB relative to the baseline captured at construction,
    /// clamped at 0; -1 on read failure.
    double memory_kb();

private:
    CpuScope scope_;
    bool have_prev_{false};
    std::uint64_t prev_active_{0};
    std::uint64_t prev_total_{0};
    std::int64_t baseline_used_kb_{-1};
};

/// Buffered writer for the per-packet TSV log: `#`-prefixed header, one line
/// per record, flushed every 100 records and on flush()/destruction.
class BenchRecorder {
public:
    /// Empty path disables recording. A failed open disables recording and
    /// sets a warning (pipeline keeps running).
    explicit BenchRecorder(const std::string& path);
    ~BenchRecorder();

    void record(const MetricRecord& record);
    void flush();

    bool enabled() const { return enabled_; }
    const std::string& warning() const { return warning_; }
    const std::vector<MetricRecord>& records() const { return records_; }

    static std::string header();
    static std::string format_line(const MetricRecord& record);

private:
    std::ofstream out_;
    bool enabled_{false};
    std::string warning_;
    std::vector<MetricRecord> records_;
    std::size_t unflushed_{0};
};

/// Parses a TSV log back into records. Throws IoError when the file cannot
/// be read and ReportError when it holds no records.
std::vector<MetricRecord> read_log(const std::string& path);

/// min/max/mean/median/quartiles of one metric across records.
struct MetricSummary {
    double minimum{0}, maximum{0}, average{0}, median{0}, q1{0}, q3{0};
};

/// Linear-interpolation quantile (h = (n-1)p) over unsorted samples.
double quantile(std::vector<double> xs, double p);

MetricSummary summarize_metric(const std::vector<double>& xs);

struct BenchSummary {
    std::uint64_t packets{0};
    MetricSummary t_input, t_processing, t_output, t_total, cpu, mem;
    std::uint64_t bytes_in_total{0};
    std::uint64_t bytes_out_total{0};
    double ratio_pct{0};                       // Σout / Σin as percent
    std::optional<double> throughput_pps;      // absent for <2 packets
};

/// Aggregates a parsed log. Undefined (-1) CPU/memory samples are excluded
/// from their summaries. Throws ReportError on an empty record set.
BenchSummary summarize(const std::vector<MetricRecord>& records);

/// Σout/Σin as a percentage (the output/input ratio).
double ratio_percent(std::uint64_t bytes_out, std::uint64_t bytes_in);

/// Human-readable report of a summary (fixed layout, one metric per row).
std::string format_report(const BenchSummary& summary);

}  // namespace steam
