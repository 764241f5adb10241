#include "steam/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string_view>

#include "steam/errors.hpp"
#include "steam/render.hpp"

namespace steam {

namespace {

struct CpuTimes {
    std::uint64_t active{0};
    std::uint64_t total{0};
    bool ok{false};
};

CpuTimes read_system_cpu() {
    std::ifstream in("/proc/stat");
    std::string label;
    CpuTimes out;
    if (!(in >> label) || label != "cpu") return out;
    std::uint64_t v[10] = {0};
    int n = 0;
    while (n < 10 && (in >> v[n])) ++n;
    if (n < 4) return out;
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) total += v[i];
    std::uint64_t idle = v[3] + (n > 4 ? v[4] : 0);  // idle + iowait
    out.active = total - idle;
    out.total = total;
    out.ok = true;
    return out;
}

CpuTimes read_process_cpu() {
    // "active" is this process's utime+stime; "total" is machine jiffies so
    // the ratio shares the system-scope denominator.
    CpuTimes machine = read_system_cpu();
    if (!machine.ok) return {};

    std::ifstream in("/proc/self/stat");
    std::string line;
    if (!std::getline(in, line)) return {};
    // Field 2 (comm) may contain spaces; skip past its closing parenthesis.
    std::size_t close = line.rfind(')');
    if (close == std::string::npos) return {};
    std::istringstream rest(line.substr(close + 1));
    std::string field;
    std::uint64_t utime = 0, stime = 0;
    // After ')': state is field 3; utime is field 14, stime field 15.
    for (int idx = 3; idx <= 15 && (rest >> field); ++idx) {
        if (idx == 14) utime = std::strtoull(field.c_str(), nullptr, 10);
        if (idx == 15) stime = std::strtoull(field.c_str(), nullptr, 10);
    }
    CpuTimes out;
    out.active = utime + stime;
    out.total = machine.total;
    out.ok = true;
    return out;
}

std::int64_t read_used_memory_kb() {
    std::ifstream in("/proc/meminfo");
    std::string key;
    std::int64_t value = 0;
    std::string unit;
    std::int64_t total = -1, available = -1;
    while (in >> key >> value) {
        std::getline(in, unit);
        if (key == "MemTotal:") total = value;
        if (key == "MemAvailable:") available = value;
        if (total >= 0 && available >= 0) break;
    }
    if (total < 0 || available < 0) return -1;
    return total - available;
}

}  // namespace

CpuMemSampler::CpuMemSampler(CpuScope scope) : scope_(scope) {
    baseline_used_kb_ = read_used_memory_kb();
}

double CpuMemSampler::cpu() {
    CpuTimes now = scope_ == CpuScope::System ? read_system_cpu() : read_process_cpu();
    if (!now.ok) {
        have_prev_ = false;
        return -1.0;
    }
    if (!have_prev_) {
        prev_active_ = now.active;
        prev_total_ = now.total;
        have_prev_ = true;
        return -1.0;
    }
    std::uint64_t d_total = now.total - prev_total_;
    std::uint64_t d_active = now.active - prev_active_;
    prev_active_ = now.active;
    prev_total_ = now.total;
    if (d_total == 0) return -1.0;  // clock did not tick between samples
    double pct = 100.0 * static_cast<double>(d_active) / static_cast<double>(d_total);
    return std::clamp(pct, 0.0, 100.0);
}

double CpuMemSampler::memory_kb() {
    std::int64_t used = read_used_memory_kb();
    if (used < 0 || baseline_used_kb_ < 0) return -1.0;
    std::int64_t delta = used - baseline_used_kb_;
    return delta > 0 ? static_cast<double>(delta) : 0.0;
}

BenchRecorder::BenchRecorder(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::trunc | std::ios::binary);
    if (!out_) {
        warning_ = "benchmark log '" + path + "' is not writable; recording disabled";
        return;
    }
    out_ << header() << '\n';
    enabled_ = true;
}

BenchRecorder::~BenchRecorder() { flush(); }

std::string BenchRecorder::header() {
    return "#packet_id\tt_input_us\tt_processing_us\tt_output_us\tt_total_us\t"
           "cpu_pct\tmem_kb\tbytes_in\tbytes_out";
}

std::string BenchRecorder::format_line(const MetricRecord& r) {
    std::string line;
    line += std::to_string(r.packet_id);
    line += '\t';
    line += std::to_string(r.t_input_us);
    line += '\t';
    line += std::to_string(r.t_processing_us);
    line += '\t';
    line += std::to_string(r.t_output_us);
    line += '\t';
    line += std::to_string(r.t_total_us);
    line += '\t';
    line += render_number(r.cpu_pct);
    line += '\t';
    line += render_number(r.mem_kb);
    line += '\t';
    line += std::to_string(r.bytes_in);
    line += '\t';
    line += std::to_string(r.bytes_out);
    return line;
}

void BenchRecorder::record(const MetricRecord& record) {
    records_.push_back(record);
    if (!enabled_) return;
    out_ << format_line(record) << '\n';
    if (++unflushed_ >= 100) {
        out_.flush();
        unflushed_ = 0;
    }
    if (!out_) {
        enabled_ = false;
        warning_ = "benchmark log write failed; recording disabled";
    }
}

void BenchRecorder::flush() {
    if (enabled_ && out_.is_open()) {
        out_.flush();
        unflushed_ = 0;
    }
}

std::vector<MetricRecord> read_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open benchmark log '" + path + "'");

    std::vector<MetricRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string_view> fields;
        std::string_view view(line);
        std::size_t start = 0;
        for (;;) {
            std::size_t tab = view.find('\t', start);
            if (tab == std::string_view::npos) {
                fields.push_back(view.substr(start));
                break;
            }
            fields.push_back(view.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 9) {
            throw ReportError("malformed benchmark log line: '" + line + "'");
        }

        auto parse_u64 = [&](std::string_view f) {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw ReportError("malformed benchmark log line: '" + line + "'");
            }
            return v;
        };
        auto parse_f64 = [&](std::string_view f) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw ReportError("malformed benchmark log line: '" + line + "'");
            }
            return v;
        };

        MetricRecord r;
        r.packet_id = parse_u64(fields[0]);
        r.t_input_us = parse_u64(fields[1]);
        r.t_processing_us = parse_u64(fields[2]);
        r.t_output_us = parse_u64(fields[3]);
        r.t_total_us = parse_u64(fields[4]);
        r.cpu_pct = parse_f64(fields[5]);
        r.mem_kb = parse_f64(fields[6]);
        r.bytes_in = parse_u64(fields[7]);
        r.bytes_out = parse_u64(fields[8]);
        out.push_back(r);
    }
    if (out.empty()) throw ReportError("benchmark log '" + path + "' holds no records");
    return out;
}

double quantile(std::vector<double> xs, double p) {
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double h = static_cast<double>(xs.size() - 1) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= xs.size()) return xs.back();
    double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

MetricSummary summarize_metric(const std::vector<double>& xs) {
    MetricSummary out;
    if (xs.empty()) return out;
    out.minimum = *std::min_element(xs.begin(), xs.end());
    out.maximum = *std::max_element(xs.begin(), xs.end());
    double sum = 0;
    for (double x : xs) sum += x;
    out.average = sum / static_cast<double>(xs.size());
    out.median = quantile(xs, 0.5);
    out.q1 = quantile(xs, 0.25);
    out.q3 = quantile(xs, 0.75);
    return out;
}

double ratio_percent(std::uint64_t bytes_out, std::uint64_t bytes_in) {
    if (bytes_in == 0) return 0.0;
    return 100.0 * static_cast<double>(bytes_out) / static_cast<double>(bytes_in);
}

BenchSummary summarize(const std::vector<MetricRecord>& records) {
    if (records.empty()) throw ReportError("no benchmark records to summarize");

    BenchSummary out;
    out.packets = records.size();

    std::vector<double> t_in, t_proc, t_out, t_total, cpu, mem;
    t_in.reserve(records.size());
    std::uint64_t t_total_sum = 0;
    for (const auto& r : records) {
        t_in.push_back(static_cast<double>(r.t_input_us));
        t_proc.push_back(static_cast<double>(r.t_processing_us));
        t_out.push_back(static_cast<double>(r.t_output_us));
        t_total.push_back(static_cast<double>(r.t_total_us));
        t_total_sum += r.t_total_us;
        if (r.cpu_pct >= 0) cpu.push_back(r.cpu_pct);
        if (r.mem_kb >= 0) mem.push_back(r.mem_kb);
        out.bytes_in_total += r.bytes_in;
        out.bytes_out_total += r.bytes_out;
    }

    out.t_input = summarize_metric(t_in);
    out.t_processing = summarize_metric(t_proc);
    out.t_output = summarize_metric(t_out);
    out.t_total = summarize_metric(t_total);
    out.cpu = summarize_metric(cpu);
    out.mem = summarize_metric(mem);
    out.ratio_pct = ratio_percent(out.bytes_out_total, out.bytes_in_total);

    if (records.size() >= 2 && t_total_sum > 0) {
        // Mean per-packet cost is the reciprocal of sustained throughput.
        out.throughput_pps =
            1e6 * static_cast<double>(records.size()) / static_cast<double>(t_total_sum);
    }
    return out;
}

namespace {

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

void metric_row(std::string& out, const char* name, const MetricSummary& m,
                int precision) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-16s %12s %12s %12s %12s %12s %12s\n", name,
                  fixed(m.minimum, precision).c_str(), fixed(m.q1, precision).c_str(),
                  fixed(m.median, precision).c_str(), fixed(m.average, precision).c_str(),
                  fixed(m.q3, precision).c_str(), fixed(m.maximum, precision).c_str());
    out += buf;
}

}  // namespace

std::string format_report(const BenchSummary& s) {
    std::string out;
    out += "packets: " + std::to_string(s.packets) + "\n\n";
    char head[256];
    std::snprintf(head, sizeof(head), "%-16s %12s %12s %12s %12s %12s %12s\n", "metric",
                  "minimum", "1st quartile", "median", "average", "3rd quartile",
                  "maximum");
    out += head;
    metric_row(out, "t_input_us", s.t_input, 0);
    metric_row(out, "t_processing_us", s.t_processing, 0);
    metric_row(out, "t_output_us", s.t_output, 0);
    metric_row(out, "t_total_us", s.t_total, 0);
    metric_row(out, "cpu_pct", s.cpu, 3);
    metric_row(out, "mem_kb", s.mem, 1);
    out += "\nbytes_in: " + std::to_string(s.bytes_in_total);
    out += "\nbytes_out: " + std::to_string(s.bytes_out_total);
    out += "\noutput/input ratio: " + fixed(s.ratio_pct, 2) + "%\n";
    if (s.throughput_pps) {
        out += "throughput: " + fixed(*s.throughput_pps, 2) + " packets/s\n";
    }
    return out;
}

}  // namespace steam
