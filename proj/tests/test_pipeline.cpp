// Pipeline and configuration tests: loading the reference configs, collected
// validation diagnostics, layer ordering, drop accounting, run() lifecycle,
// and an independent re-scan of a generated stream as the event oracle.
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "steam/bench.hpp"
#include "steam/config.hpp"
#include "steam/errors.hpp"
#include "steam/pipeline.hpp"
#include "steam/sim.hpp"

using namespace steam;
namespace fs = std::filesystem;

namespace {

/// Scratch directory wiped on scope exit.
struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("steam_test_pipe_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

Frame make_frame(const std::string& text, std::int64_t arrival_ns = 0) {
    Frame f;
    f.text = text;
    f.arrival_ns = arrival_ns;
    f.raw_bytes = text.size() + 1;
    return f;
}

std::string replaced(std::string text, const std::string& needle, const std::string& with) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), with);
        pos += with.size();
    }
    return text;
}

bool any_issue_contains(const ConfigError& e, const std::string& needle) {
    for (const auto& issue : e.issues()) {
        if (issue.find(needle) != std::string::npos) return true;
    }
    return false;
}

/// Multi-sensor shaped pipeline: three per-sensor slopes plus a disagreement
/// equation, one unconditional JSON file endpoint at @CHART@.
std::string multi_shape_config(const TempDir& dir, const std::string& extra_endpoints = "") {
    std::string text = R"({
      "steam": 1,
      "batchlen": 20,
      "input": { "kind": "file", "path": "@INPUT@" },
      "parser": {
        "separator": "\t",
        "columns": ["id", "timestamp", "unit", "s1", "s2", "s3"],
        "types": { "timestamp": "text", "unit": "text" }
      },
      "functions": [
        { "kind": "slope", "id": "s1_slope", "batchlen": 2, "attribute": "s1", "format": "{:.1f}" },
        { "kind": "slope", "id": "s2_slope", "batchlen": 2, "attribute": "s2", "format": "{:.1f}" },
        { "kind": "slope", "id": "s3_slope", "batchlen": 2, "attribute": "s3", "format": "{:.1f}" },
        { "kind": "equation", "id": "slope_disagree",
          "equation": "max(s1_slope, s2_slope, s3_slope) > 0.1 and min(s1_slope, s2_slope, s3_slope) < -0.1" }
      ],
      "endpoints": [
        { "id": "chart", "kind": "file", "path": "@CHART@", "format": "json" }@EXTRA@
      ]
    })";
    text = replaced(text, "@INPUT@", dir.file("stream.tsv"));
    text = replaced(text, "@CHART@", dir.file("chart.json"));
    text = replaced(text, "@EXTRA@", extra_endpoints);
    return text;
}

RunSummary run_to_eof(Pipeline& pipe) {
    std::atomic<bool> stop{false};
    return pipe.run(stop);
}

}  // namespace

TEST_CASE("reference configs load and describe the documented pipelines") {
    SUBCASE("single-sensor control-band config") {
        PipelineConfig cfg = load_config(std::string(TEST_CONFIG_DIR) + "/one_sensor.json");
        CHECK(cfg.batchlen == 20);
        CHECK(cfg.input.kind == InputKind::Tcp);
        CHECK(cfg.input.port == 5000);
        REQUIRE(cfg.parser.columns.size() == 4);
        CHECK(cfg.parser.columns[3] == "value");

        REQUIRE(cfg.functions.size() == 4);
        // The first two carry no explicit id; loading must fill in the kind
        // name so endpoints can reference them.
        CHECK(cfg.functions[0].id == "mean");
        CHECK(cfg.functions[1].id == "stdev");
        CHECK(cfg.functions[2].id == "upper");
        CHECK(cfg.functions[3].id == "lower");

        REQUIRE(cfg.endpoints.size() == 5);
        CHECK(cfg.endpoints[0].id == "ep_data");
        CHECK(cfg.endpoints[0].kind == EndpointKind::Http);
        CHECK(cfg.endpoints[0].format == FormatKind::Json);
        CHECK(cfg.endpoints[3].kind == EndpointKind::File);
        CHECK(cfg.endpoints[3].format == FormatKind::Message);
        CHECK(cfg.endpoints[3].condition.kind == ConditionKind::Threshold);
    }

    SUBCASE("multi-sensor slope config") {
        PipelineConfig cfg = load_config(std::string(TEST_CONFIG_DIR) + "/multi_sensor.json");
        REQUIRE(cfg.parser.columns.size() == 6);
        REQUIRE(cfg.functions.size() == 4);
        CHECK(cfg.functions[0].id == "s1_slope");
        CHECK(cfg.functions[0].batchlen == 2);
        CHECK(cfg.functions[3].id == "slope_disagree");
        REQUIRE(cfg.endpoints.size() == 4);
        CHECK(cfg.endpoints[2].condition.kind == ConditionKind::MissingValue);
        CHECK(cfg.endpoints[3].condition.kind == ConditionKind::Equation);
    }

    SUBCASE("missing config file is a startup error, not a validation failure") {
        CHECK_THROWS_AS(load_config("/no/such/steam/config.json"), IoError);
    }
}

TEST_CASE("configuration problems are collected into one report") {
    const std::string broken = R"({
      "steam": 1,
      "batchlen": 0,
      "parser": { "columns": ["id", "value"] },
      "functions": [ { "kind": "sliding_sum" } ],
      "endpoints": [
        { "kind": "file", "path": "x.tsv", "format": "message", "template": "Value {nope}" }
      ]
    })";
    try {
        parse_config(broken);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues().size() >= 4);
        CHECK(any_issue_contains(e, "batchlen"));
        CHECK(any_issue_contains(e, "sliding_sum"));
        CHECK(any_issue_contains(e, "'input' is required"));
        CHECK(any_issue_contains(e, "nope"));
    }

    SUBCASE("equations may only reference declared names") {
        const std::string cfg = R"({
          "steam": 1,
          "batchlen": 20,
          "input": { "kind": "file", "path": "in.tsv" },
          "parser": { "columns": ["id", "value"] },
          "functions": [ { "kind": "equation", "id": "bad", "equation": "pressure * 2" } ],
          "endpoints": [ { "kind": "file", "path": "x.tsv", "format": "tsv" } ]
        })";
        try {
            parse_config(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(any_issue_contains(e, "references unknown name 'pressure'"));
        }
    }

    SUBCASE("malformed JSON is a validation failure") {
        CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    }

    SUBCASE("version header is required") {
        try {
            parse_config(R"({"batchlen": 20})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(any_issue_contains(e, "version"));
        }
    }
}

TEST_CASE("validation is side-effect free; binding is not") {
    TempDir dir("sidefx");
    std::string text = multi_shape_config(dir);
    text = replaced(text, dir.file("chart.json"), "/root/steam_no_such_dir_zz/chart.json");

    // Static validation accepts the config without touching the path...
    PipelineConfig cfg = parse_config(text);
    CHECK_FALSE(fs::exists("/root/steam_no_such_dir_zz"));

    // ...while binding it tries to open the file and fails loudly.
    CHECK_THROWS_AS(Pipeline{cfg}, IoError);

    SUBCASE("an unwritable benchmark log degrades to a warning instead") {
        PipelineConfig ok = parse_config(multi_shape_config(dir));
        ok.bench_log = "/root/steam_no_such_dir_zz/bench.tsv";
        Pipeline pipe(ok);  // must not throw
        pipe.process_frame(make_frame("1\t2021-01-01T00:00:01Z\tC\t1.0\t5.0\t9.0"));
        RunSummary sum = pipe.summary();
        CHECK(sum.packets_in == 1);
        CHECK_FALSE(sum.bench_warning.empty());
        CHECK(pipe.bench_records().size() == 1);  // in-memory metrics still collected
    }
}

TEST_CASE("a frame flows through parse, window, functions, enrich, dispatch in order") {
    TempDir dir("layers");
    Pipeline pipe(parse_config(multi_shape_config(dir)));

    pipe.process_frame(make_frame("1\t2021-01-01T00:00:01Z\tC\t1.0\t5.0\t9.0"));
    pipe.process_frame(make_frame("2\t2021-01-01T00:00:02Z\tC\t2.0\t4.0\t9.5"));
    pipe.flush();

    std::istringstream chart(slurp(dir.file("chart.json")));
    std::string line1, line2;
    REQUIRE(std::getline(chart, line1));
    REQUIRE(std::getline(chart, line2));

    // Packet 1: single sample per slope slice, so every derived column is null.
    CHECK(line1 ==
          R"({"id": 1, "timestamp": "2021-01-01T00:00:01Z", "unit": "C", "s1": 1, "s2": 5, "s3": 9, )"
          R"("s1_slope": null, "s2_slope": null, "s3_slope": null, "slope_disagree": null})");
    // Packet 2: slopes over the two-sample slices, formatted to one decimal,
    // and the disagreement flag coerced to 1.
    CHECK(line2 ==
          R"({"id": 2, "timestamp": "2021-01-01T00:00:02Z", "unit": "C", "s1": 2, "s2": 4, "s3": 9.5, )"
          R"("s1_slope": 1.0, "s2_slope": -1.0, "s3_slope": 0.5, "slope_disagree": 1})");

    RunSummary sum = pipe.summary();
    CHECK(sum.packets_in == 2);
    CHECK(sum.packets_dropped == 0);
    REQUIRE(sum.endpoints.size() == 1);
    CHECK(sum.endpoints[0].id == "chart");
    CHECK(sum.endpoints[0].events == 2);
    CHECK(sum.endpoints[0].bytes_out == fs::file_size(dir.file("chart.json")));
}

TEST_CASE("window state carries across packets") {
    TempDir dir("windowed");
    const std::string cfg = replaced(replaced(R"({
      "steam": 1,
      "batchlen": 20,
      "input": { "kind": "file", "path": "@INPUT@" },
      "parser": { "columns": ["id", "value"] },
      "functions": [ { "kind": "mean", "batchlen": 2 } ],
      "endpoints": [ { "id": "chart", "kind": "file", "path": "@CHART@", "format": "json" } ]
    })", "@INPUT@", dir.file("stream.tsv")), "@CHART@", dir.file("chart.json"));

    Pipeline pipe{parse_config(cfg)};
    pipe.process_frame(make_frame("1\t1"));
    pipe.process_frame(make_frame("2\t2"));
    pipe.process_frame(make_frame("3\t3"));
    pipe.flush();

    std::istringstream chart(slurp(dir.file("chart.json")));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(chart, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    // The two-packet mean slice sees [1], [1,2], [2,3] as the window slides.
    CHECK(lines[0] == R"({"id": 1, "value": 1, "mean": 1})");
    CHECK(lines[1] == R"({"id": 2, "value": 2, "mean": 1.5})");
    CHECK(lines[2] == R"({"id": 3, "value": 3, "mean": 2.5})");
}

TEST_CASE("malformed frames are dropped, counted, and never dispatched") {
    TempDir dir("drops");
    Pipeline pipe(parse_config(multi_shape_config(dir)));

    pipe.process_frame(make_frame("1\t2021-01-01T00:00:01Z\tC\t1.0\t5.0\t9.0"));
    pipe.process_frame(make_frame("2\t2021-01-01T00:00:02Z\tC\t2.0"));  // 4 fields, not 6
    pipe.process_frame(make_frame("3\t2021-01-01T00:00:03Z\tC\t3.0\t3.0\t9.0"));
    pipe.flush();

    RunSummary sum = pipe.summary();
    CHECK(sum.packets_in == 3);
    CHECK(sum.packets_dropped == 1);
    CHECK(sum.endpoints[0].events == 2);  // only the two well-formed frames

    std::istringstream chart(slurp(dir.file("chart.json")));
    std::string line;
    std::size_t delivered = 0;
    while (std::getline(chart, line)) {
        ++delivered;
        CHECK(line.find("\"id\": 2") == std::string::npos);
    }
    CHECK(delivered == 2);

    // The benchmark trace still carries one record per arriving frame; the
    // dropped one never reaches the processing or output layers.
    REQUIRE(pipe.bench_records().size() == 3);
    const MetricRecord& dropped = pipe.bench_records()[1];
    CHECK(dropped.packet_id == 2);
    CHECK(dropped.t_processing_us == 0);
    CHECK(dropped.t_output_us == 0);
    CHECK(dropped.bytes_out == 0);
    CHECK(dropped.t_total_us == dropped.t_input_us);
}

TEST_CASE("a missing field fires the missing-value endpoint and still charts") {
    TempDir dir("missing");
    const std::string extra = replaced(R"(,
        { "id": "alerts", "kind": "file", "path": "@ALERTS@", "format": "message",
          "condition": { "kind": "missing_value", "columns": ["s1", "s2", "s3"] },
          "template": "{timestamp} - Value missing" })", "@ALERTS@", dir.file("alerts.txt"));
    Pipeline pipe(parse_config(multi_shape_config(dir, extra)));

    pipe.process_frame(make_frame("1\t2021-01-01T00:00:01Z\tC\t1.0\t\t9.0"));  // s2 empty
    pipe.process_frame(make_frame("2\t2021-01-01T00:00:02Z\tC\t2.0\t4.0\t9.5"));
    pipe.flush();

    RunSummary sum = pipe.summary();
    REQUIRE(sum.endpoints.size() == 2);
    CHECK(sum.endpoints[0].events == 2);  // chart is unconditional
    CHECK(sum.endpoints[1].events == 1);  // alert only for the gappy frame
    // Message payloads are written verbatim — no delimiter is appended.
    CHECK(slurp(dir.file("alerts.txt")) == "2021-01-01T00:00:01Z - Value missing");
    CHECK(sum.bytes_out == fs::file_size(dir.file("chart.json")) +
                               fs::file_size(dir.file("alerts.txt")));
}

TEST_CASE("run() ingests a stream file end to end with exact byte accounting") {
    TempDir dir("run");
    // Constant integer values: mean == value and stdev == 0 exactly, so the
    // strict upper-band comparison can never fire.
    std::string stream;
    for (int i = 1; i <= 100; ++i) {
        stream += std::to_string(i) + "\t2021-01-01T00:00:0" + std::to_string(i % 10) +
                  "Z\tC\t8\t8\t8\n";
    }
    write_file(dir.file("stream.tsv"), stream);

    const std::string extra = replaced(R"(,
        { "id": "alerts", "kind": "file", "path": "@ALERTS@", "format": "message",
          "condition": { "kind": "equation", "expression": "slope_disagree" },
          "template": "{timestamp} - Slope disagreement" })", "@ALERTS@", dir.file("alerts.txt"));
    std::string text = multi_shape_config(dir, extra);
    PipelineConfig cfg = parse_config(text);
    cfg.bench_log = dir.file("bench.tsv");

    Pipeline pipe(cfg);
    RunSummary sum = run_to_eof(pipe);

    CHECK(sum.packets_in == 100);
    CHECK(sum.packets_dropped == 0);
    CHECK(sum.bytes_in == fs::file_size(dir.file("stream.tsv")));
    CHECK(sum.endpoints[0].events == 100);
    CHECK(sum.endpoints[1].events == 0);  // flat stream: no disagreement ever
    CHECK(fs::file_size(dir.file("alerts.txt")) == 0);
    CHECK(sum.bytes_out == fs::file_size(dir.file("chart.json")));
    CHECK(sum.wall_seconds > 0.0);

    // One benchmark row per packet, readable by the report side.
    std::vector<MetricRecord> rows = read_log(dir.file("bench.tsv"));
    REQUIRE(rows.size() == 100);
    CHECK(rows.front().packet_id == 1);
    CHECK(rows.back().packet_id == 100);
    std::uint64_t bytes_total = 0;
    for (const auto& r : rows) bytes_total += r.bytes_in;
    CHECK(bytes_total == sum.bytes_in);
}

TEST_CASE("stopping mid-stream leaves a consistent partial record") {
    TempDir dir("stop");
    std::string stream;
    for (int i = 1; i <= 400; ++i) stream += std::to_string(i) + "\t1\t1\t1\t1\t1\n";
    write_file(dir.file("stream.tsv"), stream);

    std::string text = multi_shape_config(dir);
    text = replaced(text, "\"path\": \"" + dir.file("stream.tsv") + "\"",
                    "\"path\": \"" + dir.file("stream.tsv") + "\", \"rate\": 50");
    PipelineConfig cfg = parse_config(text);
    REQUIRE(cfg.input.rate == 50.0);
    cfg.bench_log = dir.file("bench.tsv");

    Pipeline pipe(cfg);
    std::atomic<bool> stop{false};
    std::thread stopper([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
        stop = true;
    });
    RunSummary sum = pipe.run(stop);
    stopper.join();

    // ~25 packets at 50/s; the exact count is timing dependent but the run
    // must have started and must not have finished.
    CHECK(sum.packets_in > 0);
    CHECK(sum.packets_in < 400);
    CHECK(sum.bytes_in < fs::file_size(dir.file("stream.tsv")));
    CHECK(sum.wall_seconds > 0.4);

    // Every processed packet has a complete benchmark row on disk.
    std::vector<MetricRecord> rows = read_log(dir.file("bench.tsv"));
    CHECK(rows.size() == sum.packets_in);
}

TEST_CASE("upper-band events match an independent scan of the stream") {
    TempDir dir("oracle");

    // Deterministic scenario with injected spikes well outside the band.
    ScenarioSpec scenario;
    scenario.seed = 11;
    scenario.sensors = 1;
    scenario.duration = 800;
    scenario.base = 20.0;
    scenario.amplitude = 0.5;
    scenario.period = 600.0;
    scenario.sigma = 0.1;
    scenario.decimals = 2;
    scenario.spike.probability = 0.02;
    scenario.spike.magnitude = 5.0;
    scenario.validate();

    std::ofstream stream_out(dir.file("stream.tsv"), std::ios::binary);
    generate(scenario, [&](std::string_view line) { stream_out << line; }, nullptr);
    stream_out.close();

    const std::string cfg_text = replaced(replaced(R"({
      "steam": 1,
      "batchlen": 20,
      "input": { "kind": "file", "path": "@INPUT@" },
      "parser": {
        "columns": ["id", "timestamp", "unit", "value"],
        "types": { "timestamp": "text", "unit": "text" }
      },
      "functions": [
        { "kind": "mean" },
        { "kind": "stdev" },
        { "kind": "equation", "id": "upper", "equation": "mean + 3 * stdev" }
      ],
      "endpoints": [
        { "id": "above", "kind": "file", "path": "@OUT@", "format": "message",
          "condition": { "kind": "threshold", "column": "value", "upper": "upper" },
          "template": "{timestamp} - Value {value:.2f} above {upper:.2f}" }
      ]
    })", "@INPUT@", dir.file("stream.tsv")), "@OUT@", dir.file("above.txt"));

    Pipeline pipe(parse_config(cfg_text));
    RunSummary sum = run_to_eof(pipe);
    CHECK(sum.packets_in == 800);

    // Offline oracle: replay the stored stream through the same definition of
    // the band — mean and population stdev over the trailing 20 samples
    // (current included), fire when the sample strictly exceeds mean + 3s.
    std::ifstream stream_in(dir.file("stream.tsv"));
    std::string line;
    std::deque<double> window;
    std::uint64_t expected = 0;
    while (std::getline(stream_in, line)) {
        double v = std::stod(line.substr(line.rfind('\t') + 1));
        window.push_back(v);
        if (window.size() > 20) window.pop_front();
        double m = 0.0;
        for (double x : window) m += x;
        m /= static_cast<double>(window.size());
        double acc = 0.0;
        for (double x : window) acc += (x - m) * (x - m);
        double upper = m + 3.0 * std::sqrt(acc / static_cast<double>(window.size()));
        if (v > upper) ++expected;
    }

    CHECK(expected >= 5);  // the scenario must actually exercise the band
    CHECK(sum.endpoints[0].events == expected);
}

TEST_CASE("identical inputs produce byte-identical outputs") {
    TempDir dir("deterministic");

    ScenarioSpec scenario;
    scenario.seed = 4;
    scenario.sensors = 3;
    scenario.duration = 120;
    scenario.base = 8.2;
    scenario.amplitude = 0.3;
    scenario.period = 60.0;
    scenario.sigma = 0.05;
    scenario.decimals = 1;
    scenario.missing_probability = 0.05;
    scenario.validate();

    std::ofstream stream_out(dir.file("stream.tsv"), std::ios::binary);
    generate(scenario, [&](std::string_view line) { stream_out << line; }, nullptr);
    stream_out.close();

    auto run_once = [&](const std::string& tag) {
        TempDir out("deterministic_" + tag);
        std::string text = multi_shape_config(out);
        text = replaced(text, out.file("stream.tsv"), dir.file("stream.tsv"));
        PipelineConfig cfg = parse_config(text);
        cfg.bench_log = out.file("bench.tsv");
        Pipeline pipe(cfg);
        RunSummary sum = run_to_eof(pipe);
        struct Result {
            RunSummary summary;
            std::string chart;
            std::vector<MetricRecord> bench;
        };
        return Result{sum, slurp(out.file("chart.json")), read_log(out.file("bench.tsv"))};
    };

    auto a = run_once("a");
    auto b = run_once("b");

    CHECK(a.summary.packets_in == 120);
    CHECK(a.summary.packets_in == b.summary.packets_in);
    CHECK(a.summary.bytes_in == b.summary.bytes_in);
    CHECK(a.summary.bytes_out == b.summary.bytes_out);
    CHECK(a.chart == b.chart);  // byte-identical payload stream

    // Benchmark rows agree on everything except wall-clock measurements.
    REQUIRE(a.bench.size() == b.bench.size());
    for (std::size_t i = 0; i < a.bench.size(); ++i) {
        CHECK(a.bench[i].packet_id == b.bench[i].packet_id);
        CHECK(a.bench[i].bytes_in == b.bench[i].bytes_in);
        CHECK(a.bench[i].bytes_out == b.bench[i].bytes_out);
    }
}
