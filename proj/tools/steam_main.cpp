#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <string_view>
#include <thread>

#include <CLI11.hpp>

#include "steam/bench.hpp"
#include "steam/config.hpp"
#include "steam/errors.hpp"
#include "steam/net.hpp"
#include "steam/pipeline.hpp"
#include "steam/sim.hpp"
#include "steam/sink.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
    struct sigaction sa{};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
}

void print_run_summary(const steam::RunSummary& s) {
    std::cout << "packets_in\t" << s.packets_in << '\n'
              << "packets_dropped\t" << s.packets_dropped << '\n'
              << "bytes_in\t" << s.bytes_in << '\n'
              << "bytes_out\t" << s.bytes_out << '\n';
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", s.wall_seconds);
    std::cout << "wall_seconds\t" << wall << '\n';
    for (const auto& ep : s.endpoints) {
        std::cout << "endpoint\t" << ep.id << "\tevents=" << ep.events
                  << "\tbytes_out=" << ep.bytes_out << "\terrors=" << ep.errors << '\n';
    }
    if (s.eval.total() > 0) {
        std::cout << "eval_errors\ttype=" << s.eval.type_errors
                  << "\tdivide_by_zero=" << s.eval.divide_by_zero
                  << "\toverflow=" << s.eval.overflow << '\n';
    }
    if (!s.bench_warning.empty()) {
        std::cerr << "warning: " << s.bench_warning << '\n';
    }
}

int cmd_run(const std::string& config_path, const std::string& bench_override,
            double duration_s, const std::string& cpu_scope) {
    steam::PipelineConfig config = steam::load_config(config_path);
    if (!bench_override.empty()) config.bench_log = bench_override;
    if (cpu_scope == "process") {
        config.cpu_scope = steam::CpuScope::Process;
    } else if (cpu_scope == "system") {
        config.cpu_scope = steam::CpuScope::System;
    }

    steam::Pipeline pipeline(config);

    std::atomic<bool> finished{false};
    std::thread timer;
    if (duration_s > 0) {
        timer = std::thread([duration_s, &finished] {
            auto deadline = std::chrono::steady_clock::now() +
                            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(duration_s));
            while (!finished.load() && !g_stop.load() &&
                   std::chrono::steady_clock::now() < deadline) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            }
            if (!finished.load()) g_stop.store(true);
        });
    }

    steam::RunSummary summary = pipeline.run(g_stop);
    finished.store(true);
    if (timer.joinable()) timer.join();

    print_run_summary(summary);
    return 0;
}

int cmd_validate(const std::string& config_path) {
    steam::PipelineConfig config = steam::load_config(config_path);
    std::cout << "configuration valid: " << config.functions.size() << " function(s), "
              << config.endpoints.size() << " endpoint(s)\n";
    return 0;
}

int cmd_bench_report(const std::string& log_path) {
    auto records = steam::read_log(log_path);
    auto summary = steam::summarize(records);
    std::cout << steam::format_report(summary);
    return 0;
}

/// "tcp:HOST:PORT" or "file:PATH" -> an emit callback for the simulator.
std::function<void(std::string_view)> open_sink(const std::string& sink,
                                                steam::net::Socket& socket,
                                                std::ofstream& file) {
    if (sink.rfind("file:", 0) == 0) {
        std::string path = sink.substr(5);
        if (path.empty()) throw steam::ConfigError("sink file path is empty");
        file.open(path, std::ios::binary | std::ios::trunc);
        if (!file) throw steam::IoError("cannot open sink file '" + path + "'");
        return [&file](std::string_view frame) {
            file.write(frame.data(), static_cast<std::streamsize>(frame.size()));
            if (!file) throw steam::IoError("write to sink file failed");
        };
    }
    if (sink.rfind("tcp:", 0) == 0) {
        std::string rest = sink.substr(4);
        std::size_t colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
            throw steam::ConfigError("tcp sink must be tcp:host:port");
        }
        std::string host = rest.substr(0, colon);
        int port = 0;
        try {
            port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            port = 0;
        }
        if (port <= 0 || port > 65535) {
            throw steam::ConfigError("tcp sink port must be in [1, 65535]");
        }

        // The receiving pipeline may still be starting; retry briefly.
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
        while (true) {
            socket = steam::net::tcp_connect(host, static_cast<std::uint16_t>(port), 2000);
            if (socket.valid()) break;
            if (g_stop.load() || std::chrono::steady_clock::now() >= deadline) {
                throw steam::IoError("cannot connect to " + host + ":" +
                                     std::to_string(port));
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        return [&socket](std::string_view frame) {
            if (!steam::net::send_all(socket.fd(), frame)) {
                throw steam::IoError("tcp sink write failed (peer closed?)");
            }
        };
    }
    throw steam::ConfigError("sink must be tcp:host:port or file:path");
}

int cmd_sim(const std::string& scenario_path, const std::string& replay_path,
            const std::string& sink, const std::string& truth_path, double rate_override,
            bool rate_set) {
    steam::net::Socket socket;
    std::ofstream sink_file;
    auto emit = open_sink(sink, socket, sink_file);

    steam::SimSummary summary;
    if (!replay_path.empty()) {
        summary = steam::replay(replay_path, rate_set ? rate_override : 0.0, emit, &g_stop);
    } else {
        steam::ScenarioSpec spec = steam::load_scenario(scenario_path);
        if (rate_set) spec.rate = rate_override;

        std::ofstream truth_file;
        std::ostream* truth = nullptr;
        if (!truth_path.empty()) {
            truth_file.open(truth_path, std::ios::binary | std::ios::trunc);
            if (!truth_file) {
                throw steam::IoError("cannot open truth file '" + truth_path + "'");
            }
            truth = &truth_file;
        }
        summary = steam::generate(spec, emit, truth, &g_stop);
    }

    if (sink_file.is_open()) sink_file.flush();
    std::cout << "frames\t" << summary.frames << "\nbytes\t" << summary.bytes << '\n';
    return 0;
}

int cmd_sink(int port, const std::string& log_path) {
    steam::HttpSink sink(static_cast<std::uint16_t>(port), log_path);
    std::cout << "listening on port " << sink.port() << std::endl;
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    sink.stop();
    std::cout << "connections\t" << sink.connections_accepted() << "\nrequests\t"
              << sink.requests_received() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    install_signal_handlers();

    CLI::App app{"steam: config-driven stream processing at the edge"};
    app.require_subcommand(1);

    std::string config_path, bench_override, cpu_scope;
    double duration_s = 0;
    auto* run = app.add_subcommand("run", "Run a pipeline until EOF or a signal");
    run->add_option("--config", config_path, "pipeline configuration (JSON)")->required();
    run->add_option("--bench", bench_override, "write the per-packet metrics log here");
    run->add_option("--duration", duration_s, "stop after this many seconds");
    run->add_option("--cpu-scope", cpu_scope, "cpu metric scope: system or process")
        ->check(CLI::IsMember({"system", "process"}));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a configuration and exit");
    validate->add_option("--config", validate_path, "pipeline configuration (JSON)")
        ->required();

    std::string report_log;
    auto* report = app.add_subcommand("bench-report", "Summarize a metrics log");
    report->add_option("--log", report_log, "metrics TSV written by run")->required();

    std::string scenario_path, replay_path, sim_sink, truth_path;
    double sim_rate = 0;
    auto* sim = app.add_subcommand("sim", "Generate or replay a sensor stream");
    auto* scenario_opt =
        sim->add_option("--scenario", scenario_path, "scenario description (JSON)");
    auto* replay_opt =
        sim->add_option("--replay", replay_path, "replay a recorded frame file");
    sim->add_option("--sink", sim_sink, "tcp:host:port or file:path")->required();
    sim->add_option("--truth", truth_path, "write ground-truth events here (TSV)");
    auto* rate_opt = sim->add_option("--rate", sim_rate, "packets per second (0 = max)");
    scenario_opt->excludes(replay_opt);

    int sink_port = 0;
    std::string sink_log;
    auto* sink = app.add_subcommand("sink", "Run an HTTP test sink until a signal");
    sink->add_option("--port", sink_port, "listen port (0 picks a free one)")->required();
    sink->add_option("--log", sink_log, "append received bodies to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(config_path, bench_override, duration_s, cpu_scope);
        if (*validate) return cmd_validate(validate_path);
        if (*report) return cmd_bench_report(report_log);
        if (*sim) {
            if (scenario_path.empty() && replay_path.empty()) {
                std::cerr << "sim needs --scenario or --replay\n";
                return 1;
            }
            return cmd_sim(scenario_path, replay_path, sim_sink, truth_path, sim_rate,
                           rate_opt->count() > 0);
        }
        if (*sink) return cmd_sink(sink_port, sink_log);
    } catch (const steam::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
