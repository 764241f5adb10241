#include "steam/sim.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "steam/errors.hpp"
#include "steam/rng.hpp"

namespace steam {

double sin_turns(double turns) {
    double p = turns - std::floor(turns);  // [0, 1)
    bool negate = false;
    if (p >= 0.5) {
        negate = true;
        p -= 0.5;
    }
    if (p > 0.25) p = 0.5 - p;  // fold onto the rising quarter wave

    double x = 6.283185307179586 * p;  // [0, pi/2]
    double x2 = x * x;
    // Taylor series to x^13 in fixed evaluation order; worst-case error at
    // pi/2 is ~7e-10, far below the print quantum of any scenario.
    double s = x * (1.0 +
                    x2 * (-1.0 / 6.0 +
                          x2 * (1.0 / 120.0 +
                                x2 * (-1.0 / 5040.0 +
                                      x2 * (1.0 / 362880.0 +
                                            x2 * (-1.0 / 39916800.0 +
                                                  x2 * (1.0 / 6227020800.0)))))));
    return negate ? -s : s;
}

namespace {

constexpr std::uint64_t kBaseEpochSeconds = 1609459200ULL;  // 2021-01-01T00:00:00Z

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp < 10 ? mp + 3 : mp - 9;
    year = static_cast<int>(y + (month <= 2));
}

std::string iso_timestamp(std::uint64_t epoch_seconds) {
    std::uint64_t days = epoch_seconds / 86400;
    std::uint64_t rem = epoch_seconds % 86400;
    int year;
    unsigned month, day;
    civil_from_days(static_cast<std::int64_t>(days), year, month, day);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ", year, month, day,
                  static_cast<unsigned>(rem / 3600), static_cast<unsigned>(rem / 60 % 60),
                  static_cast<unsigned>(rem % 60));
    return buf;
}

/// Formats with the scenario's quantum and returns the exact double the
/// pipeline will parse back, so generator-side windows mirror detector-side
/// windows bit for bit.
double format_rounded(double v, int decimals, std::string& text) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    text.assign(buf, static_cast<std::size_t>(n));
    double parsed = 0.0;
    std::from_chars(buf, buf + n, parsed);
    return parsed;
}

struct HistoryEntry {
    bool present{false};
    double value{0.0};
};

struct SensorState {
    std::deque<HistoryEntry> history;  // last (detector window - 1) emissions
    double last_value;                 // last emitted present value
};

void throttle(double rate, std::chrono::steady_clock::time_point& next_due,
              const std::atomic<bool>* stop) {
    if (rate <= 0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / rate));
    while (!(stop && stop->load())) {
        auto now = std::chrono::steady_clock::now();
        if (now >= next_due) break;
        std::this_thread::sleep_for(std::min(
            next_due - now,
            std::chrono::steady_clock::duration(std::chrono::milliseconds(20))));
    }
    next_due += interval;
}

}  // namespace

void ScenarioSpec::validate() const {
    std::vector<std::string> issues;
    if (sensors < 1) issues.push_back("scenario: sensors must be at least 1");
    if (duration < 1) issues.push_back("scenario: duration must be at least 1 packet");
    if (!(period > 0)) issues.push_back("scenario: period must be positive");
    if (sigma < 0) issues.push_back("scenario: sigma must be non-negative");
    if (decimals < 0 || decimals > 9) {
        issues.push_back("scenario: decimals must be in [0, 9]");
    }
    if (spike.probability < 0 || spike.probability > 1) {
        issues.push_back("scenario: spike probability must be in [0, 1]");
    }
    if (spike.probability > 0 && spike.magnitude <= 0) {
        issues.push_back("scenario: spike magnitude must be positive");
    }
    if (missing_probability < 0 || missing_probability > 1) {
        issues.push_back("scenario: missing probability must be in [0, 1]");
    }
    if (!missing_per_sensor.empty() && missing_per_sensor.size() != sensors) {
        issues.push_back("scenario: per-sensor missing probabilities must cover every sensor");
    }
    for (double p : missing_per_sensor) {
        if (p < 0 || p > 1) {
            issues.push_back("scenario: missing probability must be in [0, 1]");
            break;
        }
    }
    if (rate < 0) issues.push_back("scenario: rate must be non-negative");
    if (detector.window < 2) issues.push_back("scenario: detector window must be >= 2");
    if (!(detector.band > 0)) issues.push_back("scenario: detector band must be positive");

    if (!episodes.empty() && sensors < 2) {
        issues.push_back("scenario: disagreement episodes need at least 2 sensors");
    }
    std::uint64_t previous_end = 0;
    for (const auto& ep : episodes) {
        if (ep.start < 1 || ep.length < 1 || ep.start + ep.length - 1 > duration) {
            issues.push_back("scenario: episode at " + std::to_string(ep.start) +
                             " does not fit the duration");
            continue;
        }
        if (ep.start <= previous_end) {
            issues.push_back("scenario: episodes must be sorted and non-overlapping");
        }
        previous_end = ep.start + ep.length - 1;
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
}

ScenarioSpec parse_scenario(const std::string& json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("scenario root must be a JSON object");

    ScenarioSpec out;
    try {
        if (root.contains("seed")) out.seed = root.at("seed").get<std::uint64_t>();
        if (root.contains("sensors")) out.sensors = root.at("sensors").get<std::size_t>();
        if (root.contains("duration")) {
            out.duration = root.at("duration").get<std::uint64_t>();
        }
        if (root.contains("base")) out.base = root.at("base").get<double>();
        if (root.contains("amplitude")) out.amplitude = root.at("amplitude").get<double>();
        if (root.contains("period")) out.period = root.at("period").get<double>();
        if (root.contains("sigma")) out.sigma = root.at("sigma").get<double>();
        if (root.contains("decimals")) out.decimals = root.at("decimals").get<int>();
        if (root.contains("unit")) out.unit = root.at("unit").get<std::string>();
        if (root.contains("spike")) {
            const auto& s = root.at("spike");
            if (s.contains("probability")) {
                out.spike.probability = s.at("probability").get<double>();
            }
            if (s.contains("magnitude")) {
                out.spike.magnitude = s.at("magnitude").get<double>();
            }
        }
        if (root.contains("missing_probability")) {
            const auto& mp = root.at("missing_probability");
            if (mp.is_object()) {
                // keys name individual sensors ("s2": 1.0); unnamed sensors stay clean
                out.missing_per_sensor.assign(out.sensors, 0.0);
                for (const auto& [key, value] : mp.items()) {
                    if (key.size() < 2 || key[0] != 's') {
                        throw ConfigError("scenario: missing_probability keys must look like \"s2\"");
                    }
                    std::size_t idx = 0;
                    try {
                        idx = std::stoul(key.substr(1));
                    } catch (const std::exception&) {
                        throw ConfigError("scenario: missing_probability keys must look like \"s2\"");
                    }
                    if (idx < 1 || idx > out.sensors) {
                        throw ConfigError("scenario: missing_probability names unknown sensor " + key);
                    }
                    out.missing_per_sensor[idx - 1] = value.get<double>();
                }
            } else {
                out.missing_probability = mp.get<double>();
            }
        }
        if (root.contains("episodes")) {
            for (const auto& e : root.at("episodes")) {
                Episode ep;
                ep.start = e.at("start").get<std::uint64_t>();
                ep.length = e.at("length").get<std::uint64_t>();
                out.episodes.push_back(ep);
            }
        }
        if (root.contains("rate")) out.rate = root.at("rate").get<double>();
        if (root.contains("detector")) {
            const auto& d = root.at("detector");
            if (d.contains("window")) {
                out.detector.window = d.at("window").get<std::size_t>();
            }
            if (d.contains("band")) out.detector.band = d.at("band").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario field has the wrong type: ") + e.what());
    }
    out.validate();
    return out;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

SimSummary generate(const ScenarioSpec& spec,
                    const std::function<void(std::string_view)>& emit,
                    std::ostream* truth, const std::atomic<bool>* stop) {
    spec.validate();

    Rng rng(spec.seed);
    const std::size_t sensors = spec.sensors;
    double quantum = 1.0;
    for (int i = 0; i < spec.decimals; ++i) quantum /= 10.0;
    constexpr double kRampStep = 0.3;

    // A spike must strictly exceed mean + band*stdev of the detector window
    // that will contain it. With n present values (spike included), offset
    // delta from the pre-spike mean trips the detector iff
    //     delta > band * stdev_before * sqrt(n / (n - 1 - band^2)),
    // which requires n >= band^2 + 2. The emitted value adds one print
    // quantum of margin so rounding can never eat the exceedance.
    const double band = spec.detector.band;
    const std::size_t min_present_before =
        static_cast<std::size_t>(band * band) + 1;  // n-1 >= band^2 + 1

    std::vector<SensorState> state(sensors);
    std::string initial;
    double base_rounded = format_rounded(spec.base, spec.decimals, initial);
    for (auto& s : state) s.last_value = base_rounded;

    if (truth) *truth << "#packet_id\tkind\tsensor\n";

    SimSummary summary;
    std::string line, field;
    line.reserve(160);
    auto next_due = std::chrono::steady_clock::now();

    std::size_t episode_idx = 0;
    double ramp_base_up = 0.0, ramp_base_down = 0.0;
    const std::string disagree_label = "s1+s" + std::to_string(sensors);

    for (std::uint64_t t = 1; t <= spec.duration; ++t) {
        if (stop && stop->load()) break;
        throttle(spec.rate, next_due, stop);
        if (stop && stop->load()) break;

        while (episode_idx < spec.episodes.size() &&
               t >= spec.episodes[episode_idx].start + spec.episodes[episode_idx].length) {
            ++episode_idx;
        }
        const Episode* episode = nullptr;
        if (episode_idx < spec.episodes.size() &&
            t >= spec.episodes[episode_idx].start) {
            episode = &spec.episodes[episode_idx];
        }
        if (episode && t == episode->start) {
            ramp_base_up = state.front().last_value;
            ramp_base_down = state.back().last_value;
        }

        double clean =
            spec.base + spec.amplitude * sin_turns(static_cast<double>(t) / spec.period);

        line.clear();
        line += std::to_string(t);
        line += '\t';
        line += iso_timestamp(kBaseEpochSeconds + t);
        line += '\t';
        line += spec.unit;

        for (std::size_t j = 0; j < sensors; ++j) {
            line += '\t';
            SensorState& sensor = state[j];

            bool ramp_up = episode && j == 0;
            bool ramp_down = episode && j == sensors - 1;
            if (ramp_up || ramp_down) {
                // Deterministic ramp: guarantees the short-window slope of
                // the first/last sensor stays at +-kRampStep per packet.
                double steps = static_cast<double>(t - episode->start + 1) * kRampStep;
                double target = ramp_up ? ramp_base_up + steps : ramp_base_down - steps;
                double rounded = format_rounded(target, spec.decimals, field);
                line += field;
                sensor.history.push_back({true, rounded});
                sensor.last_value = rounded;
                if (sensor.history.size() >= spec.detector.window) {
                    sensor.history.pop_front();
                }
                continue;
            }

            double miss_p = spec.missing_per_sensor.empty()
                                ? spec.missing_probability
                                : spec.missing_per_sensor[j];
            if (rng.uniform() < miss_p) {
                sensor.history.push_back({false, 0.0});
                if (sensor.history.size() >= spec.detector.window) {
                    sensor.history.pop_front();
                }
                if (truth) {
                    *truth << t << "\tmissing\ts" << (j + 1) << '\n';
                }
                continue;  // field stays empty
            }

            bool spike_high = false;
            bool want_spike = false;
            if (rng.uniform() < spec.spike.probability) {
                want_spike = true;
                spike_high = rng.uniform() < 0.5;
            }

            double emitted;
            if (want_spike) {
                std::size_t present = 0;
                double sum = 0.0;
                for (const auto& h : sensor.history) {
                    if (h.present) {
                        ++present;
                        sum += h.value;
                    }
                }
                if (present >= min_present_before &&
                    static_cast<double>(present) > band * band) {
                    double mean = sum / static_cast<double>(present);
                    double acc = 0.0;
                    for (const auto& h : sensor.history) {
                        if (h.present) acc += (h.value - mean) * (h.value - mean);
                    }
                    double stdev = std::sqrt(acc / static_cast<double>(present));
                    double n = static_cast<double>(present + 1);
                    double needed =
                        band * stdev * std::sqrt(n / (n - 1.0 - band * band));
                    double delta =
                        std::max(spec.spike.magnitude * spec.sigma, needed + quantum);
                    double target = spike_high ? mean + delta : mean - delta;
                    emitted = format_rounded(target, spec.decimals, field);
                    if (truth) {
                        *truth << t << (spike_high ? "\tspike_high\ts" : "\tspike_low\ts")
                               << (j + 1) << '\n';
                    }
                } else {
                    // Warmup: the detector could not flag it, so do not
                    // inject (the ground truth must stay exact).
                    double noise = spec.sigma * rng.gaussian();
                    emitted = format_rounded(clean + noise, spec.decimals, field);
                }
            } else {
                double noise = spec.sigma * rng.gaussian();
                emitted = format_rounded(clean + noise, spec.decimals, field);
            }

            line += field;
            sensor.history.push_back({true, emitted});
            sensor.last_value = emitted;
            if (sensor.history.size() >= spec.detector.window) {
                sensor.history.pop_front();
            }
        }

        if (truth && episode) {
            *truth << t << "\tdisagree\t" << disagree_label << '\n';
        }

        line += '\n';
        summary.frames += 1;
        summary.bytes += line.size();
        emit(line);
    }
    if (truth) truth->flush();
    return summary;
}

SimSummary replay(const std::string& path, double rate,
                  const std::function<void(std::string_view)>& emit,
                  const std::atomic<bool>* stop) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open replay file '" + path + "'");

    SimSummary summary;
    std::string line;
    auto next_due = std::chrono::steady_clock::now();
    while (std::getline(in, line)) {
        if (stop && stop->load()) break;
        throttle(rate, next_due, stop);
        if (stop && stop->load()) break;
        line += '\n';
        summary.frames += 1;
        summary.bytes += line.size();
        emit(line);
    }
    return summary;
}

std::vector<TruthEvent> read_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open truth file '" + path + "'");

    std::vector<TruthEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab1 = line.find('\t');
        std::size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                     : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            throw IoError("malformed truth line: '" + line + "'");
        }
        TruthEvent ev;
        ev.packet_id = std::strtoull(line.c_str(), nullptr, 10);
        ev.kind = line.substr(tab1 + 1, tab2 - tab1 - 1);
        ev.sensor = line.substr(tab2 + 1);
        out.push_back(ev);
    }
    return out;
}

}  // namespace steam
