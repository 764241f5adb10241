#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace steam {

/// Random injected outlier, in units of the noise sigma.
struct SpikeSpec {
    double probability{0.0};
    double magnitude{5.0};
};

/// Slope-disagreement episode: the first sensor ramps up and the last ramps
/// down for `length` consecutive packets starting at `start` (1-based id).
struct Episode {
    std::uint64_t start{0};
    std::uint64_t length{0};
};

/// The anomaly detector the generated spikes must trip: a control band of
/// mean +- band * stdev over a window of the given capacity. Spikes are
/// constructed against this detector so every one of them is detectable by
/// it (not merely likely to be).
struct DetectorSpec {
    std::size_t window{20};
    double band{3.0};
};

struct ScenarioSpec {
    std::uint64_t seed{1};
    std::size_t sensors{3};
    std::uint64_t duration{60};  // packets
    double base{20.0};
    double amplitude{0.0};
    double period{600.0};  // packets per sine cycle
    double sigma{0.0};
    int decimals{2};  // print quantum of sensor fields
    std::string unit{"C"};
    SpikeSpec spike;
    double missing_probability{0.0};          // applies to every sensor...
    std::vector<double> missing_per_sensor;   // ...unless listed here (index = sensor-1)
    std::vector<Episode> episodes;
    double rate{0.0};  // packets/s towards the sink; 0 = unthrottled
    DetectorSpec detector;

    /// Throws ConfigError listing every violation.
    void validate() const;
};

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::string& path);

struct SimSummary {
    std::uint64_t frames{0};
    std::uint64_t bytes{0};
};

/// Streams the scenario's frames (each including its trailing newline) to
/// `emit` in packet order and, when `truth` is non-null, writes the
/// ground-truth event table (TSV: packet_id, kind, sensor). Identical specs
/// produce byte-identical output. Throttling is applied here when rate > 0;
/// `stop` (optional) aborts between packets.
SimSummary generate(const ScenarioSpec& spec,
                    const std::function<void(std::string_view)>& emit,
                    std::ostream* truth, const std::atomic<bool>* stop = nullptr);

/// Replays a stored frame file line by line at the given rate (0 =
/// unthrottled). Lines are forwarded verbatim with their newline.
SimSummary replay(const std::string& path, double rate,
                  const std::function<void(std::string_view)>& emit,
                  const std::atomic<bool>* stop = nullptr);

/// One ground-truth row.
struct TruthEvent {
    std::uint64_t packet_id{0};
    std::string kind;    // spike_high | spike_low | missing | disagree
    std::string sensor;  // "s1", "s2", ... or "s1+s3" for disagreements
};

/// Parses a truth file written by generate().
std::vector<TruthEvent> read_truth(const std::string& path);

/// sin(2*pi*turns) evaluated with a fixed-order polynomial (IEEE add/mul
/// only), bit-stable across platforms. `turns` may be any finite value.
double sin_turns(double turns);

}  // namespace steam
