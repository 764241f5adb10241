#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "steam/analytics.hpp"
#include "steam/bench.hpp"
#include "steam/endpoint.hpp"
#include "steam/frame_parser.hpp"
#include "steam/input.hpp"

namespace steam {

/// Declarative description of a whole pipeline, loaded from a JSON file with
/// a `"steam": 1` version header.
struct PipelineConfig {
    std::size_t batchlen{20};
    std::size_t queue_capacity{1024};
    InputSpec input;
    ParserSpec parser;
    std::vector<FunctionSpec> functions;
    std::vector<EndpointSpec> endpoints;
    std::string bench_log;  // empty: benchmark log disabled
    CpuScope cpu_scope{CpuScope::System};
};

/// Parses and fully validates the file, collecting every diagnostic before
/// throwing ConfigError — a bad config reports all of its problems at once.
/// No file or socket is opened: validation is side-effect free.
PipelineConfig load_config(const std::string& path);

/// Same validation over in-memory JSON text (tests, stdin).
PipelineConfig parse_config(const std::string& json_text);

}  // namespace steam
