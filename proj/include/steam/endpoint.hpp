#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "steam/conditions.hpp"
#include "steam/http_client.hpp"
#include "steam/render.hpp"

namespace steam {

enum class EndpointKind : std::uint8_t { File, Http };

struct EndpointSpec {
    std::string id;  // defaults to kind + ordinal at build
    EndpointKind kind{EndpointKind::File};

    // file
    std::string path;
    bool append{true};

    // http
    std::string url;
    int timeout_ms{5000};
    bool keep_alive{true};

    ConditionSpec condition;  // default: always
    FormatKind format{FormatKind::Json};
    std::string template_text;  // message format only
};

/// Live per-endpoint counters surfaced in the run summary.
struct EndpointStats {
    std::string id;
    std::uint64_t events{0};
    std::uint64_t bytes_out{0};
    std::uint64_t errors{0};
};

/// One bound destination: condition gate + format + transport.
class Endpoint {
public:
    /// Resolves names against the enriched universe, compiles the template,
    /// opens the file / prepares the client. Throws ConfigError (collecting
    /// all diagnostics) or IoError when the file is not writable at startup.
    static std::unique_ptr<Endpoint> build(const EndpointSpec& spec,
                                           const std::vector<std::string>& universe);

    /// Condition check, then render + deliver on pass. Returns bytes put on
    /// the wire this packet (0 when gated or failed). Delivery failures are
    /// counted, never thrown.
    std::uint64_t process(const DataPacket& enriched, expr::EvalStats* expr_stats = nullptr);

    const EndpointSpec& spec() const { return spec_; }
    const EndpointStats& stats() const { return stats_; }

    /// Flushes file buffers (called at shutdown and after bursts).
    void flush();

private:
    EndpointSpec spec_;
    Condition condition_;
    FormatSpec format_;
    std::ofstream file_;
    std::unique_ptr<HttpClient> client_;
    std::string content_type_;
    EndpointStats stats_;
};

/// Declaration-order fan-out; per-endpoint errors stay isolated. Returns the
/// summed bytes_out of this packet.
std::uint64_t dispatch(std::vector<std::unique_ptr<Endpoint>>& endpoints,
                       const DataPacket& enriched, expr::EvalStats* expr_stats = nullptr);

/// Static checks only (names, template, url shape) — no file or socket is
/// touched, so `validate` can run against production configs.
std::vector<std::string> validate_endpoint(const EndpointSpec& spec,
                                           const std::vector<std::string>& universe);

}  // namespace steam
