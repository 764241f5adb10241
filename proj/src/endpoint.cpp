#include "steam/endpoint.hpp"

#include <set>

#include "steam/errors.hpp"

namespace steam {

std::vector<std::string> validate_endpoint(const EndpointSpec& spec,
                                           const std::vector<std::string>& universe) {
    std::vector<std::string> issues;
    const std::string where = "endpoint '" + spec.id + "': ";

    try {
        Condition::build(spec.condition, universe);
    } catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) issues.push_back(where + issue);
    }

    if (spec.format == FormatKind::Message) {
        try {
            MessageTemplate compiled = MessageTemplate::parse(spec.template_text);
            std::set<std::string> names(universe.begin(), universe.end());
            for (const auto& name : compiled.names()) {
                if (!names.count(name)) {
                    issues.push_back(where + "template references unknown name '" + name +
                                     "'");
                }
            }
        } catch (const TemplateKeyError& e) {
            issues.push_back(where + e.what());
        }
    }

    if (spec.kind == EndpointKind::Http) {
        if (!net::parse_http_url(spec.url)) {
            issues.push_back(where + "url is not a valid http:// address: '" + spec.url +
                             "'");
        }
    } else if (spec.path.empty()) {
        issues.push_back(where + "file endpoint needs a path");
    }

    return issues;
}

std::unique_ptr<Endpoint> Endpoint::build(const EndpointSpec& spec,
                                          const std::vector<std::string>& universe) {
    std::vector<std::string> issues = validate_endpoint(spec, universe);
    if (!issues.empty()) throw ConfigError(std::move(issues));

    auto out = std::make_unique<Endpoint>();
    out->spec_ = spec;
    out->condition_ = Condition::build(spec.condition, universe);
    out->format_.kind = spec.format;
    if (spec.format == FormatKind::Message) {
        out->format_.message = MessageTemplate::parse(spec.template_text);
    }

    if (spec.kind == EndpointKind::Http) {
        out->client_ = std::make_unique<HttpClient>(spec.url, spec.timeout_ms, spec.keep_alive);
        out->content_type_ =
            spec.format == FormatKind::Json ? "application/json" : "text/plain";
    } else {
        auto mode = std::ios::binary | (spec.append ? std::ios::app : std::ios::trunc);
        out->file_.open(spec.path, mode);
        if (!out->file_) {
            throw IoError("endpoint '" + spec.id + "': cannot open '" + spec.path +
                          "' for writing");
        }
    }

    out->stats_.id = spec.id;
    return out;
}

std::uint64_t Endpoint::process(const DataPacket& enriched, expr::EvalStats* expr_stats) {
    if (!condition_.check(enriched, expr_stats)) return 0;

    std::string payload = render(format_, enriched);
    ++stats_.events;

    bool delivered = false;
    if (spec_.kind == EndpointKind::File) {
        file_.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        delivered = static_cast<bool>(file_);
        if (!delivered) file_.clear();
    } else {
        delivered = client_->post(payload, content_type_).ok;
    }

    if (!delivered) {
        ++stats_.errors;
        return 0;
    }
    stats_.bytes_out += payload.size();
    return payload.size();
}

void Endpoint::flush() {
    if (spec_.kind == EndpointKind::File && file_.is_open()) file_.flush();
}

std::uint64_t dispatch(std::vector<std::unique_ptr<Endpoint>>& endpoints,
                       const DataPacket& enriched, expr::EvalStats* expr_stats) {
    std::uint64_t total = 0;
    for (auto& ep : endpoints) {
        total += ep->process(enriched, expr_stats);
    }
    return total;
}

}  // namespace steam
