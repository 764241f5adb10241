#include "steam/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "steam/errors.hpp"

namespace steam {

namespace {

using nlohmann::json;

/// Accumulates diagnostics so one pass reports every problem.
struct Issues {
    std::vector<std::string> list;

    void add(std::string msg) { list.push_back(std::move(msg)); }
    bool empty() const { return list.empty(); }
};

bool get_uint(const json& obj, const char* key, std::size_t& out, Issues& issues,
              const std::string& where) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        issues.add(where + "'" + key + "' must be a positive integer");
        return false;
    }
    out = v.get<std::size_t>();
    return true;
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       Issues& issues, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
        issues.add(where + "'" + key + "' must be a string");
        return fallback;
    }
    return v.get<std::string>();
}

InputSpec parse_input(const json& obj, Issues& issues) {
    InputSpec out;
    if (!obj.is_object()) {
        issues.add("input: must be an object");
        return out;
    }
    std::string kind = get_string(obj, "kind", "", issues, "input: ");
    if (kind == "tcp") {
        out.kind = InputKind::Tcp;
        if (!obj.contains("port") || !obj.at("port").is_number_unsigned() ||
            obj.at("port").get<std::uint64_t>() < 1 ||
            obj.at("port").get<std::uint64_t>() > 65535) {
            issues.add("input: tcp needs a 'port' in [1, 65535]");
        } else {
            out.port = obj.at("port").get<std::uint16_t>();
        }
    } else if (kind == "file") {
        out.kind = InputKind::File;
        out.path = get_string(obj, "path", "", issues, "input: ");
        if (out.path.empty()) issues.add("input: file needs a 'path'");
        if (obj.contains("rate")) {
            const json& r = obj.at("rate");
            if (!r.is_number() || r.get<double>() < 0) {
                issues.add("input: 'rate' must be a non-negative number (0 = unthrottled)");
            } else {
                out.rate = r.get<double>();
            }
        }
    } else {
        issues.add("input: 'kind' must be \"tcp\" or \"file\"");
    }
    return out;
}

ParserSpec parse_parser(const json& obj, Issues& issues) {
    ParserSpec out;
    if (!obj.is_object()) {
        issues.add("parser: must be an object");
        return out;
    }
    out.separator = get_string(obj, "separator", "\t", issues, "parser: ");
    if (obj.contains("columns")) {
        const json& cols = obj.at("columns");
        if (!cols.is_array()) {
            issues.add("parser: 'columns' must be an array of names");
        } else {
            for (const auto& c : cols) {
                if (!c.is_string()) {
                    issues.add("parser: column names must be strings");
                } else {
                    out.columns.push_back(c.get<std::string>());
                }
            }
        }
    }
    if (obj.contains("types")) {
        const json& types = obj.at("types");
        if (!types.is_object()) {
            issues.add("parser: 'types' must map column name to a type");
        } else {
            for (auto it = types.begin(); it != types.end(); ++it) {
                if (!it.value().is_string()) {
                    issues.add("parser: type of '" + it.key() + "' must be a string");
                    continue;
                }
                std::string t = it.value().get<std::string>();
                if (t == "number") {
                    out.types[it.key()] = ColumnType::Number;
                } else if (t == "text") {
                    out.types[it.key()] = ColumnType::Text;
                } else if (t == "timestamp") {
                    out.types[it.key()] = ColumnType::Timestamp;
                } else {
                    issues.add("parser: unknown type '" + t + "' for column '" + it.key() +
                               "' (number|text|timestamp)");
                }
            }
        }
    }
    try {
        out.validate();
    } catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) issues.add(issue);
    }
    return out;
}

FunctionSpec parse_function(const json& obj, std::size_t index, Issues& issues) {
    FunctionSpec out;
    const std::string where = "functions[" + std::to_string(index) + "]: ";
    if (!obj.is_object()) {
        issues.add(where + "must be an object");
        return out;
    }
    std::string kind = get_string(obj, "kind", "", issues, where);
    if (auto parsed = function_kind_from(kind)) {
        out.kind = *parsed;
    } else {
        issues.add(where + "unknown kind '" + kind + "'");
    }
    out.id = get_string(obj, "id", "", issues, where);
    out.attribute = get_string(obj, "attribute", "value", issues, where);
    out.equation = get_string(obj, "equation", "", issues, where);

    if (obj.contains("batchlen")) {
        std::size_t n = 0;
        if (get_uint(obj, "batchlen", n, issues, where)) out.batchlen = n;
    }
    if (obj.contains("format")) {
        std::string text = get_string(obj, "format", "", issues, where);
        auto fmt = parse_numeric_format(text);
        if (!fmt) {
            issues.add(where + "unsupported format '" + text +
                       "' (expected \"{:.Nf}\" or \"{: .Nf}\")");
        } else {
            out.format = fmt;
        }
    }
    if (obj.contains("alpha")) {
        const json& a = obj.at("alpha");
        if (!a.is_number()) {
            issues.add(where + "'alpha' must be a number");
        } else {
            out.alpha = a.get<double>();
        }
    }
    if (obj.contains("order")) {
        std::size_t n = 0;
        if (get_uint(obj, "order", n, issues, where)) out.order = n;
    }
    return out;
}

ConditionSpec parse_condition(const json& obj, Issues& issues, const std::string& where) {
    ConditionSpec out;
    if (!obj.is_object()) {
        issues.add(where + "condition must be an object");
        return out;
    }
    std::string kind = get_string(obj, "kind", "always", issues, where);
    if (kind == "always") {
        out.kind = ConditionKind::Always;
    } else if (kind == "threshold") {
        out.kind = ConditionKind::Threshold;
        out.column = get_string(obj, "column", "", issues, where);
        auto parse_bound = [&](const char* key) -> std::optional<BoundRef> {
            if (!obj.contains(key)) return std::nullopt;
            const json& b = obj.at(key);
            BoundRef ref;
            if (b.is_number()) {
                ref.literal = b.get<double>();
            } else if (b.is_string()) {
                ref.name = b.get<std::string>();
            } else {
                issues.add(where + "'" + key + "' must be a column name or a number");
                return std::nullopt;
            }
            return ref;
        };
        out.upper = parse_bound("upper");
        out.lower = parse_bound("lower");
    } else if (kind == "missing_value") {
        out.kind = ConditionKind::MissingValue;
        if (obj.contains("columns") && obj.at("columns").is_array()) {
            for (const auto& c : obj.at("columns")) {
                if (c.is_string()) {
                    out.columns.push_back(c.get<std::string>());
                } else {
                    issues.add(where + "missing_value columns must be strings");
                }
            }
        } else {
            issues.add(where + "missing_value needs a 'columns' array");
        }
    } else if (kind == "equation") {
        out.kind = ConditionKind::Equation;
        out.equation = get_string(obj, "expression", "", issues, where);
        if (out.equation.empty()) {
            issues.add(where + "equation condition needs an 'expression'");
        }
    } else {
        issues.add(where + "unknown condition kind '" + kind + "'");
    }
    return out;
}

EndpointSpec parse_endpoint(const json& obj, std::size_t index, Issues& issues) {
    EndpointSpec out;
    out.id = "endpoint" + std::to_string(index + 1);
    const std::string where = "endpoints[" + std::to_string(index) + "]: ";
    if (!obj.is_object()) {
        issues.add(where + "must be an object");
        return out;
    }
    out.id = get_string(obj, "id", out.id, issues, where);

    std::string kind = get_string(obj, "kind", "", issues, where);
    if (kind == "file") {
        out.kind = EndpointKind::File;
        out.path = get_string(obj, "path", "", issues, where);
        if (obj.contains("append")) {
            if (!obj.at("append").is_boolean()) {
                issues.add(where + "'append' must be a boolean");
            } else {
                out.append = obj.at("append").get<bool>();
            }
        }
    } else if (kind == "http") {
        out.kind = EndpointKind::Http;
        out.url = get_string(obj, "url", "", issues, where);
        if (obj.contains("timeout_ms")) {
            std::size_t t = 0;
            if (get_uint(obj, "timeout_ms", t, issues, where)) {
                out.timeout_ms = static_cast<int>(t);
            }
        }
        if (obj.contains("keep_alive")) {
            if (!obj.at("keep_alive").is_boolean()) {
                issues.add(where + "'keep_alive' must be a boolean");
            } else {
                out.keep_alive = obj.at("keep_alive").get<bool>();
            }
        }
    } else {
        issues.add(where + "'kind' must be \"file\" or \"http\"");
    }

    std::string fmt = get_string(obj, "format", "json", issues, where);
    if (auto parsed = format_kind_from(fmt)) {
        out.format = *parsed;
    } else {
        issues.add(where + "unknown format '" + fmt + "' (json|tsv|csv|message)");
    }
    out.template_text = get_string(obj, "template", "", issues, where);
    if (out.format == FormatKind::Message && out.template_text.empty()) {
        issues.add(where + "message format needs a 'template'");
    }

    if (obj.contains("condition")) {
        out.condition = parse_condition(obj.at("condition"), issues, where);
    }
    return out;
}

PipelineConfig parse_config_json(const json& root) {
    Issues issues;
    PipelineConfig out;

    if (!root.is_object()) {
        throw ConfigError("configuration root must be a JSON object");
    }
    if (!root.contains("steam") || !root.at("steam").is_number_integer() ||
        root.at("steam").get<int>() != 1) {
        issues.add("missing or unsupported version header: expected \"steam\": 1");
    }

    if (root.contains("batchlen")) {
        get_uint(root, "batchlen", out.batchlen, issues, "");
    } else {
        issues.add("'batchlen' is required");
    }
    if (root.contains("queue_capacity")) {
        get_uint(root, "queue_capacity", out.queue_capacity, issues, "");
    }

    if (root.contains("input")) {
        out.input = parse_input(root.at("input"), issues);
    } else {
        issues.add("'input' is required");
    }
    if (root.contains("parser")) {
        out.parser = parse_parser(root.at("parser"), issues);
    } else {
        issues.add("'parser' is required");
    }

    if (root.contains("functions")) {
        if (!root.at("functions").is_array()) {
            issues.add("'functions' must be an array");
        } else {
            std::size_t i = 0;
            for (const auto& f : root.at("functions")) {
                out.functions.push_back(parse_function(f, i++, issues));
            }
        }
    }

    if (root.contains("endpoints")) {
        if (!root.at("endpoints").is_array()) {
            issues.add("'endpoints' must be an array");
        } else {
            std::size_t i = 0;
            for (const auto& e : root.at("endpoints")) {
                out.endpoints.push_back(parse_endpoint(e, i++, issues));
            }
        }
    }
    if (out.endpoints.empty()) {
        issues.add("at least one endpoint is required");
    }

    if (root.contains("bench")) {
        const json& bench = root.at("bench");
        if (!bench.is_object()) {
            issues.add("'bench' must be an object");
        } else {
            out.bench_log = get_string(bench, "log", "", issues, "bench: ");
            std::string scope = get_string(bench, "cpu_scope", "system", issues, "bench: ");
            if (scope == "process") {
                out.cpu_scope = CpuScope::Process;
            } else if (scope != "system") {
                issues.add("bench: 'cpu_scope' must be \"system\" or \"process\"");
            }
        }
    }

    // Cross-references: function ids, condition names, template names.
    std::vector<std::string> universe = out.parser.columns;
    try {
        FunctionSet functions =
            FunctionSet::build(out.functions, out.parser.columns, out.batchlen);
        // Ids defaulted inside build (e.g. kind-named functions) flow back so
        // the endpoint universe and the runtime see the same names.
        out.functions = functions.specs();
        for (const auto& id : functions.result_ids()) universe.push_back(id);
    } catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) issues.add(issue);
    }
    for (const auto& ep : out.endpoints) {
        for (auto& issue : validate_endpoint(ep, universe)) issues.add(std::move(issue));
    }

    if (!issues.empty()) throw ConfigError(std::move(issues.list));
    return out;
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return parse_config_json(root);
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open configuration file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

}  // namespace steam
