#include "steam/render.hpp"

#include <charconv>
#include <cstdio>

#include "steam/analytics.hpp"

namespace steam {

namespace {

constexpr const char* kMissingMarker = "—";  // em dash

std::string json_quote(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string plain_value_text(const Value& v, const std::optional<NumericFormat>& format) {
    switch (v.kind()) {
        case Value::Kind::Missing: return {};
        case Value::Kind::Number: return render_value_text(v, format);
        default: return v.str();
    }
}

std::string render_json(const DataPacket& packet) {
    std::string out;
    out += '{';
    bool first = true;
    for (const auto& col : packet.columns()) {
        if (!first) out += ", ";
        first = false;
        out += json_quote(col.name);
        out += ':';
        std::string value_text;
        switch (col.value.kind()) {
            case Value::Kind::Missing:
                value_text = "null";
                break;
            case Value::Kind::Number:
                value_text = render_value_text(col.value, col.format);
                break;
            default:
                value_text = json_quote(col.value.str());
                break;
        }
        // Space-flagged formats carry their own leading space; everything
        // else gets the conventional one after the colon.
        if (value_text.empty() || value_text.front() != ' ') out += ' ';
        out += value_text;
    }
    out += "}\n";
    return out;
}

std::string render_separated(const DataPacket& packet, char sep, bool csv) {
    std::string out;
    bool first = true;
    for (const auto& col : packet.columns()) {
        if (!first) out += sep;
        first = false;
        std::string field = plain_value_text(col.value, col.format);
        out += csv ? csv_field(field) : field;
    }
    out += '\n';
    return out;
}

}  // namespace

std::string render_number(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string render_value_text(const Value& v, const std::optional<NumericFormat>& format) {
    if (!v.is_number()) return {};
    return format ? format->apply(v.num()) : render_number(v.num());
}

MessageTemplate MessageTemplate::parse(const std::string& text) {
    MessageTemplate out;
    out.source_ = text;

    std::string literal;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char c = text[pos];
        if (c != '{') {
            literal += c;
            ++pos;
            continue;
        }
        std::size_t close = text.find('}', pos);
        if (close == std::string::npos) {
            throw TemplateKeyError("template has unclosed '{' at offset " + std::to_string(pos));
        }
        std::string body = text.substr(pos + 1, close - pos - 1);
        std::string name = body;
        std::optional<NumericFormat> format;
        if (std::size_t colon = body.find(':'); colon != std::string::npos) {
            name = body.substr(0, colon);
            std::string fmt_text = "{:" + body.substr(colon + 1) + "}";
            format = parse_numeric_format(fmt_text);
            if (!format) {
                throw TemplateKeyError("template has unsupported format in '{" + body + "}'");
            }
        }
        if (name.empty()) {
            throw TemplateKeyError("template placeholder needs a name: '{" + body + "}'");
        }
        if (!literal.empty()) {
            out.segments_.push_back({std::move(literal), {}, std::nullopt});
            literal.clear();
        }
        out.segments_.push_back({{}, std::move(name), format});
        pos = close + 1;
    }
    if (!literal.empty()) out.segments_.push_back({std::move(literal), {}, std::nullopt});
    return out;
}

std::string MessageTemplate::render(const DataPacket& packet) const {
    std::string out;
    for (const auto& seg : segments_) {
        if (seg.name.empty()) {
            out += seg.literal;
            continue;
        }
        const Column* col = packet.find(seg.name);
        const Value& v = col ? col->value : Value::missing();
        switch (v.kind()) {
            case Value::Kind::Missing:
                out += kMissingMarker;
                break;
            case Value::Kind::Number:
                // Explicit template format wins over the column's own hint.
                out += render_value_text(v, seg.format ? seg.format
                                                       : (col ? col->format : std::nullopt));
                break;
            default:
                out += v.str();
                break;
        }
    }
    return out;
}

std::vector<std::string> MessageTemplate::names() const {
    std::vector<std::string> out;
    for (const auto& seg : segments_) {
        if (!seg.name.empty()) out.push_back(seg.name);
    }
    return out;
}

DataPacket enrich(const DataPacket& packet,
                  const std::vector<std::pair<std::string, Value>>& results,
                  const std::vector<std::optional<NumericFormat>>& formats) {
    DataPacket out = packet;
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.append(results[i].first, results[i].second,
                   i < formats.size() ? formats[i] : std::nullopt);
    }
    return out;
}

std::string render(const FormatSpec& format, const DataPacket& enriched) {
    switch (format.kind) {
        case FormatKind::Json: return render_json(enriched);
        case FormatKind::Tsv: return render_separated(enriched, '\t', false);
        case FormatKind::Csv: return render_separated(enriched, ',', true);
        case FormatKind::Message: return format.message.render(enriched);
    }
    return {};
}

const char* format_kind_name(FormatKind kind) {
    switch (kind) {
        case FormatKind::Json: return "json";
        case FormatKind::Tsv: return "tsv";
        case FormatKind::Csv: return "csv";
        case FormatKind::Message: return "message";
    }
    return "?";
}

std::optional<FormatKind> format_kind_from(const std::string& name) {
    if (name == "json") return FormatKind::Json;
    if (name == "tsv") return FormatKind::Tsv;
    if (name == "csv") return FormatKind::Csv;
    if (name == "message") return FormatKind::Message;
    return std::nullopt;
}

}  // namespace steam
