#include "steam/frame_parser.hpp"

#include <charconv>
#include <set>

namespace steam {

void ParserSpec::validate() const {
    std::vector<std::string> issues;
    if (separator.empty()) issues.push_back("parser: separator must be non-empty");
    if (columns.empty()) issues.push_back("parser: column list must be non-empty");
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (c.empty()) issues.push_back("parser: column names must be non-empty");
        if (!seen.insert(c).second) issues.push_back("parser: duplicate column '" + c + "'");
    }
    for (const auto& [name, type] : types) {
        (void)type;
        if (!seen.count(name)) issues.push_back("parser: type declared for unknown column '" + name + "'");
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
}

namespace {

Value convert(std::string_view field, ColumnType type) {
    if (field.empty()) return Value::missing();
    switch (type) {
        case ColumnType::Text:
            return Value::text(std::string(field));
        case ColumnType::Timestamp:
            return Value::timestamp(std::string(field));
        case ColumnType::Number: {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                return Value::missing();
            }
            return Value::number(v);  // normalizes any non-finite parse to Missing
        }
    }
    return Value::missing();
}

}  // namespace

DataPacket parse_frame(const ParserSpec& spec, std::string_view frame,
                       std::int64_t arrival_ns) {
    std::vector<std::string_view> fields;
    fields.reserve(spec.columns.size());
    std::size_t pos = 0;
    for (;;) {
        std::size_t next = frame.find(spec.separator, pos);
        if (next == std::string_view::npos) {
            fields.push_back(frame.substr(pos));
            break;
        }
        fields.push_back(frame.substr(pos, next - pos));
        pos = next + spec.separator.size();
    }
    if (fields.size() != spec.columns.size()) {
        throw FrameArityError(spec.columns.size(), fields.size());
    }

    DataPacket packet(frame.size() + 1, arrival_ns);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        packet.append(spec.columns[i], convert(fields[i], spec.type_of(spec.columns[i])));
    }
    return packet;
}

}  // namespace steam
