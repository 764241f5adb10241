#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "steam/errors.hpp"
#include "steam/packet.hpp"

namespace steam {

/// Column data type declared in the parser configuration.
enum class ColumnType : std::uint8_t { Number, Text, Timestamp };

/// How raw frames split into named, typed columns.
struct ParserSpec {
    std::string separator{"\t"};
    std::vector<std::string> columns;
    std::map<std::string, ColumnType> types;  // unlisted columns default to Number

    ColumnType type_of(const std::string& name) const {
        auto it = types.find(name);
        return it == types.end() ? ColumnType::Number : it->second;
    }

    /// Throws ConfigError listing every violation (empty/duplicate columns,
    /// empty separator, types naming unknown columns).
    void validate() const;
};

/// Splits one delimiter-stripped frame into a packet whose columns follow
/// spec.columns exactly. Empty fields and failed numeric conversions become
/// Missing. raw_bytes = frame length + 1 (the stripped frame delimiter).
/// Throws FrameArityError when the field count differs from the column count.
DataPacket parse_frame(const ParserSpec& spec, std::string_view frame,
                       std::int64_t arrival_ns = 0);

}  // namespace steam
