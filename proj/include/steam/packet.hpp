#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steam/value.hpp"

namespace steam {

/// One named cell of a packet. Computed columns carry the format hint of the
/// function that produced them; parsed columns have none.
struct Column {
    std::string name;
    Value value;
    std::optional<NumericFormat> format;
};

/// Ordered map column-name -> Value. Order is the parser's column list,
/// with enrichment results appended after the originals.
class DataPacket {
public:
    DataPacket() = default;
    DataPacket(std::uint64_t raw_bytes, std::int64_t arrival_ns)
        : raw_bytes_(raw_bytes), arrival_ns_(arrival_ns) {}

    void append(std::string name, Value value,
                std::optional<NumericFormat> format = std::nullopt) {
        cols_.push_back({std::move(name), std::move(value), format});
    }

    /// nullptr when the column is absent (distinct from present-but-Missing).
    const Column* find(std::string_view name) const {
        for (const auto& c : cols_) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    /// Absent columns read as Missing.
    Value value_or_missing(std::string_view name) const {
        const Column* c = find(name);
        return c ? c->value : Value::missing();
    }

    bool has(std::string_view name) const { return find(name) != nullptr; }

    const std::vector<Column>& columns() const { return cols_; }
    std::size_t size() const { return cols_.size(); }

    /// Byte length of the source frame including its delimiter.
    std::uint64_t raw_bytes() const { return raw_bytes_; }
    void set_raw_bytes(std::uint64_t n) { raw_bytes_ = n; }

    /// Monotonic arrival stamp (ns).
    std::int64_t arrival_ns() const { return arrival_ns_; }

private:
    std::vector<Column> cols_;
    std::uint64_t raw_bytes_{0};
    std::int64_t arrival_ns_{0};
};

}  // namespace steam
