#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "steam/packet.hpp"

namespace steam {

/// Bounded FIFO of the most recent `capacity` packets (the device batchlen).
/// Single-writer: owned and mutated by the pipeline thread only.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity) : capacity_(capacity) {}

    /// Newest entry becomes p; the oldest is evicted first when full.
    void push(DataPacket p) {
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(std::move(p));
    }

    /// Values of `column` oldest->newest; packets lacking it contribute Missing.
    std::vector<Value> column(std::string_view name) const {
        std::vector<Value> out;
        out.reserve(entries_.size());
        for (const auto& p : entries_) out.push_back(p.value_or_missing(name));
        return out;
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Index 0 is the oldest entry.
    const DataPacket& at(std::size_t i) const { return entries_[i]; }
    const DataPacket& newest() const { return entries_.back(); }

private:
    std::size_t capacity_;
    std::deque<DataPacket> entries_;
};

}  // namespace steam
