#include "agrisim/decision/store.hpp"

#include <algorithm>

namespace agrisim::decision {

std::optional<TelemetryRecord> TelemetryStore::ingest(const TelemetryRecord& rec) {
    auto& series = by_node_[rec.node];
    std::optional<TelemetryRecord> prev;
    if (!series.empty()) {
        if (rec.ts_ms <= series.back().ts_ms) {
            throw StaleRecord("ts_ms", "record at " + std::to_string(rec.ts_ms) + " is not newer than " +
                                           std::to_string(series.back().ts_ms) + " for node " + rec.node);
        }
        prev = series.back();
    }
    series.push_back(rec);
    ++ingest_count_;
    if (!newest_ts_ || rec.ts_ms >= *newest_ts_) {
        newest_ts_ = rec.ts_ms;
        newest_node_ = rec.node;
    }
    return prev;
}

const TelemetryRecord* TelemetryStore::latest(const std::string& node) const {
    auto it = by_node_.find(node);
    if (it == by_node_.end() || it->second.empty()) return nullptr;
    return &it->second.back();
}

std::vector<TelemetryRecord> TelemetryStore::history(const std::string& node, std::int64_t from_ms,
                                                     std::int64_t to_ms) const {
    auto it = by_node_.find(node);
    if (it == by_node_.end()) return {};
    const auto& s = it->second;
    auto lo = std::lower_bound(s.begin(), s.end(), from_ms, [](const auto& r, std::int64_t t) { return r.ts_ms < t; });
    auto hi = std::upper_bound(s.begin(), s.end(), to_ms, [](std::int64_t t, const auto& r) { return t < r.ts_ms; });
    if (lo >= hi) return {};
    return {lo, hi};
}

std::vector<std::string> TelemetryStore::nodes() const {
    std::vector<std::string> out;
    for (const auto& [node, _] : by_node_) out.push_back(node);
    return out;
}

std::size_t TelemetryStore::size() const {
    std::size_t n = 0;
    for (const auto& [_, s] : by_node_) n += s.size();
    return n;
}

const TelemetryRecord* TelemetryStore::newest_record() const { return newest_ts_ ? latest(newest_node_) : nullptr; }

}  // namespace agrisim::decision
