#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agrisim/error.hpp"
#include "agrisim/telemetry.hpp"

namespace agrisim::decision {

class StaleRecord : public Error {
public:
    using Error::Error;
};

/// Append-only per-node history. Not synchronized; DecisionService owns
/// the locking.
class TelemetryStore {
public:
    /// Appends `rec` if its timestamp is strictly newer than the node's
    /// latest, otherwise throws StaleRecord. Returns the previous latest.
    std::optional<TelemetryRecord> ingest(const TelemetryRecord& rec);

    const TelemetryRecord* latest(const std::string& node) const;
    bool has_node(const std::string& node) const { return by_node_.count(node) != 0; }

    /// Records with from_ms <= ts_ms <= to_ms, in timestamp order.
    std::vector<TelemetryRecord> history(const std::string& node, std::int64_t from_ms = INT64_MIN,
                                         std::int64_t to_ms = INT64_MAX) const;

    std::vector<std::string> nodes() const;
    std::uint64_t ingest_count() const { return ingest_count_; }
    std::size_t size() const;

    /// Newest timestamp across all nodes; the service's logical clock.
    std::optional<std::int64_t> newest_ts() const { return newest_ts_; }
    const TelemetryRecord* newest_record() const;

    friend bool operator==(const TelemetryStore&, const TelemetryStore&) = default;

private:
    std::map<std::string, std::vector<TelemetryRecord>> by_node_;
    std::uint64_t ingest_count_ = 0;
    std::optional<std::int64_t> newest_ts_;
    std::string newest_node_;
};

}  // namespace agrisim::decision
