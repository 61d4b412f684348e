#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "agrisim/controller.hpp"
#include "agrisim/decision/model.hpp"
#include "agrisim/decision/store.hpp"

namespace agrisim::decision {

class UnknownNode : public Error {
public:
    using Error::Error;
};

class UnknownCrop : public Error {
public:
    using Error::Error;
};

struct ServiceConfig {
    // Empty means memory only. Otherwise `<store_dir>/telemetry.log` is
    // replayed on start and appended to on every ingest.
    std::filesystem::path store_dir;
    unsigned fsync_every = 1;   // records per fsync; 0 = only on flush()
    LuxChain lux_chain;
    RecommendParams recommend;
    double learning_rate = 0.05;
};

struct PendingOverride {
    std::string node;
    edge::OverrideMode mode = edge::OverrideMode::None;
    double ttl_s = 0.0;
    std::int64_t issued_ms = 0;   // service logical clock at issue time
    bool delivered = false;
};

struct ReplayStats {
    std::uint64_t appended = 0;
    std::uint64_t stale = 0;
    std::uint64_t malformed = 0;
};

/// Telemetry store, depletion model, crop policies and pending overrides
/// behind one reader/writer lock. Writes are serialized; readers see the
/// state as of the last completed write.
class DecisionService {
public:
    static constexpr std::string_view kLogName = "telemetry.log";

    explicit DecisionService(ServiceConfig cfg = {});
    ~DecisionService();

    DecisionService(const DecisionService&) = delete;
    DecisionService& operator=(const DecisionService&) = delete;

    /// Appends, persists and trains. Throws StaleRecord.
    void ingest(const TelemetryRecord& rec);
    /// Parses one wire line then ingests it. Throws ParseError or StaleRecord.
    TelemetryRecord ingest_line(std::string_view line);

    /// Feeds every line of a log file through ingest; bad lines are counted,
    /// not fatal.
    ReplayStats replay_file(const std::filesystem::path& path);

    std::optional<TelemetryRecord> latest(const std::string& node) const;
    /// Throws UnknownNode when the node has never reported.
    std::vector<TelemetryRecord> history(const std::string& node, std::int64_t from_ms = INT64_MIN,
                                         std::int64_t to_ms = INT64_MAX) const;

    std::optional<edge::IrrigationPolicy> policy(const std::string& crop) const;
    /// Validates (ConfigError) and stores.
    void put_policy(const edge::IrrigationPolicy& pol);

    /// Throws UnknownNode, or DomainError for a forced mode with ttl outside
    /// (0, 86400]. Clearing with nothing pending is a successful no-op.
    PendingOverride apply_override(const std::string& node, edge::OverrideMode mode, double ttl_s);
    std::optional<PendingOverride> pending_override(const std::string& node) const;
    /// Hands an undelivered override to the node's connection, once.
    std::optional<PendingOverride> take_override(const std::string& node);

    ModelCoefficients model() const;

    /// Uses `node`'s latest record, or the most recent record overall when
    /// empty. Staleness is judged against the newest ingested timestamp.
    /// Throws UnknownCrop, UnknownNode, StaleTelemetry.
    PolicyRecommendation recommendation(const std::string& crop, const std::string& node = {}) const;

    TelemetryStore snapshot() const;
    void flush();

    const ServiceConfig& config() const { return cfg_; }

private:
    void ingest_locked(const TelemetryRecord& rec, bool persist);
    void append_to_log(const TelemetryRecord& rec);

    ServiceConfig cfg_;
    mutable std::shared_mutex mu_;
    TelemetryStore store_;
    ModelCoefficients model_;
    std::map<std::string, edge::IrrigationPolicy> policies_;
    std::map<std::string, PendingOverride> overrides_;
    int log_fd_ = -1;
    unsigned unsynced_ = 0;
};

}  // namespace agrisim::decision
