#include "agrisim/decision/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace agrisim::decision {

namespace {

void write_all(int fd, const std::string& data) {
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        const auto n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("store", std::string("write failed: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

}  // namespace

DecisionService::DecisionService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    model_.learning_rate = cfg_.learning_rate;
    policies_.emplace("default", edge::IrrigationPolicy{});

    if (cfg_.store_dir.empty()) return;

    std::error_code ec;
    std::filesystem::create_directories(cfg_.store_dir, ec);
    const auto log_path = cfg_.store_dir / kLogName;

    // Crash recovery: the log alone rebuilds the store.
    if (std::ifstream in{log_path}) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                ingest_locked(parse_telemetry_line(line), false);
            } catch (const Error&) {
                // A torn final line or a duplicate is skipped.
            }
        }
    }

    log_fd_ = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log_fd_ < 0) throw ConfigError("store", "cannot open " + log_path.string() + ": " + std::strerror(errno));
}

DecisionService::~DecisionService() {
    if (log_fd_ >= 0) {
        ::fsync(log_fd_);
        ::close(log_fd_);
    }
}

void DecisionService::append_to_log(const TelemetryRecord& rec) {
    if (log_fd_ < 0) return;
    // One write per line so a crash never interleaves partial records.
    write_all(log_fd_, serialize(rec) + "\n");
    if (cfg_.fsync_every > 0 && ++unsynced_ >= cfg_.fsync_every) {
        ::fsync(log_fd_);
        unsynced_ = 0;
    }
}

void DecisionService::ingest_locked(const TelemetryRecord& rec, bool persist) {
    auto prev = store_.ingest(rec);
    if (persist) append_to_log(rec);
    if (prev) model_ = update_model(model_, *prev, rec, cfg_.lux_chain);
}

void DecisionService::ingest(const TelemetryRecord& rec) {
    std::unique_lock lock(mu_);
    ingest_locked(rec, true);
}

TelemetryRecord DecisionService::ingest_line(std::string_view line) {
    auto rec = parse_telemetry_line(line);
    ingest(rec);
    return rec;
}

ReplayStats DecisionService::replay_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("replay", "cannot open " + path.string());
    ReplayStats stats;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            ingest_line(line);
            ++stats.appended;
        } catch (const StaleRecord&) {
            ++stats.stale;
        } catch (const ParseError&) {
            ++stats.malformed;
        }
    }
    return stats;
}

std::optional<TelemetryRecord> DecisionService::latest(const std::string& node) const {
    std::shared_lock lock(mu_);
    if (const auto* rec = store_.latest(node)) return *rec;
    return std::nullopt;
}

std::vector<TelemetryRecord> DecisionService::history(const std::string& node, std::int64_t from_ms,
                                                      std::int64_t to_ms) const {
    std::shared_lock lock(mu_);
    if (!store_.has_node(node)) throw UnknownNode("node", "no telemetry from node " + node);
    return store_.history(node, from_ms, to_ms);
}

std::optional<edge::IrrigationPolicy> DecisionService::policy(const std::string& crop) const {
    std::shared_lock lock(mu_);
    auto it = policies_.find(crop);
    if (it == policies_.end()) return std::nullopt;
    return it->second;
}

void DecisionService::put_policy(const edge::IrrigationPolicy& pol) {
    edge::validate(pol);
    std::unique_lock lock(mu_);
    policies_[pol.crop_id] = pol;
}

PendingOverride DecisionService::apply_override(const std::string& node, edge::OverrideMode mode, double ttl_s) {
    if (mode != edge::OverrideMode::None && !(ttl_s > 0.0 && ttl_s <= edge::kMaxOverrideTtlS)) {
        throw DomainError("ttl_s", "must be in (0, 86400]");
    }
    std::unique_lock lock(mu_);
    if (!store_.has_node(node)) throw UnknownNode("node", "no telemetry from node " + node);

    PendingOverride po;
    po.node = node;
    po.mode = mode;
    po.ttl_s = mode == edge::OverrideMode::None ? 0.0 : ttl_s;
    po.issued_ms = store_.newest_ts().value_or(0);
    if (mode == edge::OverrideMode::None) {
        auto it = overrides_.find(node);
        if (it == overrides_.end()) return po;   // nothing to clear
        if (!it->second.delivered) {
            overrides_.erase(it);                // never reached the node
            return po;
        }
    }
    overrides_[node] = po;
    return po;
}

std::optional<PendingOverride> DecisionService::pending_override(const std::string& node) const {
    std::shared_lock lock(mu_);
    auto it = overrides_.find(node);
    if (it == overrides_.end()) return std::nullopt;
    return it->second;
}

std::optional<PendingOverride> DecisionService::take_override(const std::string& node) {
    std::unique_lock lock(mu_);
    auto it = overrides_.find(node);
    if (it == overrides_.end() || it->second.delivered) return std::nullopt;
    it->second.delivered = true;
    return it->second;
}

ModelCoefficients DecisionService::model() const {
    std::shared_lock lock(mu_);
    return model_;
}

PolicyRecommendation DecisionService::recommendation(const std::string& crop, const std::string& node) const {
    std::shared_lock lock(mu_);
    auto pol = policies_.find(crop);
    if (pol == policies_.end()) throw UnknownCrop("crop", "no policy for crop " + crop);
    const TelemetryRecord* latest = node.empty() ? store_.newest_record() : store_.latest(node);
    if (!latest) throw UnknownNode("node", node.empty() ? "no telemetry yet" : "no telemetry from node " + node);
    return recommend_policy(model_, *latest, pol->second, cfg_.recommend, *store_.newest_ts(), cfg_.lux_chain);
}

TelemetryStore DecisionService::snapshot() const {
    std::shared_lock lock(mu_);
    return store_;
}

void DecisionService::flush() {
    std::unique_lock lock(mu_);
    if (log_fd_ >= 0) ::fsync(log_fd_);
    unsynced_ = 0;
}

}  // namespace agrisim::decision
