#pragma once

// Network front ends for DecisionService:
//   - HTTP/1.1 query and control API under /api
//   - raw TCP ingest: newline-delimited telemetry records, one connection
//     per node; pending overrides are written back on the same socket.

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "agrisim/decision/service.hpp"

namespace httplib {
class Server;
}

namespace agrisim::decision {

std::string to_json(const TelemetryRecord& rec);
std::string to_json(const edge::IrrigationPolicy& pol);
std::string to_json(const PolicyRecommendation& rec);
std::string to_json(const ModelCoefficients& m);
std::string to_json(const PendingOverride& o);
std::string error_json(std::string_view kind, std::string_view field, std::string_view message);

/// Merges a PUT body into the crop's policy (missing keys keep the current
/// or default values). Throws ConfigError naming the offending key.
edge::IrrigationPolicy policy_from_json(std::string_view body, const std::string& crop,
                                        const edge::IrrigationPolicy& base);

class HttpApi {
public:
    explicit HttpApi(DecisionService& service);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Port 0 picks a free port. Returns false if the port is taken.
    bool bind(const std::string& host, int port);
    int port() const { return port_; }

    /// Blocks until stop().
    void run();
    void start();   // run() on a background thread
    void stop();

private:
    DecisionService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

class IngestListener {
public:
    explicit IngestListener(DecisionService& service);
    ~IngestListener();

    IngestListener(const IngestListener&) = delete;
    IngestListener& operator=(const IngestListener&) = delete;

    bool bind(const std::string& host, int port);
    int port() const { return port_; }

    void start();
    void stop();

    std::uint64_t lines_accepted() const { return accepted_.load(); }
    std::uint64_t lines_rejected() const { return rejected_.load(); }

private:
    void accept_loop();
    void serve_connection(int fd);

    DecisionService& service_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex conn_mu_;
    std::list<std::thread> workers_;
    std::list<int> open_fds_;
    std::atomic<std::uint64_t> accepted_{0};
    std::atomic<std::uint64_t> rejected_{0};
};

}  // namespace agrisim::decision
