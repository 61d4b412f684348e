#include "agrisim/decision/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "agrisim/canonical_json.hpp"

namespace agrisim::decision {

namespace {

constexpr const char* kJson = "application/json";
constexpr std::size_t kMaxLineBytes = 64 * 1024;

void reply(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, kJson);
}

void reply_error(httplib::Response& res, int status, std::string_view kind, const Error& e) {
    reply(res, status, error_json(kind, e.field(), e.what()));
}

std::optional<std::int64_t> parse_i64(const std::string& s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string array_of(const std::vector<TelemetryRecord>& recs) {
    std::string out = "[";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (i) out += ',';
        out += serialize(recs[i]);
    }
    return out + "]";
}

}  // namespace

std::string to_json(const TelemetryRecord& rec) { return serialize(rec); }

std::string to_json(const edge::IrrigationPolicy& pol) {
    return json::ObjectWriter{}
        .field("crop_id", pol.crop_id)
        .fixed("m_on_pct", pol.m_on_pct, 2)
        .fixed("m_off_pct", pol.m_off_pct, 2)
        .fixed("min_on_s", pol.min_on_s, 2)
        .fixed("dht_period_s", pol.dht_period_s, 2)
        .fixed("tick_s", pol.tick_s, 2)
        .str();
}

std::string to_json(const PolicyRecommendation& rec) {
    json::ObjectWriter w;
    w.field("crop_id", rec.crop_id).field("node", rec.node);
    if (rec.next_irrigation_eta_s) {
        w.fixed("next_irrigation_eta_s", *rec.next_irrigation_eta_s, 1);
    } else {
        w.null("next_irrigation_eta_s");
    }
    w.fixed("suggested_duration_s", rec.suggested_duration_s, 1);
    w.raw("predicted_depletion_frac_per_hr", nlohmann::json(rec.predicted_depletion_frac_per_hr).dump());
    return w.str();
}

std::string to_json(const ModelCoefficients& m) {
    return json::ObjectWriter{}
        .raw("w", nlohmann::json(m.w).dump())
        .field("n_samples", static_cast<std::int64_t>(m.n_samples))
        .str();
}

std::string to_json(const PendingOverride& o) {
    return json::ObjectWriter{}
        .field("node", o.node)
        .field("state", o.mode == edge::OverrideMode::None ? std::string_view("clear") : edge::to_string(o.mode))
        .fixed("ttl_s", o.ttl_s, 1)
        .str();
}

std::string error_json(std::string_view kind, std::string_view field, std::string_view message) {
    return json::ObjectWriter{}.field("error", kind).field("field", field).field("message", message).str();
}

edge::IrrigationPolicy policy_from_json(std::string_view body, const std::string& crop,
                                        const edge::IrrigationPolicy& base) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("body", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("body", "expected an object");

    auto pol = base;
    pol.crop_id = crop;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto& key = it.key();
        if (key == "crop_id") {
            if (!it->is_string() || it->get<std::string>() != crop) throw ConfigError("crop_id", "must match the URL");
            continue;
        }
        double* slot = key == "m_on_pct"       ? &pol.m_on_pct
                       : key == "m_off_pct"    ? &pol.m_off_pct
                       : key == "min_on_s"     ? &pol.min_on_s
                       : key == "dht_period_s" ? &pol.dht_period_s
                       : key == "tick_s"       ? &pol.tick_s
                                               : nullptr;
        if (!slot) throw ConfigError(key, "unknown key");
        if (!it->is_number()) throw ConfigError(key, "expected a number");
        *slot = json::quantize(it->get<double>(), 2);
    }
    edge::validate(pol);
    return pol;
}

HttpApi::HttpApi(DecisionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& svr = *server_;
    // The library default adds SO_REUSEPORT, which would let a second
    // instance share the port instead of failing to bind.
    svr.set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });

    svr.Get("/api/latest", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("node")) return reply(res, 400, error_json("MissingParam", "node", "node is required"));
        const auto rec = service_.latest(req.get_param_value("node"));
        if (!rec) return reply(res, 404, error_json("UnknownNode", "node", "no telemetry for this node"));
        reply(res, 200, to_json(*rec));
    });

    svr.Get("/api/history", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("node")) return reply(res, 400, error_json("MissingParam", "node", "node is required"));
        std::int64_t from = INT64_MIN;
        std::int64_t to = INT64_MAX;
        for (auto [name, slot] : {std::pair{"from", &from}, std::pair{"to", &to}}) {
            if (!req.has_param(name)) continue;
            const auto v = parse_i64(req.get_param_value(name));
            if (!v) return reply(res, 400, error_json("BadParam", name, "expected epoch milliseconds"));
            *slot = *v;
        }
        try {
            reply(res, 200, array_of(service_.history(req.get_param_value("node"), from, to)));
        } catch (const UnknownNode& e) {
            reply_error(res, 404, "UnknownNode", e);
        }
    });

    svr.Get(R"(/api/policy/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto pol = service_.policy(req.matches[1]);
        if (!pol) return reply(res, 404, error_json("UnknownCrop", "crop", "no policy for this crop"));
        reply(res, 200, to_json(*pol));
    });

    svr.Put(R"(/api/policy/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string crop = req.matches[1];
        try {
            auto base = service_.policy(crop).value_or(edge::IrrigationPolicy{});
            const auto pol = policy_from_json(req.body, crop, base);
            service_.put_policy(pol);
            reply(res, 200, to_json(pol));
        } catch (const ConfigError& e) {
            reply_error(res, 400, "InvalidPolicy", e);
        }
    });

    svr.Post("/api/override", [this](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error& e) {
            return reply(res, 400, error_json("BadRequest", "body", e.what()));
        }
        if (!doc.is_object()) return reply(res, 400, error_json("BadRequest", "body", "expected an object"));
        if (!doc.contains("node") || !doc["node"].is_string()) {
            return reply(res, 400, error_json("BadRequest", "node", "node is required"));
        }
        if (!doc.contains("state") || !doc["state"].is_string()) {
            return reply(res, 400, error_json("BadRequest", "state", "state is required"));
        }
        double ttl = 0.0;
        if (doc.contains("ttl_s")) {
            if (!doc["ttl_s"].is_number()) return reply(res, 400, error_json("BadRequest", "ttl_s", "expected a number"));
            ttl = doc["ttl_s"].get<double>();
        }
        try {
            const auto mode = edge::parse_override_mode(doc["state"].get<std::string>());
            const auto po = service_.apply_override(doc["node"].get<std::string>(), mode, ttl);
            reply(res, 202, to_json(po));
        } catch (const UnknownNode& e) {
            reply_error(res, 404, "UnknownNode", e);
        } catch (const DomainError& e) {
            reply_error(res, 400, "BadRequest", e);
        }
    });

    svr.Get("/api/model", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, to_json(service_.model()));
    });

    svr.Get("/api/recommendation", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("crop")) return reply(res, 400, error_json("MissingParam", "crop", "crop is required"));
        const auto node = req.has_param("node") ? req.get_param_value("node") : std::string{};
        try {
            reply(res, 200, to_json(service_.recommendation(req.get_param_value("crop"), node)));
        } catch (const UnknownCrop& e) {
            reply_error(res, 404, "UnknownCrop", e);
        } catch (const UnknownNode& e) {
            reply_error(res, 404, "UnknownNode", e);
        } catch (const StaleTelemetry& e) {
            reply_error(res, 409, "StaleTelemetry", e);
        }
    });
}

HttpApi::~HttpApi() { stop(); }

bool HttpApi::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        return port_ > 0;
    }
    if (!server_->bind_to_port(host, port)) return false;
    port_ = port;
    return true;
}

void HttpApi::run() { server_->listen_after_bind(); }

void HttpApi::start() {
    thread_ = std::thread([this] { run(); });
    server_->wait_until_ready();
}

void HttpApi::stop() {
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

IngestListener::IngestListener(DecisionService& service) : service_(service) {}

IngestListener::~IngestListener() { stop(); }

bool IngestListener::bind(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) return false;
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    if (fd < 0) return false;
    const int yes = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
        ::close(fd);
        return false;
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    listen_fd_ = fd;
    port_ = ntohs(bound.sin_port);
    return true;
}

void IngestListener::start() {
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void IngestListener::stop() {
    if (!running_.exchange(false)) return;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (acceptor_.joinable()) acceptor_.join();
    {
        std::lock_guard lock(conn_mu_);
        for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : workers_) {
        if (t.joinable()) t.join();
    }
    workers_.clear();
}

void IngestListener::accept_loop() {
    while (running_) {
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        std::lock_guard lock(conn_mu_);
        if (!running_) {
            ::close(fd);
            return;
        }
        open_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void IngestListener::serve_connection(int fd) {
    const auto send_line = [fd](const std::string& line) {
        const std::string out = line + "\n";
        std::size_t off = 0;
        while (off < out.size()) {
            const auto n = ::send(fd, out.data() + off, out.size() - off, MSG_NOSIGNAL);
            if (n <= 0) return;
            off += static_cast<std::size_t>(n);
        }
    };

    std::string buf;
    char chunk[4096];
    while (true) {
        const auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buf.append(chunk, static_cast<std::size_t>(n));

        std::size_t start = 0;
        for (auto nl = buf.find('\n', start); nl != std::string::npos; nl = buf.find('\n', start)) {
            const std::string_view line(buf.data() + start, nl - start);
            start = nl + 1;
            if (line.empty() || line == "\r") continue;
            try {
                const auto rec = service_.ingest_line(line);
                ++accepted_;
                if (auto po = service_.take_override(rec.node)) {
                    send_line(edge::serialize(edge::OverrideMessage{po->mode, po->ttl_s}));
                }
            } catch (const ParseError& e) {
                ++rejected_;
                send_line(error_json(to_string(e.fault()), e.field(), e.what()));
            } catch (const StaleRecord& e) {
                ++rejected_;
                send_line(error_json("StaleRecord", e.field(), e.what()));
            }
        }
        buf.erase(0, start);
        if (buf.size() > kMaxLineBytes) break;
    }

    std::lock_guard lock(conn_mu_);
    open_fds_.remove(fd);
    ::close(fd);
}

}  // namespace agrisim::decision
