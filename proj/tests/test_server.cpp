#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "agrisim/decision/server.hpp"

using namespace agrisim;
using namespace agrisim::decision;
using nlohmann::json;

namespace {

TelemetryRecord rec(std::int64_t ts, int m_pct, std::string node = "n1") {
    TelemetryRecord r;
    r.node = std::move(node);
    r.ts_ms = ts;
    r.t_c = 22.5;
    r.rh_pct = 48.0;
    r.m_pct = m_pct;
    r.m_raw = 500;
    r.lux_raw = 700;
    r.p_kpa = 12.34;
    return r;
}

struct Fixture {
    DecisionService svc;
    HttpApi api{svc};
    std::unique_ptr<httplib::Client> cli;

    Fixture() {
        REQUIRE(api.bind("127.0.0.1", 0));
        api.start();
        cli = std::make_unique<httplib::Client>("127.0.0.1", api.port());
    }
    ~Fixture() { api.stop(); }
};

class TcpClient {
public:
    explicit TcpClient(int port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        timeval tv{5, 0};
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    }
    ~TcpClient() { ::close(fd_); }

    void send(const std::string& s) { REQUIRE(::send(fd_, s.data(), s.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(s.size())); }

    std::string read_line() {
        while (true) {
            const auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                auto line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                return line;
            }
            char c[512];
            const auto n = ::recv(fd_, c, sizeof c, 0);
            if (n <= 0) return {};
            buf_.append(c, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_ = -1;
    std::string buf_;
};

template <typename Pred>
bool wait_for(Pred p) {
    for (int i = 0; i < 500; ++i) {
        if (p()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return false;
}

}  // namespace

TEST_CASE("latest and history") {
    Fixture f;
    auto r = f.cli->Get("/api/latest?node=n1");
    REQUIRE(r);
    CHECK(r->status == 404);
    CHECK(json::parse(r->body)["error"] == "UnknownNode");
    CHECK(f.cli->Get("/api/latest")->status == 400);
    CHECK(f.cli->Get("/api/history?node=n1")->status == 404);

    for (int i = 0; i < 5; ++i) f.svc.ingest(rec(1000 * (i + 1), 50 - i));

    r = f.cli->Get("/api/latest?node=n1");
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type").find("application/json") == 0);
    CHECK(r->body == serialize(rec(5000, 46)));

    r = f.cli->Get("/api/history?node=n1");
    CHECK(r->status == 200);
    const auto arr = json::parse(r->body);
    REQUIRE(arr.size() == 5);
    CHECK(arr[0]["ts_ms"] == 1000);
    CHECK(f.cli->Get("/api/history?node=n1&from=2000&to=4000")->body ==
          "[" + serialize(rec(2000, 49)) + "," + serialize(rec(3000, 48)) + "," + serialize(rec(4000, 47)) + "]");
    CHECK(f.cli->Get("/api/history?node=n1&from=x")->status == 400);
}

TEST_CASE("policy routes") {
    Fixture f;
    auto r = f.cli->Get("/api/policy/default");
    CHECK(r->status == 200);
    CHECK(r->body ==
          R"({"crop_id":"default","m_on_pct":35.00,"m_off_pct":60.00,"min_on_s":30.00,"dht_period_s":1.00,"tick_s":1.00})");
    CHECK(f.cli->Get("/api/policy/tomato")->status == 404);

    r = f.cli->Put("/api/policy/tomato", R"({"m_on_pct":40,"m_off_pct":70})", "application/json");
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["m_off_pct"] == 70.0);
    CHECK(f.svc.policy("tomato")->m_on_pct == 40.0);

    r = f.cli->Put("/api/policy/tomato", R"({"m_on_pct":80})", "application/json");
    CHECK(r->status == 400);
    const auto err = json::parse(r->body);
    CHECK(err["error"] == "InvalidPolicy");
    CHECK(err["field"] == "m_on_pct");
    CHECK(f.cli->Put("/api/policy/tomato", R"({"bogus":1})", "application/json")->status == 400);
    CHECK(f.cli->Put("/api/policy/tomato", "nope", "application/json")->status == 400);
    CHECK(f.cli->Put("/api/policy/tomato", R"({"crop_id":"corn"})", "application/json")->status == 400);
    CHECK(f.svc.policy("tomato")->m_on_pct == 40.0);
}

TEST_CASE("override route") {
    Fixture f;
    const auto post = [&](const std::string& body) { return f.cli->Post("/api/override", body, "application/json"); };
    CHECK(post(R"({"node":"n1","state":"on","ttl_s":60})")->status == 404);
    f.svc.ingest(rec(1000, 50));
    auto r = post(R"({"node":"n1","state":"on","ttl_s":60})");
    CHECK(r->status == 202);
    CHECK(r->body == R"({"node":"n1","state":"on","ttl_s":60.0})");
    CHECK(post(R"({"node":"n1","state":"on","ttl_s":0})")->status == 400);
    CHECK(post(R"({"node":"n1","state":"on"})")->status == 400);
    CHECK(post(R"({"node":"n1","state":"up","ttl_s":5})")->status == 400);
    CHECK(post(R"({"node":"n1","ttl_s":5})")->status == 400);
    CHECK(post("not json")->status == 400);
    CHECK(post(R"({"node":"n1","state":"clear"})")->status == 202);
}

TEST_CASE("model and recommendation routes") {
    Fixture f;
    auto r = f.cli->Get("/api/model");
    CHECK(r->status == 200);
    CHECK(r->body == R"({"w":[0.0,0.0,0.0,0.0],"n_samples":0})");

    CHECK(f.cli->Get("/api/recommendation")->status == 400);
    CHECK(f.cli->Get("/api/recommendation?crop=default")->status == 404);
    f.svc.ingest(rec(1000, 50));
    f.svc.ingest(rec(61000, 49));
    CHECK(f.cli->Get("/api/recommendation?crop=corn")->status == 404);
    r = f.cli->Get("/api/recommendation?crop=default&node=n1");
    CHECK(r->status == 200);
    const auto body = json::parse(r->body);
    CHECK(body["node"] == "n1");
    CHECK(body["suggested_duration_s"] == 250.0);
    CHECK(body["next_irrigation_eta_s"].is_number());
    CHECK(json::parse(f.cli->Get("/api/model")->body)["n_samples"] == 1);

    f.svc.ingest(rec(1000000, 70, "n2"));
    r = f.cli->Get("/api/recommendation?crop=default&node=n1");
    CHECK(r->status == 409);
    CHECK(json::parse(r->body)["error"] == "StaleTelemetry");
}

TEST_CASE("tcp ingest with override delivery") {
    DecisionService svc;
    IngestListener ingest(svc);
    REQUIRE(ingest.bind("127.0.0.1", 0));
    ingest.start();

    TcpClient node(ingest.port());
    node.send(serialize(rec(1000, 50)) + "\n" + serialize(rec(2000, 49)) + "\n");
    REQUIRE(wait_for([&] { return ingest.lines_accepted() == 2; }));
    CHECK(svc.latest("n1")->ts_ms == 2000);

    // Split across writes and with CRLF.
    const auto third = serialize(rec(3000, 48));
    node.send(third.substr(0, 20));
    node.send(third.substr(20) + "\r\n");
    REQUIRE(wait_for([&] { return ingest.lines_accepted() == 3; }));

    node.send("garbage\n");
    CHECK(json::parse(node.read_line())["error"] == "SyntaxError");
    node.send(serialize(rec(3000, 48)) + "\n");
    CHECK(json::parse(node.read_line())["error"] == "StaleRecord");
    CHECK(ingest.lines_rejected() == 2);

    svc.apply_override("n1", edge::OverrideMode::ForcedOn, 600);
    node.send(serialize(rec(4000, 47)) + "\n");
    const auto msg = edge::parse_override_line(node.read_line());
    CHECK(msg == edge::OverrideMessage{edge::OverrideMode::ForcedOn, 600});
    CHECK(svc.pending_override("n1")->delivered);

    ingest.stop();
}
