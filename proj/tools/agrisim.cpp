// agrisim: run irrigation scenarios, serve the decision API, replay logs,
// and evaluate the power-supply chain.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid invocation/config.
// Every failure prints one line to stderr: `ERROR <field>: <message>`.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "agrisim/decision/server.hpp"
#include "agrisim/decision/service.hpp"
#include "agrisim/dht11.hpp"
#include "agrisim/power.hpp"
#include "agrisim/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kInvalid = 2;

int fail(int code, const std::string& field, const std::string& message) {
    std::cerr << "ERROR " << field << ": " << message << '\n';
    return code;
}

struct RunArgs {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& args) {
    agrisim::scenario::ScenarioConfig cfg;
    try {
        cfg = agrisim::scenario::load_scenario(args.scenario);
    } catch (const agrisim::Error& e) {
        return fail(kInvalid, e.field(), e.what());
    }
    if (args.seed) cfg.seed = *args.seed;

    // Write to a sibling temp file and rename, so the target never holds a
    // partial line.
    const std::filesystem::path out = args.out;
    const auto tmp = out.string() + ".partial";
    std::ofstream log(tmp, std::ios::binary | std::ios::trunc);
    if (!log) return fail(kInvalid, "out", "cannot write " + tmp);

    agrisim::scenario::RunSummary summary;
    try {
        summary = agrisim::scenario::run_scenario(cfg, [&](const agrisim::scenario::TickOutput& t) {
            log << agrisim::serialize(t.step.record) << '\n';
        });
    } catch (const agrisim::ConfigError& e) {
        std::filesystem::remove(tmp);
        return fail(kInvalid, e.field(), e.what());
    } catch (const agrisim::Error& e) {
        std::filesystem::remove(tmp);
        return fail(kRuntime, e.field(), e.what());
    }
    log.close();
    if (!log) return fail(kRuntime, "out", "write failed for " + tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, out, ec);
    if (ec) return fail(kRuntime, "out", ec.message());

    std::printf("records=%lld volume_ml=%.2f pump_duty=%.4f transitions=%lld dht_faults=%lld\n",
                static_cast<long long>(summary.records), summary.total_volume_ml, summary.pump_duty,
                static_cast<long long>(summary.pump_transitions), static_cast<long long>(summary.dht_faults));
    return kOk;
}

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<int> ingest_port;
    std::string store;
    std::string replay;
    unsigned fsync_every = 1;
    double staleness_s = 300.0;
    double pump_rate = 135.0;
    double capacity = 22.5;
};

int cmd_serve(const ServeArgs& args) {
    using namespace agrisim::decision;

    // Signals go to a dedicated waiter thread; block them before any other
    // thread starts so the workers inherit the mask.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    ServiceConfig cfg;
    cfg.store_dir = args.store;
    cfg.fsync_every = args.fsync_every;
    cfg.recommend.staleness_ms = static_cast<std::int64_t>(args.staleness_s * 1000.0);
    cfg.recommend.pump_rate_ml_per_min = args.pump_rate;
    cfg.recommend.plot_capacity_ml_per_moisture_pct = args.capacity;

    std::optional<DecisionService> service;
    try {
        service.emplace(cfg);
    } catch (const agrisim::Error& e) {
        return fail(kInvalid, "store", e.what());
    }

    if (!args.replay.empty()) {
        try {
            const auto stats = service->replay_file(args.replay);
            std::cerr << "replayed " << stats.appended << " records (stale " << stats.stale << ", malformed "
                      << stats.malformed << ")\n";
        } catch (const agrisim::ConfigError& e) {
            return fail(kInvalid, "replay", e.what());
        }
    }

    HttpApi api(*service);
    if (!api.bind(args.host, args.port)) return fail(kRuntime, "port", "cannot bind " + std::to_string(args.port));
    IngestListener ingest(*service);
    const int ingest_port = args.ingest_port.value_or(args.port == 0 ? 0 : args.port + 1);
    if (ingest_port >= 0) {
        if (!ingest.bind(args.host, ingest_port)) {
            return fail(kRuntime, "ingest-port", "cannot bind " + std::to_string(ingest_port));
        }
        ingest.start();
    }

    std::printf("listening http=%d ingest=%d\n", api.port(), ingest_port >= 0 ? ingest.port() : -1);
    std::fflush(stdout);

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        api.stop();
    });
    api.run();

    ingest.stop();
    service->flush();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return kOk;
}

struct PowerArgs {
    double line = 115.0;
    double ratio = 3.0;
    int reg = 7805;
    std::optional<double> vin;
};

int cmd_power(const PowerArgs& args) {
    using namespace agrisim::power;
    try {
        PowerChainSpec spec;
        spec.line_v = args.line;
        spec.turns_ratio = args.ratio;
        spec.regulator_code = args.reg;
        const auto report = evaluate_chain(spec);
        std::cout << format_report(report);
        if (args.vin) {
            const auto chk = regulator_check(*args.vin, args.reg);
            std::printf("check:       %.3f V in -> %s\n", *args.vin, chk.ok ? "ok" : "insufficient headroom");
        }
    } catch (const agrisim::DomainError& e) {
        return fail(kInvalid, e.field(), e.what());
    }
    return kOk;
}

int cmd_replay(const std::string& path) {
    using namespace agrisim::decision;
    DecisionService service;
    ReplayStats stats;
    try {
        stats = service.replay_file(path);
    } catch (const agrisim::ConfigError& e) {
        return fail(kInvalid, "log", e.what());
    }
    const auto store = service.snapshot();
    std::printf("records=%llu stale=%llu malformed=%llu\n", static_cast<unsigned long long>(stats.appended),
                static_cast<unsigned long long>(stats.stale), static_cast<unsigned long long>(stats.malformed));
    for (const auto& node : store.nodes()) {
        const auto* last = store.latest(node);
        std::printf("node %s: %zu records, last m_pct=%d vol_ml=%.2f\n", node.c_str(), store.history(node).size(),
                    last->m_pct, last->vol_ml);
    }
    std::printf("model %s\n", to_json(service.model()).c_str());
    return kOk;
}

struct DhtArgs {
    double rh = 65.0;
    double temp = 27.0;
    std::string file;
};

int cmd_dht_encode(const DhtArgs& args) {
    using namespace agrisim::dht11;
    try {
        const auto wave = frame_to_waveform(encode_reading(reading_from(args.rh, args.temp)));
        write_waveform(std::cout, wave);
    } catch (const agrisim::Error& e) {
        return fail(kInvalid, e.field(), e.what());
    }
    return kOk;
}

int cmd_dht_decode(const DhtArgs& args) {
    using namespace agrisim::dht11;
    std::ifstream in(args.file, std::ios::binary);
    if (!in) return fail(kInvalid, "file", "cannot open " + args.file);
    try {
        const auto frame = decode_waveform(read_waveform(in));
        const auto r = frame_to_reading(frame);
        std::printf("frame %u %u %u %u %u rh=%.1f t=%.1f\n", frame[0], frame[1], frame[2], frame[3], frame[4],
                    r.humidity(), r.temperature());
    } catch (const CodecError& e) {
        return fail(kRuntime, std::string(to_string(e.fault())), e.what());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agrisim - smart irrigation edge/cloud simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a deterministic scenario and write its telemetry log");
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
    run_cmd->add_option("--out", run.out, "Telemetry log to write")->required();
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Start the decision service (HTTP API + TCP ingest)");
    serve_cmd->add_option("--host", serve.host, "Bind address");
    serve_cmd->add_option("--port", serve.port, "HTTP port (0 = any)");
    serve_cmd->add_option("--ingest-port", serve.ingest_port, "TCP ingest port (default HTTP port + 1, -1 disables)");
    serve_cmd->add_option("--store", serve.store, "Store directory")->required();
    serve_cmd->add_option("--replay", serve.replay, "Telemetry log to preload");
    serve_cmd->add_option("--fsync-every", serve.fsync_every, "Records per fsync (0 = only on shutdown)");
    serve_cmd->add_option("--staleness-s", serve.staleness_s, "Recommendation staleness bound");
    serve_cmd->add_option("--pump-rate", serve.pump_rate, "Pump rate in mL/min for recommendations");
    serve_cmd->add_option("--capacity", serve.capacity, "Plot capacity in mL per moisture percent");

    PowerArgs power;
    auto* power_cmd = app.add_subcommand("power", "Evaluate the transformer/rectifier/regulator chain");
    power_cmd->add_option("--line", power.line, "AC line voltage");
    power_cmd->add_option("--ratio", power.ratio, "Transformer turns ratio");
    power_cmd->add_option("--reg", power.reg, "78xx regulator code");
    power_cmd->add_option("--vin", power.vin, "Also check this regulator input voltage");

    std::string replay_log;
    auto* replay_cmd = app.add_subcommand("replay", "Rebuild a store from a log and print the learned model");
    replay_cmd->add_option("--log", replay_log, "Telemetry log")->required();

    DhtArgs dht;
    auto* dht_cmd = app.add_subcommand("dht", "DHT11 waveform dump tools");
    dht_cmd->require_subcommand(1);
    auto* enc = dht_cmd->add_subcommand("encode", "Print the waveform for a reading");
    enc->add_option("--rh", dht.rh, "Relative humidity %");
    enc->add_option("--temp", dht.temp, "Temperature C");
    auto* dec = dht_cmd->add_subcommand("decode", "Decode a waveform dump");
    dec->add_option("file", dht.file, "Dump file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kInvalid, "args", e.what());
    }

    if (*run_cmd) return cmd_run(run);
    if (*serve_cmd) return cmd_serve(serve);
    if (*power_cmd) return cmd_power(power);
    if (*replay_cmd) return cmd_replay(replay_log);
    if (*enc) return cmd_dht_encode(dht);
    if (*dec) return cmd_dht_decode(dht);
    return kInvalid;
}
