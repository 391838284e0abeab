// practica: validate authoring files, play a scenario in the terminal, serve
// the HTTP API, export session traces.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>

#include "practica/http_api.hpp"
#include "practica/scenario_format.hpp"
#include "practica/session_service.hpp"
#include "practica/text.hpp"

using namespace practica;

namespace {

std::string default_data_dir() {
    if (const char* env = std::getenv("PRACTICA_DATA_DIR"); env && *env) return env;
    return "data";
}

int run_validate(const std::vector<std::string>& files, bool quiet) {
    int errors = 0;
    for (const auto& f : files) {
        auto diags = validate_file(f);
        for (const auto& d : diags) {
            if (d.severity == Severity::error) ++errors;
            if (!quiet || d.severity == Severity::error) std::cout << format_diagnostic(d) << "\n";
        }
        if (!has_errors(diags) && !quiet) std::cout << f << ": ok\n";
    }
    return errors ? 1 : 0;
}

void print_state(const json& st) {
    std::cout << "\n-- turn " << st["turn"].get<int>() << " | mode " << st["mode"].get<std::string>();
    if (!st["practice"].is_null()) {
        const auto& p = st["practice"];
        std::cout << " | practice " << p["practice"].get<std::string>() << " (" << p["status"].get<std::string>();
        if (p.contains("scene")) std::cout << ", scene " << p["scene"].get<std::string>();
        std::cout << ")";
    }
    std::cout << "\n   emotions:";
    for (const auto& e : st["emotions"])
        std::cout << " " << e["emotion"].get<std::string>() << "=" << format_decimal(e["score"].get<double>());
    std::cout << "\n";
    for (const auto& d : st["diagnostics"]) std::cout << "   note: " << d.get<std::string>() << "\n";
}

void print_turn(const json& t) {
    if (!t["reply"].is_null()) std::cout << "   > " << t["reply"]["text"].get<std::string>() << "\n";
    for (const auto& v : t["violations"]) {
        if (v["type"] == "norm")
            std::cout << "   ! norm violated: " << v["norm"].get<std::string>() << " (" << v["meaning"].get<std::string>()
                      << ")\n";
        else
            std::cout << "   ! expectation violated: " << v["expectation"].get<std::string>() << "\n";
    }
    if (!t["reevaluation"].is_null() && t["reevaluation"]["kind"] != "continue") {
        const auto& r = t["reevaluation"];
        if (r["kind"] == "switch")
            std::cout << "   * switched to practice " << r["practice"].get<std::string>() << "\n";
        else
            std::cout << "   * practice aborted: " << r["reason"].get<std::string>() << "\n";
    }
    if (!t["scene"].is_null() && t["scene"]["step"] == "quit")
        std::cout << "   * plan pattern quit: " << t["scene"]["reason"].get<std::string>() << "\n";
}

int run_play(const std::string& scenario, const std::string& data_dir, bool persist) {
    auto catalog = std::make_shared<const Catalog>(Catalog::load(data_dir));
    std::optional<std::filesystem::path> store;
    if (persist) store = std::filesystem::path(data_dir) / "sessions";
    SessionManager manager(catalog, store);
    SessionRequest req;
    req.scenario = scenario;
    json st = manager.create(req);
    const std::string id = st["id"];
    std::cout << "session " << id << ": " << st["title"].get<std::string>() << "\n"
              << "commands: <number> play, p <number> preview, o var=state observe, q quit\n";
    std::string line;
    while (true) {
        print_state(st);
        if (st["terminal"].get<bool>()) {
            std::cout << "dialogue finished.\n";
            break;
        }
        const auto& moves = st["moves"];
        for (std::size_t i = 0; i < moves.size(); ++i)
            std::cout << "  [" << i + 1 << "] " << moves[i]["text"].get<std::string>() << "\n";
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line) || line == "q") break;
        try {
            if (line.rfind("o ", 0) == 0) {
                const auto eq = line.find('=');
                if (eq == std::string::npos) {
                    std::cout << "usage: o variable=state\n";
                    continue;
                }
                json t = manager.inject_observation(id, {{line.substr(2, eq - 2), line.substr(eq + 1)}});
                print_turn(t);
                st = t["state"];
                continue;
            }
            const bool preview = line.rfind("p ", 0) == 0;
            const std::size_t n = std::stoul(preview ? line.substr(2) : line);
            if (n == 0 || n > moves.size()) {
                std::cout << "no such move\n";
                continue;
            }
            const std::string move = moves[n - 1]["id"];
            if (preview) {
                json t = manager.preview_move(id, move);
                std::cout << "   (preview)\n";
                print_turn(t);
                continue;
            }
            json t = manager.post_move(id, move);
            print_turn(t);
            st = t["state"];
        } catch (const std::invalid_argument&) {
            std::cout << "enter a move number\n";
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int run_serve(const std::string& host, int port, const std::string& data_dir) {
    auto catalog = std::make_shared<const Catalog>(Catalog::load(data_dir));
    SessionManager manager(catalog, std::filesystem::path(data_dir) / "sessions");
    ApiRouter router(manager);
    HttpServer server(router);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << catalog->library.ids().size() << " practices and " << catalog->scenarios.size()
              << " scenarios on http://" << host << ":" << port << std::endl;
    const bool ok = server.listen(host, port);
    g_server = nullptr;
    if (!ok) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

int run_trace_export(const std::string& id, const std::string& data_dir, bool as_array, bool verify) {
    SessionStore store(std::filesystem::path(data_dir) / "sessions");
    if (!store.exists(id)) {
        std::cerr << "unknown session " << id << "\n";
        return 1;
    }
    const auto events = store.trace(id);
    if (verify) {
        const Catalog catalog = Catalog::load(data_dir);
        const Session s = replay(catalog, store.request(id), id, events);
        if (state_json(s) != store.stored_state(id)) {
            std::cerr << "replay of " << id << " does not reproduce the stored state\n";
            return 2;
        }
    }
    if (as_array) {
        json out = json::array();
        for (const auto& e : events) out.push_back(trace_event_json(e));
        std::cout << json{{"session", id}, {"request", request_json(store.request(id))}, {"events", out}}.dump(2)
                  << "\n";
    } else {
        for (const auto& e : events) std::cout << trace_event_json(e).dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social practice dialogue trainer"};
    app.require_subcommand(1);
    std::string data_dir = default_data_dir();
    app.add_option("--data-dir", data_dir, "Data directory (env PRACTICA_DATA_DIR, default ./data)");

    auto* validate = app.add_subcommand("validate", "Check practice and scenario files");
    std::vector<std::string> files;
    bool quiet = false;
    validate->add_option("files", files, "*.practice.json / *.scenario.json files")->required();
    validate->add_flag("-q,--quiet", quiet, "Only print errors");

    auto* play = app.add_subcommand("play", "Play a scenario in the terminal");
    std::string scenario;
    bool persist = false;
    play->add_option("scenario", scenario, "Scenario id")->required();
    play->add_flag("--save", persist, "Persist the session under <data-dir>/sessions");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    int port = 8080;
    std::string host = "127.0.0.1";
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--data-dir", data_dir, "Data directory");

    auto* trace = app.add_subcommand("trace", "Session traces");
    trace->require_subcommand(1);
    auto* exp = trace->add_subcommand("export", "Print a persisted session trace");
    std::string session_id;
    bool as_array = false;
    bool verify = false;
    exp->add_option("session", session_id, "Session id")->required();
    exp->add_flag("--json", as_array, "One JSON document instead of JSON lines");
    exp->add_flag("--verify", verify, "Replay the trace and compare with the stored state");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return run_validate(files, quiet);
        if (*play) return run_play(scenario, data_dir, persist);
        if (*serve) return run_serve(host, port, data_dir);
        if (*exp) return run_trace_export(session_id, data_dir, as_array, verify);
    } catch (const FormatError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
