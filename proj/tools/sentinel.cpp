// Command-line front end: scenario validation, replay, sessions, HTTP server.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "sentinel/error.hpp"
#include "sentinel/replay.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/server.hpp"
#include "sentinel/session.hpp"
#include "sentinel/transition.hpp"

#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sentinel;

namespace {

constexpr int kValidationExit = 2;

int report(const Error& e, int code) {
    std::cerr << "error: " << e.code();
    if (!e.path().empty()) std::cerr << " at " << e.path();
    std::cerr << ": " << e.what() << '\n';
    return code;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("ParseError", e.what(), path);
    }
}

std::shared_ptr<const Scenario> load_or_exit(const std::string& path, int& rc) {
    try {
        return load_scenario(read_json_file(path));
    } catch (const Error& e) {
        rc = report(e, kValidationExit);
        return nullptr;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sentinel: Bayesian early-warning engine"};
    app.require_subcommand(1);
    std::string data_dir = SessionService::default_root().string();
    unsigned seed = 0;
    app.add_option("--data", data_dir, "data directory (default $SENTINEL_DATA_DIR or ./sentinel-data)");
    app.add_option("--seed", seed, "reserved for Monte Carlo test oracles");

    std::string scenario_path, out_dir, label;
    auto* validate = app.add_subcommand("validate", "load and validate a scenario file");
    validate->add_option("scenario", scenario_path)->required();

    auto* replay = app.add_subcommand("replay", "run the scenario script and write report CSVs");
    replay->add_option("scenario", scenario_path)->required();
    replay->add_option("--out", out_dir, "output directory")->required();

    auto* matrix = app.add_subcommand("matrix", "export one transition matrix as CSV");
    matrix->add_option("scenario", scenario_path)->required();
    matrix->add_option("realization", label, "realization label, e.g. OAHU/IMMEDIATE")->required();
    matrix->add_option("--out", out_dir, "output file (default stdout)");

    int port = 8080;
    std::string host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "serve the HTTP API");
    serve->add_option("--port", port);
    serve->add_option("--host", host);
    serve->add_option("--data", data_dir);

    auto* session = app.add_subcommand("session", "work with persisted sessions");
    session->require_subcommand(1);
    std::string sid, signal = "RADIO", value, overrides;
    std::vector<std::string> sources;
    int period = -1;
    auto* s_new = session->add_subcommand("new", "start a session on a scenario file");
    s_new->add_option("scenario", scenario_path)->required();
    auto* s_obs = session->add_subcommand("observe", "apply one observation");
    s_obs->add_option("id", sid)->required();
    s_obs->add_option("--signal", signal);
    s_obs->add_option("--value", value)->required();
    s_obs->add_option("--source", sources);
    s_obs->add_option("--period", period, "defaults to the next period");
    auto* s_rec = session->add_subcommand("recommend", "print the current recommendation");
    s_rec->add_option("id", sid)->required();
    auto* s_branch = session->add_subcommand("branch", "create a what-if branch");
    s_branch->add_option("id", sid)->required();
    s_branch->add_option("--overrides", overrides, "JSON text or @file")->required();
    auto* s_export = session->add_subcommand("export", "write history and belief CSVs");
    s_export->add_option("id", sid)->required();
    s_export->add_option("--out", out_dir)->required();

    CLI11_PARSE(app, argc, argv);

    int rc = 0;
    try {
        if (*validate) {
            auto sc = load_or_exit(scenario_path, rc);
            if (!sc) return rc;
            std::cout << "ok " << sc->name << " (" << sc->hash << ")\n"
                      << "  rasters " << sc->graph.size() << ", realizations " << sc->realizations.size()
                      << ", alert types " << sc->costs.alert_types.size() << ", script " << sc->script.size() << '\n';
            for (const auto& w : sc->warnings) std::cout << "  warning: " << w << '\n';
            return 0;
        }
        if (*replay) {
            auto sc = load_or_exit(scenario_path, rc);
            if (!sc) return rc;
            auto res = run_replay(sc, out_dir);
            std::cout << "wrote " << res.files.size() << " files to " << out_dir << '\n';
            if (res.first_issue)
                std::cout << "first alert: " << res.first_issue->alert_type << " at period " << res.first_issue->period
                          << " (" << sc->period_label(res.first_issue->period) << ")\n";
            else
                std::cout << "no alert issued during the script\n";
            return 0;
        }
        if (*matrix) {
            auto sc = load_or_exit(scenario_path, rc);
            if (!sc) return rc;
            const auto j = sc->realization_index(label);
            if (out_dir.empty()) {
                write_transition_csv(std::cout, sc->graph, sc->models[j]);
            } else {
                std::ofstream f(out_dir);
                write_transition_csv(f, sc->graph, sc->models[j]);
            }
            return 0;
        }
        if (*serve) {
            SessionService svc{fs::path(data_dir)};
            httplib::Server server;
            register_routes(server, svc);
            std::cout << "listening on " << host << ':' << port << " (data " << data_dir << ")" << std::endl;
            return server.listen(host, port) ? 0 : 1;
        }

        SessionService svc{fs::path(data_dir)};
        if (*s_new) {
            json doc;
            try {
                doc = read_json_file(scenario_path);
                auto up = svc.upload_scenario(doc);
                std::cout << svc.create_session(up["id"]).dump(2) << '\n';
            } catch (const Error& e) {
                return report(e, kValidationExit);
            }
        } else if (*s_obs) {
            json report = json::object();
            report["signal"] = signal;
            report["value"] = value;
            report["sources"] = sources;
            json body = json::object();
            body["reports"] = json::array({report});
            if (period >= 0) body["period"] = period;
            auto out = svc.observe(sid, body);
            json brief{{"period", out["belief"]["period"]}, {"p_target", out["belief"]["p_target"]}};
            if (!out["recommendation"].is_null())
                brief["recommendation"] = json{{"alert_type", out["recommendation"]["alert_type"]},
                                               {"tau", out["recommendation"]["tau"]},
                                               {"issue_now", out["recommendation"]["issue_now"]}};
            std::cout << brief.dump(2) << '\n';
        } else if (*s_rec) {
            auto r = svc.recommendation(sid);
            r.erase("surface");
            std::cout << r.dump(2) << '\n';
        } else if (*s_branch) {
            json ov = overrides.rfind('@', 0) == 0 ? read_json_file(overrides.substr(1)) : json::parse(overrides);
            std::cout << svc.branch(sid, ov).dump(2) << '\n';
        } else if (*s_export) {
            fs::create_directories(out_dir);
            const auto s = svc.snapshot(sid);
            std::ofstream(fs::path(out_dir) / "history.json") << history_json(s).dump(2) << '\n';
            std::ofstream w(fs::path(out_dir) / "belief_weights.csv");
            write_belief_weights_csv(w, s);
            std::ofstream x(fs::path(out_dir) / "state.csv");
            write_state_csv(x, s);
            std::cout << "exported " << sid << " to " << out_dir << '\n';
        }
    } catch (const Error& e) {
        return report(e, 1);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
