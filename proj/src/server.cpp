#include "sentinel/server.hpp"

#include <functional>

#include "sentinel/error.hpp"
#include "sentinel/session.hpp"

// after Eigen: glibc's resolver header defines a macro named _res
#include <httplib.h>

namespace sentinel {

using nlohmann::json;

int http_status_for(const std::string& code) {
    if (code == "NotFound") return 404;
    if (code == "NonConsecutivePeriod" || code == "HorizonExceeded") return 409;
    if (code == "Internal") return 500;
    return 400;
}

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message, const std::string& path) {
    send(res, http_status_for(code), {{"error", {{"code", code}, {"message", message}, {"path", path}}}});
}

using Handler = std::function<json(const httplib::Request&)>;

httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
    return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, ok_status, h(req));
        } catch (const Error& e) {
            send_error(res, e.code(), e.what(), e.path());
        } catch (const json::exception& e) {
            send_error(res, "ParseError", e.what(), "");
        } catch (const std::exception& e) {
            send_error(res, "Internal", e.what(), "");
        }
    };
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error("ParseError", e.what());
    }
}

}  // namespace

void register_routes(httplib::Server& server, SessionService& svc) {
    server.Post("/scenarios", wrap([&svc](const httplib::Request& req) { return svc.upload_scenario(body_of(req)); }, 201));
    server.Post("/sessions", wrap(
                                 [&svc](const httplib::Request& req) {
                                     const auto b = body_of(req);
                                     const auto key = b.contains("scenario_id") ? "scenario_id" : "scenario";
                                     if (!b.contains(key) || !b[key].is_string())
                                         throw Error("ValidationError", "scenario_id is required", "scenario_id");
                                     return svc.create_session(b[key].get<std::string>());
                                 },
                                 201));
    server.Post(R"(/sessions/([^/]+)/observations)",
                wrap([&svc](const httplib::Request& req) { return svc.observe(req.matches[1], body_of(req)); }));
    server.Get(R"(/sessions/([^/]+)/belief)", wrap([&svc](const httplib::Request& req) { return svc.belief(req.matches[1]); }));
    server.Get(R"(/sessions/([^/]+)/projection)", wrap([&svc](const httplib::Request& req) {
                   int horizon = 0;
                   if (req.has_param("horizon")) {
                       try {
                           horizon = std::stoi(req.get_param_value("horizon"));
                       } catch (...) {
                           throw Error("ValidationError", "horizon must be an integer", "horizon");
                       }
                       if (horizon <= 0) throw Error("ValidationError", "horizon must be positive", "horizon");
                   }
                   return svc.projection(req.matches[1], horizon);
               }));
    server.Get(R"(/sessions/([^/]+)/recommendation)",
               wrap([&svc](const httplib::Request& req) { return svc.recommendation(req.matches[1]); }));
    server.Post(R"(/sessions/([^/]+)/branches)",
                wrap([&svc](const httplib::Request& req) { return svc.branch(req.matches[1], body_of(req)); }, 201));
    server.Get(R"(/sessions/([^/]+)/history)", wrap([&svc](const httplib::Request& req) { return svc.history(req.matches[1]); }));
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); });
}

}  // namespace sentinel
