#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace sentinel {

class SessionService;

// POST /scenarios, POST /sessions, POST /sessions/{id}/observations,
// GET /sessions/{id}/belief, GET /sessions/{id}/projection?horizon=T,
// GET /sessions/{id}/recommendation, POST /sessions/{id}/branches,
// GET /sessions/{id}/history.  Errors come back as
// {"error": {"code", "message", "path"}}.
void register_routes(httplib::Server& server, SessionService& service);

int http_status_for(const std::string& code);

}  // namespace sentinel
