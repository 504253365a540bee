#include <pybind11/pybind11.h>
#include <pybind11/gil_safe_call_once.h>
#include <pybind11/stl.h>

#include "sentinel/error.hpp"
#include "sentinel/replay.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/session.hpp"

namespace py = pybind11;
using namespace sentinel;
using nlohmann::json;

namespace {

// Python sees plain JSON text; the package wrapper decodes it.
class PyService {
public:
    explicit PyService(std::optional<std::string> root)
        : svc_(root ? std::optional<std::filesystem::path>(*root) : std::nullopt) {}
    std::string upload(const std::string& doc) { return svc_.upload_scenario(json::parse(doc)).dump(); }
    std::string create(const std::string& scenario_id) { return svc_.create_session(scenario_id).dump(); }
    std::string observe(const std::string& id, const std::string& body) { return svc_.observe(id, json::parse(body)).dump(); }
    std::string belief(const std::string& id) { return svc_.belief(id).dump(); }
    std::string projection(const std::string& id, int horizon) { return svc_.projection(id, horizon).dump(); }
    std::string recommendation(const std::string& id) { return svc_.recommendation(id).dump(); }
    std::string branch(const std::string& id, const std::string& body) { return svc_.branch(id, json::parse(body)).dump(); }
    std::string history(const std::string& id) { return svc_.history(id).dump(); }

private:
    SessionService svc_;
};

}  // namespace

PYBIND11_MODULE(_sentinel, m) {
    // args are (code, message, path)
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
    error.call_once_and_store_result([&]() { return py::object(py::exception<Error>(m, "SentinelError")); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetObject(error.get_stored().ptr(), py::make_tuple(e.code(), e.what(), e.path()).ptr());
        }
    });

    m.def("validate", [](const std::string& path) {
        auto sc = load_scenario_file(path);
        return py::make_tuple(sc->name, sc->hash, sc->warnings);
    });
    m.def("shortest_hops", [](const std::string& path, int from, const std::string& target) {
        auto sc = load_scenario_file(path);
        return shortest_hops(sc->graph, from, sc->trapping_sets.at(target));
    });
    m.def("first_passage", [](const std::string& path, const std::string& label, int horizon) {
        auto sc = load_scenario_file(path);
        return first_passage(sc->p0, sc->models[sc->realization_index(label)], horizon).prob;
    });
    m.def("present_value", [](double cost, int tau, double daily_rate, int periods_per_day) {
        CostModel cm;
        cm.daily_discount_rate = daily_rate;
        cm.periods_per_day = periods_per_day;
        return present_value(cost, tau, cm);
    });
    m.def("replay", [](const std::string& path, const std::string& out) {
        auto r = run_replay(load_scenario_file(path), out);
        py::list recs;
        for (const auto& s : r.recommendations)
            recs.append(py::dict(py::arg("period") = s.period, py::arg("alert_type") = s.alert_type,
                                 py::arg("tau") = s.tau, py::arg("issue_now") = s.issue_now,
                                 py::arg("expected_disutility") = s.expected_disutility));
        return recs;
    }, py::arg("path"), py::arg("out") = "");

    py::class_<PyService>(m, "_Service")
        .def(py::init<std::optional<std::string>>(), py::arg("root") = py::none())
        .def("upload", &PyService::upload)
        .def("create", &PyService::create)
        .def("observe", &PyService::observe)
        .def("belief", &PyService::belief)
        .def("projection", &PyService::projection)
        .def("recommendation", &PyService::recommendation)
        .def("branch", &PyService::branch)
        .def("history", &PyService::history);
}
