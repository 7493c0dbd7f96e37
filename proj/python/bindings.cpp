// Thin Python layer. Structured results cross the boundary as JSON text and
// are decoded on the Python side, so the schema matches the CLI outputs.
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kprobe/action_map.hpp"
#include "kprobe/asymptotics.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/cli.hpp"
#include "kprobe/config.hpp"
#include "kprobe/error.hpp"
#include "kprobe/hessian.hpp"

namespace py = pybind11;
using namespace kprobe;
using nlohmann::json;

namespace {

Tolerances tolerances(const std::string& text) {
    return text.empty() ? Tolerances{} : parse_tolerances(json::parse(text));
}

MomentumPoint point(const SystemModel& m, const std::vector<double>& F) {
    if (F.size() != m.n()) throw ConfigError("point has " + std::to_string(F.size()) + " coordinates, model has " +
                                             std::to_string(m.n()));
    return {F};
}

}  // namespace

PYBIND11_MODULE(_kprobe, mod) {
    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(mod, "NumericalError", PyExc_ArithmeticError);

    py::class_<SystemModel>(mod, "Model")
        .def_static("from_json", [](const std::string& text) { return build_model(json::parse(text)); })
        .def_static("catalog", [](const std::string& name) { return catalog_model(name); })
        .def_property_readonly("label", &SystemModel::label)
        .def_property_readonly("n", &SystemModel::n)
        .def_property_readonly("k", &SystemModel::k)
        .def("to_json", [](const SystemModel& m) { return model_to_json(m).dump(); })
        .def("__repr__", [](const SystemModel& m) { return "<kprobe.Model " + m.label() + ">"; });

    mod.def("catalog_names", [] {
        std::vector<std::string> names;
        for (const auto& e : model_catalog()) names.push_back(e.name);
        return names;
    });
    mod.def("validate", [](const SystemModel& m, const std::string& tol) {
        return to_json(validate_conditions(m, tolerances(tol))).dump();
    }, py::arg("model"), py::arg("tol") = "");
    mod.def("action", [](const SystemModel& m, const std::vector<double>& F, const std::string& tol) {
        return action_at(m, point(m, F), tolerances(tol)).values;
    }, py::arg("model"), py::arg("F"), py::arg("tol") = "");
    mod.def("jacobian", [](const SystemModel& m, const std::vector<double>& F, const std::string& tol) {
        return jacobian_I_wrt_F(m, point(m, F), tolerances(tol));
    }, py::arg("model"), py::arg("F"), py::arg("tol") = "");
    mod.def("frequency", [](const SystemModel& m, const std::vector<double>& F, const std::string& tol) {
        return frequency_map(m, point(m, F), tolerances(tol));
    }, py::arg("model"), py::arg("F"), py::arg("tol") = "");
    mod.def("det_hessian", [](const SystemModel& m, const std::vector<double>& F, const std::string& tol) {
        return det_hessian(m, point(m, F), tolerances(tol)).to_json().dump();
    }, py::arg("model"), py::arg("F"), py::arg("tol") = "");
    mod.def("fit_action", [](const SystemModel& m, std::size_t factor, const std::string& tol) {
        if (factor < 1 || factor > m.k()) throw ConfigError("factor index out of range");
        return fit_singular_action(m, factor - 1, default_fit_grid(m, factor - 1), tolerances(tol)).to_json().dump();
    }, py::arg("model"), py::arg("factor"), py::arg("tol") = "");
    mod.def("scaling", [](const SystemModel& m, const std::vector<double>& direction, double tmin, double tmax,
                          int points, const std::string& tol) {
        const Tolerances t = tolerances(tol);
        return scaled_det_path(m, radial_path(m, direction, tmin, tmax, points), t).to_json().dump();
    }, py::arg("model"), py::arg("direction"), py::arg("tmin") = 1e-12, py::arg("tmax") = 1e-3,
       py::arg("points") = 40, py::arg("tol") = "");
    mod.def("verify_box", [](const SystemModel& m, const std::vector<double>& lower, const std::vector<double>& upper,
                             std::size_t samples, std::uint64_t seed, const std::string& tol) {
        const Tolerances t = tolerances(tol);
        return verify_kolmogorov(m, corner_domain(m, lower, upper), samples, seed, t).to_json().dump();
    }, py::arg("model"), py::arg("lower"), py::arg("upper"), py::arg("samples") = 500, py::arg("seed") = 0,
       py::arg("tol") = "");
    mod.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    });
}
