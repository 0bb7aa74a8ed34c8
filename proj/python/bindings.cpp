/// Python bindings: closed-form bounds, LP certificates and the certification pipeline.

#include "mpccert/analytic.hpp"
#include "mpccert/certificates.hpp"
#include "mpccert/config.hpp"
#include "mpccert/pipeline.hpp"
#include "mpccert/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

namespace py = pybind11;
using namespace mpccert;

#define MPCCERT_STR2(x) #x
#define MPCCERT_STR(x) MPCCERT_STR2(x)

PYBIND11_MODULE(_core, m) {
    m.doc() = "MPC horizon certificates";
#ifdef VERSION_INFO
    m.attr("__version__") = MPCCERT_STR(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::enum_<SigmaMode>(m, "SigmaMode")
        .value("StageCost", SigmaMode::StageCost)
        .value("Storage", SigmaMode::Storage)
        .value("General", SigmaMode::General);

    py::enum_<Method>(m, "Method")
        .value("Thm1", Method::Thm1)
        .value("Thm3", Method::Thm3)
        .value("Thm4", Method::Thm4)
        .value("Thm5", Method::Thm5)
        .value("Thm7", Method::Thm7)
        .value("Thm8", Method::Thm8)
        .value("Lp6", Method::Lp6)
        .value("Lp12", Method::Lp12);

    py::class_<CertificationConstants>(m, "CertificationConstants")
        .def(py::init<>())
        .def_readwrite("gamma", &CertificationConstants::gamma)
        .def_readwrite("gamma_bar", &CertificationConstants::gamma_bar)
        .def_readwrite("eps_o", &CertificationConstants::eps_o)
        .def_readwrite("gamma_o_lower", &CertificationConstants::gamma_o_lower)
        .def_readwrite("gamma_o_upper", &CertificationConstants::gamma_o_upper)
        .def_readwrite("sigma_mode", &CertificationConstants::sigma_mode)
        .def_static("stage_cost", &CertificationConstants::stage_cost, py::arg("gamma"))
        .def_static("storage", &CertificationConstants::storage, py::arg("gamma"), py::arg("eps_o"))
        .def_static("constant", &CertificationConstants::constant, py::arg("gamma_bar"), py::arg("K"),
                    py::arg("mode"), py::arg("eps_o") = 1.0)
        .def("validate", &CertificationConstants::validate);

    py::class_<TerminalConstants>(m, "TerminalConstants")
        .def(py::init<>())
        .def_readwrite("c_f_lower", &TerminalConstants::c_f_lower)
        .def_readwrite("c_f_upper", &TerminalConstants::c_f_upper)
        .def_readwrite("eps_f", &TerminalConstants::eps_f)
        .def_readwrite("gamma_f", &TerminalConstants::gamma_f)
        .def_readwrite("gamma_f_bar", &TerminalConstants::gamma_f_bar)
        .def_static("constant", &TerminalConstants::constant, py::arg("gamma_f_bar"), py::arg("K"), py::arg("eps_f"))
        .def("validate", &TerminalConstants::validate);

    py::class_<SuboptimalityResult>(m, "SuboptimalityResult")
        .def_readonly("alpha", &SuboptimalityResult::alpha)
        .def_readonly("horizon", &SuboptimalityResult::horizon)
        .def_readonly("method", &SuboptimalityResult::method)
        .def_readonly("stabilizing", &SuboptimalityResult::stabilizing);

    m.def("alpha_thm1", &alpha_thm1, py::arg("c"), py::arg("N"));
    m.def("alpha_hat_eq7", &alpha_hat_eq7, py::arg("c"), py::arg("N"));
    m.def("alpha_hat_eq9", &alpha_hat_eq9, py::arg("c"), py::arg("N"));
    m.def("alpha_thm5", &alpha_thm5, py::arg("c"), py::arg("t"), py::arg("N"));
    m.def("alpha_hat_eq13", &alpha_hat_eq13, py::arg("t"), py::arg("N"));
    m.def("alpha_hat_eq16", &alpha_hat_eq16, py::arg("c"), py::arg("t"), py::arg("N"));
    m.def("alpha_lp6", &alpha_lp6, py::arg("c"), py::arg("N"));
    m.def("alpha_lp12", &alpha_lp12, py::arg("c"), py::arg("t"), py::arg("N"));
    m.def("performance_factor_eq11", &performance_factor_eq11, py::arg("c"), py::arg("t"), py::arg("N"));

    m.def("n_min_thm1", [](const CertificationConstants& c) { return n_min_thm1(c).n_min; }, py::arg("c"));
    m.def("n_min_eq8", [](double g, double e) { return n_min_eq8(g, e).n_min; }, py::arg("gamma_bar"),
          py::arg("eps_o"));
    m.def("n_min_thm5", [](const CertificationConstants& c, const TerminalConstants& t) {
        return n_min_thm5(c, t).n_min;
    }, py::arg("c"), py::arg("t"));
    m.def("n_min_eq15", [](double g, double e) { return n_min_eq15(g, e).n_min; }, py::arg("gamma_f_bar"),
          py::arg("eps_f"));
    m.def("n_min_eq17", [](double g, double eo, double ef) { return n_min_eq17(g, eo, ef).n_min; },
          py::arg("gamma_f_bar"), py::arg("eps_o"), py::arg("eps_f"));

    m.def("certify", [](const std::string& config_json, int threads) {
        const ScenarioConfig cfg = parse_config(nlohmann::json::parse(config_json));
        RunOptions opt;
        opt.threads = threads;
        CertificationReport rep;
        {
            py::gil_scoped_release release;
            rep = run_certification(cfg, opt);
        }
        return py::make_tuple(report_csv(rep), detail_csv(rep));
    }, py::arg("config_json"), py::arg("threads") = 1,
          "Run the certification pipeline on a JSON config; returns (summary_csv, details_csv).");
}
