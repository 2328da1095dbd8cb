#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "anovaemu/db_anova.hpp"
#include "anovaemu/df_emulator.hpp"
#include "anovaemu/esp.hpp"
#include "anovaemu/heat_pde.hpp"
#include "anovaemu/sobol.hpp"
#include "anovaemu/testbed.hpp"

namespace py = pybind11;
using namespace anovaemu;

namespace {

// Thin value wrapper so Python never sees shared_ptr<const Marginal> directly.
struct PyMarginal {
    MarginalPtr p;
};

std::vector<MarginalPtr> unwrap(const std::vector<PyMarginal>& ms) {
    std::vector<MarginalPtr> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back(m.p);
    return out;
}

struct NamedProblem {
    DerivativeModel model;
    std::vector<PyMarginal> marginals;
    int default_d0 = 1;
};

NamedProblem named_problem(const std::string& name) {
    NamedProblem p;
    auto wrap = [](const std::vector<MarginalPtr>& ms) {
        std::vector<PyMarginal> out;
        for (const auto& m : ms) out.push_back({m});
        return out;
    };
    if (name == "ishigami") {
        p.model = ishigami_model();
        p.marginals = wrap(ishigami_marginals());
        p.default_d0 = 2;
    } else if (name == "gfunction-a") {
        p.model = g_function_model(g_a_type_a());
        p.marginals = wrap(g_function_marginals(10));
        p.default_d0 = 2;
    } else if (name == "gfunction-b") {
        p.model = g_function_model(g_a_type_b());
        p.marginals = wrap(g_function_marginals(10));
        p.default_d0 = 1;
    } else if (name == "gfunction-c") {
        p.model = g_function_model(g_a_type_c());
        p.marginals = wrap(g_function_marginals(10));
        p.default_d0 = 4;
    } else if (name == "heat-pde") {
        const PdeConfig cfg;
        p.model = heat_qoi_model(cfg);
        p.marginals = wrap(pde_input_marginals(cfg));
        p.default_d0 = 1;
    } else {
        throw std::invalid_argument("unknown problem '" + name + "'");
    }
    return p;
}

py::dict report_to_dict(const SensitivityReport& rep) {
    py::dict d;
    d["s"] = rep.s;
    d["s_se"] = rep.s_se;
    if (rep.st.size() > 0) {
        d["st"] = rep.st;
        d["st_se"] = rep.st_se;
    }
    d["ub"] = rep.ub;
    d["ub_se"] = rep.ub_se;
    d["variance"] = rep.variance;
    d["recommended_d0"] = rep.recommended_d0;
    d["retained"] = rep.retained;
    d["decisions"] = rep.decisions;
    return d;
}

}  // namespace

PYBIND11_MODULE(_anovaemu, m) {
    m.doc() = "ANOVA-based emulators: derivative-based and derivative-free "
              "surrogates, sensitivity screening and the heat-PDE application";

    py::class_<PyMarginal>(m, "Marginal")
        .def("cdf", [](const PyMarginal& s, double x) { return s.p->cdf(x); })
        .def("pdf", [](const PyMarginal& s, double x) { return s.p->pdf(x); })
        .def("quantile", [](const PyMarginal& s, double u) { return s.p->quantile(u); })
        .def_property_readonly("lower", [](const PyMarginal& s) { return s.p->lower(); })
        .def_property_readonly("upper", [](const PyMarginal& s) { return s.p->upper(); })
        .def_property_readonly("kind", [](const PyMarginal& s) { return s.p->kind(); })
        .def("__repr__", [](const PyMarginal& s) {
            return "<Marginal " + s.p->kind() + " [" + std::to_string(s.p->lower()) + ", " +
                   std::to_string(s.p->upper()) + "]>";
        });

    m.def(
        "uniform", [](double lo, double hi) { return PyMarginal{uniform_marginal(lo, hi)}; },
        py::arg("lower"), py::arg("upper"), "Uniform marginal on (lower, upper)");
    m.def(
        "mixture",
        [](const PyMarginal& base, double tau) {
            return PyMarginal{make_default_mixture(base.p, tau)};
        },
        py::arg("base"), py::arg("tau"),
        "Right-extension mixture base law with weight tau on the base support");

    m.def(
        "sobol_points",
        [](int dim, int n, std::uint64_t skip) {
            SobolSequence seq(dim);
            if (skip > 0) seq.skip_to(skip + 1);
            Eigen::MatrixXd out(n, dim);
            for (int i = 0; i < n; ++i) out.row(i) = seq.next().transpose();
            return out;
        },
        py::arg("dim"), py::arg("n"), py::arg("skip") = 0,
        "First n points (after `skip`) of the Sobol sequence, in (0,1)^dim");

    m.def(
        "sample_design",
        [](const std::vector<PyMarginal>& marginals, int n, std::uint64_t seed,
           const std::string& generator) {
            const Generator g =
                generator == "pseudo" ? Generator::pseudo_random : Generator::sobol;
            return sample_design(unwrap(marginals), n, seed, g).points;
        },
        py::arg("marginals"), py::arg("n"), py::arg("seed") = 0,
        py::arg("generator") = "sobol");

    m.def(
        "esp", [](const Eigen::VectorXd& r, int pmax) { return esp_all(r, pmax); },
        py::arg("r"), py::arg("pmax"),
        "Elementary symmetric polynomials e_0..e_pmax of the entries of r");

    m.def(
        "recommend_truncation",
        [](const Eigen::VectorXd& s, const Eigen::VectorXd& st, double eps) {
            return recommend_truncation(s, st, eps);
        },
        py::arg("s"), py::arg("st") = Eigen::VectorXd(), py::arg("eps") = 0.05,
        "Smallest unbiased truncation order implied by the index vectors");

    m.def(
        "screen",
        [](const std::string& problem, int n, std::uint64_t seed, bool with_total,
           int workers) {
            NamedProblem p = named_problem(problem);
            ReportOptions ro;
            ro.with_total = with_total && problem != "heat-pde";
            ro.workers = workers;
            return report_to_dict(
                sensitivity_report(p.model, unwrap(p.marginals), n, seed, ro));
        },
        py::arg("problem"), py::arg("n") = 8192, py::arg("seed") = 2025,
        py::arg("with_total") = true, py::arg("workers") = 1,
        "Derivative-based sensitivity screening of a named problem");

    m.def(
        "problem_marginals",
        [](const std::string& problem) { return named_problem(problem).marginals; },
        py::arg("problem"));
    m.def(
        "problem_value",
        [](const std::string& problem, const Eigen::VectorXd& x) {
            return named_problem(problem).model.value(x);
        },
        py::arg("problem"), py::arg("x"));

    py::class_<DfEmulator>(m, "DfEmulator")
        .def("predict",
             [](const DfEmulator& em, const Eigen::MatrixXd& x) {
                 return predict_df_batch(em, x);
             })
        .def_property_readonly("mean",
                               [](const DfEmulator& em) { return em.mean_estimate; })
        .def("save",
             [](const DfEmulator& em, const std::string& path) {
                 std::ofstream os(path);
                 if (!os) throw std::invalid_argument("cannot write " + path);
                 save_df(em, os);
             })
        .def("to_json_str", [](const DfEmulator& em) {
            std::ostringstream os;
            save_df(em, os);
            return os.str();
        });

    m.def(
        "load_df_emulator",
        [](const std::string& path) {
            std::ifstream is(path);
            if (!is) throw std::invalid_argument("cannot read " + path);
            return load_df(is);
        },
        py::arg("path"));

    m.def(
        "fit_df_emulator",
        [](const std::function<double(const Eigen::VectorXd&)>& f,
           const std::vector<PyMarginal>& base, int d0, int n, std::uint64_t seed,
           const std::vector<std::vector<int>>& components) {
            const auto b = unwrap(base);
            ComponentSelection sel;
            if (!components.empty()) {
                sel.mode = ComponentSelection::Mode::custom;
                for (const auto& v : components) sel.subsets.push_back(v);
            }
            const EmulatorSpec spec = default_spec(b, d0, rho_min_of(b), n, sel);
            // Python callbacks cannot run on worker threads.
            return fit_df_model(f, spec, n, seed, Generator::sobol, 1);
        },
        py::arg("model"), py::arg("marginals"), py::arg("d0"), py::arg("n") = 500,
        py::arg("seed") = 2025, py::arg("components") = std::vector<std::vector<int>>{},
        "Fit the derivative-free emulator with the standard recipe "
        "(L=d0+1, h=1/N, xi from the recipe)");

    py::class_<DbEmulator>(m, "DbEmulator")
        .def("predict", [](const DbEmulator& em, const Eigen::MatrixXd& x) {
            return predict_db_batch(em, x);
        });

    m.def(
        "fit_db_emulator",
        [](const std::string& problem, int n, std::uint64_t seed, int d0) {
            NamedProblem p = named_problem(problem);
            if (d0 <= 0) d0 = p.default_d0;
            std::vector<int> inputs(p.model.d);
            for (int j = 0; j < p.model.d; ++j) inputs[j] = j;
            const int order = std::min(d0, p.model.max_order);
            return fit_db(p.model, unwrap(p.marginals), n, seed,
                          all_subsets_up_to(inputs, order));
        },
        py::arg("problem"), py::arg("n") = 500, py::arg("seed") = 2025, py::arg("d0") = 0,
        "Derivative-based emulator of a named problem using exact derivatives");

    m.def(
        "pde_qoi",
        [](const Eigen::VectorXd& z, double diffusion, double dt, double t_final) {
            PdeConfig cfg;
            cfg.cells = static_cast<int>(z.size());
            cfg.diffusion = diffusion;
            cfg.dt = dt;
            cfg.t_final = t_final;
            return qoi(solve_forward(cfg, z));
        },
        py::arg("z"), py::arg("diffusion") = 0.0011, py::arg("dt") = 0.025,
        py::arg("t_final") = 5.0,
        "Heat-PDE quantity of interest 1/2 int int M^2 for initial condition z");
    m.def(
        "pde_qoi_gradient",
        [](const Eigen::VectorXd& z, double diffusion, double dt, double t_final) {
            PdeConfig cfg;
            cfg.cells = static_cast<int>(z.size());
            cfg.diffusion = diffusion;
            cfg.dt = dt;
            cfg.t_final = t_final;
            return qoi_gradient(cfg, z);
        },
        py::arg("z"), py::arg("diffusion") = 0.0011, py::arg("dt") = 0.025,
        py::arg("t_final") = 5.0, "Exact adjoint gradient of pde_qoi");
}
