#include "anovaemu/df_emulator.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "anovaemu/common.hpp"
#include "anovaemu/esp.hpp"
#include "anovaemu/sobol.hpp"

namespace anovaemu {

namespace {

double binomial(int n, int k) {
    double out = 1.0;
    for (int t = 1; t <= k; ++t) out *= static_cast<double>(n - k + t) / t;
    return out;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i)
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const int n = static_cast<int>(j.size());
    if (n == 0) return {};
    const int c = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(n, c);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

}  // namespace

nlohmann::json ComponentSelection::to_json() const {
    nlohmann::json j;
    switch (mode) {
        case Mode::full: j["mode"] = "full"; break;
        case Mode::influential:
            j["mode"] = "influential";
            j["inputs"] = influential;
            break;
        case Mode::custom: {
            j["mode"] = "custom";
            nlohmann::json subs = nlohmann::json::array();
            for (const auto& v : subsets) subs.push_back(v);
            j["subsets"] = subs;
            break;
        }
    }
    return j;
}

ComponentSelection ComponentSelection::from_json(const nlohmann::json& j) {
    ComponentSelection sel;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "full") {
        sel.mode = Mode::full;
    } else if (mode == "influential") {
        sel.mode = Mode::influential;
        sel.influential = j.at("inputs").get<std::vector<int>>();
    } else if (mode == "custom") {
        sel.mode = Mode::custom;
        for (const auto& v : j.at("subsets")) sel.subsets.push_back(v.get<Subset>());
    } else {
        throw std::invalid_argument("component selection: unknown mode '" + mode + "'");
    }
    return sel;
}

double rho_min_of(const std::vector<MarginalPtr>& marginals) {
    double rho = std::numeric_limits<double>::infinity();
    for (const auto& m : marginals) {
        const int grid = 2048;
        for (int k = 1; k < grid; ++k) {
            const double x = m->quantile(static_cast<double>(k) / grid);
            const double p = m->pdf(x);
            if (p > 0.0) rho = std::min(rho, p);
        }
    }
    if (!std::isfinite(rho) || rho <= 0.0)
        throw std::invalid_argument("rho_min_of: could not bound the densities from below");
    return rho;
}

EmulatorSpec default_spec(const std::vector<MarginalPtr>& base, int d0, double rho_min,
                          int n, ComponentSelection components) {
    const int d = static_cast<int>(base.size());
    if (d < 1) throw std::invalid_argument("default_spec: no marginals");
    if (d0 < 1 || d0 > d) throw std::invalid_argument("default_spec: need 1 <= d0 <= d");
    if (!(rho_min > 0.0)) throw std::invalid_argument("default_spec: rho_min must be > 0");
    if (n < 1) throw std::invalid_argument("default_spec: N must be >= 1");

    EmulatorSpec spec;
    spec.d = d;
    spec.d0 = d0;
    spec.L = d0 + 1;
    spec.r_star = d0 - 1;
    spec.coeffs = solve_coefficients(beta_grid(spec.L), d0, spec.r_star);
    spec.h = 1.0 / n;
    spec.xi = 1.0 / std::sqrt(d * binomial(d, d0) * std::pow(0.5 / rho_min, d0));
    spec.sigma2 = spec.xi * spec.xi / 3.0;
    spec.base = base;
    spec.components = std::move(components);
    return spec;
}

Eigen::VectorXd EvaluationPlan::point(int i, int l, double h) const {
    return xprime.row(i).transpose() + betas[l] * h * v.row(i).transpose();
}

Eigen::MatrixXd EvaluationPlan::evaluation_points(double h) const {
    Eigen::MatrixXd out(n() * l(), xprime.cols());
    for (int i = 0; i < n(); ++i)
        for (int j = 0; j < l(); ++j) out.row(i * l() + j) = point(i, j, h).transpose();
    return out;
}

EvaluationPlan plan_design(const EmulatorSpec& spec, int n, std::uint64_t seed,
                           Generator generator) {
    if (n < 1) throw std::invalid_argument("plan_design: N must be >= 1");
    const int d = spec.d;
    EvaluationPlan plan;
    plan.betas = spec.coeffs.betas;
    const double s = spec.xi / std::sqrt(3.0);
    if (generator == Generator::sobol && 2 * d <= SobolSequence::max_dimension()) {
        // Base points and perturbations share one 2d-dimensional Sobol stream.
        SobolSequence seq(2 * d);
        plan.xprime.resize(n, d);
        plan.v.resize(n, d);
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd u = seq.next();
            for (int j = 0; j < d; ++j) {
                plan.xprime(i, j) = spec.base[j]->quantile(u[j]);
                const double w = 2.0 * u[d + j] - 1.0;
                plan.v(i, j) = spec.vlaw == PerturbationLaw::uniform
                                   ? w * spec.xi
                                   : (w < 0.0 ? -s : s);
            }
        }
    } else {
        plan.xprime = sample_design(spec.base, n, seed, generator).points;
        plan.v = sample_perturbations(d, n, spec.xi, split_seed(seed, 2), spec.vlaw).v;
    }
    return plan;
}

DfEmulator fit_df(const EvaluationPlan& plan, const Eigen::MatrixXd& y,
                  const EmulatorSpec& spec) {
    const int n = plan.n();
    const int l = plan.l();
    if (y.rows() != n || y.cols() != l)
        throw std::invalid_argument("fit_df: output matrix must be N x L");
    if (!y.allFinite()) throw std::invalid_argument("fit_df: non-finite model outputs");

    DfEmulator em;
    em.spec = spec;
    em.plan = plan;
    em.y = y;
    em.mean_w = mean_weights(to_vec(plan.betas));
    em.mean_estimate = (y * em.mean_w).mean();
    em.a = y * spec.coeffs.C.transpose();  // N x d0
    return em;
}

DfEmulator fit_df(const EvaluationPlan& plan, const Eigen::VectorXd& y,
                  const EmulatorSpec& spec) {
    const int n = plan.n();
    const int l = plan.l();
    if (y.size() != static_cast<Eigen::Index>(n) * l)
        throw std::invalid_argument("fit_df: expected N*L outputs");
    Eigen::MatrixXd ym(n, l);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j) ym(i, j) = y[i * l + j];
    return fit_df(plan, ym, spec);
}

DfEmulator fit_df_model(const std::function<double(const Eigen::VectorXd&)>& model,
                        const EmulatorSpec& spec, int n, std::uint64_t seed,
                        Generator generator, int workers) {
    EvaluationPlan plan = plan_design(spec, n, seed, generator);
    Eigen::MatrixXd y(plan.n(), plan.l());
    parallel_for(static_cast<std::size_t>(plan.n()), workers,
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i)
                         for (int j = 0; j < plan.l(); ++j)
                             y(static_cast<int>(i), j) =
                                 model(plan.point(static_cast<int>(i), j, spec.h));
                 });
    return fit_df(plan, y, spec);
}

double predict_df(const DfEmulator& em, const Eigen::VectorXd& x) {
    const EmulatorSpec& spec = em.spec;
    const int n = em.plan.n();
    const int d = spec.d;
    const double inv_hs2 = 1.0 / (spec.h * spec.sigma2);
    using Mode = ComponentSelection::Mode;

    double total = 0.0;
    Eigen::VectorXd r(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k)
            r[k] = kernel_E(*spec.base[k], x[k], em.plan.xprime(i, k)) * em.plan.v(i, k) *
                   inv_hs2;
        double s = 0.0;
        if (spec.components.mode == Mode::custom) {
            for (const auto& v : spec.components.subsets) {
                double prod = em.a(i, static_cast<int>(v.size()) - 1);
                for (int k : v) prod *= r[k];
                s += prod;
            }
        } else {
            Eigen::VectorXd scope;
            if (spec.components.mode == Mode::influential) {
                scope.resize(spec.components.influential.size());
                for (std::size_t t = 0; t < spec.components.influential.size(); ++t)
                    scope[static_cast<Eigen::Index>(t)] = r[spec.components.influential[t]];
            } else {
                scope = r;
            }
            const int pmax = std::min<int>(spec.d0, static_cast<int>(scope.size()));
            const Eigen::VectorXd e = esp_all(scope, pmax);
            for (int p = 1; p <= pmax; ++p) s += em.a(i, p - 1) * e[p];
        }
        total += s;
    }
    return em.mean_estimate + total / n;
}

Eigen::VectorXd predict_df_batch(const DfEmulator& em, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (int i = 0; i < x.rows(); ++i) out[i] = predict_df(em, x.row(i).transpose());
    return out;
}

nlohmann::json EmulatorSpec::to_json() const {
    nlohmann::json j;
    j["d"] = d;
    j["d0"] = d0;
    j["r_star"] = r_star;
    j["L"] = L;
    j["h"] = h;
    j["xi"] = xi;
    j["sigma2"] = sigma2;
    j["vlaw"] = vlaw == PerturbationLaw::uniform ? "uniform" : "two-point";
    j["coefficients"] = coeffs.to_json();
    nlohmann::json margs = nlohmann::json::array();
    for (const auto& m : base) margs.push_back(m->to_json());
    j["base"] = margs;
    j["components"] = components.to_json();
    return j;
}

EmulatorSpec EmulatorSpec::from_json(const nlohmann::json& j) {
    EmulatorSpec spec;
    spec.d = j.at("d").get<int>();
    spec.d0 = j.at("d0").get<int>();
    spec.r_star = j.at("r_star").get<int>();
    spec.L = j.at("L").get<int>();
    spec.h = j.at("h").get<double>();
    spec.xi = j.at("xi").get<double>();
    spec.sigma2 = j.at("sigma2").get<double>();
    spec.vlaw = j.value("vlaw", "two-point") == "uniform" ? PerturbationLaw::uniform
                                                          : PerturbationLaw::two_point;
    const nlohmann::json& cj = j.at("coefficients");
    CoefficientPlan plan;
    plan.L = cj.at("L").get<int>();
    plan.r_star = cj.at("r_star").get<int>();
    plan.betas = from_vec(cj.at("betas").get<std::vector<double>>());
    const auto& rows = cj.at("rows");
    plan.C.resize(rows.size(), plan.L);
    plan.residual.resize(rows.size());
    plan.condition.resize(rows.size());
    plan.row_scheme.resize(rows.size());
    for (std::size_t p = 0; p < rows.size(); ++p) {
        plan.C.row(static_cast<Eigen::Index>(p)) =
            from_vec(rows[p].at("coefficients").get<std::vector<double>>()).transpose();
        plan.residual[static_cast<Eigen::Index>(p)] = rows[p].at("residual").get<double>();
        plan.condition[static_cast<Eigen::Index>(p)] = rows[p].at("condition").get<double>();
        plan.row_scheme[p] = rows[p].at("scheme").get<std::string>() == "baseline-fallback"
                                 ? ConstraintScheme::baseline
                                 : ConstraintScheme::truncation_optimal;
    }
    spec.coeffs = std::move(plan);
    for (const auto& mj : j.at("base")) spec.base.push_back(make_marginal(mj));
    spec.components = ComponentSelection::from_json(j.at("components"));
    return spec;
}

void save_df(const DfEmulator& em, std::ostream& os) {
    nlohmann::json j;
    j["format"] = "anovaemu-df-emulator";
    j["version"] = 1;
    j["spec"] = em.spec.to_json();
    j["xprime"] = matrix_to_json(em.plan.xprime);
    j["v"] = matrix_to_json(em.plan.v);
    j["y"] = matrix_to_json(em.y);
    os << j.dump();
}

DfEmulator load_df(std::istream& is) {
    nlohmann::json j = nlohmann::json::parse(is);
    if (j.value("format", "") != "anovaemu-df-emulator")
        throw std::invalid_argument("load_df: not a df-emulator archive");
    EmulatorSpec spec = EmulatorSpec::from_json(j.at("spec"));
    EvaluationPlan plan;
    plan.xprime = matrix_from_json(j.at("xprime"));
    plan.v = matrix_from_json(j.at("v"));
    plan.betas = spec.coeffs.betas;
    return fit_df(plan, Eigen::MatrixXd(matrix_from_json(j.at("y"))), spec);
}

}  // namespace anovaemu
