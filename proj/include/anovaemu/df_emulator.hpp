#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "anovaemu/coefficients.hpp"
#include "anovaemu/db_anova.hpp"
#include "anovaemu/design.hpp"
#include "anovaemu/marginal.hpp"

namespace anovaemu {

/// Which ANOVA components the emulator retains.
///  - full: every non-empty subset of {1..d} of size <= d0 (ESP fast path)
///  - influential: every subset of u_I of size <= d0 (ESP over u_I)
///  - custom: an explicit subset list (explicit-product path)
struct ComponentSelection {
    enum class Mode { full, influential, custom };
    Mode mode = Mode::full;
    std::vector<int> influential;  // u_I, 0-based, for Mode::influential
    std::vector<Subset> subsets;   // for Mode::custom

    nlohmann::json to_json() const;
    static ComponentSelection from_json(const nlohmann::json& j);
};

struct EmulatorSpec {
    int d = 0;
    int d0 = 1;
    int r_star = 0;  // default d0 - 1
    int L = 2;       // default d0 + 1
    CoefficientPlan coeffs;
    double h = 0.0;       // bandwidth, default 1/N
    double xi = 0.0;      // perturbation half-width
    double sigma2 = 0.0;  // xi^2 / 3
    PerturbationLaw vlaw = PerturbationLaw::two_point;
    std::vector<MarginalPtr> base;  // base laws G_j
    ComponentSelection components;

    nlohmann::json to_json() const;
    static EmulatorSpec from_json(const nlohmann::json& j);
};

/// Hyperparameters from the standard recipe: L = d0+1, r* = d0-1, h = 1/N,
/// xi = (d * C(d,d0) * (1/(2 rho_min))^d0)^{-1/2}.
EmulatorSpec default_spec(const std::vector<MarginalPtr>& base, int d0, double rho_min,
                          int n, ComponentSelection components = {});

/// Smallest density over the base laws' supports; for uniforms this is
/// 1 / max_j(width_j).
double rho_min_of(const std::vector<MarginalPtr>& marginals);

struct EvaluationPlan {
    Eigen::MatrixXd xprime;  // N x d base points
    Eigen::MatrixXd v;       // N x d perturbations
    Eigen::VectorXd betas;   // L

    int n() const { return static_cast<int>(xprime.rows()); }
    int l() const { return static_cast<int>(betas.size()); }

    /// Evaluation point X'_i + beta_l * h * V_i.
    Eigen::VectorXd point(int i, int l, double h) const;

    /// All N*L evaluation points, row i*L + l.
    Eigen::MatrixXd evaluation_points(double h) const;
};

/// X' from the base laws (QMC by default) and V uniform on (-xi, xi).
/// When the joint dimension 2d fits the direction table, X' and V come from
/// a single 2d-dimensional Sobol stream.
EvaluationPlan plan_design(const EmulatorSpec& spec, int n, std::uint64_t seed,
                           Generator generator = Generator::sobol);

struct DfEmulator {
    EmulatorSpec spec;
    EvaluationPlan plan;
    Eigen::MatrixXd y;  // N x L model outputs
    Eigen::VectorXd mean_w;
    double mean_estimate = 0.0;
    Eigen::MatrixXd a;  // N x d0: a(i, p-1) = sum_l C(p,l) y(i,l)
};

/// y may be passed as an N*L vector ordered like evaluation_points().
DfEmulator fit_df(const EvaluationPlan& plan, const Eigen::VectorXd& y,
                  const EmulatorSpec& spec);
DfEmulator fit_df(const EvaluationPlan& plan, const Eigen::MatrixXd& y,
                  const EmulatorSpec& spec);

/// Convenience: plan, run the model NL times, fit.
DfEmulator fit_df_model(const std::function<double(const Eigen::VectorXd&)>& model,
                        const EmulatorSpec& spec, int n, std::uint64_t seed,
                        Generator generator = Generator::sobol, int workers = 1);

double predict_df(const DfEmulator& em, const Eigen::VectorXd& x);
Eigen::VectorXd predict_df_batch(const DfEmulator& em, const Eigen::MatrixXd& x);

/// Self-describing JSON archive; predictions are bit-exact after reload.
void save_df(const DfEmulator& em, std::ostream& os);
DfEmulator load_df(std::istream& is);

}  // namespace anovaemu
