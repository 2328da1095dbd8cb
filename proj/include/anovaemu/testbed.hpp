#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anovaemu/db_anova.hpp"
#include "anovaemu/marginal.hpp"

namespace anovaemu {

/// Ishigami test function sin(x1) + 7 sin^2(x2) + 0.1 x3^4 sin(x1) with
/// exact cross-partials of every order; inputs U(-pi, pi)^3.
DerivativeModel ishigami_model();
std::vector<MarginalPtr> ishigami_marginals();
/// Reference first-order and total Sobol' indices of the Ishigami function.
Eigen::VectorXd ishigami_s_reference();
Eigen::VectorXd ishigami_st_reference();
/// Retained components for the Ishigami emulator after screening with d0=2:
/// the main effect of x3 is dropped (S_3 = 0) and the interactions of x2 are
/// dropped (S_2 = S_T2), leaving {x1}, {x2}, {x1,x3} -- the function's true
/// ANOVA structure.
std::vector<Subset> ishigami_components();

/// g-function prod_j (|4 x_j - 2| + a_j) / (1 + a_j) on U(0,1)^d.
/// Derivatives throw std::domain_error at a kink x_j = 1/2.
DerivativeModel g_function_model(const Eigen::VectorXd& a);
std::vector<MarginalPtr> g_function_marginals(int d);
/// The three standard 10-dim coefficient profiles.
Eigen::VectorXd g_a_type_a();  // (0, 0, 6.52, ..., 6.52)
Eigen::VectorXd g_a_type_b();  // (50, ..., 50)
Eigen::VectorXd g_a_type_c();  // (0, ..., 0)
/// Closed-form Sobol' indices of the g-function for coefficient vector a.
void g_reference_indices(const Eigen::VectorXd& a, Eigen::VectorXd& s, Eigen::VectorXd& st);

/// Additive model sum_j exp(x_j) on U(0,1)^d with exact cross-partials
/// (all mixed partials vanish); used for d0 = 1 convergence studies.
DerivativeModel additive_exp_model(int d);
std::vector<MarginalPtr> additive_exp_marginals(int d);

/// Linear model c . x on U(0,1)^d.
DerivativeModel linear_model(const Eigen::VectorXd& c);

struct Metrics {
    double r2 = 0.0;
    double rmse = 0.0;
    double max_abs_err = 0.0;
};
Metrics compute_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);

struct RateStudy {
    std::vector<int> ns;
    std::vector<double> mse;  // replication-averaged mean squared prediction error
    double slope = 0.0;       // least-squares slope of log(mse) vs log(n)
};

double loglog_slope(const std::vector<int>& ns, const std::vector<double>& mse);
std::string rate_csv(const RateStudy& study);

/// MSE-vs-N study for the derivative-based emulator; each replication uses a
/// fresh pseudo-random design, errors are measured on a common test sample.
RateStudy db_rate_study(const DerivativeModel& model,
                        const std::vector<MarginalPtr>& marginals,
                        const std::vector<Subset>& components, const std::vector<int>& ns,
                        int replications, int n_test, std::uint64_t seed, int workers = 1);

/// Same study for the derivative-free emulator with the standard recipe
/// (L = d0+1, h = 1/N) rebuilt at every sample size.
RateStudy df_rate_study(const std::function<double(const Eigen::VectorXd&)>& model,
                        const std::vector<MarginalPtr>& base, int d0,
                        const std::vector<int>& ns, int replications, int n_test,
                        std::uint64_t seed, int workers = 1);

}  // namespace anovaemu
