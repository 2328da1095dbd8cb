#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "anovaemu/design.hpp"
#include "anovaemu/marginal.hpp"

namespace anovaemu {

using Subset = std::vector<int>;  // sorted, 0-based input indices

/// A model with exact cross-partial derivatives up to max_order.
/// cross_partial({}) must equal value; gradient is an optional fast path
/// returning all first-order partials at once.
struct DerivativeModel {
    int d = 0;
    int max_order = 0;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<double(const Subset&, const Eigen::VectorXd&)> cross_partial;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;

    double deriv(const Subset& v, const Eigen::VectorXd& x) const;
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const;
};

/// Derivative-based emulator state: base sample plus cached derivative
/// outputs for the retained components (the empty set is always retained).
struct DbEmulator {
    std::vector<MarginalPtr> marginals;
    Eigen::MatrixXd xprime;           // N x d
    std::vector<Subset> components;   // non-empty retained subsets
    Eigen::MatrixXd derivs;           // N x |components|
    Eigen::VectorXd values;           // M(X'_i)
};

DbEmulator fit_db(const DerivativeModel& model, const std::vector<MarginalPtr>& marginals,
                  int n, std::uint64_t seed, const std::vector<Subset>& components,
                  Generator generator = Generator::sobol, int workers = 1);

double predict_db(const DbEmulator& em, const Eigen::VectorXd& x);
Eigen::VectorXd predict_db_batch(const DbEmulator& em, const Eigen::MatrixXd& x);

struct IndexEstimate {
    double value = 0.0;
    double se = 0.0;
};

IndexEstimate first_order_index(const DerivativeModel& model,
                                const std::vector<MarginalPtr>& marginals, int j, int n,
                                std::uint64_t seed, Generator generator = Generator::sobol);
IndexEstimate total_index(const DerivativeModel& model,
                          const std::vector<MarginalPtr>& marginals, int j, int n,
                          std::uint64_t seed, Generator generator = Generator::sobol);
IndexEstimate upper_bound_index(const DerivativeModel& model,
                                const std::vector<MarginalPtr>& marginals, int j, int n,
                                std::uint64_t seed, Generator generator = Generator::sobol);

/// Smallest unbiased truncation order implied by the index vectors.
int recommend_truncation(const Eigen::VectorXd& s, const Eigen::VectorXd& st, double eps);

struct ScreeningThresholds {
    double near_zero = 0.01;   // "approximately zero"
    double near_equal = 0.05;  // "approximately equal", absolute
    // Upper bound on the number of components materialised by screening. When
    // the recommended order over the active inputs would exceed it, the listed
    // order is lowered until the list fits and a decision line records the cut.
    std::size_t max_components = 1u << 20;
};

struct SensitivityReport {
    Eigen::VectorXd s, s_se;
    Eigen::VectorXd st, st_se;  // empty when totals were not computed
    Eigen::VectorXd ub, ub_se;
    double variance = 0.0;
    int recommended_d0 = 1;
    std::vector<Subset> retained;
    std::vector<std::string> decisions;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

struct ReportOptions {
    bool with_total = true;
    double eps = 0.05;
    ScreeningThresholds thresholds;
    Generator generator = Generator::sobol;
    int workers = 1;
};

SensitivityReport sensitivity_report(const DerivativeModel& model,
                                     const std::vector<MarginalPtr>& marginals, int n,
                                     std::uint64_t seed, const ReportOptions& opts = {});

/// Applies the screening rules to an index report and returns the retained
/// non-empty components up to report.recommended_d0; also records the rules
/// that fired in report.decisions and refreshes report.retained.
std::vector<Subset> screen_components(SensitivityReport& report,
                                      const ScreeningThresholds& thresholds = {});

/// All non-empty subsets of `inputs` with size <= d0.
std::vector<Subset> all_subsets_up_to(const std::vector<int>& inputs, int d0);

}  // namespace anovaemu
