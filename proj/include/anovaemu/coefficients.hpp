#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace anovaemu {

enum class ConstraintScheme { truncation_optimal, baseline };

/// The beta node grid used throughout: odd L gives {0} u {+-2^(k-1)},
/// even L gives {+-2^k}; sorted.
std::vector<double> beta_grid(int l);

/// Exponent set r for the order-p coefficient row (always exactly L rows).
std::vector<int> constraint_rows(int p, int l, int r_star, ConstraintScheme scheme);

struct CoefficientPlan {
    int L = 1;
    int r_star = 0;
    Eigen::VectorXd betas;
    Eigen::MatrixXd C;  // d0 x L, row p-1 holds the order-p coefficients
    std::vector<ConstraintScheme> row_scheme;
    Eigen::VectorXd residual;   // per row, infinity norm of A*C - rhs
    Eigen::VectorXd condition;  // per row, condition number of the solved system
    nlohmann::json to_json() const;
};

/// Solve the generalized Vandermonde constraints for each p = 1..d0 under the
/// truncation-optimal exponent set; rows whose system is singular or with
/// condition number above 1e12 fall back to the baseline scheme.
CoefficientPlan solve_coefficients(const std::vector<double>& betas, int d0, int r_star);

/// Weights w with sum(w) = 1 and sum(w * beta^r) = 0 for r = 1..L-1;
/// the mean estimate (1/N) sum_i sum_l w_l y_il has O(h^L) bias.
Eigen::VectorXd mean_weights(const std::vector<double>& betas);

/// Gamma_r diagnostic: sum_l |C_l^(p) * beta_l^r|.
double gamma_r(const CoefficientPlan& plan, int p, int r);

}  // namespace anovaemu
