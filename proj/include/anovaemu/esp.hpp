#pragma once

#include <Eigen/Dense>

#include "anovaemu/marginal.hpp"

namespace anovaemu {

/// Db-ANOVA integration weight E_k = (G(x') - 1[x' >= x]) / g(x').
double kernel_E(const Marginal& g, double x, double xprime);

/// R_k = E_k * v / (h * sigma^2).
double kernel_R(double x, double xprime, double v, double h, double sigma2,
                const Marginal& g);

/// Elementary symmetric polynomials e_0..e_pmax of the entries of r,
/// by the one-element-at-a-time recursion (O(|r| * pmax)).
Eigen::VectorXd esp_all(const Eigen::VectorXd& r, int pmax);

/// Exact sum over all size-p subsets; test oracle, |r| <= 20.
double esp_bruteforce(const Eigen::VectorXd& r, int p);

}  // namespace anovaemu
