#pragma once

#include <vector>

#include <Eigen/Dense>

#include "anovaemu/db_anova.hpp"
#include "anovaemu/marginal.hpp"

namespace anovaemu {

/// 1-D heat equation dM/dt = D d2M/dx2 on ]0,1[ with Dirichlet boundaries and
/// the initial condition as input vector Z (one value per interior node).
struct PdeConfig {
    int cells = 50;            // interior nodes / stochastic inputs
    double diffusion = 0.0011;
    double dt = 0.025;
    double t_final = 5.0;
    double left = 0.0;   // M(0, t)
    double right = 1.0;  // M(1, t)

    int steps() const;
    double dx() const { return 1.0 / (cells + 1); }
    double node(int j) const { return (j + 1) * dx(); }  // x_j, j = 0..cells-1
};

struct HeatSolution {
    PdeConfig config;
    Eigen::MatrixXd interior;  // (steps()+1) x cells, row n = time n*dt
};

/// Crank-Nicolson forward solve from M(x, 0) = Z.
HeatSolution solve_forward(const PdeConfig& config, const Eigen::VectorXd& z);

/// J(Z) = 1/2 int_0^T int_0^1 M(x,t)^2 dx dt, trapezoidal in space and time.
double qoi(const HeatSolution& sol);

/// Exact gradient of qoi(solve_forward(config, .)) at z via the discrete
/// adjoint of the Crank-Nicolson scheme (one backward sweep).
Eigen::VectorXd qoi_gradient(const PdeConfig& config, const Eigen::VectorXd& z);

/// Stochastic initial conditions Z(x_j) ~ U(sin(2 pi x_j) - 1.96, sin(2 pi x_j) + 1.96).
std::vector<MarginalPtr> pde_input_marginals(const PdeConfig& config);

/// The QoI as a first-order derivative model (value + adjoint gradient).
DerivativeModel heat_qoi_model(const PdeConfig& config);

}  // namespace anovaemu
