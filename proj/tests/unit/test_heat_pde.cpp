#include <doctest.h>

#include <cmath>
#include <random>

#include "anovaemu/common.hpp"
#include "anovaemu/heat_pde.hpp"

using namespace anovaemu;

namespace {

Eigen::VectorXd random_ic(const PdeConfig& cfg, std::uint64_t seed) {
    const auto marg = pde_input_marginals(cfg);
    std::mt19937_64 gen(seed);
    Eigen::VectorXd z(cfg.cells);
    for (int j = 0; j < cfg.cells; ++j) z[j] = marg[j]->quantile(uniform01(gen));
    return z;
}

}  // namespace

TEST_CASE("PdeConfig: geometry and step validation") {
    PdeConfig cfg;
    cfg.cells = 10;
    CHECK(cfg.dx() == doctest::Approx(1.0 / 11.0));
    CHECK(cfg.node(0) == doctest::Approx(1.0 / 11.0));
    CHECK(cfg.node(9) == doctest::Approx(10.0 / 11.0));
    CHECK(cfg.steps() == 200);
    cfg.t_final = 5.013;  // not a multiple of dt
    CHECK_THROWS(cfg.steps());
}

TEST_CASE("solve_forward: boundary values drive the steady state") {
    // With zero initial condition and boundaries (0, 1), the solution relaxes
    // towards the linear profile x as t grows.
    PdeConfig cfg;
    cfg.cells = 20;
    cfg.diffusion = 0.05;  // fast diffusion to reach steady state within T
    cfg.t_final = 50.0;
    const HeatSolution sol = solve_forward(cfg, Eigen::VectorXd::Zero(cfg.cells));
    for (int j = 0; j < cfg.cells; ++j)
        CHECK(sol.interior(cfg.steps(), j) == doctest::Approx(cfg.node(j)).epsilon(1e-3));
}

TEST_CASE("solve_forward: affine in the initial condition") {
    PdeConfig cfg;
    cfg.cells = 15;
    const Eigen::VectorXd z1 = random_ic(cfg, 1), z2 = random_ic(cfg, 2);
    const Eigen::MatrixXd u0 = solve_forward(cfg, Eigen::VectorXd::Zero(cfg.cells)).interior;
    const Eigen::MatrixXd u1 = solve_forward(cfg, z1).interior;
    const Eigen::MatrixXd u2 = solve_forward(cfg, z2).interior;
    const Eigen::MatrixXd u12 = solve_forward(cfg, z1 + z2).interior;
    CHECK(((u12 - u0) - (u1 - u0) - (u2 - u0)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("qoi: non-negative and zero only for the all-zero field") {
    PdeConfig cfg;
    cfg.cells = 8;
    cfg.right = 0.0;  // zero boundaries so the zero field is invariant
    CHECK(qoi(solve_forward(cfg, Eigen::VectorXd::Zero(cfg.cells))) == doctest::Approx(0.0));
    CHECK(qoi(solve_forward(cfg, Eigen::VectorXd::Ones(cfg.cells))) > 0.0);
}

TEST_CASE("qoi_gradient: matches central differences with Richardson check") {
    PdeConfig cfg;
    cfg.cells = 10;
    const Eigen::VectorXd z = random_ic(cfg, 7);
    const Eigen::VectorXd g = qoi_gradient(cfg, z);
    for (double eps : {1e-4, 1e-5}) {
        double max_rel = 0.0;
        for (int j = 0; j < cfg.cells; ++j) {
            Eigen::VectorXd zp = z, zm = z;
            zp[j] += eps;
            zm[j] -= eps;
            const double fd =
                (qoi(solve_forward(cfg, zp)) - qoi(solve_forward(cfg, zm))) / (2.0 * eps);
            max_rel = std::max(max_rel,
                               std::abs(fd - g[j]) / std::max(1e-12, std::abs(g[j])));
        }
        CAPTURE(eps);
        CHECK(max_rel < 1e-6);
    }
}

TEST_CASE("qoi is exactly quadratic: trapezoid identity with its own gradient") {
    // J is quadratic in z (the scheme is linear), so
    // J(z) = J(0) + z . (grad J(z) + grad J(0)) / 2 holds exactly.
    PdeConfig cfg;
    cfg.cells = 12;
    const Eigen::VectorXd z = random_ic(cfg, 3);
    const double j0 = qoi(solve_forward(cfg, Eigen::VectorXd::Zero(cfg.cells)));
    const double jz = qoi(solve_forward(cfg, z));
    const Eigen::VectorXd g0 = qoi_gradient(cfg, Eigen::VectorXd::Zero(cfg.cells));
    const Eigen::VectorXd gz = qoi_gradient(cfg, z);
    CHECK(jz == doctest::Approx(j0 + 0.5 * z.dot(g0 + gz)).epsilon(1e-10));
}

TEST_CASE("pde_input_marginals: centred on the sine profile") {
    PdeConfig cfg;
    const auto marg = pde_input_marginals(cfg);
    REQUIRE(static_cast<int>(marg.size()) == cfg.cells);
    for (int j = 0; j < cfg.cells; ++j) {
        const double c = std::sin(2.0 * M_PI * cfg.node(j));
        CHECK(marg[j]->lower() == doctest::Approx(c - 1.96).epsilon(1e-12));
        CHECK(marg[j]->upper() == doctest::Approx(c + 1.96).epsilon(1e-12));
    }
}

TEST_CASE("heat_qoi_model: first-order only") {
    PdeConfig cfg;
    cfg.cells = 6;
    const DerivativeModel m = heat_qoi_model(cfg);
    CHECK(m.d == 6);
    CHECK(m.max_order == 1);
    const Eigen::VectorXd z = random_ic(cfg, 4);
    CHECK(m.value(z) == doctest::Approx(qoi(solve_forward(cfg, z))));
    CHECK((m.grad(z) - qoi_gradient(cfg, z)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(m.deriv({0, 1}, z));
}
