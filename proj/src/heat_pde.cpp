#include "anovaemu/heat_pde.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anovaemu {

namespace {

// Tridiagonal Crank-Nicolson operators for the interior unknowns:
//   B u^{n+1} = C u^n + r * (left, 0, ..., 0, right)
// with B = I - (r/2) A, C = I + (r/2) A, A = tridiag(1, -2, 1), r = D dt / dx^2.
struct CnOperator {
    int d;
    double r;
    Eigen::VectorXd thomas_c;  // precomputed forward-elimination coefficients

    explicit CnOperator(const PdeConfig& cfg)
        : d(cfg.cells), r(cfg.diffusion * cfg.dt / (cfg.dx() * cfg.dx())) {
        if (d < 1) throw std::invalid_argument("heat pde: need at least one cell");
        thomas_c.resize(d);
        const double a = -0.5 * r, b = 1.0 + r;
        thomas_c[0] = a / b;
        for (int i = 1; i < d; ++i) thomas_c[i] = a / (b - a * thomas_c[i - 1]);
    }

    Eigen::VectorXd apply_c(const Eigen::VectorXd& u) const {
        Eigen::VectorXd out(d);
        for (int i = 0; i < d; ++i) {
            const double lo = i > 0 ? u[i - 1] : 0.0;
            const double hi = i < d - 1 ? u[i + 1] : 0.0;
            out[i] = (1.0 - r) * u[i] + 0.5 * r * (lo + hi);
        }
        return out;
    }

    Eigen::VectorXd solve_b(Eigen::VectorXd rhs) const {
        const double a = -0.5 * r, b = 1.0 + r;
        rhs[0] /= b;
        for (int i = 1; i < d; ++i)
            rhs[i] = (rhs[i] - a * rhs[i - 1]) / (b - a * thomas_c[i - 1]);
        for (int i = d - 2; i >= 0; --i) rhs[i] -= thomas_c[i] * rhs[i + 1];
        return rhs;
    }
};

double time_weight(int n, int steps) { return (n == 0 || n == steps) ? 0.5 : 1.0; }

}  // namespace

int PdeConfig::steps() const {
    const int n = static_cast<int>(std::lround(t_final / dt));
    if (n < 1 || std::abs(n * dt - t_final) > 1e-9 * t_final)
        throw std::invalid_argument("heat pde: t_final must be a multiple of dt");
    return n;
}

HeatSolution solve_forward(const PdeConfig& config, const Eigen::VectorXd& z) {
    if (z.size() != config.cells)
        throw std::invalid_argument("solve_forward: initial condition has wrong size");
    const CnOperator op(config);
    const int nt = config.steps();
    HeatSolution sol;
    sol.config = config;
    sol.interior.resize(nt + 1, config.cells);
    sol.interior.row(0) = z.transpose();
    Eigen::VectorXd bterm = Eigen::VectorXd::Zero(config.cells);
    bterm[0] = op.r * config.left;
    bterm[config.cells - 1] = op.r * config.right;
    Eigen::VectorXd u = z;
    for (int n = 1; n <= nt; ++n) {
        u = op.solve_b(op.apply_c(u) + bterm);
        sol.interior.row(n) = u.transpose();
    }
    return sol;
}

double qoi(const HeatSolution& sol) {
    const PdeConfig& cfg = sol.config;
    const int nt = cfg.steps();
    const double boundary = 0.5 * (cfg.left * cfg.left + cfg.right * cfg.right);
    double total = 0.0;
    for (int n = 0; n <= nt; ++n)
        total += time_weight(n, nt) * (sol.interior.row(n).squaredNorm() + boundary);
    return 0.5 * total * cfg.dt * cfg.dx();
}

Eigen::VectorXd qoi_gradient(const PdeConfig& config, const Eigen::VectorXd& z) {
    const HeatSolution sol = solve_forward(config, z);
    const CnOperator op(config);
    const int nt = config.steps();
    const double scale = config.dt * config.dx();
    // u^{n+1} = K u^n + const with K = B^{-1} C; B and C are polynomials in the
    // same symmetric A, so K^T = K and the backward sweep reuses the forward
    // operator: p^n = K p^{n+1} + dJ/du^n.
    Eigen::VectorXd p =
        scale * time_weight(nt, nt) * sol.interior.row(nt).transpose();
    for (int n = nt - 1; n >= 0; --n)
        p = op.solve_b(op.apply_c(p)) +
            scale * time_weight(n, nt) * sol.interior.row(n).transpose();
    return p;
}

std::vector<MarginalPtr> pde_input_marginals(const PdeConfig& config) {
    std::vector<MarginalPtr> out;
    out.reserve(config.cells);
    for (int j = 0; j < config.cells; ++j) {
        const double c = std::sin(2.0 * std::numbers::pi * config.node(j));
        out.push_back(uniform_marginal(c - 1.96, c + 1.96));
    }
    return out;
}

DerivativeModel heat_qoi_model(const PdeConfig& config) {
    DerivativeModel m;
    m.d = config.cells;
    m.max_order = 1;
    m.value = [config](const Eigen::VectorXd& z) { return qoi(solve_forward(config, z)); };
    m.gradient = [config](const Eigen::VectorXd& z) { return qoi_gradient(config, z); };
    m.cross_partial = [config](const Subset& v, const Eigen::VectorXd& z) {
        if (v.empty()) return qoi(solve_forward(config, z));
        if (v.size() == 1) return qoi_gradient(config, z)[v[0]];
        throw std::invalid_argument("heat pde: only first-order derivatives are available");
    };
    return m;
}

}  // namespace anovaemu
