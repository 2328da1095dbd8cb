#include "anovaemu/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace anovaemu {

namespace {

constexpr double kCondThreshold = 1e12;

Eigen::MatrixXd vandermonde(const Eigen::VectorXd& betas, const std::vector<int>& rows) {
    const int l = static_cast<int>(betas.size());
    Eigen::MatrixXd a(rows.size(), l);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < l; ++c) a(r, c) = std::pow(betas[c], rows[r]);
    return a;
}

struct RowSolve {
    Eigen::VectorXd coeffs;
    double residual;
    double condition;
    bool ok;
};

RowSolve solve_row(const Eigen::VectorXd& betas, const std::vector<int>& rows, int p) {
    const int l = static_cast<int>(betas.size());
    Eigen::MatrixXd a = vandermonde(betas, rows);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l);
    for (int r = 0; r < l; ++r)
        if (rows[r] == p) rhs[r] = 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(l - 1);
    RowSolve out;
    out.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    out.ok = smin > 0.0 && out.condition <= kCondThreshold;
    if (!out.ok) return out;
    out.coeffs = a.fullPivLu().solve(rhs);
    out.residual = (a * out.coeffs - rhs).lpNorm<Eigen::Infinity>();
    return out;
}

}  // namespace

std::vector<double> beta_grid(int l) {
    if (l < 1) throw std::invalid_argument("beta_grid: L must be >= 1");
    std::vector<double> betas;
    if (l % 2 == 1) {
        betas.push_back(0.0);
        for (int k = 1; k <= (l - 1) / 2; ++k) {
            betas.push_back(std::ldexp(1.0, k - 1));
            betas.push_back(-std::ldexp(1.0, k - 1));
        }
    } else {
        for (int k = 1; k <= l / 2; ++k) {
            betas.push_back(std::ldexp(1.0, k));
            betas.push_back(-std::ldexp(1.0, k));
        }
    }
    std::sort(betas.begin(), betas.end());
    return betas;
}

std::vector<int> constraint_rows(int p, int l, int r_star, ConstraintScheme scheme) {
    if (p < 1) throw std::invalid_argument("constraint_rows: p must be >= 1");
    if (l < 1) throw std::invalid_argument("constraint_rows: L must be >= 1");
    std::set<int> rows;
    if (scheme == ConstraintScheme::baseline) {
        if (p <= l - 1) {
            for (int r = 0; r <= l - 1; ++r) rows.insert(r);
        } else {
            for (int r = 0; r <= l - 2; ++r) rows.insert(r);
            rows.insert(p);
        }
    } else {
        if (r_star < 0 || r_star > l - 2)
            throw std::invalid_argument("constraint_rows: need 0 <= r* <= L-2");
        if (p <= r_star) {
            for (int r = 0; r <= r_star; ++r) rows.insert(r);
            const int lambda = (r_star - p) / 2;
            for (int t = 1; t <= l - 1 - r_star; ++t) rows.insert(p + 2 * lambda + 2 * t);
        } else {
            for (int r = 0; r <= r_star; ++r) rows.insert(r);
            for (int t = 0; t <= l - r_star - 2; ++t) rows.insert(p + 2 * t);
        }
    }
    return {rows.begin(), rows.end()};
}

CoefficientPlan solve_coefficients(const std::vector<double>& betas, int d0, int r_star) {
    const int l = static_cast<int>(betas.size());
    if (l < 1) throw std::invalid_argument("solve_coefficients: empty beta grid");
    if (d0 < 1) throw std::invalid_argument("solve_coefficients: d0 must be >= 1");
    for (int i = 0; i < l; ++i)
        for (int j = i + 1; j < l; ++j)
            if (betas[i] == betas[j])
                throw std::invalid_argument("solve_coefficients: betas must be distinct");

    CoefficientPlan plan;
    plan.L = l;
    plan.r_star = r_star;
    plan.betas = Eigen::Map<const Eigen::VectorXd>(betas.data(), l);
    plan.C.resize(d0, l);
    plan.residual.resize(d0);
    plan.condition.resize(d0);
    plan.row_scheme.assign(d0, ConstraintScheme::truncation_optimal);

    for (int p = 1; p <= d0; ++p) {
        RowSolve sol{.ok = false};
        if (r_star >= 0 && r_star <= l - 2)
            sol = solve_row(plan.betas, constraint_rows(p, l, r_star, ConstraintScheme::truncation_optimal), p);
        if (!sol.ok) {
            sol = solve_row(plan.betas, constraint_rows(p, l, r_star, ConstraintScheme::baseline), p);
            plan.row_scheme[p - 1] = ConstraintScheme::baseline;
            if (!sol.ok)
                throw std::runtime_error("solve_coefficients: both schemes failed for p=" +
                                         std::to_string(p));
        }
        plan.C.row(p - 1) = sol.coeffs.transpose();
        plan.residual[p - 1] = sol.residual;
        plan.condition[p - 1] = sol.condition;
    }
    return plan;
}

Eigen::VectorXd mean_weights(const std::vector<double>& betas) {
    const int l = static_cast<int>(betas.size());
    if (l < 1) throw std::invalid_argument("mean_weights: empty beta grid");
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(betas.data(), l);
    std::vector<int> rows(l);
    for (int r = 0; r < l; ++r) rows[r] = r;
    Eigen::MatrixXd a = vandermonde(b, rows);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l);
    rhs[0] = 1.0;
    return a.fullPivLu().solve(rhs);
}

double gamma_r(const CoefficientPlan& plan, int p, int r) {
    if (p < 1 || p > plan.C.rows()) throw std::invalid_argument("gamma_r: p out of range");
    double total = 0.0;
    for (int l = 0; l < plan.L; ++l)
        total += std::abs(plan.C(p - 1, l) * std::pow(plan.betas[l], r));
    return total;
}

nlohmann::json CoefficientPlan::to_json() const {
    nlohmann::json j;
    j["L"] = L;
    j["r_star"] = r_star;
    j["betas"] = std::vector<double>(betas.data(), betas.data() + betas.size());
    nlohmann::json rows = nlohmann::json::array();
    for (int p = 0; p < C.rows(); ++p) {
        nlohmann::json row;
        row["p"] = p + 1;
        row["coefficients"] = std::vector<double>(C.row(p).begin(), C.row(p).end());
        row["scheme"] = row_scheme[p] == ConstraintScheme::baseline ? "baseline-fallback"
                                                                    : "truncation-optimal";
        row["residual"] = residual[p];
        row["condition"] = condition[p];
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

}  // namespace anovaemu
