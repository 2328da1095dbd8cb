#include "anovaemu/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "anovaemu/common.hpp"
#include "anovaemu/df_emulator.hpp"

namespace anovaemu {

namespace {

constexpr double kPi = std::numbers::pi;

bool contains(const Subset& v, int j) {
    return std::find(v.begin(), v.end(), j) != v.end();
}

}  // namespace

DerivativeModel ishigami_model() {
    DerivativeModel m;
    m.d = 3;
    m.max_order = 3;
    m.value = [](const Eigen::VectorXd& x) {
        return std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) +
               0.1 * std::pow(x[2], 4) * std::sin(x[0]);
    };
    m.cross_partial = [](const Subset& v, const Eigen::VectorXd& x) -> double {
        // sin(x1)*(1 + 0.1 x3^4) + 7 sin^2(x2): the only non-zero mixed
        // partial couples x1 and x3.
        const bool h1 = contains(v, 0), h2 = contains(v, 1), h3 = contains(v, 2);
        if (v.empty())
            return std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) +
                   0.1 * std::pow(x[2], 4) * std::sin(x[0]);
        if (h2) return v.size() == 1 ? 7.0 * std::sin(2.0 * x[1]) : 0.0;
        if (h1 && h3) return 0.4 * std::pow(x[2], 3) * std::cos(x[0]);
        if (h1) return std::cos(x[0]) * (1.0 + 0.1 * std::pow(x[2], 4));
        return 0.4 * std::pow(x[2], 3) * std::sin(x[0]);
    };
    m.gradient = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(3);
        g[0] = std::cos(x[0]) * (1.0 + 0.1 * std::pow(x[2], 4));
        g[1] = 7.0 * std::sin(2.0 * x[1]);
        g[2] = 0.4 * std::pow(x[2], 3) * std::sin(x[0]);
        return g;
    };
    return m;
}

std::vector<MarginalPtr> ishigami_marginals() {
    return {uniform_marginal(-kPi, kPi), uniform_marginal(-kPi, kPi),
            uniform_marginal(-kPi, kPi)};
}

Eigen::VectorXd ishigami_s_reference() {
    Eigen::VectorXd s(3);
    s << 0.3139, 0.4424, 0.0;
    return s;
}

Eigen::VectorXd ishigami_st_reference() {
    Eigen::VectorXd st(3);
    st << 0.567, 0.442, 0.243;
    return st;
}

std::vector<Subset> ishigami_components() {
    return {{0}, {1}, {0, 2}};
}

DerivativeModel g_function_model(const Eigen::VectorXd& a) {
    const int d = static_cast<int>(a.size());
    DerivativeModel m;
    m.d = d;
    m.max_order = d;
    auto factor = [a](int j, double xj) { return (std::abs(4.0 * xj - 2.0) + a[j]) / (1.0 + a[j]); };
    m.value = [d, factor](const Eigen::VectorXd& x) {
        double out = 1.0;
        for (int j = 0; j < d; ++j) out *= factor(j, x[j]);
        return out;
    };
    m.cross_partial = [d, a, factor](const Subset& v, const Eigen::VectorXd& x) {
        double out = 1.0;
        for (int j = 0; j < d; ++j) {
            if (contains(v, j)) {
                if (x[j] == 0.5)
                    throw std::domain_error(
                        "g-function: derivative undefined at the kink x_j = 1/2");
                out *= (x[j] > 0.5 ? 4.0 : -4.0) / (1.0 + a[j]);
            } else {
                out *= factor(j, x[j]);
            }
        }
        return out;
    };
    m.gradient = [d, a, factor](const Eigen::VectorXd& x) {
        Eigen::VectorXd pre(d + 1), suf(d + 1);
        pre[0] = 1.0;
        suf[d] = 1.0;
        for (int j = 0; j < d; ++j) pre[j + 1] = pre[j] * factor(j, x[j]);
        for (int j = d - 1; j >= 0; --j) suf[j] = suf[j + 1] * factor(j, x[j]);
        Eigen::VectorXd g(d);
        for (int j = 0; j < d; ++j) {
            if (x[j] == 0.5)
                throw std::domain_error(
                    "g-function: derivative undefined at the kink x_j = 1/2");
            g[j] = pre[j] * suf[j + 1] * (x[j] > 0.5 ? 4.0 : -4.0) / (1.0 + a[j]);
        }
        return g;
    };
    return m;
}

std::vector<MarginalPtr> g_function_marginals(int d) {
    std::vector<MarginalPtr> out;
    out.reserve(d);
    for (int j = 0; j < d; ++j) out.push_back(uniform_marginal(0.0, 1.0));
    return out;
}

Eigen::VectorXd g_a_type_a() {
    Eigen::VectorXd a = Eigen::VectorXd::Constant(10, 6.52);
    a[0] = a[1] = 0.0;
    return a;
}

Eigen::VectorXd g_a_type_b() { return Eigen::VectorXd::Constant(10, 50.0); }

Eigen::VectorXd g_a_type_c() { return Eigen::VectorXd::Zero(10); }

void g_reference_indices(const Eigen::VectorXd& a, Eigen::VectorXd& s, Eigen::VectorXd& st) {
    const int d = static_cast<int>(a.size());
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = 1.0 / (3.0 * (1.0 + a[j]) * (1.0 + a[j]));
    double total = 1.0;
    for (int j = 0; j < d; ++j) total *= 1.0 + v[j];
    const double var = total - 1.0;
    s.resize(d);
    st.resize(d);
    for (int j = 0; j < d; ++j) {
        s[j] = v[j] / var;
        st[j] = v[j] * (total / (1.0 + v[j])) / var;
    }
}

DerivativeModel additive_exp_model(int d) {
    DerivativeModel m;
    m.d = d;
    m.max_order = d;
    m.value = [d](const Eigen::VectorXd& x) {
        double out = 0.0;
        for (int j = 0; j < d; ++j) out += std::exp(x[j]);
        return out;
    };
    m.cross_partial = [d, value = m.value](const Subset& v, const Eigen::VectorXd& x) {
        if (v.empty()) return value(x);
        if (v.size() == 1) return std::exp(x[v[0]]);
        return 0.0;
    };
    m.gradient = [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(x.array().exp());
    };
    return m;
}

std::vector<MarginalPtr> additive_exp_marginals(int d) {
    return g_function_marginals(d);
}

DerivativeModel linear_model(const Eigen::VectorXd& c) {
    const int d = static_cast<int>(c.size());
    DerivativeModel m;
    m.d = d;
    m.max_order = d;
    m.value = [c](const Eigen::VectorXd& x) { return c.dot(x); };
    m.cross_partial = [c](const Subset& v, const Eigen::VectorXd& x) {
        if (v.empty()) return c.dot(x);
        if (v.size() == 1) return c[v[0]];
        return 0.0;
    };
    m.gradient = [c](const Eigen::VectorXd&) { return c; };
    return m;
}

Metrics compute_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
    if (truth.size() != pred.size() || truth.size() == 0)
        throw std::invalid_argument("compute_metrics: size mismatch or empty");
    Metrics m;
    const Eigen::VectorXd err = pred - truth;
    m.rmse = std::sqrt(err.squaredNorm() / err.size());
    m.max_abs_err = err.lpNorm<Eigen::Infinity>();
    const double mean = truth.mean();
    const double sst = (truth.array() - mean).square().sum();
    m.r2 = sst > 0.0 ? 1.0 - err.squaredNorm() / sst
                     : (err.squaredNorm() == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
    return m;
}

double loglog_slope(const std::vector<int>& ns, const std::vector<double>& mse) {
    if (ns.size() != mse.size() || ns.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 points");
    const int k = static_cast<int>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        const double x = std::log(static_cast<double>(ns[i]));
        const double y = std::log(mse[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::string rate_csv(const RateStudy& study) {
    std::ostringstream os;
    os.precision(12);
    os << "n,mse\n";
    for (std::size_t i = 0; i < study.ns.size(); ++i)
        os << study.ns[i] << "," << study.mse[i] << "\n";
    os << "# slope," << study.slope << "\n";
    return os.str();
}

RateStudy db_rate_study(const DerivativeModel& model,
                        const std::vector<MarginalPtr>& marginals,
                        const std::vector<Subset>& components, const std::vector<int>& ns,
                        int replications, int n_test, std::uint64_t seed, int workers) {
    const Eigen::MatrixXd xtest =
        sample_design(marginals, n_test, split_seed(seed, 0xfeed), Generator::pseudo_random)
            .points;
    Eigen::VectorXd truth(n_test);
    for (int i = 0; i < n_test; ++i) truth[i] = model.value(xtest.row(i).transpose());

    RateStudy study;
    study.ns = ns;
    study.mse.resize(ns.size());
    for (std::size_t t = 0; t < ns.size(); ++t) {
        Eigen::VectorXd rep_mse(replications);
        parallel_for(static_cast<std::size_t>(replications), workers,
                     [&](std::size_t lo, std::size_t hi) {
                         for (std::size_t r = lo; r < hi; ++r) {
                             DbEmulator em = fit_db(
                                 model, marginals, ns[t],
                                 split_seed(seed, t * 1000 + r + 1), components,
                                 Generator::pseudo_random, 1);
                             const Eigen::VectorXd pred = predict_db_batch(em, xtest);
                             rep_mse[static_cast<Eigen::Index>(r)] =
                                 (pred - truth).squaredNorm() / n_test;
                         }
                     });
        study.mse[t] = rep_mse.mean();
    }
    study.slope = loglog_slope(study.ns, study.mse);
    return study;
}

RateStudy df_rate_study(const std::function<double(const Eigen::VectorXd&)>& model,
                        const std::vector<MarginalPtr>& base, int d0,
                        const std::vector<int>& ns, int replications, int n_test,
                        std::uint64_t seed, int workers) {
    const Eigen::MatrixXd xtest =
        sample_design(base, n_test, split_seed(seed, 0xfade), Generator::pseudo_random).points;
    Eigen::VectorXd truth(n_test);
    for (int i = 0; i < n_test; ++i) truth[i] = model(xtest.row(i).transpose());
    const double rho = rho_min_of(base);

    RateStudy study;
    study.ns = ns;
    study.mse.resize(ns.size());
    for (std::size_t t = 0; t < ns.size(); ++t) {
        const EmulatorSpec spec = default_spec(base, d0, rho, ns[t]);
        Eigen::VectorXd rep_mse(replications);
        parallel_for(static_cast<std::size_t>(replications), workers,
                     [&](std::size_t lo, std::size_t hi) {
                         for (std::size_t r = lo; r < hi; ++r) {
                             DfEmulator em = fit_df_model(
                                 model, spec, ns[t], split_seed(seed, t * 1000 + r + 1),
                                 Generator::pseudo_random, 1);
                             const Eigen::VectorXd pred = predict_df_batch(em, xtest);
                             rep_mse[static_cast<Eigen::Index>(r)] =
                                 (pred - truth).squaredNorm() / n_test;
                         }
                     });
        study.mse[t] = rep_mse.mean();
    }
    study.slope = loglog_slope(study.ns, study.mse);
    return study;
}

}  // namespace anovaemu
