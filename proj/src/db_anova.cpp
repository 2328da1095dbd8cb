#include "anovaemu/db_anova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "anovaemu/common.hpp"
#include "anovaemu/esp.hpp"
#include "anovaemu/sobol.hpp"

namespace anovaemu {

double DerivativeModel::deriv(const Subset& v, const Eigen::VectorXd& x) const {
    if (v.empty()) return value(x);
    if (static_cast<int>(v.size()) > max_order)
        throw std::invalid_argument("derivative order " + std::to_string(v.size()) +
                                    " exceeds the model's declared order " +
                                    std::to_string(max_order));
    return cross_partial(v, x);
}

Eigen::VectorXd DerivativeModel::grad(const Eigen::VectorXd& x) const {
    if (gradient) return gradient(x);
    Eigen::VectorXd g(d);
    for (int j = 0; j < d; ++j) g[j] = deriv({j}, x);
    return g;
}

DbEmulator fit_db(const DerivativeModel& model, const std::vector<MarginalPtr>& marginals,
                  int n, std::uint64_t seed, const std::vector<Subset>& components,
                  Generator generator, int workers) {
    if (n < 1) throw std::invalid_argument("fit_db: N must be >= 1");
    const int d = static_cast<int>(marginals.size());
    for (const auto& v : components) {
        if (v.empty()) continue;  // the empty set is always implicitly retained
        if (static_cast<int>(v.size()) > model.max_order)
            throw std::invalid_argument("fit_db: retained component exceeds the model's "
                                        "declared derivative order");
        for (int k : v)
            if (k < 0 || k >= d) throw std::invalid_argument("fit_db: component index out of range");
    }

    DbEmulator em;
    em.marginals = marginals;
    em.xprime = sample_design(marginals, n, seed, generator).points;
    for (const auto& v : components)
        if (!v.empty()) em.components.push_back(v);
    em.values.resize(n);
    em.derivs.resize(n, static_cast<int>(em.components.size()));
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Eigen::VectorXd xi = em.xprime.row(i).transpose();
            em.values[static_cast<int>(i)] = model.value(xi);
            for (std::size_t c = 0; c < em.components.size(); ++c)
                em.derivs(static_cast<int>(i), static_cast<int>(c)) =
                    model.deriv(em.components[c], xi);
        }
    });
    return em;
}

double predict_db(const DbEmulator& em, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(em.xprime.rows());
    const int d = static_cast<int>(em.xprime.cols());
    double total = 0.0;
    Eigen::VectorXd e(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k)
            e[k] = kernel_E(*em.marginals[k], x[k], em.xprime(i, k));
        double s = em.values[i];
        for (std::size_t c = 0; c < em.components.size(); ++c) {
            double prod = em.derivs(i, static_cast<int>(c));
            for (int k : em.components[c]) prod *= e[k];
            s += prod;
        }
        total += s;
    }
    return total / n;
}

Eigen::VectorXd predict_db_batch(const DbEmulator& em, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (int i = 0; i < x.rows(); ++i) out[i] = predict_db(em, x.row(i).transpose());
    return out;
}

namespace {

struct IndexSampler {
    Eigen::MatrixXd x, x2;    // two independent N x d samples from F
    Eigen::MatrixXd gx, gx2;  // gradients at each
    Eigen::VectorXd m;        // M(X_i)
    double variance = 0.0;
};

IndexSampler build_index_sampler(const DerivativeModel& model,
                                 const std::vector<MarginalPtr>& marginals, int n,
                                 std::uint64_t seed, Generator generator, int workers) {
    const int d = static_cast<int>(marginals.size());
    IndexSampler s;
    if (generator == Generator::sobol && 2 * d <= SobolSequence::max_dimension()) {
        // One 2d-dimensional low-discrepancy stream supplies both samples.
        std::vector<MarginalPtr> twice(marginals);
        twice.insert(twice.end(), marginals.begin(), marginals.end());
        Eigen::MatrixXd joint = sample_design(twice, n, seed, Generator::sobol).points;
        s.x = joint.leftCols(d);
        s.x2 = joint.rightCols(d);
    } else {
        s.x = sample_design(marginals, n, seed, generator).points;
        s.x2 = sample_design(marginals, n, split_seed(seed, 1), Generator::pseudo_random).points;
    }
    s.gx.resize(n, d);
    s.gx2.resize(n, d);
    s.m.resize(n);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const int r = static_cast<int>(i);
            const Eigen::VectorXd xi = s.x.row(r).transpose();
            s.m[r] = model.value(xi);
            s.gx.row(r) = model.grad(xi).transpose();
            s.gx2.row(r) = model.grad(s.x2.row(r).transpose()).transpose();
        }
    });
    const double mean = s.m.mean();
    s.variance = (s.m.array() - mean).square().sum() / (n - 1);
    if (!(s.variance > 1e-12))
        throw std::domain_error("sensitivity indices: output variance is degenerate");
    return s;
}

IndexEstimate ratio_with_se(const Eigen::VectorXd& terms, double variance) {
    const int n = static_cast<int>(terms.size());
    IndexEstimate est;
    est.value = terms.mean() / variance;
    const int b = std::max(2, std::min(32, n / 2));
    const int per = n / b;
    Eigen::VectorXd means(b);
    for (int k = 0; k < b; ++k) means[k] = terms.segment(k * per, per).mean();
    const double mb = means.mean();
    const double sd = std::sqrt((means.array() - mb).square().sum() / (b - 1));
    est.se = sd / std::sqrt(static_cast<double>(b)) / variance;
    return est;
}

double pair_kernel(const Marginal& f, double a, double b) {
    const double fa = f.cdf(a);
    const double fb = f.cdf(b);
    return (std::min(fa, fb) - fa * fb) / (f.pdf(a) * f.pdf(b));
}

IndexEstimate first_order_from(const IndexSampler& s, const std::vector<MarginalPtr>& f, int j) {
    const int n = static_cast<int>(s.x.rows());
    Eigen::VectorXd terms(n);
    for (int i = 0; i < n; ++i)
        terms[i] = s.gx(i, j) * s.gx2(i, j) * pair_kernel(*f[j], s.x(i, j), s.x2(i, j));
    return ratio_with_se(terms, s.variance);
}

IndexEstimate total_from(const IndexSampler& s, const DerivativeModel& model,
                         const std::vector<MarginalPtr>& f, int j, int workers) {
    const int n = static_cast<int>(s.x.rows());
    Eigen::VectorXd terms(n);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ii = lo; ii < hi; ++ii) {
            const int i = static_cast<int>(ii);
            Eigen::VectorXd mixed = s.x.row(i).transpose();  // pick-freeze: share X_{~j}
            mixed[j] = s.x2(i, j);
            const double dj = model.deriv({j}, mixed);
            terms[i] = s.gx(i, j) * dj * pair_kernel(*f[j], s.x(i, j), s.x2(i, j));
        }
    });
    return ratio_with_se(terms, s.variance);
}

IndexEstimate upper_bound_from(const IndexSampler& s, const std::vector<MarginalPtr>& f, int j) {
    const int n = static_cast<int>(s.x.rows());
    Eigen::VectorXd terms(n);
    for (int i = 0; i < n; ++i) {
        const double fj = f[j]->cdf(s.x(i, j));
        const double rj = f[j]->pdf(s.x(i, j));
        terms[i] = 0.5 * s.gx(i, j) * s.gx(i, j) * fj * (1.0 - fj) / (rj * rj);
    }
    return ratio_with_se(terms, s.variance);
}

}  // namespace

IndexEstimate first_order_index(const DerivativeModel& model,
                                const std::vector<MarginalPtr>& marginals, int j, int n,
                                std::uint64_t seed, Generator generator) {
    return first_order_from(build_index_sampler(model, marginals, n, seed, generator, 1),
                            marginals, j);
}

IndexEstimate total_index(const DerivativeModel& model, const std::vector<MarginalPtr>& marginals,
                          int j, int n, std::uint64_t seed, Generator generator) {
    return total_from(build_index_sampler(model, marginals, n, seed, generator, 1), model,
                      marginals, j, 1);
}

IndexEstimate upper_bound_index(const DerivativeModel& model,
                                const std::vector<MarginalPtr>& marginals, int j, int n,
                                std::uint64_t seed, Generator generator) {
    return upper_bound_from(build_index_sampler(model, marginals, n, seed, generator, 1),
                            marginals, j);
}

int recommend_truncation(const Eigen::VectorXd& s, const Eigen::VectorXd& st, double eps) {
    const int d = static_cast<int>(s.size());
    if (st.size() != 0 && st.size() != s.size())
        throw std::invalid_argument("recommend_truncation: index vectors differ in length");
    const double sum_s = s.sum();
    if (sum_s >= 1.0 - eps) return 1;  // additive
    if (st.size() == 0) return d;      // cannot judge interactions without totals
    const double sum_st = st.sum();
    if (sum_s + sum_st <= 2.0 + eps) return 2;
    const double mixed = 2.0 * sum_s + sum_st;
    if (mixed > 2.0 && mixed <= 3.0 + eps) return 3;
    for (int alpha = 2; alpha <= d; ++alpha) {
        const bool lower_ok = (alpha - 1) * sum_st + sum_s >= alpha - eps;
        const bool upper_ok = sum_st + (alpha - 1) * sum_s <= alpha + eps;
        if (lower_ok && upper_ok) return alpha;
    }
    return d;
}

std::vector<Subset> all_subsets_up_to(const std::vector<int>& inputs, int d0) {
    std::vector<Subset> out;
    std::vector<Subset> frontier{{}};
    for (int size = 1; size <= d0; ++size) {
        std::vector<Subset> next;
        for (const auto& base : frontier) {
            for (std::size_t t = 0; t < inputs.size(); ++t) {
                if (!base.empty() && inputs[t] <= base.back()) continue;
                Subset v = base;
                v.push_back(inputs[t]);
                next.push_back(v);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

std::vector<Subset> screen_components(SensitivityReport& report,
                                      const ScreeningThresholds& th) {
    const int d = static_cast<int>(report.s.size());
    const bool has_total = report.st.size() == d;
    report.decisions.clear();

    std::vector<int> active;
    for (int j = 0; j < d; ++j) {
        if (report.ub[j] < th.near_zero) {
            report.decisions.push_back("drop input " + std::to_string(j + 1) +
                                       ": UB below " + std::to_string(th.near_zero));
        } else {
            active.push_back(j);
        }
    }

    // Rule: a pair (i,j) explains (almost) all of the variance and every
    // other total index is small -> keep only those two inputs.
    if (has_total) {
        double best = -1.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                double others = 0.0;
                double max_other = 0.0;
                for (int k = 0; k < d; ++k) {
                    if (k == i || k == j) continue;
                    others += report.st[k];
                    max_other = std::max(max_other, report.st[k]);
                }
                if (max_other > th.near_equal) continue;
                if (1.0 - (report.s[i] + report.st[j]) > others + th.near_equal) continue;
                if (report.s[i] + report.st[j] > best) {
                    best = report.s[i] + report.st[j];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi >= 0) {
            active.clear();
            active.push_back(std::min(bi, bj));
            active.push_back(std::max(bi, bj));
            report.decisions.push_back("keep only inputs " + std::to_string(bi + 1) + " and " +
                                       std::to_string(bj + 1) +
                                       ": S_i + S_Tj accounts for the variance");
        }
    }

    std::vector<bool> no_interaction(d, false), drop_main(d, false);
    for (int j : active) {
        const bool s_eq_st = has_total && std::abs(report.st[j] - report.s[j]) <= th.near_equal;
        const bool s_eq_ub = std::abs(report.ub[j] - report.s[j]) <= th.near_equal;
        if (s_eq_st || s_eq_ub) {
            no_interaction[j] = true;
            report.decisions.push_back("drop interactions involving input " +
                                       std::to_string(j + 1) + ": S matches " +
                                       (s_eq_st ? "S_T" : "UB"));
        }
        if (has_total && report.s[j] < th.near_zero && report.st[j] > th.near_equal &&
            report.ub[j] >= report.st[j] - th.near_equal) {
            drop_main[j] = true;
            report.decisions.push_back("drop first-order term of input " + std::to_string(j + 1) +
                                       ": S is null but S_T is not");
        }
    }

    // Guard against combinatorial blow-up: lower the listed order until the
    // cumulative subset count C(m,1)+...+C(m,k) fits within the cap.
    const std::size_t m = active.size();
    int list_order = std::min<int>(report.recommended_d0, static_cast<int>(m));
    auto subset_count = [&](int order) {
        double total = 0.0, binom = 1.0;
        for (int k = 1; k <= order; ++k) {
            binom *= static_cast<double>(m - k + 1) / k;
            total += binom;
            if (total > 1e18) return std::numeric_limits<std::size_t>::max();
        }
        return static_cast<std::size_t>(total);
    };
    while (list_order > 1 && subset_count(list_order) > th.max_components) --list_order;
    if (list_order < report.recommended_d0 && static_cast<int>(m) > list_order) {
        report.decisions.push_back(
            "component list truncated to order " + std::to_string(list_order) +
            ": enumerating all subsets of " + std::to_string(m) + " inputs up to order " +
            std::to_string(report.recommended_d0) + " would exceed the component cap");
    }

    std::vector<Subset> retained;
    for (const auto& v : all_subsets_up_to(active, list_order)) {
        if (v.size() == 1 && drop_main[v[0]]) continue;
        if (v.size() > 1 &&
            std::any_of(v.begin(), v.end(), [&](int k) { return no_interaction[k]; }))
            continue;
        retained.push_back(v);
    }
    report.retained = retained;
    return retained;
}

SensitivityReport sensitivity_report(const DerivativeModel& model,
                                     const std::vector<MarginalPtr>& marginals, int n,
                                     std::uint64_t seed, const ReportOptions& opts) {
    const int d = static_cast<int>(marginals.size());
    IndexSampler sampler =
        build_index_sampler(model, marginals, n, seed, opts.generator, opts.workers);
    SensitivityReport rep;
    rep.variance = sampler.variance;
    rep.s.resize(d);
    rep.s_se.resize(d);
    rep.ub.resize(d);
    rep.ub_se.resize(d);
    if (opts.with_total) {
        rep.st.resize(d);
        rep.st_se.resize(d);
    }
    for (int j = 0; j < d; ++j) {
        const IndexEstimate sj = first_order_from(sampler, marginals, j);
        rep.s[j] = sj.value;
        rep.s_se[j] = sj.se;
        const IndexEstimate ub = upper_bound_from(sampler, marginals, j);
        rep.ub[j] = ub.value;
        rep.ub_se[j] = ub.se;
        if (opts.with_total) {
            const IndexEstimate st = total_from(sampler, model, marginals, j, opts.workers);
            rep.st[j] = st.value;
            rep.st_se[j] = st.se;
        }
    }
    rep.recommended_d0 = recommend_truncation(rep.s, rep.st, opts.eps);
    screen_components(rep, opts.thresholds);
    return rep;
}

std::string SensitivityReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    const bool has_total = st.size() == s.size();
    os << "input,S,S_se,ST,ST_se,UB,UB_se\n";
    for (int j = 0; j < s.size(); ++j) {
        os << (j + 1) << ',' << s[j] << ',' << s_se[j] << ',';
        if (has_total)
            os << st[j] << ',' << st_se[j] << ',';
        else
            os << ",,";
        os << ub[j] << ',' << ub_se[j] << '\n';
    }
    return os.str();
}

nlohmann::json SensitivityReport::to_json() const {
    nlohmann::json j;
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["S"] = vec(s);
    j["S_se"] = vec(s_se);
    if (st.size() == s.size()) {
        j["ST"] = vec(st);
        j["ST_se"] = vec(st_se);
    }
    j["UB"] = vec(ub);
    j["UB_se"] = vec(ub_se);
    j["variance"] = variance;
    j["recommended_d0"] = recommended_d0;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& v : retained) {
        nlohmann::json c = nlohmann::json::array();
        for (int k : v) c.push_back(k + 1);  // 1-based in reports
        comps.push_back(c);
    }
    j["retained_components"] = comps;
    j["decisions"] = decisions;
    return j;
}

}  // namespace anovaemu
