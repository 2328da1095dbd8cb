#include <doctest.h>

#include <cmath>
#include <sstream>

#include "anovaemu/df_emulator.hpp"
#include "anovaemu/testbed.hpp"

using namespace anovaemu;

namespace {

std::vector<MarginalPtr> unit_box(int d) {
    std::vector<MarginalPtr> m;
    for (int j = 0; j < d; ++j) m.push_back(uniform_marginal(0.0, 1.0));
    return m;
}

double binom(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - i + 1) / i;
    return b;
}

}  // namespace

TEST_CASE("default_spec: standard recipe values") {
    const int d = 6, d0 = 2, n = 400;
    const auto base = unit_box(d);
    const double rho_min = rho_min_of(base);
    CHECK(rho_min == doctest::Approx(1.0));
    const EmulatorSpec spec = default_spec(base, d0, rho_min, n);
    CHECK(spec.d == d);
    CHECK(spec.d0 == d0);
    CHECK(spec.L == d0 + 1);
    CHECK(spec.r_star == d0 - 1);
    CHECK(spec.h == doctest::Approx(1.0 / n));
    const double xi_expected =
        1.0 / std::sqrt(d * binom(d, d0) * std::pow(1.0 / (2.0 * rho_min), d0));
    CHECK(spec.xi == doctest::Approx(xi_expected).epsilon(1e-12));
    CHECK(spec.sigma2 == doctest::Approx(spec.xi * spec.xi / 3.0).epsilon(1e-12));
}

TEST_CASE("rho_min_of: smallest density across supports") {
    std::vector<MarginalPtr> m{uniform_marginal(0.0, 1.0), uniform_marginal(0.0, 4.0)};
    CHECK(rho_min_of(m) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("plan_design: evaluation points follow X' + beta h V") {
    const auto base = unit_box(3);
    const EmulatorSpec spec = default_spec(base, 2, 1.0, 100);
    const EvaluationPlan plan = plan_design(spec, 100, 17);
    REQUIRE(plan.n() == 100);
    REQUIRE(plan.l() == 3);
    const Eigen::MatrixXd pts = plan.evaluation_points(spec.h);
    REQUIRE(pts.rows() == 300);
    for (int i = 0; i < 5; ++i)
        for (int l = 0; l < plan.l(); ++l) {
            const Eigen::VectorXd expect =
                plan.xprime.row(i).transpose() + plan.betas[l] * spec.h * plan.v.row(i).transpose();
            CHECK((plan.point(i, l, spec.h) - expect).cwiseAbs().maxCoeff() == 0.0);
            CHECK((pts.row(i * plan.l() + l).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
        }
    // Two-point default law: |V| = xi/sqrt(3) exactly.
    const double s = spec.xi / std::sqrt(3.0);
    CHECK((plan.v.cwiseAbs().array() - s).abs().maxCoeff() < 1e-14);
}

TEST_CASE("fit_df: vector and matrix outputs give the same emulator") {
    const auto base = unit_box(2);
    const DerivativeModel model = additive_exp_model(2);
    const EmulatorSpec spec = default_spec(base, 1, 1.0, 60);
    const EvaluationPlan plan = plan_design(spec, 60, 2);
    const Eigen::MatrixXd pts = plan.evaluation_points(spec.h);
    Eigen::VectorXd yv(pts.rows());
    for (int r = 0; r < pts.rows(); ++r) yv[r] = model.value(pts.row(r).transpose());
    Eigen::MatrixXd ym(plan.n(), plan.l());
    for (int i = 0; i < plan.n(); ++i)
        for (int l = 0; l < plan.l(); ++l) ym(i, l) = yv[i * plan.l() + l];
    const DfEmulator a = fit_df(plan, yv, spec);
    const DfEmulator b = fit_df(plan, ym, spec);
    CHECK(a.mean_estimate == b.mean_estimate);
    CHECK((a.a - b.a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("df emulator: accurate on an additive model") {
    const DerivativeModel model = additive_exp_model(5);
    const auto base = additive_exp_marginals(5);
    const EmulatorSpec spec = default_spec(base, 1, rho_min_of(base), 500);
    const DfEmulator em = fit_df_model(model.value, spec, 500, 42);
    const Eigen::MatrixXd xt = sample_design(base, 200, 0, Generator::sobol, 4000).points;
    Eigen::VectorXd truth(200);
    for (int i = 0; i < 200; ++i) truth[i] = model.value(xt.row(i).transpose());
    const Metrics m = compute_metrics(truth, predict_df_batch(em, xt));
    CHECK(m.r2 > 0.98);
    // The long-run mean estimate is close to E[sum exp(X_j)] = 5 (e - 1).
    CHECK(em.mean_estimate ==
          doctest::Approx(5.0 * (std::exp(1.0) - 1.0)).epsilon(0.02));
}

TEST_CASE("df emulator: custom component list agrees with the ESP fast path") {
    // When the custom list is exactly "all subsets of size <= d0", the explicit
    // product path must reproduce the ESP evaluation identically.
    const DerivativeModel model = ishigami_model();
    const auto base = ishigami_marginals();
    ComponentSelection full;  // Mode::full
    ComponentSelection custom;
    custom.mode = ComponentSelection::Mode::custom;
    custom.subsets = all_subsets_up_to({0, 1, 2}, 2);
    const EmulatorSpec sf = default_spec(base, 2, rho_min_of(base), 200, full);
    const EmulatorSpec sc = default_spec(base, 2, rho_min_of(base), 200, custom);
    const DfEmulator ef = fit_df_model(model.value, sf, 200, 9);
    const DfEmulator ec = fit_df_model(model.value, sc, 200, 9);
    const Eigen::MatrixXd xt = sample_design(base, 50, 0, Generator::sobol, 900).points;
    const Eigen::VectorXd pf = predict_df_batch(ef, xt);
    const Eigen::VectorXd pc = predict_df_batch(ec, xt);
    for (int i = 0; i < 50; ++i)
        CHECK(pf[i] == doctest::Approx(pc[i]).epsilon(1e-10));
}

TEST_CASE("df emulator: save/load round trip is bit-exact") {
    const DerivativeModel model = ishigami_model();
    const auto base = ishigami_marginals();
    ComponentSelection sel;
    sel.mode = ComponentSelection::Mode::custom;
    sel.subsets = ishigami_components();
    const EmulatorSpec spec = default_spec(base, 2, rho_min_of(base), 150, sel);
    const DfEmulator em = fit_df_model(model.value, spec, 150, 21);
    std::stringstream archive;
    save_df(em, archive);
    const DfEmulator back = load_df(archive);
    const Eigen::MatrixXd xt = sample_design(base, 40, 5, Generator::pseudo_random).points;
    const Eigen::VectorXd p1 = predict_df_batch(em, xt);
    const Eigen::VectorXd p2 = predict_df_batch(back, xt);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.mean_estimate == em.mean_estimate);
}

TEST_CASE("EmulatorSpec: JSON round trip keeps recipe and structure") {
    const auto base = unit_box(4);
    ComponentSelection sel;
    sel.mode = ComponentSelection::Mode::influential;
    sel.influential = {0, 2};
    EmulatorSpec spec = default_spec(base, 2, 1.0, 300, sel);
    spec.vlaw = PerturbationLaw::uniform;
    const EmulatorSpec back = EmulatorSpec::from_json(spec.to_json());
    CHECK(back.d == spec.d);
    CHECK(back.d0 == spec.d0);
    CHECK(back.L == spec.L);
    CHECK(back.h == spec.h);
    CHECK(back.xi == spec.xi);
    CHECK(back.vlaw == PerturbationLaw::uniform);
    CHECK(back.components.mode == ComponentSelection::Mode::influential);
    CHECK(back.components.influential == sel.influential);
    CHECK((back.coeffs.C - spec.coeffs.C).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plan_design: reproducible under pseudo-random sampling") {
    const auto base = unit_box(3);
    const EmulatorSpec spec = default_spec(base, 1, 1.0, 80);
    const EvaluationPlan a = plan_design(spec, 80, 4, Generator::pseudo_random);
    const EvaluationPlan b = plan_design(spec, 80, 4, Generator::pseudo_random);
    CHECK((a.xprime - b.xprime).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
}
