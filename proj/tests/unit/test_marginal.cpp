#include <doctest.h>

#include <cmath>
#include <random>

#include "anovaemu/common.hpp"
#include "anovaemu/marginal.hpp"

using namespace anovaemu;

namespace {

double pdf_integral(const Marginal& m, int panels = 20000) {
    const double a = m.lower(), b = m.upper();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x = a + (i + 0.5) * h;  // midpoint rule dodges jump points
        total += m.pdf(x) * h;
    }
    return total;
}

}  // namespace

TEST_CASE("uniform: cdf/quantile round trip") {
    const auto m = uniform_marginal(-2.5, 7.0);
    std::mt19937_64 gen(11);
    for (int i = 0; i < 2000; ++i) {
        const double u = uniform01(gen);
        CHECK(m->cdf(m->quantile(u)) == doctest::Approx(u).epsilon(1e-12));
        const double x = m->quantile(u);
        CHECK(m->quantile(m->cdf(x)) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("uniform: pdf integrates to one and matches the cdf slope") {
    const auto m = uniform_marginal(0.25, 1.75);
    CHECK(pdf_integral(*m) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m->pdf(1.0) == doctest::Approx((m->cdf(1.0 + 1e-6) - m->cdf(1.0 - 1e-6)) / 2e-6)
                             .epsilon(1e-6));
    CHECK(m->pdf(-1.0) == 0.0);
    CHECK(m->cdf(m->lower() - 1.0) == 0.0);
    CHECK(m->cdf(m->upper() + 1.0) == 1.0);
}

TEST_CASE("uniform: invalid bounds rejected") {
    CHECK_THROWS(uniform_marginal(1.0, 1.0));
    CHECK_THROWS(uniform_marginal(2.0, 1.0));
    const auto m = uniform_marginal(0.0, 1.0);
    CHECK_THROWS(m->quantile(0.0));
    CHECK_THROWS(m->quantile(1.0));
    CHECK_THROWS(m->quantile(1.5));
}

TEST_CASE("mixture: G is dominated by the base cdf on the base support") {
    // The right-extension mixture satisfies G(x) = tau * F(x) <= F(x) for x in
    // the base support, the stochastic-dominance property the construction needs.
    const auto base = uniform_marginal(0.0, 1.0);
    const auto g = make_default_mixture(base, 0.9);
    for (double x = 0.01; x < 1.0; x += 0.01) {
        CHECK(g->cdf(x) <= base->cdf(x) + 1e-15);
        CHECK(g->cdf(x) == doctest::Approx(0.9 * base->cdf(x)).epsilon(1e-12));
    }
    CHECK(g->upper() > base->upper());
    CHECK(g->cdf(g->upper()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixture: pdf integrates to one, cdf/quantile round trip") {
    const auto g = make_default_mixture(uniform_marginal(-1.0, 2.0), 0.85);
    CHECK(pdf_integral(*g) == doctest::Approx(1.0).epsilon(1e-6));
    std::mt19937_64 gen(5);
    for (int i = 0; i < 2000; ++i) {
        const double u = uniform01(gen);
        CHECK(g->cdf(g->quantile(u)) == doctest::Approx(u).epsilon(1e-10));
    }
    // Points straddling the mixture weight tau.
    for (double u : {0.8499999, 0.85, 0.8500001})
        CHECK(g->cdf(g->quantile(u)) == doctest::Approx(u).epsilon(1e-9));
}

TEST_CASE("mixture: default extension keeps a uniform base density continuous") {
    const double tau = 0.9;
    const auto g = make_default_mixture(uniform_marginal(0.0, 1.0), tau);
    const double just_below = g->pdf(1.0 - 1e-9);
    const double just_above = g->pdf(1.0 + 1e-9);
    CHECK(just_below == doctest::Approx(just_above).epsilon(1e-6));
}

TEST_CASE("mixture: tau = 1 degenerates to the base law") {
    const auto base = uniform_marginal(0.0, 3.0);
    const auto g = make_default_mixture(base, 1.0);
    CHECK(g.get() == base.get());
}

TEST_CASE("mixture: misplaced extensions rejected") {
    const auto base = uniform_marginal(0.0, 1.0);
    CHECK_THROWS(make_mixture(base, 0.9, uniform_marginal(0.5, 1.5)));   // overlap
    CHECK_THROWS(make_mixture(base, 0.9, uniform_marginal(-2.0, -1.0))); // left side
    CHECK_THROWS(make_mixture(base, 0.0, uniform_marginal(1.0, 2.0)));
    CHECK_THROWS(make_mixture(base, 1.5, uniform_marginal(1.0, 2.0)));
    CHECK_THROWS(make_mixture(nullptr, 0.9, uniform_marginal(1.0, 2.0)));
}

TEST_CASE("marginal: JSON round trip") {
    const auto u = uniform_marginal(-3.0, 4.5);
    const auto u2 = make_marginal(u->to_json());
    CHECK(u2->lower() == u->lower());
    CHECK(u2->upper() == u->upper());
    CHECK(u2->kind() == "uniform");

    const auto g = make_default_mixture(uniform_marginal(0.0, 2.0), 0.8);
    const auto g2 = make_marginal(g->to_json());
    for (double x = -0.5; x < g->upper() + 0.5; x += 0.03)
        CHECK(g2->cdf(x) == doctest::Approx(g->cdf(x)).epsilon(1e-14));
    CHECK_THROWS(make_marginal(nlohmann::json{{"kind", "cauchy"}}));
}
