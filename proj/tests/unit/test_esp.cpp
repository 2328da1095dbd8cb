#include <doctest.h>

#include <cmath>
#include <random>

#include "anovaemu/common.hpp"
#include "anovaemu/esp.hpp"

using namespace anovaemu;

TEST_CASE("esp: recursion matches the brute-force subset sum") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 300; ++trial) {
        Eigen::VectorXd r(12);
        for (int k = 0; k < 12; ++k) r[k] = uniform_sym(gen, 5.0);
        const Eigen::VectorXd e = esp_all(r, 12);
        REQUIRE(e.size() == 13);
        CHECK(e[0] == 1.0);
        for (int p = 1; p <= 12; ++p) {
            const double oracle = esp_bruteforce(r, p);
            const double scale = std::max(1.0, std::abs(oracle));
            CHECK(std::abs(e[p] - oracle) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("esp: generating function identity") {
    // prod_k (1 + t r_k) = sum_p e_p t^p for every t.
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 3 + static_cast<int>(gen() % 10);
        Eigen::VectorXd r(m);
        for (int k = 0; k < m; ++k) r[k] = uniform_sym(gen, 2.0);
        const Eigen::VectorXd e = esp_all(r, m);
        for (double t : {-1.0, -0.5, 0.5, 1.0}) {
            double lhs = 1.0;
            for (int k = 0; k < m; ++k) lhs *= 1.0 + t * r[k];
            double rhs = 0.0, tp = 1.0;
            for (int p = 0; p <= m; ++p) {
                rhs += e[p] * tp;
                tp *= t;
            }
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("esp: edge cases") {
    Eigen::VectorXd r(4);
    r << 2.0, -1.0, 0.0, 3.0;
    const Eigen::VectorXd e = esp_all(r, 2);
    REQUIRE(e.size() == 3);
    CHECK(e[1] == doctest::Approx(4.0));       // sum
    CHECK(e[2] == doctest::Approx(2.0 * -1.0 + 2.0 * 0.0 + 2.0 * 3.0 - 1.0 * 0.0 -
                                  1.0 * 3.0 + 0.0 * 3.0));
    CHECK(esp_all(Eigen::VectorXd(), 0).size() == 1);
    CHECK(esp_all(Eigen::VectorXd(), 0)[0] == 1.0);
}

TEST_CASE("kernel_E: quadrature mean matches the closed form on a uniform base") {
    // E_k(x, X') = (G(X') - 1[X' >= x]) / g(X'); under X' ~ U(0,1) its mean is
    // E[G(X')] - (1 - G(x)) = x - 1/2, which drives the telescoping identity
    // behind the expansion.
    const auto g = uniform_marginal(0.0, 1.0);
    for (double x : {0.1, 0.5, 0.9}) {
        const int n = 200000;
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xp = (i + 0.5) / n;
            mean += kernel_E(*g, x, xp);
        }
        mean /= n;
        CHECK(mean == doctest::Approx(x - 0.5).epsilon(1e-7));
    }
    // Piecewise values on the uniform base: E = x' for x' < x, x' - 1 otherwise.
    CHECK(kernel_E(*g, 0.5, 0.25) == doctest::Approx(0.25));
    CHECK(kernel_E(*g, 0.5, 0.75) == doctest::Approx(-0.25));
}

TEST_CASE("kernel_R scales kernel_E by v / (h sigma^2)") {
    const auto g = uniform_marginal(0.0, 1.0);
    const double h = 0.01, sigma2 = 0.04, v = -0.3;
    for (double x : {0.2, 0.7})
        for (double xp : {0.1, 0.4, 0.9})
            CHECK(kernel_R(x, xp, v, h, sigma2, *g) ==
                  doctest::Approx(kernel_E(*g, x, xp) * v / (h * sigma2)).epsilon(1e-13));
}
