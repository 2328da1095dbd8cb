#include "anovaemu/esp.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace anovaemu {

double kernel_E(const Marginal& g, double x, double xprime) {
    const double dens = g.pdf(xprime);
    if (!(dens > 0.0))
        throw std::domain_error("kernel_E: base density vanishes at the base point");
    const double ind = (xprime >= x) ? 1.0 : 0.0;
    return (g.cdf(xprime) - ind) / dens;
}

double kernel_R(double x, double xprime, double v, double h, double sigma2,
                const Marginal& g) {
    if (!(h > 0.0)) throw std::invalid_argument("kernel_R: h must be > 0");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("kernel_R: sigma2 must be > 0");
    return kernel_E(g, x, xprime) * v / (h * sigma2);
}

Eigen::VectorXd esp_all(const Eigen::VectorXd& r, int pmax) {
    if (pmax < 0) throw std::invalid_argument("esp_all: pmax must be >= 0");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(pmax + 1);
    e[0] = 1.0;
    const int n = static_cast<int>(r.size());
    for (int k = 0; k < n; ++k) {
        const int top = std::min(pmax, k + 1);
        for (int p = top; p >= 1; --p) e[p] += r[k] * e[p - 1];
    }
    return e;
}

double esp_bruteforce(const Eigen::VectorXd& r, int p) {
    const int n = static_cast<int>(r.size());
    if (n > 20) throw std::invalid_argument("esp_bruteforce: vector too long (max 20)");
    if (p < 0 || p > n) return (p == 0) ? 1.0 : 0.0;
    if (p == 0) return 1.0;
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != p) continue;
        double prod = 1.0;
        for (int k = 0; k < n; ++k)
            if ((mask >> k) & 1u) prod *= r[k];
        total += prod;
    }
    return total;
}

}  // namespace anovaemu
