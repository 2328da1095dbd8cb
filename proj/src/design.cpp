#include "anovaemu/design.hpp"

#include <cmath>
#include <stdexcept>

#include "anovaemu/common.hpp"
#include "anovaemu/sobol.hpp"

namespace anovaemu {

DesignMatrix sample_design(const std::vector<MarginalPtr>& marginals, int n,
                           std::uint64_t seed, Generator generator,
                           std::uint64_t sobol_offset) {
    if (marginals.empty()) throw std::invalid_argument("sample_design: no marginals");
    if (n < 1) throw std::invalid_argument("sample_design: N must be >= 1");
    const int d = static_cast<int>(marginals.size());
    DesignMatrix out;
    out.generator = generator;
    out.seed = seed;
    out.points.resize(n, d);
    if (generator == Generator::sobol) {
        SobolSequence seq(d);
        if (sobol_offset > 0) seq.skip_to(sobol_offset + 1);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd u = seq.next();
            for (int j = 0; j < d; ++j) out.points(i, j) = marginals[j]->quantile(u[j]);
        }
    } else {
        std::mt19937_64 gen(seed);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) out.points(i, j) = marginals[j]->quantile(uniform01(gen));
    }
    return out;
}

PerturbationMatrix sample_perturbations(int d, int n, double xi, std::uint64_t seed,
                                        PerturbationLaw law) {
    if (xi <= 0.0) throw std::invalid_argument("sample_perturbations: xi must be > 0");
    if (d < 1 || n < 1) throw std::invalid_argument("sample_perturbations: d and N must be >= 1");
    PerturbationMatrix out;
    out.xi = xi;
    out.sigma2 = xi * xi / 3.0;
    out.v.resize(n, d);
    const double s = xi / std::sqrt(3.0);
    std::mt19937_64 gen(seed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            const double u = uniform_sym(gen, xi);
            out.v(i, j) = law == PerturbationLaw::uniform ? u : (u < 0.0 ? -s : s);
        }
    return out;
}

}  // namespace anovaemu
