#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "anovaemu/marginal.hpp"

namespace anovaemu {

enum class Generator { sobol, pseudo_random };

struct DesignMatrix {
    Eigen::MatrixXd points;  // N x d
    Generator generator = Generator::sobol;
    std::uint64_t seed = 0;
};

/// Componentwise quantile transform of a low-discrepancy (or seeded
/// pseudo-random) point set. Sobol designs skip point #0.
DesignMatrix sample_design(const std::vector<MarginalPtr>& marginals, int n,
                           std::uint64_t seed, Generator generator = Generator::sobol,
                           std::uint64_t sobol_offset = 0);

/// Law of the perturbations V_k. Both are symmetric with the same second
/// moment sigma^2 = xi^2/3; the two-point law +/- xi/sqrt(3) has the smallest
/// possible kurtosis, which minimises the emulator variance.
enum class PerturbationLaw { two_point, uniform };

struct PerturbationMatrix {
    Eigen::MatrixXd v;  // N x d
    double xi = 0.0;
    double sigma2 = 0.0;  // xi^2 / 3
};

PerturbationMatrix sample_perturbations(int d, int n, double xi, std::uint64_t seed,
                                        PerturbationLaw law = PerturbationLaw::two_point);

}  // namespace anovaemu
