#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace anovaemu {

/// One row of the primitive-polynomial / initial direction number table
/// (Joe-Kuo style): degree s, polynomial coefficients a, initial m values.
struct SobolTableRow {
    int s;
    std::uint32_t a;
    std::uint32_t m[8];
};

/// Table rows for dimensions 2..max_dimension (dimension 1 needs none).
const std::vector<SobolTableRow>& sobol_direction_table();

/// Gray-code Sobol sequence generator. The first point returned by next()
/// is point #1 of the sequence; the all-zeros point #0 is skipped.
class SobolSequence {
public:
    explicit SobolSequence(int dim);
    static int max_dimension();

    Eigen::VectorXd next();

    /// Position the stream so the following next() returns point #index (index >= 1).
    void skip_to(std::uint64_t index);

    /// Direction numbers for one dimension (32 values, scaled by 2^32).
    /// dim is 0-based. Exposed so tests can evaluate points independently.
    static std::vector<std::uint32_t> direction_numbers(int dim);

private:
    int dim_;
    std::uint64_t n_ = 0;
    std::vector<std::uint32_t> state_;
    std::vector<std::vector<std::uint32_t>> v_;  // per dimension, 32 entries
};

}  // namespace anovaemu
