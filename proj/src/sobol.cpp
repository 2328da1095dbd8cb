#include "anovaemu/sobol.hpp"

#include <bit>
#include <stdexcept>

namespace anovaemu {

namespace {

// Primitive polynomials modulo two and initial direction numbers for
// dimensions 2..50, after Joe & Kuo's tables. Dimension 1 uses m_i = 1.
const SobolTableRow kTable[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 3, 3, 25, 45, 79}},
    {7, 55, {1, 3, 7, 11, 3, 5, 17}},
    {7, 56, {1, 3, 5, 5, 19, 41, 23}},
    {7, 59, {1, 3, 3, 3, 9, 13, 49}},
    {7, 62, {1, 1, 7, 15, 1, 59, 63}},
    {8, 14, {1, 1, 5, 5, 3, 15, 119, 3}},
    {8, 21, {1, 1, 7, 11, 13, 29, 3, 13}},
    {8, 22, {1, 3, 5, 5, 31, 15, 65, 131}},
    {8, 38, {1, 3, 3, 9, 3, 43, 3, 13}},
    {8, 47, {1, 3, 1, 15, 25, 3, 65, 147}},
    {8, 49, {1, 1, 3, 11, 17, 23, 53, 49}},
    {8, 50, {1, 3, 7, 9, 31, 37, 101, 35}},
    {8, 52, {1, 1, 3, 7, 13, 7, 87, 75}},
    {8, 56, {1, 3, 5, 5, 1, 33, 7, 1}},
    {8, 67, {1, 1, 3, 3, 19, 11, 41, 161}},
    {8, 70, {1, 3, 1, 15, 17, 31, 121, 9}},
    {8, 84, {1, 3, 3, 9, 9, 23, 63, 163}},
    {8, 97, {1, 3, 7, 7, 17, 39, 125, 93}},
};

constexpr int kBits = 32;
constexpr int kMaxDim = 1 + static_cast<int>(sizeof(kTable) / sizeof(kTable[0]));

}  // namespace

const std::vector<SobolTableRow>& sobol_direction_table() {
    static const std::vector<SobolTableRow> table(kTable, kTable + kMaxDim - 1);
    return table;
}

int SobolSequence::max_dimension() { return kMaxDim; }

std::vector<std::uint32_t> SobolSequence::direction_numbers(int dim) {
    if (dim < 0 || dim >= kMaxDim)
        throw std::invalid_argument("sobol: dimension out of range");
    std::vector<std::uint32_t> v(kBits);
    if (dim == 0) {
        for (int i = 0; i < kBits; ++i) v[i] = 1u << (kBits - 1 - i);
        return v;
    }
    const SobolTableRow& row = kTable[dim - 1];
    const int s = row.s;
    for (int i = 0; i < s && i < kBits; ++i) v[i] = row.m[i] << (kBits - 1 - i);
    for (int i = s; i < kBits; ++i) {
        std::uint32_t x = v[i - s] ^ (v[i - s] >> s);
        for (int k = 1; k < s; ++k)
            if ((row.a >> (s - 1 - k)) & 1u) x ^= v[i - k];
        v[i] = x;
    }
    return v;
}

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("sobol: dimension must be >= 1");
    if (dim > kMaxDim)
        throw std::invalid_argument("sobol: dimension exceeds the direction table (max " +
                                    std::to_string(kMaxDim) + ")");
    v_.reserve(dim_);
    for (int j = 0; j < dim_; ++j) v_.push_back(direction_numbers(j));
    state_.assign(dim_, 0u);
}

Eigen::VectorXd SobolSequence::next() {
    ++n_;
    const int c = std::countr_zero(n_);
    if (c >= kBits) throw std::runtime_error("sobol: sequence exhausted");
    Eigen::VectorXd out(dim_);
    for (int j = 0; j < dim_; ++j) {
        state_[j] ^= v_[j][c];
        // Half-integer shift keeps every coordinate in the open interval
        // (0, 1) and off the dyadic rationals (quantile transforms may be
        // singular at 0/1 and models may have kinks at points like 1/2).
        out[j] = (static_cast<double>(state_[j]) + 0.5) * 0x1.0p-32;
    }
    return out;
}

void SobolSequence::skip_to(std::uint64_t index) {
    if (index < 1) throw std::invalid_argument("sobol: index must be >= 1");
    // State after n steps equals the direct evaluation at gray(n).
    const std::uint64_t n = index - 1;
    const std::uint64_t g = n ^ (n >> 1);
    state_.assign(dim_, 0u);
    for (int b = 0; b < kBits; ++b) {
        if ((g >> b) & 1ull)
            for (int j = 0; j < dim_; ++j) state_[j] ^= v_[j][b];
    }
    n_ = n;
}

}  // namespace anovaemu
