#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "anovaemu/sobol.hpp"

using namespace anovaemu;

namespace {

// Independent oracle: coordinate j of point #index (1-based) is the XOR of
// the direction numbers selected by the bits of the Gray code of index,
// centre-shifted into (0,1).
double sobol_point_oracle(int dim, std::uint64_t index) {
    const std::vector<std::uint32_t> v = SobolSequence::direction_numbers(dim);
    const std::uint64_t gray = index ^ (index >> 1);
    std::uint32_t state = 0;
    for (int b = 0; b < 64; ++b)
        if ((gray >> b) & 1ULL) state ^= v[static_cast<std::size_t>(b)];
    return (static_cast<double>(state) + 0.5) * 0x1.0p-32;
}

}  // namespace

TEST_CASE("sobol: sequential stream matches the direct Gray-code formula") {
    const int d = 8;
    SobolSequence seq(d);
    for (std::uint64_t i = 1; i <= 512; ++i) {
        const Eigen::VectorXd p = seq.next();
        for (int j = 0; j < d; ++j) {
            CAPTURE(i);
            CAPTURE(j);
            CHECK(p[j] == sobol_point_oracle(j, i));  // bit-exact
        }
    }
}

TEST_CASE("sobol: skip_to agrees with sequential generation") {
    const int d = 12;
    SobolSequence seq(d);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(seq.next());
    for (std::uint64_t target : {1ULL, 2ULL, 17ULL, 100ULL, 200ULL}) {
        SobolSequence jumped(d);
        jumped.skip_to(target);
        const Eigen::VectorXd p = jumped.next();
        CHECK((p - pts[target - 1]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("sobol: skip_to far ahead keeps the stream consistent") {
    const int d = 5;
    SobolSequence a(d);
    a.skip_to(100000);
    SobolSequence b(d);
    b.skip_to(100003);
    a.next();
    a.next();
    a.next();
    CHECK((a.next() - b.next()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sobol: coordinates stay inside the open unit interval, off 1/2") {
    // The centre shift keeps points off the dyadic rationals 0, 1/2 and 1,
    // which quantile transforms and kinked integrands cannot tolerate.
    const int d = 10;
    SobolSequence seq(d);
    for (int i = 0; i < 4096; ++i) {
        const Eigen::VectorXd p = seq.next();
        for (int j = 0; j < d; ++j) {
            CHECK(p[j] > 0.0);
            CHECK(p[j] < 1.0);
            CHECK(p[j] != 0.5);
        }
    }
}

TEST_CASE("sobol: low discrepancy in the mean") {
    const int d = 6;
    SobolSequence seq(d);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    const int n = 4096;
    for (int i = 0; i < n; ++i) sum += seq.next();
    for (int j = 0; j < d; ++j)
        CHECK(sum[j] / n == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("sobol: dimension limits") {
    CHECK(SobolSequence::max_dimension() >= 50);
    CHECK_NOTHROW(SobolSequence(SobolSequence::max_dimension()));
    CHECK_THROWS(SobolSequence(SobolSequence::max_dimension() + 1));
    CHECK_THROWS(SobolSequence(0));
}
