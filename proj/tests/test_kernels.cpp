#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aspdc/kernels.hpp"

using namespace aspdc;

namespace {

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("serial kernels match direct sums") {
    const auto a = random_vector(1000, 1), b = random_vector(1000, 2), c = random_vector(1000, 3);
    cplx in{}, tr{};
    double n2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        in += std::conj(a[k]) * b[k];
        tr += a[k] * b[k] * c[k];
        n2 += std::norm(a[k]);
    }
    CHECK(close(kernels::serial::inner(a, b), in, 1e-12));
    CHECK(close(kernels::serial::triple(a, b, c), tr, 1e-12));
    CHECK(kernels::serial::norm2(a) == doctest::Approx(n2).epsilon(1e-12));
}

TEST_CASE("parallel kernels agree with the serial reference") {
    const std::size_t row = 64;
    const auto a = random_vector(row * row, 4), b = random_vector(row * row, 5), c = random_vector(row * row, 6);
    CHECK(close(kernels::parallel::inner(a, b, row), kernels::serial::inner(a, b), 1e-12));
    CHECK(close(kernels::parallel::triple(a, b, c, row), kernels::serial::triple(a, b, c), 1e-12));
    CHECK(kernels::parallel::norm2(a, row) == doctest::Approx(kernels::serial::norm2(a)).epsilon(1e-12));

    auto x = a, y = a;
    kernels::serial::multiply(x, b);
    kernels::parallel::multiply(y, b);
    CHECK(x == y);
    for (std::size_t k = 0; k < x.size(); k += 101) CHECK(x[k] == a[k] * b[k]);

    // reproducible run to run
    CHECK(kernels::parallel::inner(a, b, row) == kernels::parallel::inner(a, b, row));
}

TEST_CASE("conjugate matrix-vector product") {
    const std::size_t rows = 37, cols = 53;
    const auto m = random_vector(rows * cols, 7), v = random_vector(cols, 8);
    std::vector<cplx> s(rows), p(rows);
    kernels::serial::matvec_conj(m, v, s);
    kernels::parallel::matvec_conj(m, v, p);
    for (std::size_t r = 0; r < rows; ++r) {
        cplx want{};
        for (std::size_t k = 0; k < cols; ++k) want += m[r * cols + k] * std::conj(v[k]);
        CHECK(close(s[r], want, 1e-12));
        CHECK(close(p[r], want, 1e-12));
    }
}

TEST_CASE("thread count is positive and stable") {
    const int n = kernels::thread_count();
    CHECK(n >= 1);
    CHECK(kernels::thread_count() == n);
}

}
