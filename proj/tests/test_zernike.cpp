#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "aspdc/errors.hpp"
#include "aspdc/zernike.hpp"

using namespace aspdc;

namespace {

constexpr double pi = 3.14159265358979323846;

// Explicit textbook forms (unit RMS over the disk), written out independently
// of the library's radial-polynomial evaluation.
struct Tab {
    int n, m;
    std::function<double(double, double)> z;
};

std::vector<Tab> table() {
    const double s3 = std::sqrt(3.0), s5 = std::sqrt(5.0), s6 = std::sqrt(6.0), s8 = std::sqrt(8.0),
                 s10 = std::sqrt(10.0);
    return {
        {0, 0, [](double, double) { return 1.0; }},
        {1, 1, [](double r, double t) { return 2.0 * r * std::cos(t); }},
        {1, -1, [](double r, double t) { return 2.0 * r * std::sin(t); }},
        {2, 0, [=](double r, double) { return s3 * (2 * r * r - 1); }},
        {2, 2, [=](double r, double t) { return s6 * r * r * std::cos(2 * t); }},
        {2, -2, [=](double r, double t) { return s6 * r * r * std::sin(2 * t); }},
        {3, 1, [=](double r, double t) { return s8 * (3 * r * r * r - 2 * r) * std::cos(t); }},
        {3, -1, [=](double r, double t) { return s8 * (3 * r * r * r - 2 * r) * std::sin(t); }},
        {3, 3, [=](double r, double t) { return s8 * r * r * r * std::cos(3 * t); }},
        {3, -3, [=](double r, double t) { return s8 * r * r * r * std::sin(3 * t); }},
        {4, 0, [=](double r, double) { return s5 * (6 * std::pow(r, 4) - 6 * r * r + 1); }},
        {4, 2, [=](double r, double t) { return s10 * (4 * std::pow(r, 4) - 3 * r * r) * std::cos(2 * t); }},
        {4, -2, [=](double r, double t) { return s10 * (4 * std::pow(r, 4) - 3 * r * r) * std::sin(2 * t); }},
        {4, 4, [=](double r, double t) { return s10 * std::pow(r, 4) * std::cos(4 * t); }},
        {4, -4, [=](double r, double t) { return s10 * std::pow(r, 4) * std::sin(4 * t); }},
    };
}

} // namespace

TEST_SUITE("zernike") {

TEST_CASE("evaluation matches the tabulated polynomials") {
    for (const auto& t : table())
        for (double r : {0.0, 0.3, 0.71, 1.0})
            for (double th : {0.0, 0.4, 2.1, -1.3}) {
                CAPTURE(t.n);
                CAPTURE(t.m);
                CHECK(zernike_eval(t.n, t.m, r, th) == doctest::Approx(t.z(r, th)).epsilon(1e-12));
            }
    CHECK(zernike_eval(2, 0, 1.0, 0.0) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("index and domain validation") {
    CHECK_FALSE(zernike_index_valid(2, 1));
    CHECK_FALSE(zernike_index_valid(1, 3));
    CHECK_FALSE(zernike_index_valid(-1, 1));
    CHECK(zernike_index_valid(4, -2));
    CHECK_THROWS_AS((void)zernike_eval(2, 1, 0.5, 0.0), IndexError);
    CHECK_THROWS_AS((void)zernike_eval(2, 0, 1.2, 0.0), DomainError);
    ZernikeSpectrum s;
    CHECK_THROWS_AS(s.set(3, 0, 1.0), IndexError);
}

TEST_CASE("orthonormal over the disk") {
    // polar midpoint quadrature
    const int nr = 200, nt = 256;
    const auto tab = table();
    for (std::size_t i = 0; i < tab.size(); ++i)
        for (std::size_t j = i; j < tab.size(); ++j) {
            double acc = 0.0;
            for (int a = 0; a < nr; ++a) {
                const double r = (a + 0.5) / nr;
                for (int b = 0; b < nt; ++b) {
                    const double t = 2 * pi * (b + 0.5) / nt;
                    acc += zernike_eval(tab[i].n, tab[i].m, r, t) * zernike_eval(tab[j].n, tab[j].m, r, t) * r;
                }
            }
            acc *= (1.0 / nr) * (2 * pi / nt) / pi;
            CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-3));
        }
}

TEST_CASE("synthesize then decompose recovers coefficients") {
    ZernikeSpectrum s;
    s.normalization_radius = 2e-3;
    s.set(2, 0, 0.5);
    s.set(2, 2, -0.12);
    s.set(3, -1, 0.07);
    s.set(4, 4, 0.02);
    const RealMap m = zernike_synthesize(s, GridSpec(128, 4e-3 / 128));
    const ZernikeSpectrum d = zernike_decompose(m, 2e-3, 4);
    for (const auto& t : table()) CHECK(d.get(t.n, t.m) == doctest::Approx(s.get(t.n, t.m)).epsilon(1e-9).scale(1.0));
    CHECK(s.rms() == doctest::Approx(std::sqrt(0.25 + 0.0144 + 0.0049 + 0.0004)));
}

TEST_CASE("decomposition edge cases") {
    const RealMap zero(GridSpec(64, 1e-4));
    const ZernikeSpectrum z = zernike_decompose(zero, 3e-3, 4);
    for (const auto& [k, v] : z.coefficients) CHECK(std::abs(v) < 1e-15);
    // fewer than 100 samples inside the disk
    CHECK_THROWS_AS((void)zernike_decompose(zero, 3e-4, 4), UnderdeterminedError);
    ZernikeSpectrum big;
    big.normalization_radius = 1.0;
    big.set(2, 0, 1.0);
    CHECK_THROWS_AS((void)zernike_synthesize(big, GridSpec(64, 1e-4)), GeometryError);
}

TEST_CASE("JSON keyed n,m in ascending order") {
    ZernikeSpectrum s;
    s.set(4, -2, 0.1);
    s.set(2, 2, 0.2);
    s.set(2, -2, 0.3);
    s.set(10, 0, 0.4);
    const auto j = to_json(s);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"2,-2", "2,2", "4,-2", "10,0"});
    const ZernikeSpectrum back = zernike_from_json(j, 1.0);
    CHECK(back.get(2, -2) == 0.3);
    CHECK(back.get(10, 0) == 0.4);
    CHECK_THROWS_AS((void)zernike_from_json(nlohmann::ordered_json{{"20", 1.0}}, 1.0), ParameterError);
}

}
