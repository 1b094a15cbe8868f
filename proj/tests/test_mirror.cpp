#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "aspdc/errors.hpp"
#include "aspdc/mirror.hpp"
#include "aspdc/optics.hpp"

using namespace aspdc;

namespace {

double radius(const Point2& p) { return std::hypot(p.x, p.y); }

GridSpec mirror_grid(std::size_t n = 256) { return GridSpec(n, 2.0 * 6e-3 / static_cast<double>(n)); }

double value_at(const RealMap& m, double x, double y) {
    const auto ix = static_cast<std::size_t>(std::lround(x / m.grid.pitch + static_cast<double>(m.grid.n / 2)));
    const auto iy = static_cast<std::size_t>(std::lround(y / m.grid.pitch + static_cast<double>(m.grid.n / 2)));
    return m.at(ix, iy);
}

} // namespace

TEST_SUITE("mirror") {

TEST_CASE("honeycomb layout") {
    const ActuatorLayout l = layout_honeycomb();
    CHECK(l.spacing == doctest::Approx(5.5e-3 / 3.0));
    CHECK(radius(l.positions[0]) == 0.0);
    double rmax = 0.0;
    for (const auto& p : l.positions) rmax = std::max(rmax, radius(p));
    CHECK(rmax <= 5.5e-3 * (1 + 1e-12));

    // every site has a neighbour at exactly one lattice spacing, none closer
    for (std::size_t i = 0; i < kActuatorCount; ++i) {
        double dmin = 1.0;
        for (std::size_t j = 0; j < kActuatorCount; ++j)
            if (i != j)
                dmin = std::min(dmin, std::hypot(l.positions[i].x - l.positions[j].x,
                                                 l.positions[i].y - l.positions[j].y));
        CHECK(dmin == doctest::Approx(l.spacing).epsilon(1e-9));
    }
    // sorted by radius
    for (std::size_t i = 1; i < kActuatorCount; ++i)
        CHECK(radius(l.positions[i]) >= radius(l.positions[i - 1]) - 1e-12);

    // the first 31 sites (complete shells) map onto themselves under 60 degree rotation
    const double c = 0.5, s = std::sqrt(3.0) / 2.0;
    for (std::size_t i = 0; i < 31; ++i) {
        const double x = c * l.positions[i].x - s * l.positions[i].y;
        const double y = s * l.positions[i].x + c * l.positions[i].y;
        bool found = false;
        for (std::size_t j = 0; j < 31; ++j)
            found = found || std::hypot(x - l.positions[j].x, y - l.positions[j].y) < 1e-12;
        CHECK(found);
    }
    // reproducible
    const ActuatorLayout l2 = layout_honeycomb();
    for (std::size_t i = 0; i < kActuatorCount; ++i) {
        CHECK(l.positions[i].x == l2.positions[i].x);
        CHECK(l.positions[i].y == l2.positions[i].y);
    }
    CHECK_THROWS_AS((void)layout_honeycomb(10e-3, 9.5e-3), ParameterError);
}

TEST_CASE("commands clamp and count") {
    MirrorState s;
    CHECK(s[5] == 0.5);
    s.set(3, 1.4);
    s.set(4, -0.2);
    s.set(6, 0.9);
    CHECK(s[3] == 1.0);
    CHECK(s[4] == 0.0);
    CHECK(s.clamped_count() == 2);
    CHECK_THROWS_AS(s.set(32, 0.1), IndexError);
    CHECK_THROWS_AS(s.set(0, std::nan("")), ParameterError);
    const MirrorState back = mirror_state_from_json(to_json(s));
    CHECK(back == s);
    CHECK_THROWS_AS((void)mirror_state_from_json(nlohmann::json::array({0.5, 0.5})), ParameterError);
}

TEST_CASE("surface from commands") {
    const ActuatorLayout l = layout_honeycomb();
    const InfluenceModel model;
    const GridSpec g = mirror_grid();

    const RealMap flat = mirror_surface(MirrorState(), model, l, g);
    CHECK(*std::max_element(flat.values.begin(), flat.values.end()) == 0.0);
    CHECK(*std::min_element(flat.values.begin(), flat.values.end()) == 0.0);

    MirrorState one;
    one.set(0, 1.0);
    const RealMap s1 = mirror_surface(one, model, l, g);
    const double peak = *std::max_element(s1.values.begin(), s1.values.end());
    CHECK(peak == doctest::Approx(model.stroke_max_um * 0.75).epsilon(1e-9));
    CHECK(value_at(s1, 0.0, 0.0) == doctest::Approx(peak));

    SUBCASE("quadratic in the command") {
        MirrorState a, b;
        a.set(7, 0.8);
        b.set(7, 0.9);
        const RealMap sa = mirror_surface(a, model, l, g);
        const RealMap sb = mirror_surface(b, model, l, g);
        const double ratio = (0.9 * 0.9 - 0.25) / (0.8 * 0.8 - 0.25);
        const auto k = static_cast<std::size_t>(std::max_element(sa.values.begin(), sa.values.end()) -
                                                sa.values.begin());
        CHECK(sb.values[k] == doctest::Approx(ratio * sa.values[k]).epsilon(1e-12));
    }
    SUBCASE("monotone in every actuator") {
        for (std::size_t i = 0; i < kActuatorCount; i += 5) {
            double prev = -1e9;
            for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                MirrorState st;
                st.set(i, c);
                const double v = value_at(mirror_surface(st, model, l, g), l.positions[i].x, l.positions[i].y);
                CHECK(v > prev);
                prev = v;
            }
        }
    }
    SUBCASE("superposition") {
        MirrorState a, b, ab;
        a.set(2, 0.9);
        b.set(11, 0.2);
        ab.set(2, 0.9);
        ab.set(11, 0.2);
        const RealMap sa = mirror_surface(a, model, l, g), sb = mirror_surface(b, model, l, g),
                      sab = mirror_surface(ab, model, l, g);
        for (std::size_t i = 0; i < sab.values.size(); i += 97)
            CHECK(sab.values[i] == doctest::Approx(sa.values[i] + sb.values[i]).epsilon(1e-12).scale(1e-9));
    }
}

TEST_CASE("reflection preserves power and doubles the path") {
    const GridSpec g = mirror_grid(128);
    ComplexField f = gaussian_beam(g, 808e-9, 2e-3);
    RealMap s(g);
    for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = 0.3 * std::sin(0.01 * static_cast<double>(i));
    const ComplexField r = reflect(f, s);
    CHECK(r.power() == doctest::Approx(f.power()).epsilon(1e-12));
    const std::size_t k = 64 * 128 + 70;
    const double dphi = std::arg(r.data()[k] / f.data()[k]);
    const double want = std::remainder(2.0 * f.wavenumber() * 0.3e-6 * std::sin(0.01 * k), 2 * std::numbers::pi);
    CHECK(dphi == doctest::Approx(want).epsilon(1e-9));
    CHECK_THROWS_AS((void)reflect(f, RealMap(mirror_grid(64))), GeometryError);
}

TEST_CASE("defocus surface acts as a lens of focal length r0^2 / (8 sqrt3 c)") {
    const double r0 = 5e-3, c = 0.2;  // um
    const GridSpec g(256, 2.0 * r0 / 256.0);
    ZernikeSpectrum z;
    z.normalization_radius = r0;
    z.set(2, 0, c);
    const RealMap s = zernike_synthesize(z, g);
    const ComplexField f = plane_wave(g, 808e-9);
    const ComplexField r = reflect(f, s);
    const double focal = -r0 * r0 / (8.0 * std::sqrt(3.0) * c * 1e-6);
    const ComplexField lens = apply_lens(f, focal);
    // compare away from the edge; strip the constant piston using the centre sample
    const std::size_t ctr = 128 * 256 + 128;
    const cplx p0 = r.data()[ctr] / lens.data()[ctr];
    double worst = 0.0;
    for (std::size_t iy = 40; iy < 216; iy += 7)
        for (std::size_t ix = 40; ix < 216; ix += 7)
            worst = std::max(worst, std::abs(r.at(ix, iy) / lens.at(ix, iy) / p0 - 1.0));
    CHECK(worst < 1e-9);
    CHECK(std::abs(focal) == doctest::Approx(r0 * r0 / (8.0 * std::sqrt(3.0) * 0.2e-6)));
}

TEST_CASE("zernike content of simple commands") {
    const ActuatorLayout l = layout_honeycomb();
    const InfluenceModel model;
    const ZernikeSpectrum bias = command_to_zernike(MirrorState(), model, l, 5e-3);
    for (const auto& [k, v] : bias.coefficients) CHECK(std::abs(v) < 0.01);

    MirrorState centre;
    centre.set(0, 1.0);
    const ZernikeSpectrum zc = command_to_zernike(centre, model, l, 5e-3);
    double largest = 0.0;
    std::pair<int, int> arg{0, 0};
    for (const auto& [k, v] : zc.coefficients)
        if (k.first > 0 && std::abs(v) > largest) {
            largest = std::abs(v);
            arg = k;
        }
    CHECK(arg == std::pair<int, int>{2, 0});
    CHECK(zc.get(2, 0) < 0.0);  // a central bump is a negative-curvature defocus
    CHECK(std::abs(zc.get(1, 1)) < 1e-6);
    CHECK(std::abs(zc.get(1, -1)) < 1e-6);

    // push the two sites on the x axis, pull the two on the y-ish axis -> +Z(2,2)
    MirrorState xs;
    for (std::size_t i = 0; i < kActuatorCount; ++i) {
        const auto& p = l.positions[i];
        if (std::abs(p.y) < 1e-9 && std::abs(std::abs(p.x) - l.spacing) < 1e-9) xs.set(i, 1.0);
    }
    const ZernikeSpectrum zx = command_to_zernike(xs, model, l, 5e-3);
    CHECK(zx.get(2, 2) > 0.0);
    CHECK(std::abs(zx.get(2, -2)) < 1e-6);
}

TEST_CASE("influence model validation") {
    InfluenceModel m;
    m.stroke_max_um = 0.0;
    CHECK_THROWS_AS(m.validate(), ParameterError);
    m = InfluenceModel{};
    m.bias_command = 1.0;
    CHECK_THROWS_AS(m.validate(), ParameterError);
    const ActuatorLayout l = layout_honeycomb();
    CHECK(InfluenceModel{}.sigma_for(l) == doctest::Approx(0.8 * l.spacing));
    CHECK_THROWS_AS((void)mirror_surface(MirrorState(), InfluenceModel{}, l, GridSpec(64, 1e-4)), GeometryError);
}

}
