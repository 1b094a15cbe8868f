#include <doctest.h>

#include <cmath>
#include <complex>

#include "aspdc/errors.hpp"
#include "aspdc/fft.hpp"
#include "aspdc/field.hpp"
#include "aspdc/optics.hpp"

using namespace aspdc;

namespace {

constexpr double pi = 3.14159265358979323846;

// Gaussian with its waist at the input plane, carried through an ABCD system
// with the complex-q law. Global (on-axis) phase is dropped.
ComplexField gaussian_through(const GridSpec& out, double wavelength, double w0, const Abcd& m) {
    // exp(+ikz) convention: the envelope is exp(+i k r^2 / 2q), q0 = -i zR
    const std::complex<double> q0(0.0, -pi * w0 * w0 / wavelength);
    const std::complex<double> q = (m.a * q0 + m.b) / (m.c * q0 + m.d);
    const std::complex<double> amp = std::sqrt(2.0 / (pi * w0 * w0)) / (m.a + m.b / q0);
    const double k = 2.0 * pi / wavelength;
    ComplexField f(out, wavelength);
    for (std::size_t iy = 0; iy < out.n; ++iy)
        for (std::size_t ix = 0; ix < out.n; ++ix) {
            const double r2 = out.coord(ix) * out.coord(ix) + out.coord(iy) * out.coord(iy);
            f.at(ix, iy) = amp * std::exp(std::complex<double>(0.0, k * r2 / 2.0) / q);
        }
    return f;
}

// |<a,b>| / (|a| |b|): 1 for fields equal up to a global phase.
double similarity(const ComplexField& a, const ComplexField& b) {
    return std::abs(inner(a, b)) / std::sqrt(a.power() * b.power());
}

double analytic_w(double w0, double wavelength, double z) {
    const double zr = pi * w0 * w0 / wavelength;
    return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
}

} // namespace

TEST_SUITE("optics") {

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridSpec(100, 1e-6), ParameterError);
    CHECK_THROWS_AS(GridSpec(8, 1e-6), ParameterError);
    CHECK_THROWS_AS(GridSpec(64, 0.0), ParameterError);
    const GridSpec g(64, 2e-6);
    CHECK(g.coord(32) == 0.0);
    CHECK(g.freq(32) == 0.0);
    CHECK(g.extent() == doctest::Approx(128e-6));
}

TEST_CASE("centered DFT is unitary and inverts") {
    const GridSpec g(32, 1e-6);
    ComplexField f = gaussian_beam(g, 808e-9, 5e-6, 2e-6, -3e-6);
    const ComplexField orig = f;
    auto d = f.data();
    fft::centered_dft2(d, g.n, fft::Direction::Forward);
    double e = 0.0;
    for (auto v : d) e += std::norm(v);
    CHECK(e * g.pitch * g.pitch == doctest::Approx(orig.power()).epsilon(1e-12));
    fft::centered_dft2(d, g.n, fft::Direction::Inverse);
    double err = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(d[i] - orig.data()[i]));
    CHECK(err < 1e-12 * std::abs(orig.at(16, 16)));
}

TEST_CASE("gaussian beam has unit power and D4sigma 2w") {
    const GridSpec g(256, 10e-6);
    const ComplexField f = gaussian_beam(g, 808e-9, 200e-6);
    CHECK(f.power() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(beam_diameter_d4s(f) == doctest::Approx(400e-6).epsilon(1e-6));
}

TEST_CASE("free-space gaussian matches w(z) and conserves power") {
    for (double lambda : {404e-9, 808e-9}) {
        const GridSpec g(512, 60e-6);
        const double w0 = 1e-3;
        const ComplexField in = gaussian_beam(g, lambda, w0);
        for (double z : {0.5, 1.5, 2.0}) {
            const ComplexField out = propagate(in, z);
            CAPTURE(lambda);
            CAPTURE(z);
            CHECK(beam_diameter_d4s(out) / 2.0 == doctest::Approx(analytic_w(w0, lambda, z)).epsilon(0.01));
            CHECK(std::abs(out.power() - in.power()) < 1e-9 * in.power());
        }
    }
    // 1 mm waist, 808 nm, 2 m
    CHECK(analytic_w(1e-3, 808e-9, 2.0) == doctest::Approx(1.124e-3).epsilon(1e-3));
}

TEST_CASE("propagation matches the analytic complex gaussian") {
    const GridSpec g(256, 16e-6);
    const double w0 = 150e-6, lambda = 808e-9, z = 0.05;
    const ComplexField out = propagate(gaussian_beam(g, lambda, w0), z);
    CHECK(similarity(out, gaussian_through(g, lambda, w0, Abcd::free_space(z))) > 1.0 - 1e-9);
}

TEST_CASE("aliasing guard") {
    const GridSpec g(128, 8e-6);
    const ComplexField f = gaussian_beam(g, 808e-9, 100e-6);
    const double limit = max_alias_free_distance(g, 808e-9);
    CHECK_NOTHROW((void)propagate(f, 0.99 * limit));
    CHECK_THROWS_AS((void)propagate(f, 1.01 * limit), SamplingError);
    CHECK_THROWS_AS((void)propagate(f, -1e-3), ParameterError);
    try {
        (void)propagate(f, 2.0 * limit);
    } catch (const SamplingError& e) {
        CHECK(std::string(e.what()).find("pitch") != std::string::npos);
    }
}

TEST_CASE("propagation adjoint") {
    const GridSpec g(64, 6e-6);
    const ComplexField a = gaussian_beam(g, 808e-9, 40e-6, 10e-6, 0.0);
    ComplexField b = gaussian_beam(g, 808e-9, 25e-6, -5e-6, 8e-6);
    b = apply_lens(b, 0.01);
    const cplx lhs = inner(propagate(a, 1e-3), b);
    const cplx rhs = inner(a, propagate_adjoint(b, 1e-3));
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // propagate then adjoint is the identity
    const ComplexField back = propagate_adjoint(propagate(a, 1e-3), 1e-3);
    CHECK(similarity(back, a) > 1.0 - 1e-12);
}

TEST_CASE("thin lens") {
    const GridSpec g(64, 10e-6);
    const ComplexField f = gaussian_beam(g, 808e-9, 100e-6);
    CHECK_THROWS_AS((void)apply_lens(f, 0.0), ParameterError);
    const ComplexField same = apply_lens(f, kFlatElement);
    for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(same.data()[i] == f.data()[i]);
    CHECK(apply_lens(f, 0.1).power() == doctest::Approx(f.power()).epsilon(1e-12));
}

TEST_CASE("lens then focal-length propagation focuses to lambda f / (pi w)") {
    // reduced geometry where explicit sampling works on one grid
    const double lambda = 808e-9, w = 0.4e-3, f = 0.05;
    const GridSpec g(512, 10e-6);
    const ComplexField out = propagate(apply_lens(gaussian_beam(g, lambda, w), f), f);
    const double expected = lambda * f / (pi * w) * std::sqrt(1.0 + std::pow(pi * w * w / (lambda * f), -2.0));
    CHECK(beam_diameter_d4s(out) / 2.0 == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("aperture") {
    const GridSpec g(256, 10e-6);
    const double w = 400e-6;
    const ComplexField f = gaussian_beam(g, 808e-9, w);
    const double a = 300e-6;
    const double expected = 1.0 - std::exp(-2.0 * a * a / (w * w));
    CHECK(apply_aperture(f, {2 * a, 0.0, 0.0}).power() == doctest::Approx(expected).epsilon(0.02));
    CHECK(apply_aperture(f, {0.0, 0.0, 0.0}).power() == 0.0);
    CHECK(apply_aperture(f, {1.0, 0.0, 0.0}).power() == doctest::Approx(f.power()).epsilon(1e-12));
}

TEST_CASE("fresnel relay matches the complex-q oracle, including magnification") {
    const double lambda = 404e-9, w0 = 0.5e-3;
    const GridSpec g(256, 30e-6);
    const ComplexField in = gaussian_beam(g, lambda, w0);
    // Galilean telescope, reduced focal lengths
    const Abcd tel = Abcd::thin_lens(0.1).after(Abcd::free_space(0.05)).after(Abcd::thin_lens(-0.05));
    REQUIRE(tel.a == doctest::Approx(2.0));
    const ComplexField out = relay_fresnel(in, tel);
    CHECK(out.grid().pitch == doctest::Approx(2.0 * g.pitch));
    CHECK(out.power() == doctest::Approx(in.power()).epsilon(1e-9));
    CHECK(similarity(out, gaussian_through(out.grid(), lambda, w0, tel)) > 1.0 - 1e-8);

    // inverting system flips and keeps power
    const Abcd inv = Abcd::free_space(0.1).after(Abcd::thin_lens(0.05)).after(Abcd::free_space(0.1));
    const ComplexField shifted = gaussian_beam(g, lambda, w0, 0.6e-3, 0.0);
    const ComplexField flipped = relay_fresnel(shifted, {inv.a, inv.b, inv.c, inv.d});
    CHECK(flipped.power() == doctest::Approx(shifted.power()).epsilon(1e-9));
}

TEST_CASE("explicit telescope composition agrees with the ABCD relay") {
    // lens - propagate - lens on one fine grid vs the single relay
    const double lambda = 404e-9, w0 = 0.1e-3;
    const double fd = -0.05, fc = 0.1, sep = 0.05;
    const GridSpec g(512, 8e-6);
    ComplexField explicit_f = gaussian_beam(g, lambda, w0);
    explicit_f = apply_lens(explicit_f, fd);
    explicit_f = propagate(explicit_f, sep);
    explicit_f = apply_lens(explicit_f, fc);
    const Abcd m = Abcd::thin_lens(fc).after(Abcd::free_space(sep)).after(Abcd::thin_lens(fd));
    const ComplexField relayed = relay_fresnel(gaussian_beam(g, lambda, w0), m);
    CHECK(beam_diameter_d4s(explicit_f) == doctest::Approx(beam_diameter_d4s(relayed)).epsilon(0.005));
    CHECK(beam_diameter_d4s(relayed) == doctest::Approx(4.0 * w0).epsilon(0.005));
    CHECK(similarity(explicit_f, gaussian_through(g, lambda, w0, m)) > 1.0 - 1e-6);
}

TEST_CASE("fourier relay matches the complex-q oracle") {
    const double lambda = 404e-9, w0 = 2.5e-3, f = 0.287;
    const GridSpec g(256, 0.2265e-3);
    const Abcd m = Abcd::free_space(f).after(Abcd::thin_lens(f));
    const ComplexField out = relay_fourier(gaussian_beam(g, lambda, w0), m);
    CHECK(out.grid().pitch == doctest::Approx(fourier_output_pitch(g, lambda, m)));
    CHECK(out.power() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(similarity(out, gaussian_through(out.grid(), lambda, w0, m)) > 1.0 - 1e-8);
    // focused waist
    CHECK(beam_diameter_d4s(out) / 2.0 == doctest::Approx(lambda * f / (pi * w0)).epsilon(0.01));
}

TEST_CASE("relay adjoints") {
    const double lambda = 808e-9;
    const GridSpec g(64, 20e-6);
    const ComplexField a = gaussian_beam(g, lambda, 150e-6, 40e-6, 0.0);
    const Abcd mf = Abcd::thin_lens(0.3).after(Abcd::free_space(0.01));
    const ComplexField fa = relay_fresnel(a, mf);
    const ComplexField b = gaussian_beam(fa.grid(), lambda, 120e-6, 0.0, -30e-6);
    CHECK(std::abs(inner(fa, b) - inner(a, relay_fresnel_adjoint(b, mf))) < 1e-12);

    const Abcd mr = Abcd::free_space(0.05).after(Abcd::thin_lens(0.05));
    const ComplexField ra = relay_fourier(a, mr);
    const ComplexField c = gaussian_beam(ra.grid(), lambda, 60e-6, 10e-6, 0.0);
    CHECK(std::abs(inner(ra, c) - inner(a, relay_fourier_adjoint(c, mr, g.pitch))) < 1e-12);
}

TEST_CASE("D4sigma metrology") {
    const GridSpec g(64, 1e-6);
    RealMap two(g);
    const double d = 5e-6;
    two.at(32 - 5, 32) = 1.0;
    two.at(32 + 5, 32) = 1.0;
    const BeamWidths w = beam_widths_d4s(two);
    CHECK(w.major == doctest::Approx(4.0 * d));
    CHECK(w.minor == doctest::Approx(0.0));
    CHECK(w.centroid_x == doctest::Approx(0.0));
    CHECK(beam_diameter_d4s(two) == doctest::Approx(2.0 * d));
    RealMap zero(g);
    CHECK_THROWS_AS((void)beam_diameter_d4s(zero), MetricError);

    // elliptical gaussian rotated by 45 degrees
    RealMap ell(GridSpec(256, 1e-6));
    const double wa = 40e-6, wb = 20e-6, c = std::cos(pi / 4), s = std::sin(pi / 4);
    for (std::size_t iy = 0; iy < 256; ++iy)
        for (std::size_t ix = 0; ix < 256; ++ix) {
            const double x = ell.grid.coord(ix), y = ell.grid.coord(iy);
            const double u = c * x + s * y, v = -s * x + c * y;
            ell.at(ix, iy) = std::exp(-2.0 * (u * u / (wa * wa) + v * v / (wb * wb)));
        }
    const BeamWidths e = beam_widths_d4s(ell);
    CHECK(e.major == doctest::Approx(2.0 * wa).epsilon(1e-6));
    CHECK(e.minor == doctest::Approx(2.0 * wb).epsilon(1e-6));
    CHECK(e.angle == doctest::Approx(pi / 4).epsilon(1e-9));
}

}
