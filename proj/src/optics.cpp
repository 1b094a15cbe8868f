#include "aspdc/optics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "aspdc/fft.hpp"
#include "aspdc/kernels.hpp"

namespace aspdc {
namespace {

constexpr double kPi = std::numbers::pi;

void check_alias(const GridSpec& grid, double wavelength, double distance) {
    const double limit = max_alias_free_distance(grid, wavelength);
    if (std::abs(distance) > limit) {
        const double min_pitch = std::sqrt(std::abs(distance) * wavelength / static_cast<double>(grid.n));
        std::size_t min_n = grid.n;
        while (static_cast<double>(min_n) * grid.pitch * grid.pitch / wavelength < std::abs(distance)) min_n *= 2;
        std::ostringstream msg;
        msg << "angular-spectrum transfer function aliases at z = " << distance << " m (limit "
            << limit << " m for n = " << grid.n << ", pitch = " << grid.pitch
            << " m); use pitch >= " << min_pitch << " m or n >= " << min_n;
        throw SamplingError(msg.str());
    }
}

// Angular-spectrum transfer with signed distance; conjugate = adjoint.
ComplexField transfer(const ComplexField& field, double distance, bool conjugate) {
    const auto& g = field.grid();
    if (distance == 0.0) return field;
    check_alias(g, field.wavelength(), distance);
    ComplexField out = field;
    auto data = out.data();
    fft::centered_dft2(data, g.n, fft::Direction::Forward);
    const double k = field.wavenumber();
    const auto n = static_cast<long>(g.n);
#pragma omp parallel for schedule(static) num_threads(kernels::thread_count())
    for (long iy = 0; iy < n; ++iy) {
        const double fy = g.freq(static_cast<std::size_t>(iy));
        for (long ix = 0; ix < n; ++ix) {
            const double fx = g.freq(static_cast<std::size_t>(ix));
            const double kt2 = 4.0 * kPi * kPi * (fx * fx + fy * fy);
            const double arg = k * k - kt2;
            cplx h;
            if (arg >= 0.0) {
                const double phase = distance * std::sqrt(arg);
                h = cplx(std::cos(phase), conjugate ? -std::sin(phase) : std::sin(phase));
            } else {
                h = std::exp(-std::abs(distance) * std::sqrt(-arg));
            }
            data[static_cast<std::size_t>(iy * n + ix)] *= h;
        }
    }
    fft::centered_dft2(data, g.n, fft::Direction::Inverse);
    return out;
}

void multiply_chirp(ComplexField& field, double coefficient) {
    // exp(i * coefficient * r^2)
    if (coefficient == 0.0) return;
    const auto& g = field.grid();
    const auto n = static_cast<long>(g.n);
#pragma omp parallel for schedule(static) num_threads(kernels::thread_count())
    for (long iy = 0; iy < n; ++iy) {
        const double y = g.coord(static_cast<std::size_t>(iy));
        for (long ix = 0; ix < n; ++ix) {
            const double x = g.coord(static_cast<std::size_t>(ix));
            const double ph = coefficient * (x * x + y * y);
            field.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) *= cplx(std::cos(ph), std::sin(ph));
        }
    }
}

// Samples stay put, the pitch scales by |m|; m < 0 mirrors through the origin.
ComplexField magnify(const ComplexField& field, double m) {
    const auto& g = field.grid();
    ComplexField out(GridSpec(g.n, g.pitch * std::abs(m)), field.wavelength());
    const double scale = 1.0 / std::abs(m);
    const std::size_t n = g.n;
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            const std::size_t sx = m < 0 ? (n - ix) % n : ix;
            const std::size_t sy = m < 0 ? (n - iy) % n : iy;
            out.at(ix, iy) = field.at(sx, sy) * scale;
        }
    }
    return out;
}

} // namespace

double max_alias_free_distance(const GridSpec& grid, double wavelength) {
    // Phase step of the transfer function between adjacent frequency bins at the
    // band edge must stay below pi.
    const double fmax = 1.0 / (2.0 * grid.pitch);
    const double inv2 = 1.0 / (wavelength * wavelength) - fmax * fmax;
    if (inv2 <= 0.0) return 0.0;
    return grid.extent() * std::sqrt(inv2) / (2.0 * fmax);
}

ComplexField propagate(const ComplexField& field, double distance) {
    if (distance < 0.0 || !std::isfinite(distance)) throw ParameterError("propagation distance must be >= 0");
    return transfer(field, distance, false);
}

ComplexField propagate_adjoint(const ComplexField& field, double distance) {
    if (distance < 0.0 || !std::isfinite(distance)) throw ParameterError("propagation distance must be >= 0");
    return transfer(field, distance, true);
}

ComplexField apply_lens(const ComplexField& field, double focal_length) {
    if (focal_length == 0.0 || std::isnan(focal_length)) throw ParameterError("lens focal length must be nonzero");
    if (std::isinf(focal_length)) return field;
    ComplexField out = field;
    multiply_chirp(out, -kPi / (field.wavelength() * focal_length));
    return out;
}

ComplexField apply_aperture(const ComplexField& field, const ApertureSpec& aperture) {
    ComplexField out = field;
    const auto& g = field.grid();
    const double r = 0.5 * std::max(aperture.diameter, 0.0);
    const double r2 = r * r;
    for (std::size_t iy = 0; iy < g.n; ++iy) {
        const double y = g.coord(iy) - aperture.offset_y;
        for (std::size_t ix = 0; ix < g.n; ++ix) {
            const double x = g.coord(ix) - aperture.offset_x;
            if (x * x + y * y > r2 || r == 0.0) out.at(ix, iy) = 0.0;
        }
    }
    return out;
}

Abcd Abcd::after(const Abcd& first) const {
    return {a * first.a + b * first.c, a * first.b + b * first.d,
            c * first.a + d * first.c, c * first.b + d * first.d};
}

ComplexField relay_fresnel(const ComplexField& field, const Abcd& m) {
    if (std::abs(m.a) < 1e-12) throw ParameterError("relay_fresnel requires A != 0");
    ComplexField out = transfer(field, m.b / m.a, false);
    out = magnify(out, m.a);
    multiply_chirp(out, kPi * (m.c / m.a) / field.wavelength());
    return out;
}

ComplexField relay_fresnel_adjoint(const ComplexField& field, const Abcd& m) {
    if (std::abs(m.a) < 1e-12) throw ParameterError("relay_fresnel requires A != 0");
    ComplexField out = field;
    multiply_chirp(out, -kPi * (m.c / m.a) / field.wavelength());
    out = magnify(out, 1.0 / m.a);
    return transfer(out, m.b / m.a, true);
}

double fourier_output_pitch(const GridSpec& in, double wavelength, const Abcd& m) {
    return wavelength * std::abs(m.b) / (static_cast<double>(in.n) * in.pitch);
}

ComplexField relay_fourier(const ComplexField& field, const Abcd& m) {
    if (std::abs(m.b) < 1e-15) throw ParameterError("relay_fourier requires B != 0");
    const double lambda = field.wavelength();
    const auto& gin = field.grid();
    const double dx2 = fourier_output_pitch(gin, lambda, m);
    ComplexField work = field;
    multiply_chirp(work, kPi * m.a / (lambda * m.b));
    auto data = work.data();
    fft::centered_dft2(data, gin.n, m.b > 0 ? fft::Direction::Forward : fft::Direction::Inverse);
    ComplexField out(GridSpec(gin.n, dx2), lambda);
    // 1/(i lambda B) * dx1^2 * n, magnitude dx1/dx2
    const cplx pref = cplx(0.0, -1.0) * (static_cast<double>(gin.n) * gin.pitch * gin.pitch / (lambda * m.b));
    auto od = out.data();
    for (std::size_t i = 0; i < od.size(); ++i) od[i] = data[i] * pref;
    multiply_chirp(out, kPi * m.d / (lambda * m.b));
    return out;
}

ComplexField relay_fourier_adjoint(const ComplexField& field, const Abcd& m, double input_pitch) {
    if (std::abs(m.b) < 1e-15) throw ParameterError("relay_fourier requires B != 0");
    const double lambda = field.wavelength();
    const auto& gout = field.grid();
    const double expect = lambda * std::abs(m.b) / (static_cast<double>(gout.n) * input_pitch);
    if (std::abs(expect - gout.pitch) > 1e-9 * gout.pitch)
        throw GeometryError("relay_fourier_adjoint: field pitch does not match the relay");
    ComplexField work = field;
    multiply_chirp(work, -kPi * m.d / (lambda * m.b));
    auto data = work.data();
    fft::centered_dft2(data, gout.n, m.b > 0 ? fft::Direction::Inverse : fft::Direction::Forward);
    const cplx pref = cplx(0.0, -1.0) * (static_cast<double>(gout.n) * input_pitch * input_pitch / (lambda * m.b));
    const cplx back = std::conj(pref) * (gout.pitch * gout.pitch) / (input_pitch * input_pitch);
    ComplexField out(GridSpec(gout.n, input_pitch), lambda);
    auto od = out.data();
    for (std::size_t i = 0; i < od.size(); ++i) od[i] = data[i] * back;
    multiply_chirp(out, -kPi * m.a / (lambda * m.b));
    return out;
}

BeamWidths beam_widths_d4s(const RealMap& intensity) {
    const auto& g = intensity.grid;
    double total = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t iy = 0; iy < g.n; ++iy)
        for (std::size_t ix = 0; ix < g.n; ++ix) {
            const double w = intensity.at(ix, iy);
            total += w;
            sx += w * g.coord(ix);
            sy += w * g.coord(iy);
        }
    if (!(total > 0.0)) throw MetricError("D4sigma is undefined for a field with zero power");
    const double cx = sx / total, cy = sy / total;
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (std::size_t iy = 0; iy < g.n; ++iy) {
        const double dy = g.coord(iy) - cy;
        for (std::size_t ix = 0; ix < g.n; ++ix) {
            const double dx = g.coord(ix) - cx;
            const double w = intensity.at(ix, iy);
            mxx += w * dx * dx;
            myy += w * dy * dy;
            mxy += w * dx * dy;
        }
    }
    mxx /= total;
    myy /= total;
    mxy /= total;
    const double mean = 0.5 * (mxx + myy);
    const double dev = std::sqrt(0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy);
    BeamWidths out;
    out.major = 4.0 * std::sqrt(std::max(mean + dev, 0.0));
    out.minor = 4.0 * std::sqrt(std::max(mean - dev, 0.0));
    out.angle = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
    out.centroid_x = cx;
    out.centroid_y = cy;
    return out;
}

double beam_diameter_d4s(const RealMap& intensity) {
    const auto w = beam_widths_d4s(intensity);
    return 0.5 * (w.major + w.minor);
}

double beam_diameter_d4s(const ComplexField& field) { return beam_diameter_d4s(field.intensity()); }

} // namespace aspdc
