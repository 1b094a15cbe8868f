#include "aspdc/spdc.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "aspdc/errors.hpp"
#include "aspdc/fft.hpp"
#include "aspdc/kernels.hpp"

namespace aspdc {
namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

Abcd relay_matrix(const FourierRelay& r) {
    return Abcd::free_space(r.focal_length)
        .after(Abcd::thin_lens(r.focal_length))
        .after(Abcd::free_space(r.front_distance));
}

double hermite(int n, double x) {
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

void normalize(ComplexField& f) {
    const double p = f.power();
    if (!(p > 0.0)) throw SamplingError("collection mode has no power on the output grid");
    const double s = 1.0 / std::sqrt(p);
    for (auto& v : f.data()) v *= s;
}

} // namespace

void CrystalSpec::validate() const {
    if (!(length > 0.0)) throw ParameterError("crystal length must be positive");
    if (!(pump_wavelength > 0.0)) throw ParameterError("pump wavelength must be positive");
    if (std::abs(degenerate_wavelength - 2.0 * pump_wavelength) > 1e-12 * degenerate_wavelength)
        throw ParameterError("degenerate wavelength must be twice the pump wavelength");
    if (slices == 0 || slices > 512) throw ParameterError("crystal slice count must lie in [1, 512]");
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double phase_mismatch(Vec2 q_s, Vec2 q_i, const CrystalSpec& crystal) {
    const double ks = 2.0 * kPi / crystal.degenerate_wavelength;
    const double kp = 2.0 * kPi / crystal.pump_wavelength;
    const double qs2 = q_s[0] * q_s[0] + q_s[1] * q_s[1];
    const double qi2 = q_i[0] * q_i[0] + q_i[1] * q_i[1];
    const double px = q_s[0] + q_i[0], py = q_s[1] + q_i[1];
    const double qp2 = px * px + py * py;
    if (qs2 >= ks * ks || qi2 >= ks * ks || qp2 >= kp * kp)
        throw DomainError("transverse momentum exceeds the wavenumber (evanescent component)");
    return std::sqrt(kp * kp - qp2) - std::sqrt(ks * ks - qs2) - std::sqrt(ks * ks - qi2) +
           crystal.collinear_mismatch_offset;
}

double MultimodeFiber::basis_waist(double wavelength) const {
    // Gaussian whose size/divergence ratio matches the bucket's position
    // acceptance (f * NA) over its angular acceptance (core / f).
    const double position = coupler_focal_length * numerical_aperture;
    const double angle = core_radius / coupler_focal_length;
    return std::sqrt(wavelength * position / (kPi * angle));
}

void DetectionArm::validate() const {
    if (elements.empty()) throw ParameterError("detection arm has no elements");
    for (const auto& e : elements) {
        std::visit(overloaded{
                       [](const Propagate& p) {
                           if (p.distance < 0.0) throw ParameterError("arm distances must be >= 0");
                       },
                       [](const Lens& l) {
                           if (l.focal_length == 0.0) throw ParameterError("lens focal length must be nonzero");
                       },
                       [](const Aperture&) {},
                       [](const FourierRelay& r) {
                           if (r.front_distance < 0.0 || r.focal_length <= 0.0)
                               throw ParameterError("invalid Fourier relay");
                       },
                   },
                   e);
    }
}

ComplexField arm_transfer(const ComplexField& field, const DetectionArm& arm) {
    arm.validate();
    ComplexField f = field;
    for (const auto& e : arm.elements) {
        f = std::visit(overloaded{
                           [&](const Propagate& p) { return propagate(f, p.distance); },
                           [&](const Lens& l) { return apply_lens(f, l.focal_length); },
                           [&](const Aperture& a) { return apply_aperture(f, a.spec); },
                           [&](const FourierRelay& r) { return relay_fourier(f, relay_matrix(r)); },
                       },
                       e);
    }
    return f;
}

GridSpec arm_output_grid(const DetectionArm& arm, const GridSpec& input, double wavelength) {
    GridSpec g = input;
    for (const auto& e : arm.elements)
        if (const auto* r = std::get_if<FourierRelay>(&e))
            g = GridSpec(g.n, fourier_output_pitch(g, wavelength, relay_matrix(*r)));
    return g;
}

ComplexField arm_adjoint(const ComplexField& output_field, const DetectionArm& arm, const GridSpec& input) {
    arm.validate();
    // Input grid of every element, walking forward.
    std::vector<GridSpec> grids;
    GridSpec g = input;
    for (const auto& e : arm.elements) {
        grids.push_back(g);
        if (const auto* r = std::get_if<FourierRelay>(&e))
            g = GridSpec(g.n, fourier_output_pitch(g, output_field.wavelength(), relay_matrix(*r)));
    }
    if (!same_grid(g, output_field.grid())) throw GeometryError("arm_adjoint: field is not on the arm output grid");
    ComplexField f = output_field;
    for (std::size_t k = arm.elements.size(); k-- > 0;) {
        const auto& e = arm.elements[k];
        f = std::visit(overloaded{
                           [&](const Propagate& p) { return propagate_adjoint(f, p.distance); },
                           [&](const Lens& l) {
                               return std::isinf(l.focal_length) ? f : apply_lens(f, -l.focal_length);
                           },
                           [&](const Aperture& a) { return apply_aperture(f, a.spec); },
                           [&](const FourierRelay& r) {
                               return relay_fourier_adjoint(f, relay_matrix(r), grids[k].pitch);
                           },
                       },
                       e);
    }
    return f;
}

std::vector<ComplexField> collection_modes(const DetectionArm& arm, const GridSpec& output, double wavelength) {
    std::vector<ComplexField> modes;
    std::visit(overloaded{
                   [&](const SingleModeFiber& sm) {
                       modes.push_back(gaussian_beam(output, wavelength, sm.mode_field_radius, sm.x0, sm.y0));
                   },
                   [&](const MultimodeFiber& mm) {
                       if (mm.mode_count == 0) throw ParameterError("multimode fiber needs at least one mode");
                       const double w = mm.basis_waist(wavelength);
                       for (int order = 0; modes.size() < mm.mode_count; ++order) {
                           for (int nx = order; nx >= 0 && modes.size() < mm.mode_count; --nx) {
                               const int ny = order - nx;
                               ComplexField f(output, wavelength);
                               for (std::size_t iy = 0; iy < output.n; ++iy) {
                                   const double y = output.coord(iy);
                                   const double hy = hermite(ny, std::sqrt(2.0) * y / w);
                                   for (std::size_t ix = 0; ix < output.n; ++ix) {
                                       const double x = output.coord(ix);
                                       f.at(ix, iy) = hermite(nx, std::sqrt(2.0) * x / w) * hy *
                                                      std::exp(-(x * x + y * y) / (w * w));
                                   }
                               }
                               normalize(f);
                               modes.push_back(std::move(f));
                           }
                       }
                   },
               },
               arm.collection);
    return modes;
}

std::vector<ComplexField> back_propagated_modes(const DetectionArm& arm, const GridSpec& input, double wavelength) {
    const GridSpec out = arm_output_grid(arm, input, wavelength);
    std::vector<ComplexField> modes = collection_modes(arm, out, wavelength);
    for (auto& m : modes) m = arm_adjoint(m, arm, input);
    return modes;
}

std::vector<CrystalSlice> crystal_slices(const CrystalSpec& crystal) {
    crystal.validate();
    const auto m = static_cast<Eigen::Index>(crystal.slices);
    // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 1; i < m; ++i) {
        const auto d = static_cast<double>(i);
        j(i, i - 1) = j(i - 1, i) = d / std::sqrt(4.0 * d * d - 1.0);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    const double kp = 2.0 * kPi / crystal.pump_wavelength, ks = 2.0 * kPi / crystal.degenerate_wavelength;
    const double constant = kp - 2.0 * ks + crystal.collinear_mismatch_offset;
    std::vector<CrystalSlice> out;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = es.eigenvectors()(0, i);
        const double z = 0.5 * crystal.length * es.eigenvalues()(i);
        out.push_back({z, std::polar(v * v, constant * z)});  // weights sum to 1
    }
    return out;
}

ComplexField slice_shift(const ComplexField& field, double z) {
    ComplexField out = field;
    const auto& g = field.grid();
    const double k = field.wavenumber();
    auto data = out.data();
    fft::centered_dft2(data, g.n, fft::Direction::Forward);
    for (std::size_t iy = 0; iy < g.n; ++iy) {
        const double qy = 2.0 * kPi * g.freq(iy);
        for (std::size_t ix = 0; ix < g.n; ++ix) {
            const double qx = 2.0 * kPi * g.freq(ix);
            const double q2 = qx * qx + qy * qy;
            if (q2 >= k * k) throw DomainError("transverse momentum exceeds the wavenumber (evanescent component)");
            // kz - k without cancellation
            const double dkz = -q2 / (std::sqrt(k * k - q2) + k);
            out.at(ix, iy) *= std::polar(1.0, dkz * z);
        }
    }
    fft::centered_dft2(data, g.n, fft::Direction::Inverse);
    return out;
}

BiphotonKernel build_kernel(const ComplexField& pump, const CrystalSpec& crystal, PhaseMatching mode, double gain) {
    crystal.validate();
    const auto& g = pump.grid();
    if (g.n > kOracleMaxGrid)
        throw BudgetError("biphoton kernel limited to " + std::to_string(kOracleMaxGrid) + " samples per axis, got " +
                          std::to_string(g.n));
    const std::size_t n = g.n, n2 = n * n;
    // Pump power outside the central half of the band would wrap into the sum.
    std::vector<cplx> spectrum(pump.data().begin(), pump.data().end());
    fft::centered_dft2(spectrum, n, fft::Direction::Forward);
    double total = 0.0, edge = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double p = std::norm(spectrum[iy * n + ix]);
            total += p;
            const auto off = [&](std::size_t k) { return std::abs(static_cast<long>(k) - static_cast<long>(n / 2)); };
            if (off(ix) >= static_cast<long>(n / 2) - 1 || off(iy) >= static_cast<long>(n / 2) - 1) edge += p;
        }
    if (total > 0.0 && edge > 1e-6 * total)
        throw SamplingError("pump angular spectrum reaches the edge of the q grid; refine the crystal-plane pitch");

    BiphotonKernel k;
    k.crystal_grid = g;
    k.nq = n;
    k.dq = 2.0 * kPi / g.extent();
    k.gain = gain;
    k.signal_wavelength = crystal.degenerate_wavelength;
    k.amplitude.assign(n2 * n2, cplx{});
    const long c = static_cast<long>(n / 2);
    const auto nl = static_cast<long>(n);
    for (std::size_t s = 0; s < n2; ++s) {
        const long sx = static_cast<long>(s % n) - c, sy = static_cast<long>(s / n) - c;
        for (std::size_t i = 0; i < n2; ++i) {
            const long ix = static_cast<long>(i % n) - c, iy = static_cast<long>(i / n) - c;
            const long px = ((sx + ix + c) % nl + nl) % nl, py = ((sy + iy + c) % nl + nl) % nl;
            cplx a = gain * spectrum[static_cast<std::size_t>(py * nl + px)];
            if (mode == PhaseMatching::SincFilter) {
                const Vec2 qs{static_cast<double>(sx) * k.dq, static_cast<double>(sy) * k.dq};
                const Vec2 qi{static_cast<double>(ix) * k.dq, static_cast<double>(iy) * k.dq};
                a *= sinc(0.5 * crystal.length * phase_mismatch(qs, qi, crystal));
            }
            k.amplitude[s * n2 + i] = a;
        }
    }
    return k;
}

CoincidenceEstimate coincidence_rate_oracle(const BiphotonKernel& kernel, const DetectionArm& arm_s,
                                            const DetectionArm& arm_i, bool parallel) {
    const auto& g = kernel.crystal_grid;
    if (g.n > kOracleMaxGrid) throw BudgetError("oracle grid too large");
    const std::size_t n = g.n, n2 = n * n;
    if (kernel.amplitude.size() != n2 * n2) throw ParameterError("kernel amplitude has the wrong size");

    auto spectra = [&](const DetectionArm& arm) {
        auto modes = back_propagated_modes(arm, g, kernel.signal_wavelength);
        std::vector<std::vector<cplx>> out;
        for (auto& m : modes) {
            std::vector<cplx> v(m.data().begin(), m.data().end());
            fft::centered_dft2(v, n, fft::Direction::Forward);
            out.push_back(std::move(v));
        }
        return out;
    };
    const auto sig = spectra(arm_s);
    const auto idl = spectra(arm_i);

    const double scale = g.pitch * g.pitch / static_cast<double>(n);
    double rate = 0.0;
    std::vector<cplx> t(n2);
    for (const auto& mi : idl) {
        if (parallel)
            kernels::parallel::matvec_conj(kernel.amplitude, mi, t);
        else
            kernels::serial::matvec_conj(kernel.amplitude, mi, t);
        for (const auto& ms : sig) {
            cplx amp{0.0, 0.0};
            for (std::size_t s = 0; s < n2; ++s) amp += t[s] * std::conj(ms[s]);
            rate += std::norm(amp * scale);
        }
    }
    return {rate, "oracle", n, g.pitch};
}

ComplexField advanced_wave(const ComplexField& pump, const ComplexField& idler_mode, double signal_wavelength) {
    if (!same_grid(pump.grid(), idler_mode.grid())) throw GeometryError("pump and idler mode grids differ");
    ComplexField out(pump.grid(), signal_wavelength);
    auto o = out.data();
    const auto p = pump.data();
    const auto m = idler_mode.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = p[i] * std::conj(m[i]);
    return out;
}

CoincidenceEstimate coincidence_rate_klyshko(const ComplexField& pump, const CrystalSpec& crystal,
                                             const DetectionArm& arm_s, const DetectionArm& arm_i,
                                             PhaseMatching mode, double gain) {
    crystal.validate();
    const double lambda = crystal.degenerate_wavelength;
    const auto& g = pump.grid();
    auto idler = back_propagated_modes(arm_i, g, lambda);
    const GridSpec out = arm_output_grid(arm_s, g, lambda);
    const auto signal = collection_modes(arm_s, out, lambda);
    double rate = 0.0;
    for (const auto& bi : idler) {
        const ComplexField at_detector = arm_transfer(emitted_signal(pump, bi, crystal, mode), arm_s);
        for (const auto& ms : signal) rate += std::norm(gain * inner(ms, at_detector));
    }
    return {rate, "klyshko", g.n, g.pitch};
}

ComplexField emitted_signal(const ComplexField& pump, const ComplexField& idler_mode, const CrystalSpec& crystal,
                            PhaseMatching mode) {
    const double lambda = crystal.degenerate_wavelength;
    if (mode == PhaseMatching::Thin) return advanced_wave(pump, idler_mode, lambda);
    // Pump and idler mode forward to slice z; the emitted signal back from z
    // to the reference plane.
    ComplexField acc(pump.grid(), lambda);
    for (const auto& s : crystal_slices(crystal)) {
        const ComplexField a =
            slice_shift(advanced_wave(slice_shift(pump, s.z), slice_shift(idler_mode, s.z), lambda), -s.z);
        auto ad = acc.data();
        const auto sd = a.data();
        for (std::size_t k = 0; k < ad.size(); ++k) ad[k] += s.weight * sd[k];
    }
    return acc;
}

} // namespace aspdc
