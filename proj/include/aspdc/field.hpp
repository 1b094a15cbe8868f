#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "aspdc/errors.hpp"

namespace aspdc {

using cplx = std::complex<double>;

/// Square sampling grid. Sample (ix, iy) sits at ((ix - n/2) * pitch, (iy - n/2) * pitch)
/// so the physical origin is the sample at index n/2 on both axes.
struct GridSpec {
    std::size_t n = 256;
    double pitch = 1e-5;

    GridSpec() = default;
    GridSpec(std::size_t samples, double pitch_m);

    [[nodiscard]] double extent() const { return static_cast<double>(n) * pitch; }
    [[nodiscard]] double coord(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(n / 2)) * pitch;
    }
    /// Spatial frequency (cycles/m) of centered DFT bin k.
    [[nodiscard]] double freq(std::size_t k) const {
        return (static_cast<double>(k) - static_cast<double>(n / 2)) / extent();
    }
    [[nodiscard]] std::size_t size() const { return n * n; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// True when the two grids agree to floating tolerance.
bool same_grid(const GridSpec& a, const GridSpec& b);

/// Real n x n map on a grid, row-major (iy major, ix minor). Used for surfaces
/// (micrometers) and intensity images.
struct RealMap {
    GridSpec grid;
    std::vector<double> values;

    RealMap() = default;
    explicit RealMap(GridSpec g) : grid(g), values(g.size(), 0.0) {}

    double& at(std::size_t ix, std::size_t iy) { return values[iy * grid.n + ix]; }
    [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * grid.n + ix]; }
};

/// Sampled scalar optical amplitude. The amplitude is dimensionless and relative;
/// power is sum |a|^2 * pitch^2.
class ComplexField {
public:
    ComplexField() = default;
    ComplexField(GridSpec grid, double wavelength);

    [[nodiscard]] const GridSpec& grid() const { return grid_; }
    [[nodiscard]] double wavelength() const { return wavelength_; }
    [[nodiscard]] double wavenumber() const;
    [[nodiscard]] std::size_t n() const { return grid_.n; }

    cplx& at(std::size_t ix, std::size_t iy) { return data_[iy * grid_.n + ix]; }
    [[nodiscard]] const cplx& at(std::size_t ix, std::size_t iy) const { return data_[iy * grid_.n + ix]; }

    std::span<cplx> data() { return data_; }
    [[nodiscard]] std::span<const cplx> data() const { return data_; }

    /// Replaces the grid pitch while keeping the samples; used by magnifying relays.
    void set_pitch(double pitch);

    [[nodiscard]] double power() const;
    [[nodiscard]] RealMap intensity() const;

private:
    GridSpec grid_;
    double wavelength_ = 0.0;
    std::vector<cplx> data_;
};

/// Weighted inner product <a, b> = sum conj(a) b pitch^2 on a shared grid.
cplx inner(const ComplexField& a, const ComplexField& b);

/// Gaussian TEM00 at its waist (flat phase), normalized to unit power.
ComplexField gaussian_beam(GridSpec grid, double wavelength, double waist,
                           double x0 = 0.0, double y0 = 0.0);

/// Uniform field of unit amplitude.
ComplexField plane_wave(GridSpec grid, double wavelength);

} // namespace aspdc
