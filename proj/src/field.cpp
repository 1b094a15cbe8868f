#include "aspdc/field.hpp"

#include <cmath>
#include <numbers>

#include "aspdc/kernels.hpp"

namespace aspdc {

GridSpec::GridSpec(std::size_t samples, double pitch_m) : n(samples), pitch(pitch_m) {
    if (samples < 16 || (samples & (samples - 1)) != 0)
        throw ParameterError("grid size must be a power of two >= 16, got " + std::to_string(samples));
    if (!(pitch_m > 0.0) || !std::isfinite(pitch_m))
        throw ParameterError("grid pitch must be positive");
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
    return a.n == b.n && std::abs(a.pitch - b.pitch) <= 1e-9 * std::max(a.pitch, b.pitch);
}

ComplexField::ComplexField(GridSpec grid, double wavelength)
    : grid_(grid), wavelength_(wavelength), data_(grid.size(), cplx{0.0, 0.0}) {
    if (!(wavelength > 0.0)) throw ParameterError("wavelength must be positive");
}

double ComplexField::wavenumber() const { return 2.0 * std::numbers::pi / wavelength_; }

void ComplexField::set_pitch(double pitch) {
    if (!(pitch > 0.0)) throw ParameterError("grid pitch must be positive");
    grid_.pitch = pitch;
}

double ComplexField::power() const {
    return kernels::parallel::norm2(data_, grid_.n) * grid_.pitch * grid_.pitch;
}

RealMap ComplexField::intensity() const {
    RealMap out(grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.values[i] = std::norm(data_[i]);
    return out;
}

cplx inner(const ComplexField& a, const ComplexField& b) {
    if (!same_grid(a.grid(), b.grid())) throw GeometryError("inner product on mismatched grids");
    return kernels::parallel::inner(a.data(), b.data(), a.n()) * (a.grid().pitch * a.grid().pitch);
}

ComplexField gaussian_beam(GridSpec grid, double wavelength, double waist, double x0, double y0) {
    if (!(waist > 0.0)) throw ParameterError("gaussian waist must be positive");
    ComplexField f(grid, wavelength);
    // Unit power: |a|^2 = 2/(pi w^2) exp(-2 r^2 / w^2)
    const double amp = std::sqrt(2.0 / (std::numbers::pi * waist * waist));
    for (std::size_t iy = 0; iy < grid.n; ++iy) {
        const double y = grid.coord(iy) - y0;
        for (std::size_t ix = 0; ix < grid.n; ++ix) {
            const double x = grid.coord(ix) - x0;
            f.at(ix, iy) = amp * std::exp(-(x * x + y * y) / (waist * waist));
        }
    }
    return f;
}

ComplexField plane_wave(GridSpec grid, double wavelength) {
    ComplexField f(grid, wavelength);
    for (auto& v : f.data()) v = 1.0;
    return f;
}

} // namespace aspdc
