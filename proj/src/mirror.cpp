#include "aspdc/mirror.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aspdc {

ActuatorLayout layout_honeycomb(double active_radius, double full_aperture_radius) {
    if (!(active_radius > 0.0) || full_aperture_radius < active_radius)
        throw ParameterError("invalid mirror radii");
    ActuatorLayout layout;
    layout.active_radius = active_radius;
    layout.full_aperture_radius = full_aperture_radius;
    // Outermost selected shell (3 spacings) sits on the active-region edge.
    const double a = active_radius / 3.0;
    layout.spacing = a;

    struct Site {
        long i, j;
        double r2;  // in units of a^2, exact for the lattice
        double angle;
    };
    std::vector<Site> sites;
    for (long i = -4; i <= 4; ++i) {
        for (long j = -4; j <= 4; ++j) {
            // x = i + j/2, y = j*sqrt(3)/2 ; r^2 = i^2 + i j + j^2
            const long r2 = i * i + i * j + j * j;
            if (r2 > 9) continue;
            double ang = std::atan2(j * std::sqrt(3.0) / 2.0, i + 0.5 * j);
            if (ang < 0.0) ang += 2.0 * std::numbers::pi;
            if (r2 == 0) ang = 0.0;
            sites.push_back({i, j, static_cast<double>(r2), ang});
        }
    }
    std::sort(sites.begin(), sites.end(), [](const Site& s, const Site& t) {
        if (s.r2 != t.r2) return s.r2 < t.r2;
        return s.angle < t.angle;
    });
    for (std::size_t k = 0; k < kActuatorCount; ++k) {
        const auto& s = sites[k];
        layout.positions[k] = {a * (static_cast<double>(s.i) + 0.5 * static_cast<double>(s.j)),
                               a * static_cast<double>(s.j) * std::sqrt(3.0) / 2.0};
    }
    return layout;
}

MirrorState::MirrorState() { commands_.fill(0.5); }

MirrorState::MirrorState(double uniform) {
    for (std::size_t i = 0; i < kActuatorCount; ++i) set(i, uniform);
}

MirrorState::MirrorState(std::span<const double> commands) {
    if (commands.size() != kActuatorCount)
        throw ParameterError("mirror state needs exactly 32 commands, got " + std::to_string(commands.size()));
    for (std::size_t i = 0; i < kActuatorCount; ++i) set(i, commands[i]);
}

void MirrorState::set(std::size_t i, double value) {
    if (i >= kActuatorCount) throw IndexError("actuator index out of range");
    if (std::isnan(value)) throw ParameterError("actuator command is NaN");
    const double c = std::clamp(value, 0.0, 1.0);
    if (c != value) ++clamped_;
    commands_[i] = c;
}

double InfluenceModel::sigma_for(const ActuatorLayout& layout) const {
    return sigma > 0.0 ? sigma : 0.8 * layout.spacing;
}

void InfluenceModel::validate() const {
    if (!(stroke_max_um > 0.0)) throw ParameterError("stroke_max must be positive");
    if (!(bias_command > 0.0 && bias_command < 1.0)) throw ParameterError("bias_command must lie in (0, 1)");
}

RealMap mirror_surface(const MirrorState& state, const InfluenceModel& model,
                       const ActuatorLayout& layout, const GridSpec& grid) {
    model.validate();
    if (0.5 * grid.extent() < layout.active_radius)
        throw GeometryError("grid does not cover the mirror active region");
    RealMap out(grid);
    const double sigma = model.sigma_for(layout);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const double b2 = model.bias_command * model.bias_command;
    std::vector<double> gx(grid.n), gy(grid.n);
    for (std::size_t k = 0; k < kActuatorCount; ++k) {
        const double w = model.stroke_max_um * (state[k] * state[k] - b2);
        if (w == 0.0) continue;
        const auto p = layout.positions[k];
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double dx = grid.coord(i) - p.x;
            const double dy = grid.coord(i) - p.y;
            gx[i] = std::exp(-dx * dx * inv);
            gy[i] = w * std::exp(-dy * dy * inv);
        }
        for (std::size_t iy = 0; iy < grid.n; ++iy) {
            const double fy = gy[iy];
            if (std::abs(fy) < 1e-300) continue;
            double* row = &out.values[iy * grid.n];
            for (std::size_t ix = 0; ix < grid.n; ++ix) row[ix] += fy * gx[ix];
        }
    }
    return out;
}

ComplexField reflect(const ComplexField& field, const RealMap& surface_um) {
    if (!same_grid(field.grid(), surface_um.grid)) throw GeometryError("surface and field grids differ");
    ComplexField out = field;
    const double scale = 2.0 * field.wavenumber() * 1e-6;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double ph = scale * surface_um.values[i];
        data[i] *= cplx(std::cos(ph), std::sin(ph));
    }
    return out;
}

ZernikeSpectrum command_to_zernike(const MirrorState& state, const InfluenceModel& model,
                                   const ActuatorLayout& layout, double footprint_radius,
                                   int max_order, std::size_t samples) {
    const double half = std::max(layout.active_radius, footprint_radius) * 1.05;
    const GridSpec grid(samples, 2.0 * half / static_cast<double>(samples));
    const RealMap s = mirror_surface(state, model, layout, grid);
    return zernike_decompose(s, footprint_radius, max_order);
}

nlohmann::json to_json(const MirrorState& state) {
    nlohmann::json arr = nlohmann::json::array();
    for (double c : state.commands()) arr.push_back(c);
    return arr;
}

MirrorState mirror_state_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParameterError("mirror state must be a JSON array of 32 numbers");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(e.get<double>());
    return MirrorState(std::span<const double>(v));
}

} // namespace aspdc
