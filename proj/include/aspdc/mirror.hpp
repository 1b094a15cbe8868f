#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "aspdc/field.hpp"
#include "aspdc/zernike.hpp"

namespace aspdc {

inline constexpr std::size_t kActuatorCount = 32;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct ActuatorLayout {
    std::array<Point2, kActuatorCount> positions{};
    double active_radius = 5.5e-3;
    double full_aperture_radius = 9.5e-3;
    double spacing = 0.0;  ///< nearest-neighbour distance of the lattice
};

/// The 32 hexagonal-lattice sites nearest the centre that fit the active
/// region, sorted by (radius, angle in [0, 2 pi)). Bit-reproducible.
ActuatorLayout layout_honeycomb(double active_radius = 5.5e-3, double full_aperture_radius = 9.5e-3);

/// Normalized actuator commands. Out-of-range inputs are clamped and counted.
class MirrorState {
public:
    MirrorState();
    explicit MirrorState(double uniform);
    explicit MirrorState(std::span<const double> commands);

    [[nodiscard]] const std::array<double, kActuatorCount>& commands() const { return commands_; }
    [[nodiscard]] double operator[](std::size_t i) const { return commands_[i]; }
    void set(std::size_t i, double value);
    [[nodiscard]] std::size_t clamped_count() const { return clamped_; }

    friend bool operator==(const MirrorState& a, const MirrorState& b) { return a.commands_ == b.commands_; }

private:
    std::array<double, kActuatorCount> commands_{};
    std::size_t clamped_ = 0;
};

struct InfluenceModel {
    double stroke_max_um = 0.5;
    double sigma = 0.0;  ///< meters; <= 0 means 0.8 x actuator spacing
    double bias_command = 0.5;

    [[nodiscard]] double sigma_for(const ActuatorLayout& layout) const;
    void validate() const;
};

/// Deviation (micrometers) of the membrane from the biased operating point:
/// stroke * sum_i (c_i^2 - bias^2) * exp(-|r - p_i|^2 / (2 sigma^2)).
RealMap mirror_surface(const MirrorState& state, const InfluenceModel& model,
                       const ActuatorLayout& layout, const GridSpec& grid);

/// Reflection off a surface map in micrometers: phase 2 * k * s.
ComplexField reflect(const ComplexField& field, const RealMap& surface_um);

/// Zernike content of the mirror surface over the pump footprint.
ZernikeSpectrum command_to_zernike(const MirrorState& state, const InfluenceModel& model,
                                   const ActuatorLayout& layout, double footprint_radius,
                                   int max_order = 4, std::size_t samples = 256);

nlohmann::json to_json(const MirrorState& state);
MirrorState mirror_state_from_json(const nlohmann::json& j);

} // namespace aspdc
