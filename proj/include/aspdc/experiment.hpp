#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aspdc/aco.hpp"
#include "aspdc/field.hpp"
#include "aspdc/mirror.hpp"
#include "aspdc/spdc.hpp"
#include "aspdc/zernike.hpp"

namespace aspdc {

/// Malformed scenario/bench configuration; the message names the offending field.
class ConfigError : public Error {
    using Error::Error;
};

struct FiberConfig {
    enum class Kind { Multimode, SingleMode } kind = Kind::Multimode;
    SingleModeFiber single_mode{};
    MultimodeFiber multimode{};

    [[nodiscard]] CollectionMode collection() const;
};

struct BenchConfig {
    // sampling
    std::size_t grid_n = 256;
    double crystal_pitch = 2e-6;

    // pump and expander
    double pump_wavelength = 404e-9;
    double pump_waist = 2.5e-3;
    double f_d = -0.250;
    double f_c = 0.500;
    double expander_separation = 0.250;

    // mirror
    InfluenceModel influence{};
    double active_radius = 5.5e-3;
    double full_aperture_radius = 9.5e-3;
    double footprint_radius = 5e-3;  ///< Zernike reports use this radius at the mirror
    ZernikeSpectrum bench_aberration{{}, 9.5e-3};  ///< static wavefront error at the mirror plane, micrometers

    // focusing and crystal
    double f_f = 0.287;
    CrystalSpec crystal{};
    PhaseMatching phase_matching = PhaseMatching::Thin;

    // detection
    double f_ad = 0.075;
    double signal_defocus = 0.0;  ///< > 0: crystal inside the signal collimator's focal length
    double idler_distance = 0.5;
    double pinhole_diameter = 2e-3;
    double pinhole1_distance = 0.2;
    double pinhole_spacing = 1.7;
    double signal_fiber_distance = 2.0;
    bool pinholes = true;
    double probe_offset_x = 0.0;  ///< transverse offset of the idler fiber
    FiberConfig signal_fiber{};
    FiberConfig idler_fiber{};

    // counting
    double exposure = 1.0;
    double verify_exposure = 60.0;
    double rate_scale = 500.0;
    double spot_plane = 1.5;
    bool spot_through_pinholes = false;  ///< camera images are taken with the pinholes open

    void validate() const;
};

BenchConfig bench_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const BenchConfig& b);

struct MeasurementRecord {
    MirrorState state;
    double true_rate = 0.0;  ///< counts per second
    long long counts = 0;
    double exposure = 0.0;
    double timestamp = 0.0;  ///< simulated seconds since the start of the run
};

/// The virtual bench with every mirror-independent quantity precomputed.
class Bench {
public:
    explicit Bench(BenchConfig config);

    [[nodiscard]] const BenchConfig& config() const { return config_; }
    [[nodiscard]] const ActuatorLayout& layout() const { return layout_; }
    [[nodiscard]] GridSpec crystal_grid() const { return {config_.grid_n, config_.crystal_pitch}; }
    [[nodiscard]] GridSpec mirror_grid() const { return mirror_grid_; }
    [[nodiscard]] MirrorState flat_state() const { return MirrorState(config_.influence.bias_command); }

    [[nodiscard]] const DetectionArm& signal_arm() const { return signal_arm_; }
    [[nodiscard]] const DetectionArm& idler_arm() const { return idler_arm_; }
    /// Signal arm truncated at `distance` from the crystal; apertures optional.
    [[nodiscard]] DetectionArm signal_arm_to(double distance, bool apertures = true) const;

    /// Pump after expander, mirror, reverse expander and the focusing lens.
    [[nodiscard]] ComplexField pump_at_crystal(const MirrorState& state) const;
    [[nodiscard]] ComplexField pump_at_mirror() const { return pump_at_mirror_; }

    /// Unnormalized coincidence rate via precomputed back-propagated modes.
    [[nodiscard]] double relative_rate(const MirrorState& state) const;
    [[nodiscard]] double relative_rate(const ComplexField& pump_at_crystal) const;
    /// Same quantity through coincidence_rate_klyshko (slow route).
    [[nodiscard]] double klyshko_rate(const MirrorState& state) const;
    [[nodiscard]] double reference_rate() const { return reference_rate_; }

    /// rate_scale * relative_rate / reference_rate (counts per second).
    [[nodiscard]] double rate(const MirrorState& state) const;

    MeasurementRecord measure(const MirrorState& state, std::mt19937_64& rng, double exposure,
                              double timestamp = 0.0) const;

    /// Signal-arm advanced-wave intensity at `distance` from the crystal, summed over idler modes.
    [[nodiscard]] RealMap spot_image(const MirrorState& state, double distance) const;

    [[nodiscard]] ZernikeSpectrum mirror_zernike(const MirrorState& state) const;

    [[nodiscard]] MirrorState state_from_levels(const aco::Candidate& c, std::size_t n_levels) const;

private:
    BenchConfig config_;
    ActuatorLayout layout_;
    GridSpec mirror_grid_;
    ComplexField pump_at_mirror_;
    DetectionArm signal_arm_;
    DetectionArm idler_arm_;
    std::vector<ComplexField> idler_modes_;  ///< back-propagated idler modes at the crystal
    std::vector<std::vector<cplx>> overlap_;  ///< signal mode x idler mode products, windowed
    std::size_t win_lo_ = 0, win_hi_ = 0;
    double reference_rate_ = 0.0;
};

struct ScenarioConfig {
    std::string name = "multimode_pinholes";
    BenchConfig bench{};
    aco::AcoConfig aco{};
    std::uint64_t seed = 1;
};

/// Built-in scenario presets; `name` selects the detection geometry.
ScenarioConfig scenario_preset(const std::string& name);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ScenarioConfig& s);

struct CountSummary {
    long long counts = 0;
    double exposure = 0.0;
    double uncertainty = 0.0;  ///< sqrt(counts)
    double true_rate = 0.0;
};

struct ScenarioReport {
    ScenarioConfig config;
    aco::RunLog log;
    MirrorState best_state;
    CountSummary before, after;
    double gain_percent = 0.0;
    RealMap spot_before, spot_after;
    double d4s_before = 0.0, d4s_after = 0.0;
    ZernikeSpectrum zernike_before, zernike_after;
    std::size_t clamped_commands = 0;
    std::vector<nlohmann::ordered_json> estimates;
};

ScenarioReport run_scenario(const ScenarioConfig& config);

nlohmann::ordered_json report_json(const ScenarioReport& report);
void write_outputs(const ScenarioReport& report, const std::filesystem::path& out_dir);

/// Derived RNG seed for stream `stream` of base seed `seed` (splitmix64).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace aspdc
