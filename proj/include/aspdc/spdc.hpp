#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "aspdc/field.hpp"
#include "aspdc/optics.hpp"

namespace aspdc {

using Vec2 = std::array<double, 2>;

struct CrystalSpec {
    double length = 2e-3;
    double pump_wavelength = 404e-9;
    double degenerate_wavelength = 808e-9;
    double collinear_mismatch_offset = 0.0;  ///< 1/m, added to the raw mismatch
    std::size_t slices = 32;  ///< Gauss-Legendre nodes along the crystal for finite-length estimates

    void validate() const;
};

enum class PhaseMatching {
    Thin,        ///< sinc == 1
    SincFilter,  ///< finite crystal length
};

/// k_pz - k_sz - k_iz + offset for transverse momenta q_s, q_i (rad/m).
double phase_mismatch(Vec2 q_s, Vec2 q_i, const CrystalSpec& crystal);

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

/// sinc(L dk / 2) = (1/L) integral of exp(i dk z) over the crystal. Each slice
/// splits exp(i dk z) into pump, signal and idler propagators; the weight
/// carries the q-independent part exp(i (kp - 2 ks + offset) z).
struct CrystalSlice {
    double z = 0.0;
    cplx weight{1.0, 0.0};
};
std::vector<CrystalSlice> crystal_slices(const CrystalSpec& crystal);

/// Angular-spectrum phase exp(i (kz - k) z) on the field's own grid, any sign of z.
/// No aliasing guard: used on the discrete q lattice the kernel is defined on.
ComplexField slice_shift(const ComplexField& field, double z);

// ---- detection arms ----------------------------------------------------------

struct Propagate { double distance = 0.0; };
struct Lens { double focal_length = kFlatElement; };
struct Aperture { ApertureSpec spec; };
/// Lens at `front_distance` from the input plane; output is its back focal plane.
struct FourierRelay {
    double front_distance = 0.0;
    double focal_length = 0.0;
};

using ArmElement = std::variant<Propagate, Lens, Aperture, FourierRelay>;

/// Gaussian fundamental mode, defined at the arm output plane.
struct SingleModeFiber {
    double mode_field_radius = 1e-3;
    double x0 = 0.0, y0 = 0.0;
};

/// Bucket detector behind a coupling lens. Modelled by the lowest Hermite-Gauss
/// modes (all n + m <= 3 for the default 10) whose waist matches the bucket's
/// position/angle acceptance.
struct MultimodeFiber {
    double core_radius = 25e-6;
    double numerical_aperture = 0.22;
    double coupler_focal_length = 6e-3;
    std::size_t mode_count = 10;

    [[nodiscard]] double basis_waist(double wavelength) const;
};

using CollectionMode = std::variant<SingleModeFiber, MultimodeFiber>;

struct DetectionArm {
    std::vector<ArmElement> elements;
    CollectionMode collection = SingleModeFiber{};

    void validate() const;
};

/// Left-to-right composition of the arm elements.
ComplexField arm_transfer(const ComplexField& field, const DetectionArm& arm);

/// Grid at the arm output for a given input grid.
GridSpec arm_output_grid(const DetectionArm& arm, const GridSpec& input, double wavelength);

/// Adjoint of arm_transfer: maps an output-plane field back to the input grid.
ComplexField arm_adjoint(const ComplexField& output_field, const DetectionArm& arm, const GridSpec& input);

/// Collection modes sampled on the arm output grid, each normalized to unit power.
std::vector<ComplexField> collection_modes(const DetectionArm& arm, const GridSpec& output, double wavelength);

/// Collection modes carried back to the arm input plane.
std::vector<ComplexField> back_propagated_modes(const DetectionArm& arm, const GridSpec& input, double wavelength);

// ---- biphoton kernel and coincidence rates -------------------------------------

/// Sampled biphoton amplitude on the reciprocal lattice of the crystal-plane grid.
struct BiphotonKernel {
    GridSpec crystal_grid;           ///< position grid the q lattice belongs to
    double dq = 0.0;                 ///< rad/m between lattice points
    std::size_t nq = 0;              ///< points per axis
    std::vector<cplx> amplitude;     ///< (nq^2) x (nq^2), row = q_s, column = q_i
    double gain = 1.0;
    double signal_wavelength = 808e-9;

    [[nodiscard]] const cplx& at(std::size_t s, std::size_t i) const { return amplitude[s * nq * nq + i]; }
    [[nodiscard]] double q_of(std::size_t k) const {
        return (static_cast<double>(k) - static_cast<double>(nq / 2)) * dq;
    }
};

inline constexpr std::size_t kOracleMaxGrid = 32;

BiphotonKernel build_kernel(const ComplexField& pump_at_crystal, const CrystalSpec& crystal,
                            PhaseMatching mode, double gain = 1.0);

struct CoincidenceEstimate {
    double rate = 0.0;
    std::string method;
    std::size_t grid_n = 0;
    double grid_pitch = 0.0;
};

/// Brute-force projection of the 4-D kernel onto every signal/idler mode pair.
CoincidenceEstimate coincidence_rate_oracle(const BiphotonKernel& kernel, const DetectionArm& arm_s,
                                            const DetectionArm& arm_i, bool parallel = true);

/// Advanced-wave estimate: idler mode back to the crystal, times the pump,
/// forward through the signal arm, projected on the signal modes. A finite
/// crystal is summed slice by slice (see crystal_slices).
CoincidenceEstimate coincidence_rate_klyshko(const ComplexField& pump_at_crystal, const CrystalSpec& crystal,
                                             const DetectionArm& arm_s, const DetectionArm& arm_i,
                                             PhaseMatching mode, double gain = 1.0);

/// Pump times the conjugate idler mode at the crystal plane (thin crystal).
ComplexField advanced_wave(const ComplexField& pump_at_crystal, const ComplexField& idler_mode_at_crystal,
                           double signal_wavelength);

/// Signal field at the crystal reference plane heralded by one idler mode:
/// the advanced wave, or its slice sum for a finite crystal.
ComplexField emitted_signal(const ComplexField& pump_at_crystal, const ComplexField& idler_mode_at_crystal,
                            const CrystalSpec& crystal, PhaseMatching mode);

} // namespace aspdc
