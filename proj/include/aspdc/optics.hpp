#pragma once

#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "aspdc/field.hpp"

namespace aspdc {

/// Focal length used for "no lens"; apply_lens treats it as the identity.
inline constexpr double kFlatElement = std::numeric_limits<double>::infinity();

struct ApertureSpec {
    double diameter = 2e-3;
    double offset_x = 0.0;
    double offset_y = 0.0;
};

/// Largest distance the transfer function on `grid` can represent without
/// aliasing at `wavelength`.
double max_alias_free_distance(const GridSpec& grid, double wavelength);

/// Exact scalar angular-spectrum propagation. Throws SamplingError if the
/// transfer function would alias at this distance.
ComplexField propagate(const ComplexField& field, double distance);

/// Adjoint of propagate (backward propagation, conj transfer function).
ComplexField propagate_adjoint(const ComplexField& field, double distance);

/// Thin lens: multiplies by exp(-i pi r^2 / (lambda f)). f = kFlatElement is the identity.
ComplexField apply_lens(const ComplexField& field, double focal_length);

ComplexField apply_aperture(const ComplexField& field, const ApertureSpec& aperture);

// ---- paraxial ray-matrix relays -------------------------------------------

struct Abcd {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    /// this applied after `first`
    [[nodiscard]] Abcd after(const Abcd& first) const;
    static Abcd free_space(double distance) { return {1.0, distance, 0.0, 1.0}; }
    static Abcd thin_lens(double focal_length) { return {1.0, 0.0, -1.0 / focal_length, 1.0}; }
};

/// Exact sampled Collins transform for a system with A != 0, executed as
/// angular-spectrum propagation over B/A, magnification by A and a residual
/// quadratic phase C/A. The output pitch is |A| times the input pitch.
ComplexField relay_fresnel(const ComplexField& field, const Abcd& m);
ComplexField relay_fresnel_adjoint(const ComplexField& field, const Abcd& m);

/// Single-transform Collins integral for a system with B != 0. The output pitch is
/// lambda |B| / (n * input pitch).
ComplexField relay_fourier(const ComplexField& field, const Abcd& m);
ComplexField relay_fourier_adjoint(const ComplexField& field, const Abcd& m, double input_pitch);

/// Output pitch of relay_fourier.
double fourier_output_pitch(const GridSpec& in, double wavelength, const Abcd& m);

// ---- metrology -------------------------------------------------------------

struct BeamWidths {
    double major = 0.0;  ///< D4sigma along the principal axis with larger spread
    double minor = 0.0;
    double angle = 0.0;  ///< orientation of the major axis, radians from +x
    double centroid_x = 0.0;
    double centroid_y = 0.0;
};

BeamWidths beam_widths_d4s(const RealMap& intensity);

/// D4sigma diameter: mean of the two principal-axis D4sigma widths.
double beam_diameter_d4s(const ComplexField& field);
double beam_diameter_d4s(const RealMap& intensity);

} // namespace aspdc
