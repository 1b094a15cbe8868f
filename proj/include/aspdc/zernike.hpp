#pragma once

#include <map>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "aspdc/field.hpp"

namespace aspdc {

/// Zernike polynomials with (n, m) double indexing, normalized to unit RMS over
/// the unit disk. m > 0 carries cos(m theta), m < 0 carries sin(|m| theta).
bool zernike_index_valid(int n, int m);
double zernike_eval(int n, int m, double rho, double theta);

struct ZernikeSpectrum {
    /// (n, m) -> coefficient in micrometers. std::map orders by n then m.
    std::map<std::pair<int, int>, double> coefficients;
    double normalization_radius = 1.0;

    void set(int n, int m, double value_um);
    [[nodiscard]] double get(int n, int m) const;
    /// sqrt of the sum of squared non-piston coefficients.
    [[nodiscard]] double rms() const;
};

/// Surface map (micrometers) of the spectrum; zero outside the normalization radius.
RealMap zernike_synthesize(const ZernikeSpectrum& spectrum, const GridSpec& grid);

/// Least-squares projection onto every valid term with n <= max_order.
ZernikeSpectrum zernike_decompose(const RealMap& surface, double radius, int max_order);

/// Object keyed "n,m", in (n ascending, m ascending) order.
nlohmann::ordered_json to_json(const ZernikeSpectrum& spectrum);
ZernikeSpectrum zernike_from_json(const nlohmann::ordered_json& j, double radius);

} // namespace aspdc
