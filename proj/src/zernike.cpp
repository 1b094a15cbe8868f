#include "aspdc/zernike.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace aspdc {
namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double radial(int n, int am, double rho) {
    double sum = 0.0;
    for (int k = 0; k <= (n - am) / 2; ++k) {
        const double c = (k % 2 ? -1.0 : 1.0) * factorial(n - k) /
                         (factorial(k) * factorial((n + am) / 2 - k) * factorial((n - am) / 2 - k));
        sum += c * std::pow(rho, n - 2 * k);
    }
    return sum;
}

std::vector<std::pair<int, int>> terms_up_to(int max_order) {
    std::vector<std::pair<int, int>> out;
    for (int n = 0; n <= max_order; ++n)
        for (int m = -n; m <= n; m += 2) out.emplace_back(n, m);
    return out;
}

} // namespace

bool zernike_index_valid(int n, int m) {
    return n >= 0 && std::abs(m) <= n && (n - std::abs(m)) % 2 == 0;
}

double zernike_eval(int n, int m, double rho, double theta) {
    if (!zernike_index_valid(n, m))
        throw IndexError("invalid Zernike index (" + std::to_string(n) + ", " + std::to_string(m) + ")");
    if (rho < 0.0 || rho > 1.0 + 1e-12) throw DomainError("Zernike radius must lie in [0, 1]");
    const int am = std::abs(m);
    const double norm = m == 0 ? std::sqrt(n + 1.0) : std::sqrt(2.0 * (n + 1.0));
    const double r = radial(n, am, rho);
    if (m > 0) return norm * r * std::cos(am * theta);
    if (m < 0) return norm * r * std::sin(am * theta);
    return norm * r;
}

void ZernikeSpectrum::set(int n, int m, double value_um) {
    if (!zernike_index_valid(n, m))
        throw IndexError("invalid Zernike index (" + std::to_string(n) + ", " + std::to_string(m) + ")");
    coefficients[{n, m}] = value_um;
}

double ZernikeSpectrum::get(int n, int m) const {
    const auto it = coefficients.find({n, m});
    return it == coefficients.end() ? 0.0 : it->second;
}

double ZernikeSpectrum::rms() const {
    double s = 0.0;
    for (const auto& [idx, v] : coefficients)
        if (idx.first > 0) s += v * v;
    return std::sqrt(s);
}

RealMap zernike_synthesize(const ZernikeSpectrum& spectrum, const GridSpec& grid) {
    const double radius = spectrum.normalization_radius;
    if (!(radius > 0.0)) throw GeometryError("normalization radius must be positive");
    if (radius > 0.5 * grid.extent() * (1.0 + 1e-12))
        throw GeometryError("normalization radius exceeds half the grid extent");
    RealMap out(grid);
    for (std::size_t iy = 0; iy < grid.n; ++iy) {
        const double y = grid.coord(iy);
        for (std::size_t ix = 0; ix < grid.n; ++ix) {
            const double x = grid.coord(ix);
            const double rho = std::hypot(x, y) / radius;
            if (rho > 1.0) continue;
            const double theta = std::atan2(y, x);
            double v = 0.0;
            for (const auto& [idx, c] : spectrum.coefficients) v += c * zernike_eval(idx.first, idx.second, rho, theta);
            out.at(ix, iy) = v;
        }
    }
    return out;
}

ZernikeSpectrum zernike_decompose(const RealMap& surface, double radius, int max_order) {
    if (max_order < 0) throw ParameterError("max_order must be >= 0");
    if (!(radius > 0.0)) throw GeometryError("decomposition radius must be positive");
    const auto& g = surface.grid;
    const auto terms = terms_up_to(max_order);
    std::vector<std::size_t> inside;
    for (std::size_t iy = 0; iy < g.n; ++iy)
        for (std::size_t ix = 0; ix < g.n; ++ix)
            if (std::hypot(g.coord(ix), g.coord(iy)) <= radius) inside.push_back(iy * g.n + ix);
    if (inside.size() < 100 || inside.size() < terms.size())
        throw UnderdeterminedError("only " + std::to_string(inside.size()) +
                                   " samples inside the decomposition radius (need >= 100)");

    Eigen::MatrixXd basis(static_cast<Eigen::Index>(inside.size()), static_cast<Eigen::Index>(terms.size()));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(inside.size()));
    for (std::size_t s = 0; s < inside.size(); ++s) {
        const std::size_t ix = inside[s] % g.n, iy = inside[s] / g.n;
        const double x = g.coord(ix), y = g.coord(iy);
        const double rho = std::min(std::hypot(x, y) / radius, 1.0);
        const double theta = std::atan2(y, x);
        for (std::size_t t = 0; t < terms.size(); ++t)
            basis(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
                zernike_eval(terms[t].first, terms[t].second, rho, theta);
        rhs(static_cast<Eigen::Index>(s)) = surface.values[inside[s]];
    }
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(rhs);

    ZernikeSpectrum out;
    out.normalization_radius = radius;
    for (std::size_t t = 0; t < terms.size(); ++t)
        out.coefficients[terms[t]] = coef(static_cast<Eigen::Index>(t));
    return out;
}

nlohmann::ordered_json to_json(const ZernikeSpectrum& spectrum) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [idx, v] : spectrum.coefficients)
        out[std::to_string(idx.first) + "," + std::to_string(idx.second)] = v;
    return out;
}

ZernikeSpectrum zernike_from_json(const nlohmann::ordered_json& j, double radius) {
    if (!j.is_object()) throw ParameterError("Zernike spectrum JSON must be an object");
    ZernikeSpectrum out;
    out.normalization_radius = radius;
    for (const auto& [key, value] : j.items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) throw ParameterError("Zernike key must look like \"n,m\": " + key);
        const int n = std::stoi(key.substr(0, comma));
        const int m = std::stoi(key.substr(comma + 1));
        out.set(n, m, value.get<double>());
    }
    return out;
}

} // namespace aspdc
