#include "aspdc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "aspdc/errors.hpp"
#include "aspdc/io.hpp"
#include "aspdc/kernels.hpp"
#include "aspdc/optics.hpp"

namespace aspdc {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---- config parsing helpers ---------------------------------------------------

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(path + "." + key + ": unknown field");
    }
}

double num(const json& j, const char* key, double def, const std::string& path) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + "." + key + ": not finite");
    return x;
}

bool non_negative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

std::size_t count(const json& j, const char* key, std::size_t def, const std::string& path) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!non_negative_integer(v)) throw ConfigError(path + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

bool flag(const json& j, const char* key, bool def, const std::string& path) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected true or false");
    return v.get<bool>();
}

std::string text(const json& j, const char* key, const std::string& def, const std::string& path) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

const json& sub(const json& j, const char* key) {
    static const json empty = json::object();
    return j.contains(key) ? j.at(key) : empty;
}

FiberConfig fiber_from_json(const json& j, FiberConfig f, const std::string& path) {
    check_keys(j, path, {"type", "mode_field_radius", "x0", "y0", "core_radius", "numerical_aperture",
                         "coupler_focal_length", "mode_count"});
    const std::string type =
        text(j, "type", f.kind == FiberConfig::Kind::Multimode ? "multimode" : "single_mode", path);
    if (type == "multimode") f.kind = FiberConfig::Kind::Multimode;
    else if (type == "single_mode") f.kind = FiberConfig::Kind::SingleMode;
    else throw ConfigError(path + ".type: expected \"multimode\" or \"single_mode\"");
    f.single_mode.mode_field_radius = num(j, "mode_field_radius", f.single_mode.mode_field_radius, path);
    f.single_mode.x0 = num(j, "x0", f.single_mode.x0, path);
    f.single_mode.y0 = num(j, "y0", f.single_mode.y0, path);
    f.multimode.core_radius = num(j, "core_radius", f.multimode.core_radius, path);
    f.multimode.numerical_aperture = num(j, "numerical_aperture", f.multimode.numerical_aperture, path);
    f.multimode.coupler_focal_length = num(j, "coupler_focal_length", f.multimode.coupler_focal_length, path);
    f.multimode.mode_count = count(j, "mode_count", f.multimode.mode_count, path);
    return f;
}

ojson fiber_json(const FiberConfig& f) {
    ojson o;
    if (f.kind == FiberConfig::Kind::Multimode) {
        o["type"] = "multimode";
        o["core_radius"] = f.multimode.core_radius;
        o["numerical_aperture"] = f.multimode.numerical_aperture;
        o["coupler_focal_length"] = f.multimode.coupler_focal_length;
        o["mode_count"] = f.multimode.mode_count;
    } else {
        o["type"] = "single_mode";
        o["mode_field_radius"] = f.single_mode.mode_field_radius;
        o["x0"] = f.single_mode.x0;
        o["y0"] = f.single_mode.y0;
    }
    return o;
}

// Collimator of focal length f with the crystal `front` before it; the output
// plane sits at front + f from the crystal.
double relay_length(const BenchConfig& b) { return b.f_ad - b.signal_defocus + b.f_ad; }

ComplexField mode_product(const ComplexField& a, const ComplexField& b, double wavelength) {
    ComplexField h(a.grid(), wavelength);
    auto hd = h.data();
    const auto ad = a.data();
    const auto bd = b.data();
    for (std::size_t i = 0; i < hd.size(); ++i) hd[i] = ad[i] * bd[i];
    return h;
}

std::vector<cplx> window_copy(const ComplexField& f, std::size_t lo, std::size_t hi) {
    const std::size_t w = hi - lo;
    std::vector<cplx> out(w * w);
    for (std::size_t iy = lo; iy < hi; ++iy)
        for (std::size_t ix = lo; ix < hi; ++ix) out[(iy - lo) * w + (ix - lo)] = f.at(ix, iy);
    return out;
}

} // namespace

CollectionMode FiberConfig::collection() const {
    if (kind == Kind::Multimode) return multimode;
    return single_mode;
}

void BenchConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + ": must be positive");
    };
    (void)GridSpec(grid_n, crystal_pitch);
    positive(pump_wavelength, "pump.wavelength");
    positive(pump_waist, "pump.waist");
    if (!(f_d < 0.0)) throw ConfigError("expander.f_d: must be negative");
    positive(f_c, "expander.f_c");
    positive(expander_separation, "expander.separation");
    influence.validate();
    positive(active_radius, "mirror.active_radius");
    positive(full_aperture_radius, "mirror.full_aperture_radius");
    if (full_aperture_radius < active_radius)
        throw ConfigError("mirror.full_aperture_radius: smaller than the active radius");
    positive(footprint_radius, "mirror.footprint_radius");
    positive(f_f, "f_f");
    crystal.validate();
    positive(f_ad, "collimator.focal_length");
    if (!(signal_defocus < f_ad)) throw ConfigError("collimator.signal_defocus: must be below the focal length");
    positive(idler_distance, "idler_arm.distance");
    positive(pinhole_diameter, "signal_arm.pinhole_diameter");
    positive(pinhole1_distance, "signal_arm.pinhole1_distance");
    positive(pinhole_spacing, "signal_arm.pinhole_spacing");
    positive(signal_fiber_distance, "signal_arm.fiber_distance");
    if (idler_distance < 2.0 * f_ad) throw ConfigError("idler_arm.distance: shorter than the collimator relay");
    if (pinhole1_distance < relay_length(*this))
        throw ConfigError("signal_arm.pinhole1_distance: inside the collimator relay");
    if (pinhole1_distance + pinhole_spacing > signal_fiber_distance)
        throw ConfigError("signal_arm.fiber_distance: before the second pinhole");
    positive(exposure, "exposure");
    positive(verify_exposure, "verify_exposure");
    positive(rate_scale, "rate_scale");
    positive(spot_plane, "spot_plane");
}

BenchConfig bench_from_json(const json& j) {
    BenchConfig b;
    check_keys(j, "bench", {"grid", "pump", "expander", "mirror", "bench_aberration", "f_f", "crystal",
                            "collimator", "idler_arm", "signal_arm", "exposure", "verify_exposure",
                            "rate_scale", "spot_plane", "spot_through_pinholes"});
    const auto& g = sub(j, "grid");
    check_keys(g, "bench.grid", {"n", "crystal_pitch"});
    b.grid_n = count(g, "n", b.grid_n, "bench.grid");
    b.crystal_pitch = num(g, "crystal_pitch", b.crystal_pitch, "bench.grid");

    const auto& p = sub(j, "pump");
    check_keys(p, "bench.pump", {"wavelength", "waist"});
    b.pump_wavelength = num(p, "wavelength", b.pump_wavelength, "bench.pump");
    b.pump_waist = num(p, "waist", b.pump_waist, "bench.pump");

    const auto& e = sub(j, "expander");
    check_keys(e, "bench.expander", {"f_d", "f_c", "separation"});
    b.f_d = num(e, "f_d", b.f_d, "bench.expander");
    b.f_c = num(e, "f_c", b.f_c, "bench.expander");
    b.expander_separation = num(e, "separation", b.expander_separation, "bench.expander");

    const auto& m = sub(j, "mirror");
    check_keys(m, "bench.mirror", {"stroke_max_um", "sigma", "bias_command", "active_radius",
                                   "full_aperture_radius", "footprint_radius"});
    b.influence.stroke_max_um = num(m, "stroke_max_um", b.influence.stroke_max_um, "bench.mirror");
    b.influence.sigma = num(m, "sigma", b.influence.sigma, "bench.mirror");
    b.influence.bias_command = num(m, "bias_command", b.influence.bias_command, "bench.mirror");
    b.active_radius = num(m, "active_radius", b.active_radius, "bench.mirror");
    b.full_aperture_radius = num(m, "full_aperture_radius", b.full_aperture_radius, "bench.mirror");
    b.footprint_radius = num(m, "footprint_radius", b.footprint_radius, "bench.mirror");

    if (j.contains("bench_aberration")) {
        const auto& a = j.at("bench_aberration");
        check_keys(a, "bench.bench_aberration", {"radius", "terms"});
        const double r = num(a, "radius", b.full_aperture_radius, "bench.bench_aberration");
        try {
            b.bench_aberration = zernike_from_json(ojson(sub(a, "terms")), r);
        } catch (const Error& err) {
            throw ConfigError(std::string("bench.bench_aberration.terms: ") + err.what());
        }
    }
    b.bench_aberration.normalization_radius =
        b.bench_aberration.coefficients.empty() ? b.full_aperture_radius : b.bench_aberration.normalization_radius;

    b.f_f = num(j, "f_f", b.f_f, "bench");

    const auto& c = sub(j, "crystal");
    check_keys(c, "bench.crystal", {"length", "pump_wavelength", "degenerate_wavelength", "mismatch_offset",
                                    "phase_matching", "slices"});
    b.crystal.length = num(c, "length", b.crystal.length, "bench.crystal");
    b.crystal.pump_wavelength = num(c, "pump_wavelength", b.pump_wavelength, "bench.crystal");
    b.crystal.degenerate_wavelength =
        num(c, "degenerate_wavelength", 2.0 * b.crystal.pump_wavelength, "bench.crystal");
    b.crystal.collinear_mismatch_offset =
        num(c, "mismatch_offset", b.crystal.collinear_mismatch_offset, "bench.crystal");
    b.crystal.slices = count(c, "slices", b.crystal.slices, "bench.crystal");
    const std::string pm = text(c, "phase_matching", "thin", "bench.crystal");
    if (pm == "thin") b.phase_matching = PhaseMatching::Thin;
    else if (pm == "sinc") b.phase_matching = PhaseMatching::SincFilter;
    else throw ConfigError("bench.crystal.phase_matching: expected \"thin\" or \"sinc\"");

    const auto& col = sub(j, "collimator");
    check_keys(col, "bench.collimator", {"focal_length", "signal_defocus"});
    b.f_ad = num(col, "focal_length", b.f_ad, "bench.collimator");
    b.signal_defocus = num(col, "signal_defocus", b.signal_defocus, "bench.collimator");

    const auto& ia = sub(j, "idler_arm");
    check_keys(ia, "bench.idler_arm", {"distance", "offset_x", "fiber"});
    b.idler_distance = num(ia, "distance", b.idler_distance, "bench.idler_arm");
    b.probe_offset_x = num(ia, "offset_x", b.probe_offset_x, "bench.idler_arm");
    b.idler_fiber = fiber_from_json(sub(ia, "fiber"), b.idler_fiber, "bench.idler_arm.fiber");

    const auto& sa = sub(j, "signal_arm");
    check_keys(sa, "bench.signal_arm", {"pinholes", "pinhole_diameter", "pinhole1_distance", "pinhole_spacing",
                                        "fiber_distance", "fiber"});
    b.pinholes = flag(sa, "pinholes", b.pinholes, "bench.signal_arm");
    b.pinhole_diameter = num(sa, "pinhole_diameter", b.pinhole_diameter, "bench.signal_arm");
    b.pinhole1_distance = num(sa, "pinhole1_distance", b.pinhole1_distance, "bench.signal_arm");
    b.pinhole_spacing = num(sa, "pinhole_spacing", b.pinhole_spacing, "bench.signal_arm");
    b.signal_fiber_distance = num(sa, "fiber_distance", b.signal_fiber_distance, "bench.signal_arm");
    b.signal_fiber = fiber_from_json(sub(sa, "fiber"), b.signal_fiber, "bench.signal_arm.fiber");

    b.exposure = num(j, "exposure", b.exposure, "bench");
    b.verify_exposure = num(j, "verify_exposure", b.verify_exposure, "bench");
    b.rate_scale = num(j, "rate_scale", b.rate_scale, "bench");
    b.spot_plane = num(j, "spot_plane", b.spot_plane, "bench");
    b.spot_through_pinholes = flag(j, "spot_through_pinholes", b.spot_through_pinholes, "bench");
    try {
        b.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(std::string("bench: ") + err.what());
    }
    return b;
}

ojson to_json(const BenchConfig& b) {
    ojson o;
    o["grid"] = {{"n", b.grid_n}, {"crystal_pitch", b.crystal_pitch}};
    o["pump"] = {{"wavelength", b.pump_wavelength}, {"waist", b.pump_waist}};
    o["expander"] = {{"f_d", b.f_d}, {"f_c", b.f_c}, {"separation", b.expander_separation}};
    o["mirror"] = {{"stroke_max_um", b.influence.stroke_max_um},
                   {"sigma", b.influence.sigma},
                   {"bias_command", b.influence.bias_command},
                   {"active_radius", b.active_radius},
                   {"full_aperture_radius", b.full_aperture_radius},
                   {"footprint_radius", b.footprint_radius}};
    o["bench_aberration"] = {{"radius", b.bench_aberration.normalization_radius},
                             {"terms", to_json(b.bench_aberration)}};
    o["f_f"] = b.f_f;
    o["crystal"] = {{"length", b.crystal.length},
                    {"pump_wavelength", b.crystal.pump_wavelength},
                    {"degenerate_wavelength", b.crystal.degenerate_wavelength},
                    {"mismatch_offset", b.crystal.collinear_mismatch_offset},
                    {"phase_matching", b.phase_matching == PhaseMatching::Thin ? "thin" : "sinc"},
                    {"slices", b.crystal.slices}};
    o["collimator"] = {{"focal_length", b.f_ad}, {"signal_defocus", b.signal_defocus}};
    o["idler_arm"] = {{"distance", b.idler_distance}, {"offset_x", b.probe_offset_x},
                      {"fiber", fiber_json(b.idler_fiber)}};
    o["signal_arm"] = {{"pinholes", b.pinholes},
                       {"pinhole_diameter", b.pinhole_diameter},
                       {"pinhole1_distance", b.pinhole1_distance},
                       {"pinhole_spacing", b.pinhole_spacing},
                       {"fiber_distance", b.signal_fiber_distance},
                       {"fiber", fiber_json(b.signal_fiber)}};
    o["exposure"] = b.exposure;
    o["verify_exposure"] = b.verify_exposure;
    o["rate_scale"] = b.rate_scale;
    o["spot_plane"] = b.spot_plane;
    o["spot_through_pinholes"] = b.spot_through_pinholes;
    return o;
}

// ---- bench --------------------------------------------------------------------

Bench::Bench(BenchConfig config)
    : config_(std::move(config)),
      layout_(layout_honeycomb(config_.active_radius, config_.full_aperture_radius)),
      mirror_grid_(config_.grid_n, 1.0),
      pump_at_mirror_(GridSpec(config_.grid_n, 1.0), config_.pump_wavelength) {
    config_.validate();
    const auto& c = config_;
    const std::size_t n = c.grid_n;

    // The focusing lens Fourier-relays the lens-D plane onto the crystal grid.
    const double dx_in = c.pump_wavelength * c.f_f / (static_cast<double>(n) * c.crystal_pitch);
    const GridSpec input(n, dx_in);
    const Abcd forward = Abcd::thin_lens(c.f_c).after(Abcd::free_space(c.expander_separation))
                             .after(Abcd::thin_lens(c.f_d));
    ComplexField pump = gaussian_beam(input, c.pump_wavelength, c.pump_waist);
    pump = relay_fresnel(pump, forward);
    mirror_grid_ = pump.grid();
    if (!config_.bench_aberration.coefficients.empty()) {
        const RealMap w = zernike_synthesize(config_.bench_aberration, mirror_grid_);
        const double k = pump.wavenumber();
        auto d = pump.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= std::polar(1.0, k * w.values[i] * 1e-6);
    }
    pump_at_mirror_ = apply_aperture(pump, {2.0 * c.full_aperture_radius, 0.0, 0.0});

    const double relay = relay_length(c);
    signal_arm_.elements.push_back(FourierRelay{c.f_ad - c.signal_defocus, c.f_ad});
    if (c.pinholes) {
        signal_arm_.elements.push_back(Propagate{c.pinhole1_distance - relay});
        signal_arm_.elements.push_back(Aperture{{c.pinhole_diameter, 0.0, 0.0}});
        signal_arm_.elements.push_back(Propagate{c.pinhole_spacing});
        signal_arm_.elements.push_back(Aperture{{c.pinhole_diameter, 0.0, 0.0}});
        signal_arm_.elements.push_back(
            Propagate{c.signal_fiber_distance - c.pinhole1_distance - c.pinhole_spacing});
    } else {
        signal_arm_.elements.push_back(Propagate{c.signal_fiber_distance - relay});
    }
    signal_arm_.collection = c.signal_fiber.collection();

    idler_arm_.elements = {FourierRelay{c.f_ad, c.f_ad}, Propagate{c.idler_distance - 2.0 * c.f_ad}};
    idler_arm_.collection = c.idler_fiber.collection();
    if (c.probe_offset_x != 0.0) {
        if (auto* sm = std::get_if<SingleModeFiber>(&idler_arm_.collection)) sm->x0 = c.probe_offset_x;
    }

    const GridSpec cg = crystal_grid();
    const double lambda = c.crystal.degenerate_wavelength;
    idler_modes_ = back_propagated_modes(idler_arm_, cg, lambda);
    const auto signal_modes = back_propagated_modes(signal_arm_, cg, lambda);

    // Products of back-propagated modes; the coincidence amplitude is their
    // overlap with the pump. Restrict to the window that carries them.
    std::vector<ComplexField> products;
    if (c.phase_matching == PhaseMatching::Thin) {
        for (const auto& bs : signal_modes)
            for (const auto& bi : idler_modes_) products.push_back(mode_product(bs, bi, c.pump_wavelength));
    } else {
        // Finite crystal: sum over slices, each product carried back from z
        // with the pump propagator so the overlap is taken with the z = 0 pump.
        const auto slices = crystal_slices(c.crystal);
        for (std::size_t s = 0; s < signal_modes.size(); ++s)
            for (std::size_t i = 0; i < idler_modes_.size(); ++i) products.emplace_back(cg, c.pump_wavelength);
        for (const auto& sl : slices) {
            std::vector<ComplexField> si, ii;
            for (const auto& m : signal_modes) si.push_back(slice_shift(m, sl.z));
            for (const auto& m : idler_modes_) ii.push_back(slice_shift(m, sl.z));
            std::size_t k = 0;
            for (const auto& bs : si)
                for (const auto& bi : ii) {
                    const ComplexField h = slice_shift(mode_product(bs, bi, c.pump_wavelength), -sl.z);
                    auto pd = products[k++].data();
                    const auto hd = h.data();
                    for (std::size_t x = 0; x < pd.size(); ++x) pd[x] += std::conj(sl.weight) * hd[x];
                }
        }
    }
    RealMap support(cg);
    for (const auto& h : products) {
        const auto hd = h.data();
        for (std::size_t i = 0; i < hd.size(); ++i) support.values[i] += std::norm(hd[i]);
    }
    const double peak = *std::max_element(support.values.begin(), support.values.end());
    std::size_t lo = n, hi = 0;
    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix)
            if (support.at(ix, iy) > 1e-14 * peak) {
                lo = std::min({lo, ix, iy});
                hi = std::max({hi, ix + 1, iy + 1});
            }
    if (hi <= lo) throw CalibrationError("detection modes vanish at the crystal");
    win_lo_ = lo;
    win_hi_ = hi;
    const double area = cg.pitch * cg.pitch;
    for (auto& h : products) {
        auto w = window_copy(h, lo, hi);
        for (auto& v : w) v *= area;
        overlap_.push_back(std::move(w));
    }

    reference_rate_ = relative_rate(flat_state());
    if (!(reference_rate_ > 0.0) || !std::isfinite(reference_rate_))
        throw CalibrationError("flat-mirror reference rate is zero");
}

DetectionArm Bench::signal_arm_to(double distance, bool apertures) const {
    const auto& c = config_;
    const double relay = relay_length(c);
    if (distance < relay - 1e-12 || distance > c.signal_fiber_distance + 1e-12)
        throw GeometryError("plane is not inside the signal arm");
    DetectionArm arm;
    arm.collection = signal_arm_.collection;
    arm.elements.push_back(FourierRelay{c.f_ad - c.signal_defocus, c.f_ad});
    double z = relay;
    auto go = [&](double target) {
        const double d = std::min(target, distance) - z;
        if (d > 0.0) arm.elements.push_back(Propagate{d});
        z = std::max(z, std::min(target, distance));
    };
    if (c.pinholes && apertures) {
        go(c.pinhole1_distance);
        if (distance > c.pinhole1_distance) arm.elements.push_back(Aperture{{c.pinhole_diameter, 0.0, 0.0}});
        const double p2 = c.pinhole1_distance + c.pinhole_spacing;
        go(p2);
        if (distance > p2) arm.elements.push_back(Aperture{{c.pinhole_diameter, 0.0, 0.0}});
    }
    go(distance);
    return arm;
}

ComplexField Bench::pump_at_crystal(const MirrorState& state) const {
    const auto& c = config_;
    const RealMap surface = mirror_surface(state, c.influence, layout_, mirror_grid_);
    ComplexField f = reflect(pump_at_mirror_, surface);
    const Abcd reverse = Abcd::thin_lens(c.f_d).after(Abcd::free_space(c.expander_separation))
                             .after(Abcd::thin_lens(c.f_c));
    f = relay_fresnel(f, reverse);
    f = relay_fourier(f, Abcd::free_space(c.f_f).after(Abcd::thin_lens(c.f_f)));
    // Snap the pitch onto the configured crystal grid (equal up to rounding).
    f.set_pitch(c.crystal_pitch);
    return f;
}

double Bench::relative_rate(const ComplexField& pump) const {
    if (!same_grid(pump.grid(), crystal_grid())) throw GeometryError("pump is not on the crystal grid");
    const auto p = window_copy(pump, win_lo_, win_hi_);
    std::vector<double> parts(overlap_.size());
#pragma omp parallel for schedule(static) num_threads(kernels::thread_count())
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(overlap_.size()); ++k) {
        const auto& h = overlap_[static_cast<std::size_t>(k)];
        cplx acc{};
        for (std::size_t i = 0; i < h.size(); ++i) acc += std::conj(h[i]) * p[i];
        parts[static_cast<std::size_t>(k)] = std::norm(acc);
    }
    double sum = 0.0;
    for (double v : parts) sum += v;
    return sum;
}

double Bench::relative_rate(const MirrorState& state) const { return relative_rate(pump_at_crystal(state)); }

double Bench::klyshko_rate(const MirrorState& state) const {
    return coincidence_rate_klyshko(pump_at_crystal(state), config_.crystal, signal_arm_, idler_arm_,
                                    config_.phase_matching)
        .rate;
}

double Bench::rate(const MirrorState& state) const {
    return config_.rate_scale * relative_rate(state) / reference_rate_;
}

MeasurementRecord Bench::measure(const MirrorState& state, std::mt19937_64& rng, double exposure,
                                 double timestamp) const {
    if (!(exposure >= 1.0)) throw ParameterError("exposure must be at least 1 s");
    MeasurementRecord r;
    r.state = state;
    r.true_rate = rate(state);
    r.exposure = exposure;
    r.timestamp = timestamp;
    const double mean = r.true_rate * exposure;
    if (mean > 0.0) {
        std::poisson_distribution<long long> poisson(mean);
        r.counts = poisson(rng);
    }
    return r;
}

RealMap Bench::spot_image(const MirrorState& state, double distance) const {
    const DetectionArm arm = signal_arm_to(distance, config_.spot_through_pinholes);
    const ComplexField pump = pump_at_crystal(state);
    const double lambda = config_.crystal.degenerate_wavelength;
    RealMap out(arm_output_grid(arm, crystal_grid(), lambda));
    for (const auto& bi : idler_modes_) {
        const ComplexField f = arm_transfer(emitted_signal(pump, bi, config_.crystal, config_.phase_matching), arm);
        const auto d = f.data();
        for (std::size_t i = 0; i < d.size(); ++i) out.values[i] += std::norm(d[i]);
    }
    return out;
}

ZernikeSpectrum Bench::mirror_zernike(const MirrorState& state) const {
    return command_to_zernike(state, config_.influence, layout_, config_.footprint_radius);
}

MirrorState Bench::state_from_levels(const aco::Candidate& c, std::size_t n_levels) const {
    const auto cmd = c.commands(n_levels);
    return MirrorState(std::span<const double>(cmd));
}

// ---- scenarios ----------------------------------------------------------------

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ScenarioConfig scenario_preset(const std::string& name) {
    ScenarioConfig s;
    s.name = name;
    auto& b = s.bench;
    // standard misaligned bench
    b.signal_defocus = 3e-3;
    b.bench_aberration.normalization_radius = b.full_aperture_radius;
    b.bench_aberration.set(2, -2, 0.15);
    if (name == "multimode_pinholes" || name == "spot_imaging" || name == "zernike_report") {
        b.signal_fiber.kind = FiberConfig::Kind::Multimode;
        b.idler_fiber.kind = FiberConfig::Kind::Multimode;
        b.rate_scale = 500.0;
    } else if (name == "single_mode") {
        b.signal_fiber.kind = FiberConfig::Kind::SingleMode;
        b.idler_fiber.kind = FiberConfig::Kind::SingleMode;
        b.rate_scale = 346.0;
        // ~5 % Poisson noise at 1 s is comparable to the whole achievable gain
        b.exposure = 5.0;
    } else {
        throw ConfigError("scenario: unknown name \"" + name + "\"");
    }
    return s;
}

ScenarioConfig scenario_from_json(const json& j) {
    check_keys(j, "scenario config", {"scenario", "seed", "bench", "aco"});
    ScenarioConfig s = scenario_preset(text(j, "scenario", "multimode_pinholes", "scenario config"));
    if (j.contains("seed")) {
        if (!non_negative_integer(j.at("seed"))) throw ConfigError("seed: expected a non-negative integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("bench")) {
        // Overlay onto the preset: serialize, merge, re-parse.
        json merged = json(to_json(s.bench));
        merged.merge_patch(j.at("bench"));
        if (!j.at("bench").is_object()) throw ConfigError("bench: expected an object");
        if (j.at("bench").contains("bench_aberration") && j.at("bench").at("bench_aberration").contains("terms"))
            merged["bench_aberration"]["terms"] = j.at("bench").at("bench_aberration").at("terms");
        s.bench = bench_from_json(merged);
    }
    const auto& a = sub(j, "aco");
    check_keys(a, "aco", {"n_actuators", "n_levels", "n_threshold", "tau0", "q", "rho", "elite_weight",
                          "tau_floor_fraction", "budget", "remeasure_on_improvement"});
    auto& c = s.aco;
    c.n_actuators = count(a, "n_actuators", c.n_actuators, "aco");
    if (c.n_actuators != kActuatorCount) throw ConfigError("aco.n_actuators: the mirror has 32 actuators");
    c.n_levels = count(a, "n_levels", c.n_levels, "aco");
    c.n_threshold = num(a, "n_threshold", c.n_threshold, "aco");
    c.tau0 = num(a, "tau0", c.tau0, "aco");
    c.q = num(a, "q", c.q, "aco");
    c.rho = num(a, "rho", c.rho, "aco");
    c.elite_weight = num(a, "elite_weight", c.elite_weight, "aco");
    c.tau_floor_fraction = num(a, "tau_floor_fraction", c.tau_floor_fraction, "aco");
    c.budget = count(a, "budget", c.budget, "aco");
    c.remeasure_on_improvement = flag(a, "remeasure_on_improvement", c.remeasure_on_improvement, "aco");
    try {
        c.validate();
    } catch (const Error& err) {
        throw ConfigError(std::string("aco: ") + err.what());
    }
    return s;
}

ojson to_json(const ScenarioConfig& s) {
    ojson o;
    o["scenario"] = s.name;
    o["seed"] = s.seed;
    o["bench"] = to_json(s.bench);
    const auto& c = s.aco;
    o["aco"] = {{"n_actuators", c.n_actuators},
                {"n_levels", c.n_levels},
                {"n_threshold", c.n_threshold},
                {"tau0", c.tau0},
                {"q", c.q},
                {"rho", c.rho},
                {"elite_weight", c.elite_weight},
                {"tau_floor_fraction", c.tau_floor_fraction},
                {"budget", c.budget},
                {"remeasure_on_improvement", c.remeasure_on_improvement}};
    return o;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    ScenarioReport rep;
    rep.config = config;
    const Bench bench(config.bench);
    const auto& b = bench.config();

    aco::AcoConfig ac = config.aco;
    ac.seed = split_seed(config.seed, 0);
    std::mt19937_64 noise(split_seed(config.seed, 1));
    std::mt19937_64 verify(split_seed(config.seed, 2));

    const int bias_level = static_cast<int>(
        std::lround(b.influence.bias_command * static_cast<double>(ac.n_levels - 1)));
    const aco::Candidate flat{std::vector<int>(ac.n_actuators, bias_level)};
    const MirrorState flat_state = bench.state_from_levels(flat, ac.n_levels);

    double clock = 0.0;
    if (ac.budget > 0) {
        auto evaluate = [&](const aco::Candidate& cand) {
            const auto rec = bench.measure(bench.state_from_levels(cand, ac.n_levels), noise, b.exposure, clock);
            clock += b.exposure;
            return static_cast<double>(rec.counts);
        };
        rep.log = aco::run(ac, flat, evaluate);
        if (rep.log.aborted) throw Error("optimization aborted: " + rep.log.error);
        rep.best_state = bench.state_from_levels(rep.log.best, ac.n_levels);
    } else {
        rep.log.best = flat;
        rep.best_state = flat_state;
    }
    rep.clamped_commands = rep.best_state.clamped_count();

    auto summary = [&](const MirrorState& s) {
        const auto rec = bench.measure(s, verify, b.verify_exposure, clock);
        clock += b.verify_exposure;
        return CountSummary{rec.counts, rec.exposure, std::sqrt(static_cast<double>(rec.counts)), rec.true_rate};
    };
    rep.before = summary(flat_state);
    rep.after = summary(rep.best_state);
    rep.gain_percent = rep.before.counts > 0
                           ? 100.0 * static_cast<double>(rep.after.counts - rep.before.counts) /
                                 static_cast<double>(rep.before.counts)
                           : 0.0;

    rep.spot_before = bench.spot_image(flat_state, b.spot_plane);
    rep.spot_after = bench.spot_image(rep.best_state, b.spot_plane);
    rep.d4s_before = beam_diameter_d4s(rep.spot_before);
    rep.d4s_after = beam_diameter_d4s(rep.spot_after);
    rep.zernike_before = bench.mirror_zernike(flat_state);
    rep.zernike_after = bench.mirror_zernike(rep.best_state);

    const GridSpec cg = bench.crystal_grid();
    rep.estimates.push_back({{"method", "adjoint_overlap"},
                             {"grid_n", cg.n},
                             {"grid_pitch", cg.pitch},
                             {"reference_relative_rate", bench.reference_rate()}});
    return rep;
}

ojson report_json(const ScenarioReport& r) {
    auto counts = [](const CountSummary& c) {
        return ojson{{"counts", c.counts},
                     {"exposure", c.exposure},
                     {"uncertainty", c.uncertainty},
                     {"true_rate", c.true_rate}};
    };
    ojson o;
    o["schema"] = 1;
    o["scenario"] = r.config.name;
    o["seed"] = r.config.seed;
    o["evaluations"] = r.log.records.size();
    o["before"] = counts(r.before);
    o["after"] = counts(r.after);
    o["gain_percent"] = r.gain_percent;
    const double ratio = r.d4s_before > 0.0 ? r.d4s_after / r.d4s_before : 0.0;
    o["spot"] = {{"plane", r.config.bench.spot_plane},
                 {"d4s_before", r.d4s_before},
                 {"d4s_after", r.d4s_after},
                 {"ratio", ratio}};
    o["zernike"] = {{"radius", r.config.bench.footprint_radius},
                    {"before", to_json(r.zernike_before)},
                    {"after", to_json(r.zernike_after)}};
    o["best_levels"] = r.log.best.levels;
    o["best_state"] = to_json(r.best_state);
    o["clamped_commands"] = r.clamped_commands;
    o["best_coinc"] = r.log.best_coinc;
    o["estimates"] = r.estimates;
    o["config"] = to_json(r.config);
    return o;
}

void write_outputs(const ScenarioReport& r, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    io::write_text(out / "runlog.csv", aco::runlog_csv(r.log));
    io::write_text(out / "runlog.json", aco::runlog_json(r.log, r.config.aco).dump(2) + "\n");
    io::write_text(out / "report.json", report_json(r).dump(2) + "\n");
    io::write_pgm16(out / "spot_before.pgm", r.spot_before);
    io::write_pgm16(out / "spot_after.pgm", r.spot_after);
}

} // namespace aspdc
