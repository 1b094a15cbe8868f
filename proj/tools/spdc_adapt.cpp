// spdc_adapt: scenarios, physics utilities and export for the adaptive SPDC bench.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aspdc/aco.hpp"
#include "aspdc/errors.hpp"
#include "aspdc/experiment.hpp"
#include "aspdc/io.hpp"
#include "aspdc/mirror.hpp"
#include "aspdc/optics.hpp"
#include "aspdc/spdc.hpp"
#include "aspdc/zernike.hpp"

namespace fs = std::filesystem;
using namespace aspdc;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kSelftestFailed = 1, kConfigError = 2, kRuntimeError = 3 };

struct Options {
    std::string config;
    std::string out;
    std::string state;
    long long seed = -1;
    int jobs = 1;
    int verbose = 0;
    std::size_t repeats = 1;
    double exposure = 0.0;
    double plane = 0.0;
    double radius = 0.0;
    double pitch = 0.0;
    int max_order = 4;
    // propagate
    std::size_t n = 256;
    double wavelength = 808e-9;
    double waist = 200e-6;
    double distance = 0.5;
};

// Config problems are reported with exit 2; everything else surfaces as 3.
struct ConfigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigFailure(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigFailure(path + ": " + e.what());
    }
}

ScenarioConfig load_scenario(const Options& o) {
    if (o.config.empty()) throw ConfigFailure("a scenario config path is required");
    ScenarioConfig s;
    try {
        s = scenario_from_json(read_json_file(o.config));
    } catch (const ConfigError& e) {
        throw ConfigFailure(o.config + ": " + e.what());
    }
    if (o.seed >= 0) s.seed = static_cast<std::uint64_t>(o.seed);
    return s;
}

MirrorState load_state(const Options& o, const Bench& bench) {
    if (o.state.empty()) return bench.flat_state();
    const json j = read_json_file(o.state);
    try {
        if (j.is_object() && j.contains("best_state")) return mirror_state_from_json(j.at("best_state"));
        return mirror_state_from_json(j);
    } catch (const std::exception& e) {
        throw ConfigFailure(o.state + ": " + e.what());
    }
}

void require_out(const Options& o) {
    if (o.out.empty()) throw ConfigFailure("--out is required for this subcommand");
}

std::string percent(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v << "%";
    return os.str();
}

void log(const Options& o, const std::string& msg) {
    if (o.verbose > 0) std::cerr << msg << "\n";
}

// ---- subcommands -------------------------------------------------------------------

int cmd_optimize(const Options& o) {
    require_out(o);
    const ScenarioConfig base = load_scenario(o);
    const fs::path out(o.out);
    if (o.repeats <= 1) {
        log(o, "running " + base.name + " seed " + std::to_string(base.seed));
        const auto report = run_scenario(base);
        write_outputs(report, out);
        std::cout << report.config.name << ": before " << report.before.counts << " after "
                  << report.after.counts << " gain " << percent(report.gain_percent) << "\n";
        return kOk;
    }
    // independent seeded repeats, each with a split stream of the base seed
    std::vector<std::string> lines(o.repeats);
    std::vector<std::string> errors(o.repeats);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < o.repeats; k = next++) {
            ScenarioConfig s = base;
            s.seed = split_seed(base.seed, 1000 + k);
            try {
                const auto report = run_scenario(s);
                write_outputs(report, out / ("repeat_" + std::to_string(k)));
                lines[k] = "repeat " + std::to_string(k) + ": gain " + percent(report.gain_percent);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(o.repeats)));
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t k = 0; k < o.repeats; ++k) {
        if (!errors[k].empty()) throw Error("repeat " + std::to_string(k) + ": " + errors[k]);
        std::cout << lines[k] << "\n";
    }
    return kOk;
}

int cmd_measure(const Options& o) {
    const ScenarioConfig s = load_scenario(o);
    const Bench bench(s.bench);
    const MirrorState state = load_state(o, bench);
    std::mt19937_64 rng(split_seed(s.seed, 3));
    const double exposure = o.exposure > 0.0 ? o.exposure : s.bench.verify_exposure;
    const auto rec = bench.measure(state, rng, exposure);
    nlohmann::ordered_json j;
    j["true_rate"] = rec.true_rate;
    j["counts"] = rec.counts;
    j["exposure"] = rec.exposure;
    j["timestamp"] = rec.timestamp;
    j["state"] = to_json(rec.state);
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_spot(const Options& o) {
    const ScenarioConfig s = load_scenario(o);
    const Bench bench(s.bench);
    const MirrorState state = load_state(o, bench);
    const double plane = o.plane > 0.0 ? o.plane : s.bench.spot_plane;
    const RealMap img = bench.spot_image(state, plane);
    const BeamWidths w = beam_widths_d4s(img);
    nlohmann::ordered_json j;
    j["plane"] = plane;
    j["d4s"] = beam_diameter_d4s(img);
    j["major"] = w.major;
    j["minor"] = w.minor;
    j["angle"] = w.angle;
    j["pitch"] = img.grid.pitch;
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        io::write_pgm16(fs::path(o.out) / "spot.pgm", img);
        io::write_map_csv(fs::path(o.out) / "spot.csv", img);
    }
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_zernike(const Options& o) {
    if (o.config.empty()) throw ConfigFailure("a surface CSV path is required");
    if (!(o.radius > 0.0)) throw ConfigFailure("--radius must be positive");
    // Default sampling: the CSV spans the normalization disk's bounding square.
    RealMap surface;
    try {
        surface = io::read_square_csv(o.config, 1.0);
    } catch (const Error& e) {
        throw ConfigFailure(e.what());
    }
    const double pitch = o.pitch > 0.0 ? o.pitch : 2.0 * o.radius / static_cast<double>(surface.grid.n);
    RealMap scaled(GridSpec(surface.grid.n, pitch));
    scaled.values = surface.values;
    const auto spec = zernike_decompose(scaled, o.radius, o.max_order);
    std::cout << to_json(spec).dump(2) << "\n";
    return kOk;
}

struct PropagateResult {
    double power_in, power_out, d4s_in, d4s_out, d4s_expected;
};

PropagateResult gaussian_check(std::size_t n, double pitch, double wavelength, double waist, double distance,
                               const fs::path* out) {
    const GridSpec g(n, pitch);
    const ComplexField in = gaussian_beam(g, wavelength, waist);
    const ComplexField prop = propagate(in, distance);
    const double zr = M_PI * waist * waist / wavelength;
    const double w = waist * std::sqrt(1.0 + (distance / zr) * (distance / zr));
    if (out) {
        fs::create_directories(*out);
        io::write_pgm16(*out / "intensity.pgm", prop.intensity());
    }
    return {in.power(), prop.power(), beam_diameter_d4s(in), beam_diameter_d4s(prop), 2.0 * w};
}

int cmd_propagate(const Options& o) {
    Options p = o;
    if (!o.config.empty()) {
        const json j = read_json_file(o.config);
        try {
            p.n = j.value("n", p.n);
            p.pitch = j.value("pitch", p.pitch);
            p.wavelength = j.value("wavelength", p.wavelength);
            p.waist = j.value("waist", p.waist);
            p.distance = j.value("distance", p.distance);
        } catch (const json::exception& e) {
            throw ConfigFailure(o.config + ": " + e.what());
        }
    }
    if (!(p.pitch > 0.0)) p.pitch = 10e-6;
    const fs::path out(o.out);
    PropagateResult r;
    try {
        r = gaussian_check(p.n, p.pitch, p.wavelength, p.waist, p.distance, o.out.empty() ? nullptr : &out);
    } catch (const ParameterError& e) {
        throw ConfigFailure(e.what());
    }
    nlohmann::ordered_json j;
    j["power_in"] = r.power_in;
    j["power_out"] = r.power_out;
    j["d4s_in"] = r.d4s_in;
    j["d4s_out"] = r.d4s_out;
    j["d4s_gaussian"] = r.d4s_expected;
    std::cout << j.dump(2) << "\n";
    return kOk;
}

// ---- selftest ------------------------------------------------------------------------

struct Check {
    std::string name;
    std::function<std::string()> run;  // empty string: pass
};

std::string fault() {
    const char* f = std::getenv("SPDC_ADAPT_SELFTEST_FAULT");
    return f ? f : "";
}

std::vector<Check> checks() {
    std::vector<Check> c;
    c.push_back({"power conservation", []() -> std::string {
        const GridSpec g(128, 8e-6);
        ComplexField f = gaussian_beam(g, 808e-9, 120e-6);
        const double p0 = f.power();
        f = propagate(f, 0.008);
        f = relay_fresnel(f, Abcd::thin_lens(0.5).after(Abcd::free_space(0.005)));
        if (fault() == "pitch") f.set_pitch(f.grid().pitch * 1.01);
        const double p1 = f.power();
        if (std::abs(p1 - p0) > 1e-9 * p0) return "power " + io::format_number(p0) + " -> " + io::format_number(p1);
        return std::string();
    }});
    c.push_back({"propagation adjoint", []() -> std::string {
        const GridSpec g(64, 6e-6);
        const ComplexField a = gaussian_beam(g, 808e-9, 40e-6, 10e-6, 0.0);
        const ComplexField b = gaussian_beam(g, 808e-9, 30e-6, -5e-6, 8e-6);
        const cplx lhs = inner(propagate(a, 1e-3), b);
        const cplx rhs = inner(a, propagate_adjoint(b, 1e-3));
        if (std::abs(lhs - rhs) > 1e-12) return "<Pa,b> != <a,P*b>";
        return std::string();
    }});
    c.push_back({"zernike round trip", []() -> std::string {
        ZernikeSpectrum s;
        s.normalization_radius = 1e-3;
        s.set(2, 0, 0.5);
        s.set(2, -2, -0.2);
        s.set(3, 1, 0.1);
        s.set(4, 0, 0.05);
        const RealMap m = zernike_synthesize(s, GridSpec(128, 2e-3 / 128));
        const ZernikeSpectrum d = zernike_decompose(m, 1e-3, 4);
        for (const auto& [k, v] : s.coefficients)
            if (std::abs(d.get(k.first, k.second) - v) > 1e-6) return "coefficient mismatch";
        return std::string();
    }});
    c.push_back({"fitness bounds", []() -> std::string {
        for (double coinc : {0.0, 1.0, 10.0, 1e3, 1e9}) {
            const double f = aco::fitness(coinc, 100.0);
            if (!(f > 0.0 && f <= 1.0)) return "fitness out of (0, 1]";
        }
        if (aco::fitness(200.0, 100.0) >= aco::fitness(150.0, 100.0)) return "fitness not decreasing";
        return std::string();
    }});
    c.push_back({"mirror reflection", []() -> std::string {
        const auto layout = layout_honeycomb();
        const GridSpec g(128, 0.2e-3);
        MirrorState s;
        for (std::size_t i = 0; i < kActuatorCount; ++i) s.set(i, 0.3 + 0.4 * static_cast<double>(i % 5) / 4.0);
        const ComplexField f = gaussian_beam(g, 404e-9, 5e-3);
        const ComplexField r = reflect(f, mirror_surface(s, InfluenceModel{}, layout, g));
        if (std::abs(r.power() - f.power()) > 1e-12 * f.power()) return "reflection changed power";
        return std::string();
    }});
    c.push_back({"oracle vs klyshko 16x16", []() -> std::string {
        const GridSpec g(16, 4e-6);
        const ComplexField pump = gaussian_beam(g, 404e-9, 12e-6, 2e-6, -1e-6);
        CrystalSpec crystal;
        DetectionArm s{{Propagate{50e-6}}, SingleModeFiber{10e-6}};
        DetectionArm i{{Propagate{30e-6}}, SingleModeFiber{12e-6, 3e-6, 0.0}};
        const auto kernel = build_kernel(pump, crystal, PhaseMatching::Thin);
        const double a = coincidence_rate_oracle(kernel, s, i).rate;
        const double b = coincidence_rate_klyshko(pump, crystal, s, i, PhaseMatching::Thin).rate;
        if (!(std::abs(a - b) <= 1e-6 * std::abs(a))) return "oracle " + io::format_number(a) + " klyshko " + io::format_number(b);
        return std::string();
    }});
    return c;
}

int cmd_selftest(const Options&) {
    std::vector<std::string> failed;
    for (const auto& c : checks()) {
        std::string why;
        try {
            why = c.run();
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        std::cout << (why.empty() ? "PASS  " : "FAIL  ") << c.name << (why.empty() ? "" : "  (" + why + ")") << "\n";
        if (!why.empty()) failed.push_back(c.name);
    }
    if (failed.empty()) {
        std::cout << "selftest: all checks passed\n";
        return kOk;
    }
    std::cout << "selftest: failed:";
    for (const auto& f : failed) std::cout << " [" << f << "]";
    std::cout << "\n";
    return kSelftestFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-optics SPDC bench simulator"};
    app.fallthrough();
    app.require_subcommand(1);
    Options o;
    app.add_option("--seed", o.seed, "override the scenario seed");
    app.add_option("--out", o.out, "output directory (nothing is written elsewhere)");
    app.add_option("--jobs", o.jobs, "parallel seeded repeats")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", o.verbose, "progress on stderr");

    auto* optimize = app.add_subcommand("optimize", "run a scenario and write runlog/report/spot images");
    optimize->add_option("config", o.config, "scenario JSON")->required();
    optimize->add_option("--repeats", o.repeats, "independent seeded repeats");

    auto* measure = app.add_subcommand("measure", "one Poisson measurement of a mirror state");
    measure->add_option("config", o.config, "scenario JSON")->required();
    measure->add_option("--state", o.state, "mirror state JSON (array of 32 commands, or a report)");
    measure->add_option("--exposure", o.exposure, "seconds");

    auto* spot = app.add_subcommand("spot", "signal spot image in the signal arm");
    spot->add_option("config", o.config, "scenario JSON")->required();
    spot->add_option("--state", o.state, "mirror state JSON");
    spot->add_option("--plane", o.plane, "distance from the crystal, meters");

    auto* zernike = app.add_subcommand("zernike", "Zernike spectrum of a square surface CSV");
    zernike->add_option("surface", o.config, "surface CSV (n x n, micrometers)")->required();
    zernike->add_option("--radius", o.radius, "normalization radius, meters")->required();
    zernike->add_option("--pitch", o.pitch, "sample pitch, meters (default: 2 radius / n)");
    zernike->add_option("--order", o.max_order, "maximum radial order");

    auto* prop = app.add_subcommand("propagate", "Gaussian free-space propagation check");
    prop->add_option("config", o.config, "optional JSON with n, pitch, wavelength, waist, distance");
    prop->add_option("--n", o.n);
    prop->add_option("--pitch", o.pitch);
    prop->add_option("--wavelength", o.wavelength);
    prop->add_option("--waist", o.waist);
    prop->add_option("--distance", o.distance);

    auto* selftest = app.add_subcommand("selftest", "fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*optimize) return cmd_optimize(o);
        if (*measure) return cmd_measure(o);
        if (*spot) return cmd_spot(o);
        if (*zernike) return cmd_zernike(o);
        if (*prop) return cmd_propagate(o);
        if (*selftest) return cmd_selftest(o);
    } catch (const ConfigFailure& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}
