#include "aspdc/aco.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aspdc/errors.hpp"
#include "aspdc/io.hpp"

namespace aspdc::aco {

void AcoConfig::validate() const {
    if (n_actuators == 0) throw ParameterError("n_actuators must be positive");
    if (n_levels < 2) throw ParameterError("n_levels must be >= 2");
    if (!(tau0 > 0.0)) throw ParameterError("tau0 must be positive");
    if (!(q > 0.0)) throw ParameterError("Q must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("rho must lie in [0, 1)");
    if (elite_weight < 0.0) throw ParameterError("elite_weight must be >= 0");
    if (!(tau_floor_fraction >= 0.0 && tau_floor_fraction * static_cast<double>(n_levels) < 1.0))
        throw ParameterError("tau_floor_fraction must be >= 0 and below 1 / n_levels");
}

std::vector<double> Candidate::commands(std::size_t n_levels) const {
    std::vector<double> out;
    out.reserve(levels.size());
    for (int l : levels) out.push_back(static_cast<double>(l) / static_cast<double>(n_levels - 1));
    return out;
}

TrailTable::TrailTable(std::size_t actuators, std::size_t levels, double initial)
    : actuators_(actuators), levels_(levels), tau_(actuators * levels, initial) {}

double TrailTable::total() const { return std::accumulate(tau_.begin(), tau_.end(), 0.0); }

double TrailTable::row_total(std::size_t a) const {
    return std::accumulate(tau_.begin() + static_cast<long>(a * levels_),
                           tau_.begin() + static_cast<long>((a + 1) * levels_), 0.0);
}

double fitness(double coinc, double n_threshold) {
    if (!(n_threshold > 0.0)) throw ParameterError("fitness threshold N must be positive");
    if (coinc < 0.0 || std::isnan(coinc)) throw ParameterError("coincidence count must be >= 0");
    return n_threshold / std::max(n_threshold, coinc);
}

InitResult init(const AcoConfig& config, const Candidate& flat) {
    config.validate();
    if (flat.levels.size() != config.n_actuators) throw ParameterError("flat candidate has the wrong actuator count");
    const int top = static_cast<int>(config.n_levels) - 1;
    for (int l : flat.levels)
        if (l < 0 || l > top) throw ParameterError("flat candidate level out of range");

    InitResult out{TrailTable(config.n_actuators, config.n_levels, config.tau0), {}};
    for (std::size_t a = 0; a < config.n_actuators; ++a) {
        Candidate c = flat;
        int step = a % 2 == 0 ? 1 : -1;
        if (c.levels[a] + step < 0 || c.levels[a] + step > top) step = -step;
        c.levels[a] += step;
        out.candidates.push_back(std::move(c));
    }
    return out;
}

Candidate select(const TrailTable& trails, std::mt19937_64& rng) {
    Candidate c;
    c.levels.resize(trails.actuators());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t a = 0; a < trails.actuators(); ++a) {
        const double target = unit(rng) * trails.row_total(a);
        double acc = 0.0;
        std::size_t l = 0;
        for (; l + 1 < trails.levels(); ++l) {
            acc += trails.at(a, l);
            if (target < acc) break;
        }
        c.levels[a] = static_cast<int>(l);
    }
    return c;
}

void deposit(TrailTable& trails, const Candidate& candidate, double f, const AcoConfig& config) {
    if (!(f > 0.0 && f <= 1.0)) throw ParameterError("fitness must lie in (0, 1]");
    const double d = config.q / f;
    for (std::size_t a = 0; a < trails.actuators(); ++a)
        trails.at(a, static_cast<std::size_t>(candidate.levels[a])) += d;
    const double keep = 1.0 - config.rho;
    for (std::size_t a = 0; a < trails.actuators(); ++a)
        for (std::size_t l = 0; l < trails.levels(); ++l)
            trails.at(a, l) = std::max(trails.at(a, l) * keep, kTrailFloor);
}

void reinforce_best(TrailTable& trails, const Candidate& best, double f_best, const AcoConfig& config) {
    if (config.elite_weight <= 0.0) return;
    const double d = config.elite_weight * config.q / f_best;
    for (std::size_t a = 0; a < trails.actuators(); ++a) trails.at(a, static_cast<std::size_t>(best.levels[a])) += d;
}

void apply_trail_bound(TrailTable& trails, const AcoConfig& config) {
    if (config.tau_floor_fraction <= 0.0) return;
    for (std::size_t a = 0; a < trails.actuators(); ++a) {
        const double floor = std::max(kTrailFloor, config.tau_floor_fraction * trails.row_total(a));
        for (std::size_t l = 0; l < trails.levels(); ++l) trails.at(a, l) = std::max(trails.at(a, l), floor);
    }
}

RunLog run(const AcoConfig& config, const Candidate& flat, const Evaluator& evaluator, TrailTable* final_trails) {
    config.validate();
    if (config.budget < config.n_actuators)
        throw ParameterError("ACO budget must cover the initial sweep of " + std::to_string(config.n_actuators) +
                             " patterns");
    auto [trails, initial] = init(config, flat);
    std::mt19937_64 rng(config.seed);
    RunLog log;
    log.n_threshold = config.n_threshold;
    bool have_best = false;

    auto evaluate = [&](const Candidate& c) -> bool {
        double coinc = 0.0;
        try {
            coinc = evaluator(c);
        } catch (const std::exception& e) {
            log.aborted = true;
            log.error = e.what();
            return false;
        }
        if (!(log.n_threshold > 0.0)) log.n_threshold = std::max(0.5 * coinc, 1.0);
        const double f = fitness(coinc, log.n_threshold);
        RunRecord rec{log.records.size(), c, coinc, f, log.best_f, log.best_coinc, false};
        bool improved = !have_best || coinc > log.best_coinc;
        double estimate = coinc;
        log.records.push_back(rec);
        if (improved && have_best && config.remeasure_on_improvement && log.records.size() < config.budget) {
            double again = 0.0;
            try {
                again = evaluator(c);
            } catch (const std::exception& e) {
                log.aborted = true;
                log.error = e.what();
                return false;
            }
            ++log.remeasurements;
            estimate = 0.5 * (coinc + again);
            improved = estimate > log.best_coinc;
            log.records.push_back({log.records.size(), c, again, fitness(again, log.n_threshold), log.best_f,
                                   log.best_coinc, true});
        }
        if (improved) {
            have_best = true;
            log.best = c;
            log.best_coinc = estimate;
            log.best_f = fitness(estimate, log.n_threshold);
        }
        for (auto it = log.records.rbegin(); it != log.records.rend() && it->index >= rec.index; ++it) {
            it->best_f = log.best_f;
            it->best_coinc = log.best_coinc;
        }
        deposit(trails, c, f, config);
        log.deposited += static_cast<double>(config.n_actuators) * config.q / f;
        if (config.elite_weight > 0.0) {
            reinforce_best(trails, log.best, log.best_f, config);
            log.deposited += static_cast<double>(config.n_actuators) * config.elite_weight * config.q / log.best_f;
        }
        apply_trail_bound(trails, config);
        return true;
    };

    for (const auto& c : initial) {
        if (log.records.size() >= config.budget) break;
        if (!evaluate(c)) break;
    }
    while (!log.aborted && log.records.size() < config.budget) {
        if (!evaluate(select(trails, rng))) break;
    }
    if (final_trails) *final_trails = trails;
    return log;
}

std::string runlog_csv(const RunLog& log) {
    std::string out = "step,f,coinc,best_coinc\n";
    for (const auto& r : log.records) {
        out += std::to_string(r.index) + ',' + io::format_number(r.f) + ',' + io::format_number(r.coinc) + ',' +
               io::format_number(r.best_coinc) + '\n';
    }
    return out;
}

nlohmann::ordered_json runlog_json(const RunLog& log, const AcoConfig& config) {
    nlohmann::ordered_json j;
    j["n_levels"] = config.n_levels;
    j["n_threshold"] = log.n_threshold;
    j["aborted"] = log.aborted;
    if (log.aborted) j["error"] = log.error;
    j["remeasure_on_improvement"] = config.remeasure_on_improvement;
    j["remeasurements"] = log.remeasurements;
    j["best"] = {{"levels", log.best.levels}, {"coinc", log.best_coinc}, {"f", log.best_f}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : log.records) {
        rows.push_back({{"step", r.index},
                        {"levels", r.candidate.levels},
                        {"coinc", r.coinc},
                        {"f", r.f},
                        {"best_f", r.best_f},
                        {"best_coinc", r.best_coinc},
                        {"remeasure", r.remeasure}});
    }
    j["records"] = std::move(rows);
    return j;
}

} // namespace aspdc::aco
