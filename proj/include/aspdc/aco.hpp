#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aspdc::aco {

struct AcoConfig {
    std::size_t n_actuators = 32;
    std::size_t n_levels = 17;
    double n_threshold = 0.0;   ///< <= 0: half of the first reading
    double tau0 = 32.0;
    double q = 1.0;             ///< deposit constant, dtau = q / f
    double rho = 0.05;          ///< evaporation per evaluation
    double elite_weight = 1.0;  ///< best-so-far candidate re-deposits elite_weight * q / f_best
    double tau_floor_fraction = 0.002;  ///< lower trail bound, fraction of the actuator's trail total
    std::size_t budget = 2000;
    std::uint64_t seed = 1;
    bool remeasure_on_improvement = false;

    void validate() const;
};

struct Candidate {
    std::vector<int> levels;

    /// level / (n_levels - 1)
    [[nodiscard]] std::vector<double> commands(std::size_t n_levels) const;
    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Per-actuator, per-level trail intensities; every entry stays positive.
class TrailTable {
public:
    TrailTable(std::size_t actuators, std::size_t levels, double initial);

    [[nodiscard]] std::size_t actuators() const { return actuators_; }
    [[nodiscard]] std::size_t levels() const { return levels_; }
    double& at(std::size_t a, std::size_t l) { return tau_[a * levels_ + l]; }
    [[nodiscard]] double at(std::size_t a, std::size_t l) const { return tau_[a * levels_ + l]; }
    [[nodiscard]] double total() const;
    [[nodiscard]] double row_total(std::size_t a) const;

private:
    std::size_t actuators_, levels_;
    std::vector<double> tau_;
};

inline constexpr double kTrailFloor = 1e-12;

/// N / max(N, coinc); in (0, 1]. Minimizing it maximizes coincidences.
double fitness(double coinc, double n_threshold);

struct InitResult {
    TrailTable trails;
    std::vector<Candidate> candidates;
};

/// Uniform trails at tau0 plus one candidate per actuator: the flat pattern with
/// that actuator moved one level (+1 for even index, -1 for odd, reflected at the ends).
InitResult init(const AcoConfig& config, const Candidate& flat);

/// Independent per-actuator draw with probability tau / sum(tau).
Candidate select(const TrailTable& trails, std::mt19937_64& rng);

/// tau[a][level_a] += q / f for every actuator, then tau *= (1 - rho), floored.
void deposit(TrailTable& trails, const Candidate& candidate, double f, const AcoConfig& config);

/// Best-so-far reinforcement and the lower trail bound applied after each deposit.
void reinforce_best(TrailTable& trails, const Candidate& best, double f_best, const AcoConfig& config);
void apply_trail_bound(TrailTable& trails, const AcoConfig& config);

struct RunRecord {
    std::size_t index = 0;
    Candidate candidate;
    double coinc = 0.0;
    double f = 1.0;
    double best_f = 1.0;
    double best_coinc = 0.0;
    bool remeasure = false;
};

struct RunLog {
    std::vector<RunRecord> records;
    Candidate best;
    double best_coinc = 0.0;
    double best_f = 1.0;
    double n_threshold = 0.0;
    double deposited = 0.0;  ///< total trail added per actuator, summed over actuators
    bool aborted = false;
    std::string error;
    std::size_t remeasurements = 0;
};

using Evaluator = std::function<double(const Candidate&)>;

RunLog run(const AcoConfig& config, const Candidate& flat, const Evaluator& evaluator,
           TrailTable* final_trails = nullptr);

/// step,f,coinc,best_coinc rows with a header, LF endings.
std::string runlog_csv(const RunLog& log);
nlohmann::ordered_json runlog_json(const RunLog& log, const AcoConfig& config);

} // namespace aspdc::aco
