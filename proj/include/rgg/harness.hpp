#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgg/density.hpp"
#include "rgg/partition.hpp"
#include "rgg/theory.hpp"

namespace rgg {

/// How r_n is derived from n.
struct RSchedule {
    enum class Kind { Fixed, TauMultiple, ExpMultiple };
    Kind kind = Kind::Fixed;
    double value = 1.0;

    /// "fixed:0.5", "tau_multiple:0.2", "exp_multiple:1".
    std::string label() const;
};

struct ExperimentConfig {
    DensitySpec spec = DensitySpec::gaussian(2);
    std::vector<double> n_values;
    std::vector<RSchedule> r_schedules;
    std::optional<double> gamma;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> probes;
    ClassifyOptions classify;
};

/// Parse a sweep configuration. Errors carry the JSON pointer of the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// One (n, r) cell of a sweep, with everything trials share.
struct CellPlan {
    std::size_t index = 0;
    double n = 0.0;
    RSchedule schedule;
    double r_requested = 0.0;
    double r = 0.0;
    bool clipped = false;
    ThresholdReport theory;
    std::optional<CubePartition> partition;
    std::optional<CellMasses> masses;
    std::vector<std::string> flags;
};

struct TrialRecord {
    std::size_t cell = 0;
    std::size_t trial = 0;
    double n = 0.0;
    double r = 0.0;
    std::uint64_t seed = 0;
    std::size_t point_count = 0;
    std::size_t num_components = 0;
    bool is_connected = true;
    double r_c = 0.0;
    double r_max = 0.0;
    std::vector<std::size_t> isolated_counts;
    std::size_t isolated_at_r0 = 0;
    std::size_t tail_points_beyond_r0 = 0;
    std::size_t tail_points_beyond_r1 = 0;
    std::optional<std::size_t> concentration_violations;
    bool failed = false;
    std::string error;
};

struct Proportion {
    std::size_t successes = 0;
    std::size_t trials = 0;
    double p = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Wilson score interval at 95%.
Proportion wilson(std::size_t successes, std::size_t trials);

struct CellAggregate {
    std::string density;
    int dimension = 0;
    double n = 0.0;
    std::string schedule;
    double r_requested = 0.0;
    double r = 0.0;
    bool clipped = false;
    std::size_t trials = 0;
    std::size_t failed = 0;
    Proportion disconnected;
    Proportion rc_below_rmax;
    Proportion tail_empty;     // beyond R^(1)
    Proportion tail_empty_r0;  // beyond R^(0)
    double mean_isolated = 0.0;
    double expected_isolated = 0.0;
    double tail_empty_theory = 0.0;
    std::vector<double> mean_isolated_per_probe;
    std::optional<double> mean_concentration_violations;
    std::optional<Proportion> any_concentration_violation;
    std::optional<double> chernoff_budget;
    std::string prediction;
    std::vector<std::string> flags;
};

struct RunOptions {
    /// 0: RGG_THREADS if set, else hardware concurrency.
    std::size_t threads = 0;
};

struct RunResult {
    std::vector<CellPlan> plans;
    std::vector<TrialRecord> records;
    std::vector<CellAggregate> aggregates;
};

std::size_t resolve_threads(std::size_t requested);

std::vector<CellPlan> plan_cells(const ExperimentConfig& config);

/// Sample one cloud and measure it; deterministic in (plan, trial, master seed).
TrialRecord run_trial(const ExperimentConfig& config, const CellPlan& plan, const RadialMeasure& measure,
                      std::size_t trial);

/// One trial from an explicit seed.
TrialRecord measure_trial(const ExperimentConfig& config, const CellPlan& plan, const RadialMeasure& measure,
                          std::uint64_t seed);

std::vector<CellAggregate> aggregate(const ExperimentConfig& config, const std::vector<CellPlan>& plans,
                                     const std::vector<TrialRecord>& records);

/// Run every trial of every cell. Fails if more than 1% of trials fail.
RunResult run(const ExperimentConfig& config, RunOptions options = {});

/// Results table with the fixed column order
/// density,d,n,r,trials,p_disconnected,ci_lo,ci_hi,p_tail_empty,mean_isolated,expected_isolated,prediction.
void write_results_csv(const std::vector<CellAggregate>& aggregates, std::ostream& out);
nlohmann::json to_json(const CellAggregate& aggregate);
nlohmann::json to_json(const TrialRecord& record);

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out);
std::vector<TrialRecord> read_records_csv(std::istream& in);

}  // namespace rgg
