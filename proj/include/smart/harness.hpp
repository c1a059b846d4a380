#ifndef SMART_HARNESS_HPP
#define SMART_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <smart/common.hpp>
#include <smart/signal_model.hpp>
#include <smart/solver.hpp>

namespace smart
{

///
/// Simulation scenario. Angles are in degrees here (as in files); sensor
/// indices are 0-based. Empty `theta_deg` / `b` and absent `phases` mean
/// "draw at random for every trial".
///
struct Scenario
{
    Index n_sensors = 15;         ///< physical array size N
    std::vector<Index> omega;     ///< observed sensors; empty = all N
    Index K = 2;
    std::vector<double> theta_deg;
    std::vector<double> b;
    Index L = 3;
    std::optional<double> snr_db; ///< absent = noiseless
    std::uint64_t seed = 0;
    std::optional<RMat> phases;   ///< K x L, radians
    double b_min = 0.5;           ///< range for random moduli
    double b_max = 2.0;
    double max_abs_theta_deg = 90.0; ///< range for random DOAs

    /// Odd aperture holding the array; an even N is embedded into N + 1
    /// with the extra position unobserved.
    ArrayGeometry geometry() const;

    /// Throws UsageError on inconsistent fields.
    void validate() const;
};

/// One realization: ground truth plus the observation it produced.
struct Realization
{
    SourceEnsemble truth;
    Observation obs;
};

/// Draw the random parts of the scenario (DOAs, moduli, phases, noise)
/// from `rng`.
Realization realize(const Scenario& sc, std::mt19937_64& rng);

enum class SweepVariable
{
    SnrDb,
    Snapshots,
    SeparationDeg,
    NumSources,
};

enum class Estimator
{
    Smart,
    RootMusic,
};

std::string to_string(SweepVariable v);
std::string to_string(Estimator e);
/// Throw UsageError on unknown names.
SweepVariable parse_sweep_variable(const std::string& s);
Estimator parse_estimator(const std::string& s);

struct ExperimentSpec
{
    Scenario scenario;
    int trials = 1;
    SweepVariable sweep = SweepVariable::SnrDb;
    std::vector<double> sweep_values;
    std::uint64_t seed = 0;
    std::vector<Estimator> estimators{Estimator::Smart};
    std::optional<int> max_iter; ///< overrides the solver default
    bool record_timing = false;  ///< wall-clock timing breaks byte-identical output
    unsigned threads   = 0;      ///< 0 = hardware concurrency

    /// Throws UsageError unless trials >= 1 and sweep_values is nonempty
    /// and sorted.
    void validate() const;
};

struct MetricsRow
{
    double sweep_value      = 0.0;
    double rmse_deg         = 0.0;
    double resolution_prob  = 0.0;
    double mean_iters       = 0.0;
    double mean_runtime_s   = 0.0; ///< NaN unless timing was recorded
    double sigma_ratio_k    = 0.0; ///< median sigma_K / sigma_{K+1} of T(t_hat); NaN for Root-MUSIC
    int trials              = 0;
    Estimator estimator     = Estimator::Smart;
    int failures            = 0;
};

/// Scenario for a sweep point: applies the swept variable to the base.
Scenario apply_sweep(const Scenario& base, SweepVariable var, double value);

/// Seed of trial `trial` at sweep point `sweep_index`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t sweep_index, std::size_t trial);

/// Monte Carlo sweep; one row per (sweep value, estimator), in that order.
std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec);

/// CSV with a header; column order follows MetricsRow.
void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os);

struct TightnessRow
{
    double sweep_value = 0.0;
    int trial          = 0;
    double ratio_truth = 0.0; ///< sigma_hat_K / sigma_K
    double ratio_gap   = 0.0; ///< sigma_hat_K / sigma_hat_{K+1}
    bool converged     = false;
};

/// Per-trial singular-value ratios of T(t_hat) for SMART.
std::vector<TightnessRow> run_tightness(const ExperimentSpec& spec);

void write_tightness_csv(const std::vector<TightnessRow>& rows, std::ostream& os);

/// Singular values of T(t), descending.
RVec toeplitz_singular_values(const ToeplitzParam& t);

/// Desk-scale versions of the published experiments:
///   localization  N=5, K in {4,5,6}, L=20, noiseless
///   tightness     N=15, L=5, K=3 random sources, SNR 0..40 dB
///   separation    N=15, L=3, K=2, theta_1=-2 deg, SNR 20 dB, separation sweep
///   snapshots     N=15, theta=[-2,1,30] deg, SNR 20 dB, L sweep
///   snr           N=15, L=3, theta=[-2,1] deg, fixed moduli/phases, SNR sweep
///   sla           N=15, omega={1,2,3,5,...,10,15}, L=5, SNR sweep
/// Throws UsageError for unknown names.
ExperimentSpec preset_experiment(const std::string& name, int trials);

std::vector<std::string> preset_names();

} // namespace smart

#endif // SMART_HARNESS_HPP
