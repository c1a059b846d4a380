#include <smart/harness.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <Eigen/SVD>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <smart/baselines.hpp>
#include <smart/retrieval.hpp>

namespace smart
{

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double failed_angle_error_deg = 90.0;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double median(std::vector<double> v)
{
    if (v.empty())
        return nan;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1)
        return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

// Run `job(i)` for i in [0, count) on a small pool. Each index is handled
// exactly once; callers store results by index.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
            {
                try
                {
                    job(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

struct TrialOutcome
{
    bool ok          = false;
    double sq_err    = 0.0;
    bool is_resolved = false;
    int iterations   = 0;
    double runtime_s = 0.0;
    double sigma_ratio = nan;
};

double sigma_gap(const RVec& sv, Index K)
{
    if (K >= sv.size())
        return nan;
    return sv[K - 1] / sv[K];
}

TrialOutcome run_smart(const Realization& r, Index K, const std::optional<int>& max_iter)
{
    TrialOutcome out;
    const ProblemSpec spec = build_problem(r.obs, K);
    SolverConfig cfg       = SolverConfig::defaults_for(spec);
    if (max_iter)
        cfg.max_iter = *max_iter;
    const SolveReport rep      = solve(spec, cfg);
    const EstimationResult est = estimate_parameters(rep, spec);
    out.ok          = true;
    out.sq_err      = matched_squared_error_deg(est.theta_hat, r.truth.theta);
    out.is_resolved = resolved(est.theta_hat, r.truth.theta);
    out.iterations  = rep.iterations;
    out.sigma_ratio = sigma_gap(toeplitz_singular_values(rep.t_hat), K);
    return out;
}

TrialOutcome run_root_music(const Realization& r, Index K)
{
    TrialOutcome out;
    const CovarianceEstimate cov = sample_covariance(r.obs.Y, r.obs.geometry);
    const RVec theta             = root_music(cov, K);
    out.ok          = true;
    out.sq_err      = matched_squared_error_deg(theta, r.truth.theta);
    out.is_resolved = resolved(theta, r.truth.theta);
    return out;
}

} // namespace

ArrayGeometry Scenario::geometry() const
{
    std::vector<Index> om = omega;
    if (om.empty())
    {
        om.resize(static_cast<std::size_t>(n_sensors));
        std::iota(om.begin(), om.end(), Index{0});
    }
    const Index n_virtual = n_sensors % 2 == 1 ? n_sensors : n_sensors + 1;
    return ArrayGeometry(n_virtual, std::move(om));
}

void Scenario::validate() const
{
    if (n_sensors < 1)
        throw UsageError(fmt::format("scenario: N must be >= 1, got {}", n_sensors));
    if (K < 1)
        throw UsageError(fmt::format("scenario: K must be >= 1, got {}", K));
    if (L < 1)
        throw UsageError(fmt::format("scenario: L must be >= 1, got {}", L));
    for (std::size_t i = 0; i < omega.size(); ++i)
    {
        if (omega[i] < 0 || omega[i] >= n_sensors)
            throw UsageError(fmt::format("scenario: sensor {} outside 1..{}", omega[i] + 1, n_sensors));
        if (i > 0 && omega[i] <= omega[i - 1])
            throw UsageError("scenario: omega must be strictly increasing");
    }
    if (!theta_deg.empty() && static_cast<Index>(theta_deg.size()) != K)
        throw UsageError(fmt::format("scenario: {} angles for K = {}", theta_deg.size(), K));
    for (double th : theta_deg)
        if (!(th >= -90.0 && th < 90.0))
            throw UsageError(fmt::format("scenario: angle {} outside [-90, 90)", th));
    if (!b.empty() && static_cast<Index>(b.size()) != K)
        throw UsageError(fmt::format("scenario: {} moduli for K = {}", b.size(), K));
    for (double bk : b)
        if (!(bk > 0.0) || !std::isfinite(bk))
            throw UsageError(fmt::format("scenario: modulus {} must be positive", bk));
    if (phases && (phases->rows() != K || phases->cols() != L))
        throw UsageError(fmt::format("scenario: phases are {}x{}, expected {}x{}",
                                     phases->rows(), phases->cols(), K, L));
    if (!(b_min > 0.0) || !(b_max >= b_min) || !std::isfinite(b_max))
        throw UsageError("scenario: need 0 < b_min <= b_max");
    if (!(max_abs_theta_deg > 0.0 && max_abs_theta_deg <= 90.0))
        throw UsageError("scenario: max_abs_theta_deg must be in (0, 90]");
    if (snr_db && std::isnan(*snr_db))
        throw UsageError("scenario: snr_db is NaN");
}

Realization realize(const Scenario& sc, std::mt19937_64& rng)
{
    sc.validate();
    const ArrayGeometry geom = sc.geometry();
    const Index K            = sc.K;

    SourceEnsemble src;
    if (sc.theta_deg.empty())
    {
        src.theta = random_doas(K, 2.0 / static_cast<double>(geom.n_virtual()), rng,
                                deg2rad(sc.max_abs_theta_deg));
    }
    else
    {
        src.theta.resize(K);
        for (Index k = 0; k < K; ++k)
            src.theta[k] = deg2rad(sc.theta_deg[static_cast<std::size_t>(k)]);
    }
    src.b.resize(K);
    if (sc.b.empty())
    {
        std::uniform_real_distribution<double> ub(sc.b_min, sc.b_max);
        for (Index k = 0; k < K; ++k)
            src.b[k] = ub(rng);
    }
    else
    {
        for (Index k = 0; k < K; ++k)
            src.b[k] = sc.b[static_cast<std::size_t>(k)];
    }
    src.phi = sc.phases ? *sc.phases : random_phases(K, sc.L, rng);

    // Keep the truth sorted by angle; the resolution test relies on it.
    std::vector<Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index c) { return src.theta[a] < src.theta[c]; });
    SourceEnsemble sorted;
    sorted.theta.resize(K);
    sorted.b.resize(K);
    sorted.phi.resize(K, src.phi.cols());
    for (Index k = 0; k < K; ++k)
    {
        const Index j     = order[static_cast<std::size_t>(k)];
        sorted.theta[k]   = src.theta[j];
        sorted.b[k]       = src.b[j];
        sorted.phi.row(k) = src.phi.row(j);
    }
    sorted.validate();

    Realization r;
    const CMat X      = synthesize(sorted, geom.n_virtual());
    r.obs.geometry    = geom;
    const bool noisy  = sc.snr_db && std::isfinite(*sc.snr_db);
    r.obs.Y           = apply_mask(noisy ? add_noise(X, *sc.snr_db, geom.omega(), rng) : X,
                                   geom.omega());
    if (noisy)
        r.obs.snr_db = sc.snr_db;
    r.truth = std::move(sorted);
    return r;
}

std::string to_string(SweepVariable v)
{
    switch (v)
    {
    case SweepVariable::SnrDb:
        return "snr_db";
    case SweepVariable::Snapshots:
        return "L";
    case SweepVariable::SeparationDeg:
        return "separation_deg";
    case SweepVariable::NumSources:
        return "K";
    }
    return "?";
}

std::string to_string(Estimator e)
{
    return e == Estimator::Smart ? "smart" : "root_music";
}

SweepVariable parse_sweep_variable(const std::string& s)
{
    if (s == "snr_db" || s == "snr")
        return SweepVariable::SnrDb;
    if (s == "L" || s == "snapshots")
        return SweepVariable::Snapshots;
    if (s == "separation_deg" || s == "separation")
        return SweepVariable::SeparationDeg;
    if (s == "K" || s == "sources")
        return SweepVariable::NumSources;
    throw UsageError(fmt::format("unknown sweep variable '{}'", s));
}

Estimator parse_estimator(const std::string& s)
{
    if (s == "smart")
        return Estimator::Smart;
    if (s == "root_music" || s == "rootmusic")
        return Estimator::RootMusic;
    throw UsageError(fmt::format("unknown estimator '{}'", s));
}

void ExperimentSpec::validate() const
{
    scenario.validate();
    if (trials < 1)
        throw UsageError(fmt::format("trials must be >= 1, got {}", trials));
    if (sweep_values.empty())
        throw UsageError("sweep_values is empty");
    if (!std::is_sorted(sweep_values.begin(), sweep_values.end()))
        throw UsageError("sweep_values must be sorted ascending");
    if (estimators.empty())
        throw UsageError("no estimators selected");
    if (max_iter && *max_iter < 1)
        throw UsageError("max_iter must be >= 1");
    for (double v : sweep_values)
        apply_sweep(scenario, sweep, v).validate();
    const bool wants_music =
        std::find(estimators.begin(), estimators.end(), Estimator::RootMusic) != estimators.end();
    if (wants_music && !scenario.geometry().is_contiguous())
        throw UsageError("root_music needs a contiguous array; drop it for sparse geometries");
}

Scenario apply_sweep(const Scenario& base, SweepVariable var, double value)
{
    Scenario sc = base;
    auto as_count = [&](const char* what) {
        if (!(value >= 1.0) || value != std::floor(value))
            throw UsageError(fmt::format("sweep {}: {} is not a positive integer", what, value));
        return static_cast<Index>(value);
    };
    switch (var)
    {
    case SweepVariable::SnrDb:
        if (std::isnan(value))
            throw UsageError("sweep snr_db: NaN");
        sc.snr_db = std::isinf(value) && value > 0 ? std::nullopt : std::optional<double>(value);
        break;
    case SweepVariable::Snapshots:
        sc.L = as_count("L");
        if (sc.phases && sc.phases->cols() != sc.L)
        {
            if (sc.phases->cols() < sc.L)
                throw UsageError("sweep L: fixed phases have too few columns");
            sc.phases = RMat(sc.phases->leftCols(sc.L));
        }
        break;
    case SweepVariable::SeparationDeg:
    {
        if (!(value > 0.0))
            throw UsageError("sweep separation_deg: must be positive");
        const double first = base.theta_deg.empty() ? 0.0 : base.theta_deg.front();
        sc.theta_deg.resize(static_cast<std::size_t>(sc.K));
        for (Index k = 0; k < sc.K; ++k)
            sc.theta_deg[static_cast<std::size_t>(k)] = first + static_cast<double>(k) * value;
        break;
    }
    case SweepVariable::NumSources:
    {
        sc.K = as_count("K");
        const auto k = static_cast<std::size_t>(sc.K);
        if ((!sc.theta_deg.empty() && sc.theta_deg.size() < k) ||
            (!sc.b.empty() && sc.b.size() < k) || (sc.phases && sc.phases->rows() < sc.K))
            throw UsageError(fmt::format("sweep K: fixed parameters list fewer than {} sources", k));
        if (!sc.theta_deg.empty())
            sc.theta_deg.resize(k);
        if (!sc.b.empty())
            sc.b.resize(k);
        if (sc.phases)
            sc.phases = RMat(sc.phases->topRows(sc.K));
        break;
    }
    }
    return sc;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t sweep_index, std::size_t trial)
{
    std::uint64_t h = splitmix64(master);
    h               = splitmix64(h ^ static_cast<std::uint64_t>(sweep_index));
    return splitmix64(h ^ (static_cast<std::uint64_t>(trial) << 1 | 1ULL));
}

std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const std::size_t P = static_cast<std::size_t>(spec.trials);
    const std::size_t E = spec.estimators.size();
    std::vector<MetricsRow> rows;

    for (std::size_t si = 0; si < spec.sweep_values.size(); ++si)
    {
        const Scenario sc = apply_sweep(spec.scenario, spec.sweep, spec.sweep_values[si]);
        std::vector<std::vector<TrialOutcome>> outcomes(P, std::vector<TrialOutcome>(E));

        parallel_for(P, spec.threads, [&](std::size_t p) {
            std::mt19937_64 rng(trial_seed(spec.seed, si, p));
            const Realization r = realize(sc, rng);
            for (std::size_t e = 0; e < E; ++e)
            {
                const auto t0 = std::chrono::steady_clock::now();
                try
                {
                    outcomes[p][e] = spec.estimators[e] == Estimator::Smart
                                         ? run_smart(r, sc.K, spec.max_iter)
                                         : run_root_music(r, sc.K);
                }
                catch (const Error&)
                {
                    outcomes[p][e] = TrialOutcome{};
                }
                outcomes[p][e].runtime_s =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        });

        for (std::size_t e = 0; e < E; ++e)
        {
            MetricsRow row;
            row.sweep_value = spec.sweep_values[si];
            row.estimator   = spec.estimators[e];
            row.trials      = spec.trials;
            double sq_sum = 0.0, iters = 0.0, runtime = 0.0;
            int hits = 0;
            std::vector<double> ratios;
            for (std::size_t p = 0; p < P; ++p)
            {
                const TrialOutcome& o = outcomes[p][e];
                runtime += o.runtime_s;
                if (!o.ok)
                {
                    ++row.failures;
                    sq_sum += static_cast<double>(sc.K) * failed_angle_error_deg *
                              failed_angle_error_deg;
                    continue;
                }
                sq_sum += o.sq_err;
                hits += o.is_resolved ? 1 : 0;
                iters += o.iterations;
                if (!std::isnan(o.sigma_ratio))
                    ratios.push_back(o.sigma_ratio);
            }
            const int ok           = spec.trials - row.failures;
            row.rmse_deg           = std::sqrt(sq_sum / static_cast<double>(P));
            row.resolution_prob    = static_cast<double>(hits) / static_cast<double>(P);
            const bool iterative   = row.estimator == Estimator::Smart;
            row.mean_iters         = iterative && ok > 0 ? iters / ok : nan;
            row.mean_runtime_s     = spec.record_timing ? runtime / static_cast<double>(P) : nan;
            row.sigma_ratio_k      = iterative ? median(ratios) : nan;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os)
{
    os << "sweep_value,rmse_deg,resolution_prob,mean_iters,mean_runtime_s,sigma_ratio_k,"
          "trials,estimator,failures\n";
    for (const auto& r : rows)
        fmt::print(os, "{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{},{},{}\n",
                   r.sweep_value, r.rmse_deg, r.resolution_prob, r.mean_iters,
                   r.mean_runtime_s, r.sigma_ratio_k, r.trials, to_string(r.estimator),
                   r.failures);
}

std::vector<TightnessRow> run_tightness(const ExperimentSpec& spec)
{
    spec.validate();
    const std::size_t P = static_cast<std::size_t>(spec.trials);
    std::vector<TightnessRow> rows;

    for (std::size_t si = 0; si < spec.sweep_values.size(); ++si)
    {
        const Scenario sc = apply_sweep(spec.scenario, spec.sweep, spec.sweep_values[si]);
        std::vector<TightnessRow> chunk(P);

        parallel_for(P, spec.threads, [&](std::size_t p) {
            TightnessRow& row = chunk[p];
            row.sweep_value   = spec.sweep_values[si];
            row.trial         = static_cast<int>(p);
            row.ratio_truth   = nan;
            row.ratio_gap     = nan;
            std::mt19937_64 rng(trial_seed(spec.seed, si, p));
            const Realization r = realize(sc, rng);
            try
            {
                const ProblemSpec ps = build_problem(r.obs, sc.K);
                SolverConfig cfg     = SolverConfig::defaults_for(ps);
                if (spec.max_iter)
                    cfg.max_iter = *spec.max_iter;
                const SolveReport rep = solve(ps, cfg);
                const RVec sv_hat     = toeplitz_singular_values(rep.t_hat);
                const RVec sv_true =
                    toeplitz_singular_values(toeplitz_truth(r.truth, ps.geometry.half()));
                row.ratio_truth = sv_hat[sc.K - 1] / sv_true[sc.K - 1];
                row.ratio_gap   = sigma_gap(sv_hat, sc.K);
                row.converged   = rep.converged;
            }
            catch (const Error&)
            {
                row.converged = false;
            }
        });
        rows.insert(rows.end(), chunk.begin(), chunk.end());
    }
    return rows;
}

void write_tightness_csv(const std::vector<TightnessRow>& rows, std::ostream& os)
{
    os << "sweep_value,trial,ratio_truth,ratio_gap,converged\n";
    for (const auto& r : rows)
        fmt::print(os, "{:.10g},{},{:.10g},{:.10g},{}\n", r.sweep_value, r.trial,
                   r.ratio_truth, r.ratio_gap, r.converged ? 1 : 0);
}

RVec toeplitz_singular_values(const ToeplitzParam& t)
{
    return Eigen::JacobiSVD<CMat>(toeplitz_lift(t)).singularValues();
}

ExperimentSpec preset_experiment(const std::string& name, int trials)
{
    ExperimentSpec spec;
    spec.trials = trials;
    spec.seed   = 20240601;
    Scenario& sc = spec.scenario;
    sc.n_sensors = 15;

    if (name == "localization")
    {
        sc.n_sensors = 5;
        sc.K         = 6;
        sc.L         = 20;
        sc.theta_deg = {-70, -40, -15, 10, 30, 50};
        for (double power : {2.0, 8.0, 1.0, 3.0, 4.0, 7.0})
            sc.b.push_back(std::sqrt(power));
        spec.sweep        = SweepVariable::NumSources;
        spec.sweep_values = {4, 5, 6};
        spec.estimators   = {Estimator::Smart, Estimator::RootMusic};
    }
    else if (name == "tightness")
    {
        sc.K                 = 3;
        sc.L                 = 5;
        sc.max_abs_theta_deg = 80.0;
        spec.sweep           = SweepVariable::SnrDb;
        spec.sweep_values    = {0, 10, 20, 30, 40};
    }
    else if (name == "separation")
    {
        sc.K              = 2;
        sc.L              = 3;
        sc.theta_deg      = {-2.0, -1.0};
        sc.b              = {1.0, 1.0};
        sc.snr_db         = 20.0;
        spec.sweep        = SweepVariable::SeparationDeg;
        spec.sweep_values = {1, 2, 3, 4, 5, 6, 8, 10};
        spec.estimators   = {Estimator::Smart, Estimator::RootMusic};
    }
    else if (name == "snapshots")
    {
        sc.K              = 3;
        sc.theta_deg      = {-2.0, 1.0, 30.0};
        sc.b              = {1.0, 1.0, 1.0};
        sc.snr_db         = 20.0;
        spec.sweep        = SweepVariable::Snapshots;
        spec.sweep_values = {2, 3, 4, 6, 8, 10, 15, 20};
        spec.estimators   = {Estimator::Smart, Estimator::RootMusic};
    }
    else if (name == "snr")
    {
        sc.K         = 2;
        sc.L         = 3;
        sc.theta_deg = {-2.0, 1.0};
        sc.b         = {1.79, 2.62};
        RMat phi(2, 3);
        phi << -2.4, -1.52, 1.90, -1.45, -1.58, 1.22;
        sc.phases         = phi;
        spec.sweep        = SweepVariable::SnrDb;
        spec.sweep_values = {0, 5, 10, 15, 20, 25, 30, 35, 40};
        spec.estimators   = {Estimator::Smart, Estimator::RootMusic};
    }
    else if (name == "sla")
    {
        sc.K         = 2;
        sc.L         = 5;
        sc.omega     = {0, 1, 2, 4, 5, 6, 7, 8, 9, 14};
        sc.theta_deg = {-2.0, 1.0};
        sc.b         = {0.54, 1.30};
        RMat phi(2, 5);
        phi << -0.63, 0.70, 2.45, 2.54, 0.83, 2.32, -1.38, 1.52, 0.61, -0.36;
        sc.phases         = phi;
        spec.sweep        = SweepVariable::SnrDb;
        spec.sweep_values = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    }
    else
    {
        throw UsageError(fmt::format("unknown figure '{}'; expected one of: {}", name,
                                     fmt::join(preset_names(), ", ")));
    }
    spec.validate();
    return spec;
}

std::vector<std::string> preset_names()
{
    return {"localization", "tightness", "separation", "snapshots", "snr", "sla"};
}

} // namespace smart
