#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <smart/harness.hpp>

#include "test_util.hpp"

using namespace smart;

namespace
{

Scenario fixture_scenario()
{
    Scenario sc;
    sc.n_sensors = 15;
    sc.K         = 2;
    sc.L         = 3;
    sc.theta_deg = {-2.0, 1.0};
    sc.b         = {1.79, 2.62};
    sc.phases    = testutil::fixture_ensemble().phi;
    return sc;
}

std::string csv(const std::vector<MetricsRow>& rows)
{
    std::ostringstream os;
    write_metrics_csv(rows, os);
    return os.str();
}

} // namespace

TEST(Scenario, GeometryEmbedsEvenArrays)
{
    Scenario sc;
    sc.n_sensors = 6;
    const ArrayGeometry g = sc.geometry();
    EXPECT_EQ(g.n_virtual(), 7);
    EXPECT_EQ(g.observed(), 6);
    EXPECT_TRUE(g.is_contiguous());

    sc.n_sensors = 15;
    sc.omega     = {0, 1, 2, 4, 5, 6, 7, 8, 9, 14};
    EXPECT_EQ(sc.geometry().n_virtual(), 15);
    EXPECT_FALSE(sc.geometry().is_contiguous());
}

TEST(Scenario, Validation)
{
    Scenario sc = fixture_scenario();
    EXPECT_NO_THROW(sc.validate());
    sc.theta_deg = {1.0};
    EXPECT_THROW(sc.validate(), UsageError);
    sc = fixture_scenario();
    sc.b = {1.0, -1.0};
    EXPECT_THROW(sc.validate(), UsageError);
    sc = fixture_scenario();
    sc.L = 4;
    EXPECT_THROW(sc.validate(), UsageError);
    sc = fixture_scenario();
    sc.omega = {3, 2};
    EXPECT_THROW(sc.validate(), UsageError);
    sc = fixture_scenario();
    sc.theta_deg = {-2.0, 90.0};
    EXPECT_THROW(sc.validate(), UsageError);
}

TEST(Realize, FixedPartsAndSortedTruth)
{
    Scenario sc  = fixture_scenario();
    sc.theta_deg = {1.0, -2.0};
    sc.b         = {2.62, 1.79};
    RMat phi     = *sc.phases;
    phi.row(0).swap(phi.row(1));
    sc.phases = phi;
    std::mt19937_64 rng(51);
    const Realization r = realize(sc, rng);
    const SourceEnsemble f = testutil::fixture_ensemble();
    EXPECT_LT((r.truth.theta - f.theta).norm(), 1e-15);
    EXPECT_EQ(r.truth.b, f.b);
    EXPECT_EQ(r.truth.phi, f.phi);
    EXPECT_FALSE(r.obs.snr_db.has_value());
    EXPECT_EQ(r.obs.Y, synthesize(f, 15));
}

TEST(Realize, NoiseAndMask)
{
    Scenario sc = fixture_scenario();
    sc.omega    = {0, 1, 2, 4, 5, 6, 7, 8, 9, 14};
    sc.snr_db   = 10.0;
    std::mt19937_64 rng(52);
    const Realization r = realize(sc, rng);
    for (Index q : {3, 10, 11, 12, 13})
        EXPECT_TRUE(r.obs.Y.row(q).isZero(0.0));
    const CMat X = apply_mask(synthesize(r.truth, 15), sc.omega);
    EXPECT_NEAR(10 * std::log10(X.squaredNorm() / (r.obs.Y - X).squaredNorm()), 10.0, 1e-10);
}

TEST(Realize, RandomPartsRespectRanges)
{
    Scenario sc;
    sc.K                 = 3;
    sc.L                 = 4;
    sc.max_abs_theta_deg = 60.0;
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 20; ++rep)
    {
        const Realization r = realize(sc, rng);
        EXPECT_LE(r.truth.theta.cwiseAbs().maxCoeff(), deg2rad(60.0));
        EXPECT_GE(r.truth.b.minCoeff(), 0.5);
        EXPECT_LE(r.truth.b.maxCoeff(), 2.0);
        EXPECT_TRUE(std::is_sorted(r.truth.theta.begin(), r.truth.theta.end()));
    }
}

TEST(Sweep, ApplySweep)
{
    const Scenario base = fixture_scenario();
    EXPECT_EQ(*apply_sweep(base, SweepVariable::SnrDb, 25.0).snr_db, 25.0);
    EXPECT_FALSE(apply_sweep(base, SweepVariable::SnrDb, INFINITY).snr_db.has_value());

    const Scenario sep = apply_sweep(base, SweepVariable::SeparationDeg, 4.0);
    EXPECT_EQ(sep.theta_deg, (std::vector<double>{-2.0, 2.0}));

    const Scenario fewer = apply_sweep(base, SweepVariable::Snapshots, 2.0);
    EXPECT_EQ(fewer.L, 2);
    EXPECT_EQ(fewer.phases->cols(), 2);
    EXPECT_THROW(apply_sweep(base, SweepVariable::Snapshots, 5.0), UsageError);
    EXPECT_THROW(apply_sweep(base, SweepVariable::Snapshots, 2.5), UsageError);

    const Scenario one = apply_sweep(base, SweepVariable::NumSources, 1.0);
    EXPECT_EQ(one.K, 1);
    EXPECT_EQ(one.theta_deg, (std::vector<double>{-2.0}));
    EXPECT_EQ(one.phases->rows(), 1);
    EXPECT_THROW(apply_sweep(base, SweepVariable::NumSources, 3.0), UsageError);
}

TEST(Sweep, NamesRoundTrip)
{
    for (auto v : {SweepVariable::SnrDb, SweepVariable::Snapshots, SweepVariable::SeparationDeg,
                   SweepVariable::NumSources})
        EXPECT_EQ(parse_sweep_variable(to_string(v)), v);
    for (auto e : {Estimator::Smart, Estimator::RootMusic})
        EXPECT_EQ(parse_estimator(to_string(e)), e);
    EXPECT_THROW(parse_sweep_variable("bogus"), UsageError);
    EXPECT_THROW(parse_estimator("acma"), UsageError);
}

TEST(TrialSeed, DistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::size_t s = 0; s < 10; ++s)
        for (std::size_t p = 0; p < 100; ++p)
            seen.insert(trial_seed(7, s, p));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(trial_seed(7, 3, 4), trial_seed(7, 3, 4));
    EXPECT_NE(trial_seed(7, 3, 4), trial_seed(8, 3, 4));
}

TEST(ExperimentSpec, Validation)
{
    ExperimentSpec spec;
    spec.scenario     = fixture_scenario();
    spec.sweep_values = {10.0, 20.0};
    EXPECT_NO_THROW(spec.validate());
    spec.trials = 0;
    EXPECT_THROW(spec.validate(), UsageError);
    spec.trials       = 1;
    spec.sweep_values = {};
    EXPECT_THROW(spec.validate(), UsageError);
    spec.sweep_values = {20.0, 10.0};
    EXPECT_THROW(spec.validate(), UsageError);
    spec.sweep_values        = {10.0};
    spec.scenario.omega      = {0, 1, 2, 4, 5, 6, 7, 8, 9, 14};
    spec.estimators          = {Estimator::RootMusic};
    EXPECT_THROW(spec.validate(), UsageError);
}

TEST(RunExperiment, NoiselessSingleTrialIsExact)
{
    ExperimentSpec spec;
    spec.scenario     = fixture_scenario();
    spec.sweep_values = {INFINITY};
    spec.estimators   = {Estimator::Smart, Estimator::RootMusic};
    const auto rows   = run_experiment(spec);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].estimator, Estimator::Smart);
    EXPECT_LT(rows[0].rmse_deg, 1e-4);
    EXPECT_EQ(rows[0].resolution_prob, 1.0);
    EXPECT_EQ(rows[0].trials, 1);
    EXPECT_EQ(rows[0].failures, 0);
    EXPECT_GT(rows[0].sigma_ratio_k, 1e3);
    EXPECT_TRUE(std::isnan(rows[0].mean_runtime_s));
    EXPECT_EQ(rows[1].estimator, Estimator::RootMusic);
    EXPECT_TRUE(std::isnan(rows[1].mean_iters));
    EXPECT_TRUE(std::isnan(rows[1].sigma_ratio_k));
}

TEST(RunExperiment, FailuresAreCountedAtNinetyDegrees)
{
    // Root-MUSIC cannot handle K >= M; every trial fails.
    ExperimentSpec spec;
    spec.scenario.n_sensors = 3;
    spec.scenario.K         = 3;
    spec.scenario.L         = 4;
    spec.scenario.theta_deg = {-40.0, 0.0, 40.0};
    spec.scenario.b         = {1.0, 1.0, 1.0};
    spec.sweep_values       = {INFINITY};
    spec.trials             = 2;
    spec.estimators         = {Estimator::RootMusic};
    const auto rows         = run_experiment(spec);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].failures, 2);
    EXPECT_EQ(rows[0].resolution_prob, 0.0);
    EXPECT_NEAR(rows[0].rmse_deg, 90.0 * std::sqrt(3.0), 1e-12);
}

TEST(RunExperiment, DeterministicAcrossRunsAndThreadCounts)
{
    ExperimentSpec spec;
    spec.scenario        = fixture_scenario();
    spec.scenario.phases.reset();
    spec.sweep_values    = {10.0, 20.0};
    spec.trials          = 4;
    spec.seed            = 99;
    spec.max_iter        = 300;
    spec.estimators      = {Estimator::Smart, Estimator::RootMusic};
    spec.threads         = 1;
    const std::string a  = csv(run_experiment(spec));
    spec.threads         = 3;
    const std::string b  = csv(run_experiment(spec));
    EXPECT_EQ(a, b);
    spec.seed           = 100;
    EXPECT_NE(a, csv(run_experiment(spec)));
}

TEST(RunExperiment, TimingIsOptIn)
{
    ExperimentSpec spec;
    spec.scenario      = fixture_scenario();
    spec.sweep_values  = {20.0};
    spec.max_iter      = 50;
    spec.record_timing = true;
    const auto rows    = run_experiment(spec);
    EXPECT_GT(rows[0].mean_runtime_s, 0.0);
}

TEST(MetricsCsv, HeaderAndFormatting)
{
    MetricsRow r;
    r.sweep_value     = 10;
    r.rmse_deg        = 0.5;
    r.resolution_prob = 1;
    r.mean_iters      = 100;
    r.mean_runtime_s  = std::numeric_limits<double>::quiet_NaN();
    r.sigma_ratio_k   = 2e6;
    r.trials          = 3;
    const std::string out = csv({r});
    EXPECT_EQ(out,
              "sweep_value,rmse_deg,resolution_prob,mean_iters,mean_runtime_s,sigma_ratio_k,trials,estimator,failures\n"
              "10,0.5,1,100,nan,2000000,3,smart,0\n");
}

TEST(Tightness, RowsAndRatios)
{
    ExperimentSpec spec = preset_experiment("tightness", 2);
    spec.sweep_values   = {30.0};
    const auto rows     = run_tightness(spec);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows)
    {
        EXPECT_EQ(r.sweep_value, 30.0);
        EXPECT_GT(r.ratio_gap, 1e3);
        EXPECT_GT(r.ratio_truth, 0.1);
        EXPECT_LT(r.ratio_truth, 10.0);
    }
    std::ostringstream os;
    write_tightness_csv(rows, os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "sweep_value,trial,ratio_truth,ratio_gap,converged");
}

TEST(ToeplitzSingularValues, Descending)
{
    SourceEnsemble s = testutil::fixture_ensemble();
    const RVec sv    = toeplitz_singular_values(toeplitz_truth(s, 8));
    EXPECT_TRUE(std::is_sorted(sv.begin(), sv.end(), std::greater<>()));
    EXPECT_LT(sv[2], 1e-10 * sv[0]);
}

TEST(Presets, AllValid)
{
    for (const auto& name : preset_names())
    {
        const ExperimentSpec spec = preset_experiment(name, 3);
        EXPECT_EQ(spec.trials, 3);
        EXPECT_NO_THROW(spec.validate()) << name;
    }
    EXPECT_THROW(preset_experiment("fig9", 1), UsageError);
    EXPECT_THROW(preset_experiment("snr", 0), UsageError);
    const ExperimentSpec loc = preset_experiment("localization", 1);
    EXPECT_EQ(loc.scenario.n_sensors, 5);
    EXPECT_NEAR(loc.scenario.b[1] * loc.scenario.b[1], 8.0, 1e-12);
}
