#include <gtest/gtest.h>

#include <sstream>

#include <smart/retrieval.hpp>
#include <smart/scenario_io.hpp>

#include "test_util.hpp"

using namespace smart;

namespace
{

const char* sla_text = R"(# sparse array
N = 15
omega = 1, 2, 3, 5, 6, 7, 8, 9, 10, 15
K = 2
theta_deg = -2, 1
b = 0.54, 1.30
L = 5
snr_db = 30
seed = 11
; row per source
phases = -0.63 0.70 2.45 2.54 0.83 | 2.32 -1.38 1.52 0.61 -0.36
)";

Scenario parse(const std::string& text)
{
    std::istringstream is(text);
    return read_scenario(is);
}

} // namespace

TEST(ScenarioFile, ParsesAllKeys)
{
    const Scenario sc = parse(sla_text);
    EXPECT_EQ(sc.n_sensors, 15);
    EXPECT_EQ(sc.omega, (std::vector<Index>{0, 1, 2, 4, 5, 6, 7, 8, 9, 14}));
    EXPECT_EQ(sc.K, 2);
    EXPECT_EQ(sc.theta_deg, (std::vector<double>{-2.0, 1.0}));
    EXPECT_EQ(sc.b, (std::vector<double>{0.54, 1.30}));
    EXPECT_EQ(sc.L, 5);
    EXPECT_EQ(*sc.snr_db, 30.0);
    EXPECT_EQ(sc.seed, 11u);
    ASSERT_TRUE(sc.phases.has_value());
    EXPECT_EQ(sc.phases->rows(), 2);
    EXPECT_EQ((*sc.phases)(1, 4), -0.36);
}

TEST(ScenarioFile, RoundTrip)
{
    const Scenario sc = parse(sla_text);
    std::ostringstream os;
    write_scenario(sc, os);
    const Scenario back = parse(os.str());
    EXPECT_EQ(back.omega, sc.omega);
    EXPECT_EQ(back.theta_deg, sc.theta_deg);
    EXPECT_EQ(back.b, sc.b);
    EXPECT_EQ(*back.phases, *sc.phases);
    std::ostringstream again;
    write_scenario(back, again);
    EXPECT_EQ(again.str(), os.str());
}

TEST(ScenarioFile, Errors)
{
    EXPECT_THROW(parse("N = fifteen\n"), UsageError);
    EXPECT_THROW(parse("K = 2\ntheta_deg = 1\n"), UsageError);
    EXPECT_THROW(parse("omega = 0, 1\n"), UsageError);
    EXPECT_THROW(parse("K = 2\nL = 2\nphases = 1 2 | 3\n"), UsageError);
    EXPECT_THROW(parse("this is not a key value line\n"), UsageError);
    EXPECT_THROW(load_scenario("/nonexistent/scenario.ini"), UsageError);
    EXPECT_FALSE(parse("snr_db = none\n").snr_db.has_value());
}

TEST(ExperimentFile, SweepKeys)
{
    std::istringstream is(std::string(sla_text) +
                          "trials = 7\nsweep = snr_db\nsweep_values = 10, 20, 30\n"
                          "estimators = smart\nmax_iter = 500\n");
    const ExperimentSpec spec = read_experiment(is);
    EXPECT_EQ(spec.trials, 7);
    EXPECT_EQ(spec.sweep, SweepVariable::SnrDb);
    EXPECT_EQ(spec.sweep_values, (std::vector<double>{10, 20, 30}));
    EXPECT_EQ(spec.estimators, (std::vector<Estimator>{Estimator::Smart}));
    EXPECT_EQ(*spec.max_iter, 500);
    EXPECT_EQ(spec.seed, 11u);

    std::istringstream bare(sla_text);
    const ExperimentSpec single = read_experiment(bare);
    EXPECT_EQ(single.sweep_values, (std::vector<double>{30.0}));

    std::istringstream bad(std::string(sla_text) + "sweep = temperature\n");
    EXPECT_THROW(read_experiment(bad), UsageError);
}

TEST(SolverConfigFile, OverridesBase)
{
    std::istringstream is("rho0 = 0.25\nadapt = false\nmax_iter = 42\neps_abs = 1e-6\n");
    const SolverConfig cfg = read_solver_config(is, SolverConfig::noisy(15, 3));
    EXPECT_EQ(cfg.rho0, 0.25);
    EXPECT_FALSE(cfg.adapt.has_value());
    EXPECT_EQ(cfg.max_iter, 42);
    EXPECT_EQ(cfg.eps_abs, 1e-6);
    EXPECT_EQ(cfg.eps_rel, 1e-8);

    std::istringstream mu("mu = 5\n");
    const SolverConfig with_mu = read_solver_config(mu, SolverConfig::noiseless());
    ASSERT_TRUE(with_mu.adapt.has_value());
    EXPECT_EQ(with_mu.adapt->mu, 5.0);

    std::istringstream bad("rho0 = -1\n");
    EXPECT_THROW(read_solver_config(bad, SolverConfig::noiseless()), UsageError);
}

TEST(DatasetFile, RoundTripIsExact)
{
    std::mt19937_64 rng(61);
    Scenario sc = parse(sla_text);
    const Realization r = realize(sc, rng);
    Dataset ds{r.obs, sc.K, r.truth};
    std::stringstream ss;
    write_dataset(ds, ss);
    const Dataset back = read_dataset(ss);
    EXPECT_EQ(back.obs.Y, ds.obs.Y);
    EXPECT_EQ(back.obs.geometry.omega(), ds.obs.geometry.omega());
    EXPECT_EQ(*back.obs.snr_db, 30.0);
    EXPECT_EQ(back.K, 2);
    ASSERT_TRUE(back.truth.has_value());
    EXPECT_LT((back.truth->theta - ds.truth->theta).norm(), 1e-15);
    EXPECT_EQ(back.truth->phi, ds.truth->phi);

    std::istringstream junk("{\"N\": 3}");
    EXPECT_THROW(read_dataset(junk), UsageError);
}

TEST(ResultJson, Keys)
{
    SolveReport rep;
    rep.converged  = true;
    rep.iterations = 12;
    ProblemSpec spec;
    spec.geometry = ArrayGeometry::uniform(5);
    EstimationResult est;
    est.theta_hat = (RVec(1) << deg2rad(10.0)).finished();
    est.b_hat     = RVec::Ones(1);
    est.phi_hat   = CMat::Constant(1, 2, Complex(0.0, 1.0));
    std::ostringstream os;
    write_result_json(est, rep, spec, os);
    const std::string s = os.str();
    for (const char* key : {"\"theta_hat\"", "\"b_hat\"", "\"phi_hat\"", "\"fit_residual\"",
                            "\"diagnostics\"", "\"converged\"", "\"iterations\""})
        EXPECT_NE(s.find(key), std::string::npos) << key;
    EXPECT_NE(s.find("10.0"), std::string::npos);
}
