#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("smart_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(SMART_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status      = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

const char* two_source_scenario = "N = 15\nK = 2\ntheta_deg = -2, 1\nb = 1.79, 2.62\nL = 3\n"
                                  "snr_db = 20\nseed = 5\n";

} // namespace

TEST(Cli, UsageErrors)
{
    const fs::path d = scratch_dir("usage");
    write(d / "exp.ini", std::string(two_source_scenario) + "trials = 0\n");
    EXPECT_EQ(run("mc --config " + (d / "exp.ini").string()), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("mc --config /nonexistent.ini"), 2);
    EXPECT_EQ(run("plot-data --figure fig42"), 2);
    write(d / "broken.ini", "N = abc\n");
    EXPECT_EQ(run("synth --config " + (d / "broken.ini").string() + " --out " + d.string()), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SynthIsDeterministic)
{
    const fs::path d = scratch_dir("synth");
    write(d / "scen.ini", two_source_scenario);
    ASSERT_EQ(run("synth --config " + (d / "scen.ini").string() + " --out " + (d / "a").string()), 0);
    ASSERT_EQ(run("synth --config " + (d / "scen.ini").string() + " --out " + (d / "b").string()), 0);
    EXPECT_EQ(slurp(d / "a" / "data.json"), slurp(d / "b" / "data.json"));
    EXPECT_EQ(slurp(d / "a" / "scenario.ini"), slurp(d / "b" / "scenario.ini"));
    EXPECT_FALSE(slurp(d / "a" / "data.json").empty());
}

TEST(Cli, SolveWritesResultAndDiagnostics)
{
    const fs::path d = scratch_dir("solve");
    write(d / "scen.ini", two_source_scenario);
    ASSERT_EQ(run("synth --config " + (d / "scen.ini").string() + " --out " + d.string()), 0);
    ASSERT_EQ(run("solve --config " + (d / "data.json").string() + " --out " + (d / "res.json").string() +
                  " --diagnostics " + (d / "diag.csv").string()),
              0);
    const auto j = nlohmann::json::parse(slurp(d / "res.json"));
    ASSERT_EQ(j["theta_hat"].size(), 2u);
    EXPECT_NEAR(j["theta_hat"][0].get<double>(), -2.0, 1.5);
    EXPECT_NEAR(j["theta_hat"][1].get<double>(), 1.0, 1.5);
    EXPECT_EQ(j["phi_hat"].size(), 2u);
    EXPECT_EQ(j["phi_hat"][0].size(), 3u);
    EXPECT_TRUE(j["diagnostics"]["converged"].is_boolean());
    EXPECT_EQ(slurp(d / "diag.csv").rfind("iter,rho,primal,dual,succ_diff\n", 0), 0u);

    write(d / "solver.ini", "max_iter = 0\n");
    EXPECT_EQ(run("solve --config " + (d / "data.json").string() + " --solver " + (d / "solver.ini").string()), 2);
    EXPECT_EQ(run("solve --config " + (d / "data.json").string() + " --sources 0"), 2);
}

TEST(Cli, SolveLocalizesMoreSourcesThanSensors)
{
    const fs::path d = scratch_dir("localize");
    write(d / "scen.ini",
          "N = 5\nK = 6\ntheta_deg = -70, -40, -15, 10, 30, 50\n"
          "b = 1.4142135623730951, 2.8284271247461903, 1, 1.7320508075688772, 2, 2.6457513110645907\n"
          "L = 20\nseed = 1\n");
    ASSERT_EQ(run("synth --config " + (d / "scen.ini").string() + " --out " + d.string()), 0);
    ASSERT_EQ(run("solve --config " + (d / "data.json").string() + " --out " + (d / "res.json").string()), 0);
    const auto j         = nlohmann::json::parse(slurp(d / "res.json"));
    const double truth[] = {-70, -40, -15, 10, 30, 50};
    ASSERT_EQ(j["theta_hat"].size(), 6u);
    for (std::size_t k = 0; k < 6; ++k)
        EXPECT_NEAR(j["theta_hat"][k].get<double>(), truth[k], 0.5);
    EXPECT_EQ(j["diagnostics"]["virtual_aperture"].get<int>(), 13);
}

TEST(Cli, McIsByteIdenticalAcrossRuns)
{
    const fs::path d = scratch_dir("mc");
    write(d / "exp.ini", std::string(two_source_scenario) + "trials = 3\nsweep = snr_db\n"
                                                             "sweep_values = 10, 30\nestimators = smart, root_music\n");
    const std::string base = "mc --config " + (d / "exp.ini").string() + " --seed 4 --max-iter 400 --out ";
    ASSERT_EQ(run(base + (d / "a.csv").string()), 0);
    ASSERT_EQ(run(base + (d / "b.csv").string()), 0);
    const std::string a = slurp(d / "a.csv");
    EXPECT_EQ(a, slurp(d / "b.csv"));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);

    ASSERT_EQ(run("mc --config " + (d / "exp.ini").string() + " --snapshots 2,3 --trials 1 --out " +
                  (d / "c.csv").string()),
              0);
    EXPECT_EQ(slurp(d / "c.csv").find("\n2,"), slurp(d / "c.csv").find('\n'));
}

TEST(Cli, TightnessAndPlotData)
{
    const fs::path d = scratch_dir("plot");
    ASSERT_EQ(run("tightness --trials 1 --snr 20 --out " + (d / "t.csv").string()), 0);
    EXPECT_EQ(slurp(d / "t.csv").rfind("sweep_value,trial,ratio_truth,ratio_gap,converged\n", 0), 0u);
    ASSERT_EQ(run("plot-data --figure separation --trials 1 --max-iter 200 --out " + (d / "s.csv").string()), 0);
    const std::string s = slurp(d / "s.csv");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 8 * 2);
}
