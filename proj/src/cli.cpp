#include <smart/cli.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <smart/baselines.hpp>
#include <smart/harness.hpp>
#include <smart/retrieval.hpp>
#include <smart/scenario_io.hpp>
#include <smart/solver.hpp>

namespace smart
{

namespace
{

namespace fs = std::filesystem;

// Writes to a file, or to stdout when the path is empty or "-".
class Output
{
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-")
            return;
        const fs::path p(path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        file_.open(path, std::ios::binary);
        if (!file_)
            throw UsageError(fmt::format("cannot write '{}'", path));
    }

    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct McOptions
{
    std::string config;
    std::string figure;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out;
    std::string estimators;
    std::optional<int> max_iter;
    std::vector<double> snr;
    std::vector<double> snapshots;
    bool timing      = false;
    unsigned threads = 0;
};

void add_mc_options(CLI::App* cmd, McOptions& o)
{
    cmd->add_option("--config", o.config, "experiment file");
    cmd->add_option("--figure", o.figure, "built-in experiment name");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per point");
    cmd->add_option("--out", o.out, "output CSV (default stdout)");
    cmd->add_option("--estimators", o.estimators, "comma list: smart,root_music");
    cmd->add_option("--max-iter", o.max_iter, "ADMM iteration cap");
    cmd->add_option("--snr", o.snr, "sweep SNR values (dB)")->delimiter(',');
    cmd->add_option("--snapshots", o.snapshots, "sweep snapshot counts")->delimiter(',');
    cmd->add_flag("--timing", o.timing, "record wall-clock runtimes");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentSpec resolve_experiment(const McOptions& o, const std::string& default_figure)
{
    if (!o.config.empty() && !o.figure.empty())
        throw UsageError("give either --config or --figure, not both");
    ExperimentSpec spec;
    if (!o.config.empty())
        spec = load_experiment(o.config);
    else if (!o.figure.empty() || !default_figure.empty())
        spec = preset_experiment(o.figure.empty() ? default_figure : o.figure, o.trials.value_or(20));
    else
        throw UsageError("--config or --figure is required");

    if (o.trials)
        spec.trials = *o.trials;
    if (o.seed)
        spec.seed = *o.seed;
    if (o.max_iter)
        spec.max_iter = *o.max_iter;
    if (!o.estimators.empty())
    {
        spec.estimators.clear();
        std::stringstream ss(o.estimators);
        std::string name;
        while (std::getline(ss, name, ','))
            if (!name.empty())
                spec.estimators.push_back(parse_estimator(name));
    }
    if (!o.snr.empty() && !o.snapshots.empty())
        throw UsageError("--snr and --snapshots each define the sweep; pick one");
    if (!o.snr.empty())
    {
        spec.sweep        = SweepVariable::SnrDb;
        spec.sweep_values = o.snr;
    }
    if (!o.snapshots.empty())
    {
        spec.sweep        = SweepVariable::Snapshots;
        spec.sweep_values = o.snapshots;
    }
    spec.record_timing = o.timing;
    spec.threads       = o.threads;
    spec.validate();
    return spec;
}

int cmd_synth(const std::string& config, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed)
{
    Scenario sc = load_scenario(config);
    if (seed)
        sc.seed = *seed;
    std::mt19937_64 rng(sc.seed);
    const Realization r = realize(sc, rng);

    fs::create_directories(out_dir);
    Output scen((fs::path(out_dir) / "scenario.ini").string());
    write_scenario(sc, scen.stream());
    Dataset ds{r.obs, sc.K, r.truth};
    Output data((fs::path(out_dir) / "data.json").string());
    write_dataset(ds, data.stream());
    return 0;
}

struct SolveOptions
{
    std::string config;
    std::string solver;
    std::optional<int> max_iter;
    std::optional<Index> sources;
    std::string mode;
    std::string out;
    std::string diagnostics;
};

int cmd_solve(const SolveOptions& o)
{
    const Dataset ds = load_dataset(o.config);
    const Index K    = o.sources.value_or(ds.K);
    if (K < 1)
        throw UsageError(fmt::format("--sources must be positive, got {}", K));
    std::optional<SolveMode> mode;
    if (o.mode == "feasibility")
        mode = SolveMode::Feasibility;
    else if (o.mode == "least_squares")
        mode = SolveMode::LeastSquares;
    else if (!o.mode.empty())
        throw UsageError(fmt::format("unknown mode '{}'", o.mode));

    const ProblemSpec spec = build_problem(ds.obs, K, mode);
    SolverConfig cfg       = SolverConfig::defaults_for(spec);
    if (!o.solver.empty())
        cfg = load_solver_config(o.solver, cfg);
    if (o.max_iter)
        cfg.max_iter = *o.max_iter;
    try
    {
        cfg.validate();
    }
    catch (const ContractError& e)
    {
        throw UsageError(e.what());
    }

    const SolveReport rep      = solve(spec, cfg);
    const EstimationResult est = estimate_parameters(rep, spec);
    if (!rep.converged)
        std::cerr << fmt::format("warning: not converged after {} iterations "
                                 "(primal {:.3g}, dual {:.3g})\n",
                                 rep.iterations, rep.final_primal, rep.final_dual);
    Output out(o.out);
    write_result_json(est, rep, spec, out.stream());
    if (!o.diagnostics.empty())
    {
        Output diag(o.diagnostics);
        write_diagnostics_csv(rep, diag.stream());
    }
    return 0;
}

int cmd_mc(const McOptions& o)
{
    const ExperimentSpec spec = resolve_experiment(o, "");
    const auto rows           = run_experiment(spec);
    Output out(o.out);
    write_metrics_csv(rows, out.stream());
    return 0;
}

int cmd_tightness(const McOptions& o)
{
    const ExperimentSpec spec = resolve_experiment(o, "tightness");
    const auto rows           = run_tightness(spec);
    Output out(o.out);
    write_tightness_csv(rows, out.stream());
    return 0;
}

int cmd_plot_data(McOptions o)
{
    if (o.figure.empty())
        throw UsageError(fmt::format("--figure is required; one of: {}",
                                     fmt::join(preset_names(), ", ")));
    if (!o.config.empty())
        throw UsageError("plot-data takes --figure, not --config");
    if (o.figure == "tightness")
        return cmd_tightness(o);
    return cmd_mc(o);
}

} // namespace

int cli_main(int argc, char** argv)
{
    CLI::App app{"Direction-of-arrival estimation of constant-modulus sources "
                 "by structured matrix recovery"};
    app.require_subcommand(1);

    std::string synth_config, synth_out = ".";
    std::optional<std::uint64_t> synth_seed;
    auto* synth = app.add_subcommand("synth", "draw a scenario and write scenario.ini + data.json");
    synth->add_option("--config", synth_config, "scenario file")->required();
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_seed, "override the scenario seed");

    SolveOptions so;
    auto* solve_cmd = app.add_subcommand("solve", "estimate DOAs, moduli and phases from a dataset");
    solve_cmd->add_option("--config", so.config, "dataset JSON")->required();
    solve_cmd->add_option("--solver", so.solver, "solver settings file");
    solve_cmd->add_option("--max-iter", so.max_iter, "ADMM iteration cap");
    solve_cmd->add_option("--sources", so.sources, "number of sources (default from dataset)");
    solve_cmd->add_option("--mode", so.mode, "feasibility or least_squares");
    solve_cmd->add_option("--out", so.out, "result JSON (default stdout)");
    solve_cmd->add_option("--diagnostics", so.diagnostics, "per-iteration CSV");

    McOptions mc_opts, tight_opts, plot_opts;
    auto* mc = app.add_subcommand("mc", "Monte Carlo sweep to CSV");
    add_mc_options(mc, mc_opts);
    auto* tight = app.add_subcommand("tightness", "per-trial singular-value ratios to CSV");
    add_mc_options(tight, tight_opts);
    auto* plot = app.add_subcommand("plot-data", "CSV for a built-in figure");
    add_mc_options(plot, plot_opts);

    try
    {
        app.parse(argc, argv);
        if (*synth)
            return cmd_synth(synth_config, synth_out, synth_seed);
        if (*solve_cmd)
            return cmd_solve(so);
        if (*mc)
            return cmd_mc(mc_opts);
        if (*tight)
            return cmd_tightness(tight_opts);
        if (*plot)
            return cmd_plot_data(plot_opts);
    }
    catch (const CLI::Success& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return 2;
    }
    catch (const UsageError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const fs::filesystem_error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

} // namespace smart
