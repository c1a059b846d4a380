#ifndef SMART_SCENARIO_IO_HPP
#define SMART_SCENARIO_IO_HPP

#include <iosfwd>
#include <string>

#include <smart/harness.hpp>
#include <smart/retrieval.hpp>
#include <smart/solver.hpp>

namespace smart
{

//
// Flat key = value text files (INI syntax, full-line ';' or '#' comments).
// Lists are comma separated; phase matrices separate rows with '|':
//
//   phases = -2.4 -1.52 1.90 | -1.45 -1.58 1.22
//
// Angles are in degrees and sensor indices are 1-based in every file.
// Parse failures throw UsageError.
//

Scenario read_scenario(std::istream& is);
Scenario load_scenario(const std::string& path);
void write_scenario(const Scenario& sc, std::ostream& os);

/// Scenario keys plus: trials, sweep, sweep_values, estimators, max_iter.
ExperimentSpec read_experiment(std::istream& is);
ExperimentSpec load_experiment(const std::string& path);

/// Keys: rho0, adapt (true/false), mu, tau_inc, tau_dec, eps_abs, eps_rel,
/// max_iter. Missing keys keep the values of `base`.
SolverConfig read_solver_config(std::istream& is, const SolverConfig& base);
SolverConfig load_solver_config(const std::string& path, const SolverConfig& base);

///
/// Dataset file (JSON): the observation plus, when known, the truth.
///
struct Dataset
{
    Observation obs;
    Index K = 1;
    std::optional<SourceEnsemble> truth;
};

void write_dataset(const Dataset& ds, std::ostream& os);
Dataset read_dataset(std::istream& is);
Dataset load_dataset(const std::string& path);

/// EstimationResult as JSON (angles in degrees); solver diagnostics go
/// under "diagnostics".
void write_result_json(const EstimationResult& res, const SolveReport& report,
                       const ProblemSpec& spec, std::ostream& os);

} // namespace smart

#endif // SMART_SCENARIO_IO_HPP
