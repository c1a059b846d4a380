#include <smart/scenario_io.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <json.hpp>

namespace smart
{

namespace pt = boost::property_tree;
using json   = nlohmann::json;

namespace
{

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError(fmt::format("cannot open '{}'", path));
    return in;
}

pt::ptree parse_ini(std::istream& is)
{
    // Boost's INI reader only knows ';' comments.
    std::ostringstream filtered;
    std::string line;
    while (std::getline(is, line))
    {
        const auto pos = line.find_first_not_of(" \t");
        if (pos != std::string::npos && line[pos] == '#')
            continue;
        filtered << line << '\n';
    }
    std::istringstream in(filtered.str());
    pt::ptree tree;
    try
    {
        pt::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error& e)
    {
        throw UsageError(fmt::format("malformed config: {}", e.message()));
    }
    return tree;
}

double to_double(const std::string& raw, const std::string& key)
{
    const std::string s = boost::algorithm::trim_copy(raw);
    const std::string lower = boost::algorithm::to_lower_copy(s);
    if (lower == "inf" || lower == "+inf" || lower == "infinity")
        return std::numeric_limits<double>::infinity();
    try
    {
        std::size_t used = 0;
        const double v   = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception&)
    {
        throw UsageError(fmt::format("key '{}': '{}' is not a number", key, s));
    }
}

long long to_integer(const std::string& raw, const std::string& key)
{
    const double v = to_double(raw, key);
    if (!std::isfinite(v) || v != std::floor(v))
        throw UsageError(fmt::format("key '{}': '{}' is not an integer", key, raw));
    return static_cast<long long>(v);
}

std::vector<std::string> split_list(const std::string& raw, const char* seps)
{
    std::vector<std::string> parts;
    boost::algorithm::split(parts, raw, boost::algorithm::is_any_of(seps),
                            boost::algorithm::token_compress_on);
    std::vector<std::string> out;
    for (auto& p : parts)
    {
        boost::algorithm::trim(p);
        if (!p.empty())
            out.push_back(p);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& raw, const std::string& key)
{
    std::vector<double> out;
    for (const auto& p : split_list(raw, ", \t"))
        out.push_back(to_double(p, key));
    return out;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key)
{
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/')))
        return boost::algorithm::trim_copy(*v);
    return std::nullopt;
}

bool to_bool(const std::string& raw, const std::string& key)
{
    const std::string s = boost::algorithm::to_lower_copy(raw);
    if (s == "true" || s == "on" || s == "yes" || s == "1")
        return true;
    if (s == "false" || s == "off" || s == "no" || s == "0")
        return false;
    throw UsageError(fmt::format("key '{}': '{}' is not a boolean", key, raw));
}

Scenario scenario_from_tree(const pt::ptree& tree)
{
    Scenario sc;
    if (auto v = get(tree, "N"))
        sc.n_sensors = to_integer(*v, "N");
    if (auto v = get(tree, "K"))
        sc.K = to_integer(*v, "K");
    if (auto v = get(tree, "L"))
        sc.L = to_integer(*v, "L");
    if (auto v = get(tree, "omega"))
        for (double q : to_doubles(*v, "omega"))
        {
            if (q != std::floor(q))
                throw UsageError("key 'omega': sensor indices must be integers");
            sc.omega.push_back(static_cast<Index>(q) - 1);
        }
    if (auto v = get(tree, "theta_deg"))
        sc.theta_deg = to_doubles(*v, "theta_deg");
    if (auto v = get(tree, "b"))
        sc.b = to_doubles(*v, "b");
    if (auto v = get(tree, "snr_db"))
    {
        const std::string lower = boost::algorithm::to_lower_copy(*v);
        if (lower != "none" && lower != "noiseless")
            sc.snr_db = to_double(*v, "snr_db");
    }
    if (auto v = get(tree, "seed"))
        sc.seed = static_cast<std::uint64_t>(to_integer(*v, "seed"));
    if (auto v = get(tree, "b_min"))
        sc.b_min = to_double(*v, "b_min");
    if (auto v = get(tree, "b_max"))
        sc.b_max = to_double(*v, "b_max");
    if (auto v = get(tree, "max_abs_theta_deg"))
        sc.max_abs_theta_deg = to_double(*v, "max_abs_theta_deg");
    if (auto v = get(tree, "phases"))
    {
        std::vector<std::vector<double>> rows;
        for (const auto& r : split_list(*v, "|"))
            rows.push_back(to_doubles(r, "phases"));
        if (rows.empty())
            throw UsageError("key 'phases': empty matrix");
        RMat phi(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
        for (std::size_t k = 0; k < rows.size(); ++k)
        {
            if (rows[k].size() != rows[0].size())
                throw UsageError("key 'phases': ragged rows");
            for (std::size_t l = 0; l < rows[k].size(); ++l)
                phi(static_cast<Index>(k), static_cast<Index>(l)) = rows[k][l];
        }
        sc.phases = std::move(phi);
    }
    sc.validate();
    return sc;
}

template <typename Seq>
std::string join(const Seq& seq)
{
    return fmt::format("{}", fmt::join(seq, ", "));
}

json matrix_to_json(const RMat& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i)
    {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RMat matrix_from_json(const json& j, const char* key)
{
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw UsageError(fmt::format("dataset: '{}' must be a nonempty 2-D array", key));
    RMat m(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        if (j[i].size() != j[0].size())
            throw UsageError(fmt::format("dataset: '{}' has ragged rows", key));
        for (std::size_t c = 0; c < j[i].size(); ++c)
            m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
    return m;
}

} // namespace

Scenario read_scenario(std::istream& is)
{
    return scenario_from_tree(parse_ini(is));
}

Scenario load_scenario(const std::string& path)
{
    auto in = open_input(path);
    return read_scenario(in);
}

void write_scenario(const Scenario& sc, std::ostream& os)
{
    fmt::print(os, "N = {}\n", sc.n_sensors);
    if (!sc.omega.empty())
    {
        std::vector<Index> one_based(sc.omega);
        for (auto& q : one_based)
            ++q;
        fmt::print(os, "omega = {}\n", fmt::join(one_based, ", "));
    }
    fmt::print(os, "K = {}\n", sc.K);
    if (!sc.theta_deg.empty())
        fmt::print(os, "theta_deg = {}\n", join(sc.theta_deg));
    if (!sc.b.empty())
        fmt::print(os, "b = {}\n", join(sc.b));
    fmt::print(os, "L = {}\n", sc.L);
    if (sc.snr_db)
        fmt::print(os, "snr_db = {}\n", *sc.snr_db);
    fmt::print(os, "seed = {}\n", sc.seed);
    if (sc.phases)
    {
        std::vector<std::string> rows;
        for (Index k = 0; k < sc.phases->rows(); ++k)
        {
            std::vector<double> r(sc.phases->row(k).begin(), sc.phases->row(k).end());
            rows.push_back(fmt::format("{}", fmt::join(r, " ")));
        }
        fmt::print(os, "phases = {}\n", fmt::join(rows, " | "));
    }
    if (sc.theta_deg.empty())
        fmt::print(os, "max_abs_theta_deg = {}\n", sc.max_abs_theta_deg);
    if (sc.b.empty())
        fmt::print(os, "b_min = {}\nb_max = {}\n", sc.b_min, sc.b_max);
}

ExperimentSpec read_experiment(std::istream& is)
{
    const pt::ptree tree = parse_ini(is);
    ExperimentSpec spec;
    spec.scenario = scenario_from_tree(tree);
    spec.seed     = spec.scenario.seed;
    if (auto v = get(tree, "trials"))
        spec.trials = static_cast<int>(to_integer(*v, "trials"));
    if (auto v = get(tree, "sweep"))
        spec.sweep = parse_sweep_variable(*v);
    if (auto v = get(tree, "sweep_values"))
        spec.sweep_values = to_doubles(*v, "sweep_values");
    if (auto v = get(tree, "estimators"))
    {
        spec.estimators.clear();
        for (const auto& e : split_list(*v, ", \t"))
            spec.estimators.push_back(parse_estimator(e));
    }
    if (auto v = get(tree, "max_iter"))
        spec.max_iter = static_cast<int>(to_integer(*v, "max_iter"));
    if (spec.sweep_values.empty())
    {
        // A bare scenario is a single point at its own setting.
        switch (spec.sweep)
        {
        case SweepVariable::SnrDb:
            spec.sweep_values = {spec.scenario.snr_db.value_or(
                std::numeric_limits<double>::infinity())};
            break;
        case SweepVariable::Snapshots:
            spec.sweep_values = {static_cast<double>(spec.scenario.L)};
            break;
        case SweepVariable::NumSources:
            spec.sweep_values = {static_cast<double>(spec.scenario.K)};
            break;
        case SweepVariable::SeparationDeg:
            throw UsageError("sweep 'separation_deg' needs sweep_values");
        }
    }
    return spec;
}

ExperimentSpec load_experiment(const std::string& path)
{
    auto in = open_input(path);
    return read_experiment(in);
}

SolverConfig read_solver_config(std::istream& is, const SolverConfig& base)
{
    const pt::ptree tree = parse_ini(is);
    SolverConfig cfg     = base;
    if (auto v = get(tree, "rho0"))
        cfg.rho0 = to_double(*v, "rho0");
    if (auto v = get(tree, "adapt"))
        cfg.adapt = to_bool(*v, "adapt") ? std::optional<RhoAdaptation>(cfg.adapt.value_or(RhoAdaptation{}))
                                         : std::nullopt;
    for (const char* key : {"mu", "tau_inc", "tau_dec"})
        if (auto v = get(tree, key))
        {
            if (!cfg.adapt)
                cfg.adapt = RhoAdaptation{};
            const double x = to_double(*v, key);
            if (std::string(key) == "mu")
                cfg.adapt->mu = x;
            else if (std::string(key) == "tau_inc")
                cfg.adapt->tau_inc = x;
            else
                cfg.adapt->tau_dec = x;
        }
    if (auto v = get(tree, "eps_abs"))
        cfg.eps_abs = to_double(*v, "eps_abs");
    if (auto v = get(tree, "eps_rel"))
        cfg.eps_rel = to_double(*v, "eps_rel");
    if (auto v = get(tree, "max_iter"))
        cfg.max_iter = static_cast<int>(to_integer(*v, "max_iter"));
    try
    {
        cfg.validate();
    }
    catch (const ContractError& e)
    {
        throw UsageError(e.what());
    }
    return cfg;
}

SolverConfig load_solver_config(const std::string& path, const SolverConfig& base)
{
    auto in = open_input(path);
    return read_solver_config(in, base);
}

void write_dataset(const Dataset& ds, std::ostream& os)
{
    json j;
    j["N"] = ds.obs.geometry.n_virtual();
    j["L"] = ds.obs.Y.cols();
    j["K"] = ds.K;
    std::vector<Index> omega(ds.obs.geometry.omega());
    for (auto& q : omega)
        ++q;
    j["omega"]  = omega;
    j["snr_db"] = ds.obs.snr_db ? json(*ds.obs.snr_db) : json(nullptr);
    j["Y_re"]   = matrix_to_json(ds.obs.Y.real());
    j["Y_im"]   = matrix_to_json(ds.obs.Y.imag());
    if (ds.truth)
    {
        std::vector<double> th;
        for (double t : ds.truth->theta)
            th.push_back(rad2deg(t));
        j["truth"] = {{"theta_deg", th},
                      {"b", std::vector<double>(ds.truth->b.begin(), ds.truth->b.end())},
                      {"phi", matrix_to_json(ds.truth->phi)}};
    }
    os << j.dump(2) << '\n';
}

Dataset read_dataset(std::istream& is)
{
    json j;
    try
    {
        is >> j;
        Dataset ds;
        const Index N = j.at("N").get<Index>();
        std::vector<Index> omega;
        for (Index q : j.at("omega").get<std::vector<Index>>())
            omega.push_back(q - 1);
        ds.obs.geometry = ArrayGeometry(N, std::move(omega));
        const RMat re   = matrix_from_json(j.at("Y_re"), "Y_re");
        const RMat im   = matrix_from_json(j.at("Y_im"), "Y_im");
        if (re.rows() != N || im.rows() != N || re.cols() != im.cols())
            throw UsageError("dataset: Y_re/Y_im shape does not match N");
        ds.obs.Y = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
        if (!j.at("snr_db").is_null())
            ds.obs.snr_db = j.at("snr_db").get<double>();
        ds.K = j.at("K").get<Index>();
        if (j.contains("truth"))
        {
            const auto& t = j["truth"];
            SourceEnsemble& src = ds.truth.emplace();
            const auto th = t.at("theta_deg").get<std::vector<double>>();
            const auto b  = t.at("b").get<std::vector<double>>();
            src.theta.resize(static_cast<Index>(th.size()));
            src.b.resize(static_cast<Index>(b.size()));
            for (std::size_t k = 0; k < th.size(); ++k)
                src.theta[static_cast<Index>(k)] = deg2rad(th[k]);
            for (std::size_t k = 0; k < b.size(); ++k)
                src.b[static_cast<Index>(k)] = b[k];
            src.phi = matrix_from_json(t.at("phi"), "phi");
        }
        return ds;
    }
    catch (const json::exception& e)
    {
        throw UsageError(fmt::format("malformed dataset: {}", e.what()));
    }
    catch (const ContractError& e)
    {
        throw UsageError(fmt::format("malformed dataset: {}", e.what()));
    }
}

Dataset load_dataset(const std::string& path)
{
    auto in = open_input(path);
    return read_dataset(in);
}

void write_result_json(const EstimationResult& res, const SolveReport& report,
                       const ProblemSpec& spec, std::ostream& os)
{
    json j;
    std::vector<double> th;
    for (double t : res.theta_hat)
        th.push_back(rad2deg(t));
    j["theta_hat"] = th;
    j["b_hat"]     = std::vector<double>(res.b_hat.begin(), res.b_hat.end());
    json phi       = json::array();
    for (Index k = 0; k < res.phi_hat.rows(); ++k)
    {
        json row = json::array();
        for (Index l = 0; l < res.phi_hat.cols(); ++l)
            row.push_back({res.phi_hat(k, l).real(), res.phi_hat(k, l).imag()});
        phi.push_back(std::move(row));
    }
    j["phi_hat"]      = std::move(phi);
    j["fit_residual"] = res.fit_residual;
    j["diagnostics"]  = {
        {"converged", report.converged},
        {"iterations", report.iterations},
        {"final_primal", report.final_primal},
        {"final_dual", report.final_dual},
        {"virtual_aperture", spec.geometry.n_virtual()},
        {"mode", spec.mode == SolveMode::Feasibility ? "feasibility" : "least_squares"},
        {"b_clamped", res.b_clamped},
        {"degenerate_phases", res.degenerate_phases},
    };
    os << j.dump(2) << '\n';
}

} // namespace smart
