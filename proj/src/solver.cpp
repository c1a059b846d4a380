#include <smart/solver.hpp>

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace smart
{

SolverConfig SolverConfig::noiseless()
{
    SolverConfig cfg;
    cfg.rho0     = 1.0;
    cfg.adapt    = std::nullopt;
    cfg.max_iter = 10000;
    return cfg;
}

SolverConfig SolverConfig::noisy(Index N, Index L)
{
    SolverConfig cfg;
    cfg.rho0     = 1.0 / std::sqrt(static_cast<double>(N + L));
    cfg.adapt    = RhoAdaptation{};
    cfg.max_iter = 3000;
    return cfg;
}

SolverConfig SolverConfig::defaults_for(const ProblemSpec& spec)
{
    if (spec.mode == SolveMode::Feasibility)
        return noiseless();
    return noisy(spec.geometry.n_virtual(), spec.Y_masked.cols());
}

void SolverConfig::validate() const
{
    if (!(rho0 > 0.0))
        throw ContractError("SolverConfig: rho0 must be positive");
    if (!(eps_abs > 0.0) || !(eps_rel > 0.0))
        throw ContractError("SolverConfig: tolerances must be positive");
    if (max_iter < 1)
        throw ContractError("SolverConfig: max_iter must be >= 1");
    if (adapt)
    {
        if (!(adapt->mu > 1.0) || !(adapt->tau_inc > 1.0) ||
            !(adapt->tau_dec > 1.0))
            throw ContractError(
                "SolverConfig: adaptation constants must exceed 1");
    }
}

SolverState SolverState::zeros(const ProblemSpec& spec, double rho)
{
    const Index np = spec.geometry.half();
    const Index L  = spec.Y_masked.cols();
    SolverState s;
    s.X   = CMat::Zero(spec.geometry.n_virtual(), L);
    s.t   = ToeplitzParam::zero(np);
    s.rho = rho;
    s.Q.assign(static_cast<std::size_t>(L), CMat::Zero(2 * np, 2 * np));
    s.Lambda = s.Q;
    s.blocks = s.Q;
    return s;
}

void SolverState::refresh_blocks()
{
    blocks.resize(static_cast<std::size_t>(X.cols()));
    for (Index l = 0; l < X.cols(); ++l)
        blocks[static_cast<std::size_t>(l)] = assemble_block(X.col(l), t);
}

ProblemSpec build_problem(const Observation& obs, Index K,
                          std::optional<SolveMode> mode, Embedding embedding)
{
    if (K < 1)
        throw ContractError("build_problem: K must be >= 1");
    if (obs.Y.cols() < 1)
        throw ContractError("build_problem: no snapshots");
    const Index N = obs.geometry.n_virtual();
    if (obs.Y.rows() != N)
        throw DimensionError(fmt::format(
            "build_problem: data has {} rows, geometry {}", obs.Y.rows(), N));

    Index Np = std::max(N, 2 * K + 1);
    if (Np % 2 == 0)
        ++Np;

    const Index offset = embedding == Embedding::Centered ? (Np - N) / 2 : 0;
    std::vector<Index> omega = obs.geometry.omega();
    for (Index& q : omega)
        q += offset;

    ProblemSpec spec;
    spec.mode     = mode.value_or(obs.snr_db ? SolveMode::LeastSquares
                                             : SolveMode::Feasibility);
    spec.geometry = ArrayGeometry(Np, std::move(omega));
    spec.K        = K;
    spec.offset   = offset;
    spec.Y_masked = CMat::Zero(Np, obs.Y.cols());
    spec.Y_masked.middleRows(offset, N) = apply_mask(obs.Y, obs.geometry.omega());
    return spec;
}

void q_update(SolverState& state, Index K)
{
    const double inv_rho = 1.0 / state.rho;
    for (std::size_t l = 0; l < state.Q.size(); ++l)
        state.Q[l] = psd_rank_project(state.blocks[l] - inv_rho * state.Lambda[l], K);
}

namespace
{

CMat w_matrix(const SolverState& state, std::size_t l)
{
    return state.Q[l] + state.Lambda[l] / state.rho;
}

} // namespace

ToeplitzParam t_update(const SolverState& state)
{
    const Index np = state.t.size();
    const Index L  = static_cast<Index>(state.Q.size());
    CMat acc       = CMat::Zero(np, np);
    for (std::size_t l = 0; l < state.Q.size(); ++l)
    {
        const CMat W = w_matrix(state, l);
        acc += W.topLeftCorner(np, np).conjugate();
        acc += W.bottomRightCorner(np, np);
    }
    CVec t = toeplitz_adjoint(acc);
    t.array() /= toeplitz_weights(np).array().cast<Complex>();
    t /= static_cast<double>(2 * L);
    t[0] = Complex(t[0].real(), 0.0);
    return ToeplitzParam(std::move(t));
}

CMat x_update(const SolverState& state, const ProblemSpec& spec)
{
    const Index np = spec.geometry.half();
    const Index Np = spec.geometry.n_virtual();
    const RVec dH  = hankel_weights(np);
    const RVec obs = spec.geometry.mask();
    CMat X(Np, state.X.cols());
    for (Index l = 0; l < X.cols(); ++l)
    {
        const CMat W  = w_matrix(state, static_cast<std::size_t>(l));
        const CVec hw = hankel_adjoint(W.bottomLeftCorner(np, np));
        if (spec.mode == SolveMode::Feasibility)
        {
            for (Index q = 0; q < Np; ++q)
                X(q, l) = obs[q] > 0.0 ? spec.Y_masked(q, l) : hw[q] / dH[q];
        }
        else
        {
            for (Index q = 0; q < Np; ++q)
                X(q, l) = (spec.Y_masked(q, l) + state.rho * hw[q]) /
                          (obs[q] + state.rho * dH[q]);
        }
    }
    return X;
}

void lambda_update(SolverState& state)
{
    for (std::size_t l = 0; l < state.Lambda.size(); ++l)
    {
        CMat& Lam = state.Lambda[l];
        Lam += state.rho * (state.Q[l] - state.blocks[l]);
        Lam = (0.5 * (Lam + Lam.adjoint())).eval();
    }
}

Residuals residuals(const SolverState& state, const std::vector<CMat>& prev_blocks)
{
    Residuals r;
    for (std::size_t l = 0; l < state.Q.size(); ++l)
    {
        r.primal += (state.Q[l] - state.blocks[l]).norm();
        r.dual += state.rho * (state.blocks[l] - prev_blocks[l]).norm();
    }
    return r;
}

bool rho_adapt(SolverState& state, const Residuals& r, const RhoAdaptation& adapt)
{
    if (r.primal > adapt.mu * r.dual)
    {
        state.rho *= adapt.tau_inc;
        for (auto& Lam : state.Lambda)
            Lam *= adapt.tau_inc;
        return true;
    }
    if (r.dual > adapt.mu * r.primal)
    {
        state.rho /= adapt.tau_dec;
        for (auto& Lam : state.Lambda)
            Lam /= adapt.tau_dec;
        return true;
    }
    return false;
}

SolveReport solve(const ProblemSpec& spec, const SolverConfig& cfg)
{
    cfg.validate();
    if (spec.K < 1)
        throw ContractError("solve: K must be >= 1");
    if (spec.Y_masked.rows() != spec.geometry.n_virtual())
        throw DimensionError("solve: data rows do not match the aperture");
    if (2 * spec.K + 1 > spec.geometry.n_virtual())
        throw ContractError(fmt::format(
            "solve: aperture {} too small for K = {} (need >= 2K+1)",
            spec.geometry.n_virtual(), spec.K));

    const Index np = spec.geometry.half();
    const Index L  = spec.Y_masked.cols();
    SolverState s  = SolverState::zeros(spec, cfg.rho0);
    const double eps_floor =
        std::sqrt(static_cast<double>(L)) * 2.0 * static_cast<double>(np) * cfg.eps_abs;

    SolveReport report;
    for (int it = 1; it <= cfg.max_iter; ++it)
    {
        const std::vector<CMat> prev_blocks = s.blocks;
        const CMat X_prev                   = s.X;
        const CVec t_prev                   = s.t.values();
        const std::vector<CMat> Lambda_prev = s.Lambda;

        q_update(s, spec.K);
        s.t = t_update(s);
        s.X = x_update(s, spec);
        s.refresh_blocks();
        lambda_update(s);
        const Residuals r = residuals(s, prev_blocks);
        s.iter            = it;

        double sum_q = 0.0, sum_m = 0.0, sum_lam = 0.0, dlam = 0.0;
        for (std::size_t l = 0; l < s.Q.size(); ++l)
        {
            sum_q += s.Q[l].norm();
            sum_m += s.blocks[l].norm();
            sum_lam += s.Lambda[l].norm();
            dlam += (s.Lambda[l] - Lambda_prev[l]).squaredNorm();
        }
        const double succ = (s.X - X_prev).squaredNorm() +
                            (s.t.values() - t_prev).squaredNorm() + dlam;

        s.primal_hist.push_back(r.primal);
        s.dual_hist.push_back(r.dual);
        s.rho_hist.push_back(s.rho);
        s.succ_diff_hist.push_back(succ);

        const double eps_pri  = eps_floor + cfg.eps_rel * std::max(sum_q, sum_m);
        const double eps_dual = eps_floor + cfg.eps_rel * sum_lam;
        if (r.primal <= eps_pri && r.dual <= eps_dual)
        {
            report.converged = true;
            break;
        }
        if (cfg.adapt)
            rho_adapt(s, r, *cfg.adapt);
    }

    report.iterations     = s.iter;
    report.final_primal   = s.primal_hist.empty() ? 0.0 : s.primal_hist.back();
    report.final_dual     = s.dual_hist.empty() ? 0.0 : s.dual_hist.back();
    report.X_hat          = std::move(s.X);
    report.t_hat          = std::move(s.t);
    report.primal_hist    = std::move(s.primal_hist);
    report.dual_hist      = std::move(s.dual_hist);
    report.rho_hist       = std::move(s.rho_hist);
    report.succ_diff_hist = std::move(s.succ_diff_hist);
    return report;
}

void write_diagnostics_csv(const SolveReport& report, std::ostream& os)
{
    os << "iter,rho,primal,dual,succ_diff\n";
    for (std::size_t j = 0; j < report.primal_hist.size(); ++j)
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g},{:.17g}\n", j + 1,
                   report.rho_hist[j], report.primal_hist[j],
                   report.dual_hist[j], report.succ_diff_hist[j]);
}

} // namespace smart
