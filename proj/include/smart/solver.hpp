#ifndef SMART_SOLVER_HPP
#define SMART_SOLVER_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include <smart/common.hpp>
#include <smart/signal_model.hpp>
#include <smart/structured_ops.hpp>

namespace smart
{

enum class SolveMode
{
    Feasibility,  ///< X pinned to the data on omega
    LeastSquares, ///< min ||P_omega(Y - X)||_F^2
};

///
/// Problem handed to the ADMM engine. The data live on an odd virtual
/// aperture N' with observed rows `geometry.omega()`; every other row of
/// `Y_masked` is zero.
///
struct ProblemSpec
{
    SolveMode mode = SolveMode::LeastSquares;
    ArrayGeometry geometry;
    Index K = 1;
    CMat Y_masked;
    /// Virtual row holding physical sensor 1. Nonzero only for centered
    /// embeddings; phases recovered on the virtual aperture are referenced
    /// to this row.
    Index offset = 0;
};

/// Placement of the physical array inside an enlarged virtual aperture.
enum class Embedding
{
    Leading,  ///< physical rows first, zero padding after them
    Centered, ///< zero padding split evenly on both sides
};

/// Residual-balancing penalty update.
struct RhoAdaptation
{
    double mu      = 10.0;
    double tau_inc = 2.0;
    double tau_dec = 2.0;
};

struct SolverConfig
{
    double rho0 = 1.0;
    std::optional<RhoAdaptation> adapt;
    double eps_abs = 1e-8;
    double eps_rel = 1e-8;
    int max_iter   = 3000;

    /// Fixed rho = 1, no adaptation, 10^4 iterations.
    static SolverConfig noiseless();
    /// rho0 = 1/sqrt(N + L), adaptation on, 3000 iterations.
    static SolverConfig noisy(Index N, Index L);
    /// One of the above depending on the problem mode.
    static SolverConfig defaults_for(const ProblemSpec& spec);

    /// Throws ContractError on nonpositive rho0, tolerances or max_iter.
    void validate() const;
};

///
/// ADMM iterates. `blocks` caches M(X_{:,l}, t) for the current (X, t).
///
struct SolverState
{
    CMat X;
    ToeplitzParam t;
    std::vector<CMat> Q;
    std::vector<CMat> Lambda;
    std::vector<CMat> blocks;
    double rho = 1.0;
    int iter   = 0;
    std::vector<double> primal_hist;
    std::vector<double> dual_hist;
    std::vector<double> rho_hist;
    std::vector<double> succ_diff_hist; ///< ||z_{j+1}-z_j||^2 + sum ||dLambda||^2

    /// All variables zero.
    static SolverState zeros(const ProblemSpec& spec, double rho);

    Index snapshots() const { return X.cols(); }
    /// Recompute `blocks` from (X, t).
    void refresh_blocks();
};

struct SolveReport
{
    bool converged = false;
    int iterations = 0;
    double final_primal = 0.0;
    double final_dual   = 0.0;
    CMat X_hat;
    ToeplitzParam t_hat;
    std::vector<double> primal_hist;
    std::vector<double> dual_hist;
    std::vector<double> rho_hist;
    std::vector<double> succ_diff_hist;
};

/// Embed an observation in the smallest odd aperture N' >= max(N, 2K+1).
/// Unobserved rows are zero and omega is shifted by the embedding offset.
/// With no mode given, noiseless observations select Feasibility and noisy
/// ones LeastSquares.
///
/// Centered placement is the default: with the data at the top of the
/// aperture ADMM stalls when most virtual rows are missing (e.g. N = 5,
/// K = 6), while the centered layout converges. A shift of the physical
/// array only rotates each source's phases, so DOAs and moduli are the same
/// under both layouts.
ProblemSpec build_problem(const Observation& obs, Index K,
                          std::optional<SolveMode> mode = std::nullopt,
                          Embedding embedding = Embedding::Centered);

/// Q^l <- P_{S+_K}(M^l - Lambda^l / rho) for every snapshot.
void q_update(SolverState& state, Index K);

/// Closed-form Toeplitz update from W^l = Q^l + Lambda^l / rho.
ToeplitzParam t_update(const SolverState& state);

/// Closed-form X update; returns the new N' x L matrix.
CMat x_update(const SolverState& state, const ProblemSpec& spec);

/// Lambda^l <- Lambda^l + rho (Q^l - M^l), kept Hermitian. Uses the current
/// `blocks`.
void lambda_update(SolverState& state);

struct Residuals
{
    double primal = 0.0;
    double dual   = 0.0;
};

/// primal = sum ||Q^l - M^l||_F, dual = sum ||rho (M^l - M^l_prev)||_F.
Residuals residuals(const SolverState& state, const std::vector<CMat>& prev_blocks);

/// Residual balancing: rho grows by tau_inc when primal > mu * dual and
/// shrinks by tau_dec when dual > mu * primal. The scaled multiplier
/// Lambda / rho is held fixed, so Lambda is rescaled along with rho.
/// Returns true when rho changed.
bool rho_adapt(SolverState& state, const Residuals& r, const RhoAdaptation& adapt);

/// Run ADMM from the all-zero state. Exhausting max_iter is reported through
/// `converged = false`, not an exception.
SolveReport solve(const ProblemSpec& spec, const SolverConfig& cfg);

/// Per-iteration diagnostic CSV: iter,rho,primal,dual,succ_diff.
void write_diagnostics_csv(const SolveReport& report, std::ostream& os);

} // namespace smart

#endif // SMART_SOLVER_HPP
