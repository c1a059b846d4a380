#ifndef SMART_RETRIEVAL_HPP
#define SMART_RETRIEVAL_HPP

#include <vector>

#include <smart/common.hpp>
#include <smart/solver.hpp>
#include <smart/structured_ops.hpp>

namespace smart
{

struct VandermondeDecomposition
{
    RVec theta;           ///< radians, ascending
    RVec b;               ///< nonnegative moduli, aligned with theta
    bool clamped = false; ///< unconstrained fit produced a negative modulus
};

///
/// ESPRIT-based Vandermonde decomposition of T(t) ~ A_n diag(b) A_n^H.
///
/// The signal subspace is spanned by the K dominant eigenvectors of T(t).
/// The shift-invariance equation U_up * Psi = U_down is solved in least
/// squares; the eigenvalues of Psi are exp(i pi sin(theta_k)). Moduli come
/// from a nonnegative least-squares fit of T(t).
///
/// Throws DimensionError unless 1 <= K < n.
///
VandermondeDecomposition vandermonde_decompose(const ToeplitzParam& t, Index K);

struct PhaseRecovery
{
    CMat phi;                         ///< K x L, unit modulus
    double fit_residual = 0.0;        ///< ||X - A diag(b) phi||_F
    std::vector<std::pair<Index, Index>> degenerate; ///< entries with |S| < 1e-12 (set to 1)
};

/// S = pinv(A(theta)) X, phi = S / |S|.
PhaseRecovery recover_phases(const CMat& X, const RVec& theta, const RVec& b);

struct EstimationResult
{
    RVec theta_hat;  ///< radians, ascending
    RVec b_hat;
    CMat phi_hat;    ///< K x L, unit modulus
    double fit_residual = 0.0;
    bool b_clamped      = false;
    Index degenerate_phases = 0;
};

/// Decompose the recovered Toeplitz parameter and recover phases from X_hat.
/// Phases are referenced to physical sensor 1 (virtual row `spec.offset`).
EstimationResult estimate_parameters(const SolveReport& report, const ProblemSpec& spec);

/// Optimal one-to-one matching: perm[k] is the index into `theta_true`
/// assigned to theta_hat[k], minimizing sum |theta_hat - theta_true|.
/// Exhaustive search for K <= 8, sorted matching beyond that.
std::vector<Index> match_assignment(const RVec& theta_hat, const RVec& theta_true);

/// Sum of squared matched errors in degrees^2.
double matched_squared_error_deg(const RVec& theta_hat, const RVec& theta_true);

/// sqrt(sum (theta_hat - theta)^2 / K) after optimal matching, in degrees.
/// Throws DimensionError on length mismatch.
double match_rmse(const RVec& theta_hat, const RVec& theta_true);

/// Every matched estimate lies within half the distance to its true
/// neighbor(s). With a single source the bound is 90 degrees.
/// `theta_true` must be sorted ascending.
bool resolved(const RVec& theta_hat, const RVec& theta_true);

} // namespace smart

#endif // SMART_RETRIEVAL_HPP
