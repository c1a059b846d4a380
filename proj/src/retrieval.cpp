#include <smart/retrieval.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <fmt/core.h>

#include <smart/signal_model.hpp>

namespace smart
{

namespace
{

// Lawson-Hanson active set method for min ||A x - y|| s.t. x >= 0.
RVec nnls(const RMat& A, const RVec& y)
{
    const Index n = A.cols();
    RVec x        = RVec::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, A.norm() * y.norm());

    for (int outer = 0; outer < 3 * n + 10; ++outer)
    {
        const RVec w = A.transpose() * (y - A * x);
        Index best   = -1;
        double wmax  = tol;
        for (Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax)
            {
                wmax = w[j];
                best = j;
            }
        if (best < 0)
            break;
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner < 3 * n + 10; ++inner)
        {
            std::vector<Index> idx;
            for (Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)])
                    idx.push_back(j);
            RMat Ap(A.rows(), static_cast<Index>(idx.size()));
            for (std::size_t c = 0; c < idx.size(); ++c)
                Ap.col(static_cast<Index>(c)) = A.col(idx[c]);
            const RVec zp = Ap.colPivHouseholderQr().solve(y);
            RVec z        = RVec::Zero(n);
            for (std::size_t c = 0; c < idx.size(); ++c)
                z[idx[c]] = zp[static_cast<Index>(c)];

            bool feasible = true;
            for (Index j : idx)
                if (z[j] <= 0.0)
                    feasible = false;
            if (feasible)
            {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (Index j : idx)
                if (z[j] <= 0.0)
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            x += alpha * (z - x);
            for (Index j : idx)
                if (x[j] <= tol)
                {
                    x[j]                                 = 0.0;
                    passive[static_cast<std::size_t>(j)] = false;
                }
        }
    }
    return x;
}

double wrap_doa(double u)
{
    u = std::clamp(u, -1.0, 1.0);
    double th = std::asin(u);
    if (th >= pi / 2)
        th = -pi / 2;
    return th;
}

} // namespace

VandermondeDecomposition vandermonde_decompose(const ToeplitzParam& t, Index K)
{
    const Index n = t.size();
    if (K < 1 || K >= n)
        throw DimensionError(fmt::format(
            "vandermonde_decompose: need 1 <= K < n, got K = {}, n = {}", K, n));

    const CMat T = toeplitz_lift(t);
    Eigen::SelfAdjointEigenSolver<CMat> eig(T);
    if (eig.info() != Eigen::Success)
        throw NumericalError("vandermonde_decompose: eigendecomposition failed");
    const CMat Us = eig.eigenvectors().rightCols(K);

    const CMat up   = Us.topRows(n - 1);
    const CMat down = Us.bottomRows(n - 1);
    const CMat Psi  = up.completeOrthogonalDecomposition().solve(down);
    Eigen::ComplexEigenSolver<CMat> ces(Psi, false);
    if (ces.info() != Eigen::Success)
        throw NumericalError("vandermonde_decompose: shift-invariance eigenproblem failed");

    RVec theta(K);
    for (Index k = 0; k < K; ++k)
        theta[k] = wrap_doa(std::arg(ces.eigenvalues()[k]) / pi);
    std::sort(theta.begin(), theta.end());

    // Fit vec(T) = sum_k b_k vec(a_k a_k^H) over the real and imaginary parts.
    const CMat A = steering_matrix(theta, n);
    RMat G(2 * n * n, K);
    RVec y(2 * n * n);
    for (Index k = 0; k < K; ++k)
    {
        const CMat outer = A.col(k) * A.col(k).adjoint();
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
            {
                G(2 * (j * n + i), k)     = outer(i, j).real();
                G(2 * (j * n + i) + 1, k) = outer(i, j).imag();
            }
    }
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
        {
            y[2 * (j * n + i)]     = T(i, j).real();
            y[2 * (j * n + i) + 1] = T(i, j).imag();
        }

    VandermondeDecomposition out;
    const RVec unconstrained = G.colPivHouseholderQr().solve(y);
    out.clamped = (unconstrained.array() < 0.0).any();
    out.b       = out.clamped ? nnls(G, y) : unconstrained;
    out.theta   = std::move(theta);
    return out;
}

PhaseRecovery recover_phases(const CMat& X, const RVec& theta, const RVec& b)
{
    if (theta.size() != b.size())
        throw DimensionError("recover_phases: theta and b lengths differ");
    const Index K = theta.size();
    const CMat A  = steering_matrix(theta, X.rows());
    const CMat S  = A.completeOrthogonalDecomposition().solve(X);

    PhaseRecovery out;
    out.phi.resize(K, X.cols());
    for (Index l = 0; l < X.cols(); ++l)
        for (Index k = 0; k < K; ++k)
        {
            const double mag = std::abs(S(k, l));
            if (mag < 1e-12)
            {
                out.phi(k, l) = Complex(1.0, 0.0);
                out.degenerate.emplace_back(k, l);
            }
            else
            {
                out.phi(k, l) = S(k, l) / mag;
            }
        }
    out.fit_residual = (X - A * b.cast<Complex>().asDiagonal() * out.phi).norm();
    return out;
}

EstimationResult estimate_parameters(const SolveReport& report, const ProblemSpec& spec)
{
    const VandermondeDecomposition vd = vandermonde_decompose(report.t_hat, spec.K);
    const PhaseRecovery pr            = recover_phases(report.X_hat, vd.theta, vd.b);
    EstimationResult res;
    res.theta_hat = vd.theta;
    res.b_hat     = vd.b;
    res.phi_hat   = pr.phi;
    if (spec.offset != 0)
    {
        for (Index k = 0; k < spec.K; ++k)
            res.phi_hat.row(k) *= std::polar(
                1.0, pi * static_cast<double>(spec.offset) * std::sin(vd.theta[k]));
    }
    res.fit_residual      = pr.fit_residual;
    res.b_clamped         = vd.clamped;
    res.degenerate_phases = static_cast<Index>(pr.degenerate.size());
    return res;
}

std::vector<Index> match_assignment(const RVec& theta_hat, const RVec& theta_true)
{
    if (theta_hat.size() != theta_true.size())
        throw DimensionError(fmt::format(
            "match: {} estimates for {} true angles", theta_hat.size(),
            theta_true.size()));
    const Index K = theta_hat.size();
    std::vector<Index> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), Index{0});

    if (K > 8)
    {
        std::vector<Index> oh(perm), ot(perm);
        std::sort(oh.begin(), oh.end(),
                  [&](Index a, Index b) { return theta_hat[a] < theta_hat[b]; });
        std::sort(ot.begin(), ot.end(),
                  [&](Index a, Index b) { return theta_true[a] < theta_true[b]; });
        for (Index k = 0; k < K; ++k)
            perm[static_cast<std::size_t>(oh[static_cast<std::size_t>(k)])] =
                ot[static_cast<std::size_t>(k)];
        return perm;
    }

    // Absolute-error ties are common on a line (any crossing-free pairing of
    // interleaved points costs the same), so ties go to the smaller squared
    // error. That keeps the result independent of the estimate order.
    const double tol = 1e-12 * (1.0 + theta_hat.cwiseAbs().sum() + theta_true.cwiseAbs().sum());
    std::vector<Index> best = perm;
    double best_l1          = std::numeric_limits<double>::infinity();
    double best_l2          = std::numeric_limits<double>::infinity();
    do
    {
        double l1 = 0.0, l2 = 0.0;
        for (Index k = 0; k < K; ++k)
        {
            const double d = theta_hat[k] - theta_true[perm[static_cast<std::size_t>(k)]];
            l1 += std::abs(d);
            l2 += d * d;
        }
        if (l1 < best_l1 - tol || (l1 <= best_l1 + tol && l2 < best_l2))
        {
            best_l1 = std::min(l1, best_l1);
            best_l2 = l2;
            best    = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double matched_squared_error_deg(const RVec& theta_hat, const RVec& theta_true)
{
    const auto perm = match_assignment(theta_hat, theta_true);
    double acc      = 0.0;
    for (Index k = 0; k < theta_hat.size(); ++k)
    {
        const double d = rad2deg(theta_hat[k] - theta_true[perm[static_cast<std::size_t>(k)]]);
        acc += d * d;
    }
    return acc;
}

double match_rmse(const RVec& theta_hat, const RVec& theta_true)
{
    if (theta_hat.size() == 0)
        return 0.0;
    return std::sqrt(matched_squared_error_deg(theta_hat, theta_true) /
                     static_cast<double>(theta_hat.size()));
}

bool resolved(const RVec& theta_hat, const RVec& theta_true)
{
    const auto perm = match_assignment(theta_hat, theta_true);
    const Index K   = theta_true.size();
    for (Index k = 0; k < K; ++k)
    {
        const Index j = perm[static_cast<std::size_t>(k)];
        double bound  = pi / 2;
        if (K > 1)
        {
            bound = std::numeric_limits<double>::infinity();
            if (j > 0)
                bound = std::min(bound, std::abs(theta_true[j] - theta_true[j - 1]));
            if (j + 1 < K)
                bound = std::min(bound, std::abs(theta_true[j + 1] - theta_true[j]));
            bound /= 2.0;
        }
        if (!(std::abs(theta_hat[k] - theta_true[j]) < bound))
            return false;
    }
    return true;
}

} // namespace smart
