#include <smart/baselines.hpp>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/Polynomials>

#include <fmt/core.h>

namespace smart
{

CovarianceEstimate sample_covariance(const CMat& Y, const ArrayGeometry& geometry)
{
    if (Y.rows() != geometry.n_virtual())
        throw DimensionError("sample_covariance: data rows do not match geometry");
    if (!geometry.is_contiguous())
        throw UnsupportedGeometryError(
            "sample_covariance: sensor set is not a uniform subarray");
    return sample_covariance(
        Y.middleRows(geometry.omega().front(), geometry.observed()));
}

CovarianceEstimate sample_covariance(const CMat& Y_obs)
{
    if (Y_obs.cols() < 1)
        throw ContractError("sample_covariance: no snapshots");
    CovarianceEstimate out;
    out.R              = Y_obs * Y_obs.adjoint() / static_cast<double>(Y_obs.cols());
    out.R              = (0.5 * (out.R + out.R.adjoint())).eval();
    out.snapshots_used = Y_obs.cols();
    return out;
}

RVec root_music(const CovarianceEstimate& cov, Index K)
{
    const Index M = cov.R.rows();
    if (K < 1 || K >= M)
        throw InfeasibleError(fmt::format(
            "root_music: cannot resolve K = {} sources with M = {} sensors", K, M));

    Eigen::SelfAdjointEigenSolver<CMat> eig(cov.R);
    if (eig.info() != Eigen::Success)
        throw NumericalError("root_music: eigendecomposition failed");
    const CMat En = eig.eigenvectors().leftCols(M - K);
    const CMat C  = En * En.adjoint();

    // a(z)^H C a(z) = sum_m c_m z^m, m = j - i; shift by M-1 to get a polynomial.
    CVec coeffs = CVec::Zero(2 * M - 1);
    for (Index j = 0; j < M; ++j)
        for (Index i = 0; i < M; ++i)
            coeffs[j - i + M - 1] += C(i, j);

    Eigen::PolynomialSolver<Complex, Eigen::Dynamic> poly(coeffs);
    const auto& roots = poly.roots();

    struct Candidate
    {
        Complex z;
        double gap;
    };
    std::vector<Candidate> cand;
    for (Index r = 0; r < roots.size(); ++r)
    {
        const Complex z = roots[r];
        if (std::abs(z) <= 1.0 + 1e-9)
            cand.push_back({z, std::abs(1.0 - std::abs(z))});
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });

    // Exact double roots on the circle split numerically into twins that can
    // both pass the |z| <= 1 test; keep one of each.
    std::vector<Complex> picked;
    for (const auto& c : cand)
    {
        if (static_cast<Index>(picked.size()) == K)
            break;
        const bool twin = std::any_of(picked.begin(), picked.end(), [&](const Complex& p) {
            return std::abs(p - c.z) < 1e-5;
        });
        if (!twin)
            picked.push_back(c.z);
    }
    if (static_cast<Index>(picked.size()) < K)
        throw NumericalError("root_music: not enough roots inside the unit circle");

    RVec theta(K);
    for (Index k = 0; k < K; ++k)
    {
        double u = std::clamp(std::arg(picked[static_cast<std::size_t>(k)]) / pi, -1.0, 1.0);
        double th = std::asin(u);
        theta[k]  = th >= pi / 2 ? -pi / 2 : th;
    }
    std::sort(theta.begin(), theta.end());
    return theta;
}

} // namespace smart
