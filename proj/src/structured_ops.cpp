#include <smart/structured_ops.hpp>

#include <Eigen/Eigenvalues>

#include <fmt/core.h>

namespace smart
{

ToeplitzParam::ToeplitzParam(CVec values) : values_(std::move(values))
{
    if (values_.size() == 0)
        throw ContractError("ToeplitzParam: empty parameter vector");
    const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
    if (std::abs(values_[0].imag()) > 1e-12 * scale)
        throw ContractError(fmt::format(
            "ToeplitzParam: diagonal entry must be real (imag = {:g})",
            values_[0].imag()));
    values_[0] = Complex(values_[0].real(), 0.0);
}

ToeplitzParam ToeplitzParam::zero(Index n)
{
    return ToeplitzParam(CVec::Zero(n));
}

RVec hankel_weights(Index n)
{
    RVec d(2 * n - 1);
    for (Index a = 0; a < 2 * n - 1; ++a)
        d[a] = static_cast<double>(std::min(a + 1, 2 * n - 1 - a));
    return d;
}

RVec toeplitz_weights(Index n)
{
    RVec d(n);
    for (Index a = 0; a < n; ++a)
        d[a] = static_cast<double>(n - a);
    return d;
}

CMat hankel_lift(const CVec& x)
{
    if (x.size() < 1 || x.size() % 2 == 0)
        throw DimensionError(fmt::format(
            "hankel_lift: input length must be odd, got {}", x.size()));
    const Index n = (x.size() + 1) / 2;
    CMat H(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            H(i, j) = x[i + j];
    return H;
}

CVec hankel_adjoint(const CMat& C)
{
    if (C.rows() != C.cols())
        throw DimensionError(fmt::format(
            "hankel_adjoint: expected square matrix, got {}x{}", C.rows(),
            C.cols()));
    const Index n = C.rows();
    CVec out = CVec::Zero(std::max<Index>(2 * n - 1, 0));
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            out[i + j] += C(i, j);
    return out;
}

CMat toeplitz_lift(const ToeplitzParam& t)
{
    const Index n = t.size();
    CMat T(n, n);
    for (Index j = 0; j < n; ++j)
    {
        T(j, j) = t[0];
        for (Index i = j + 1; i < n; ++i)
        {
            T(i, j) = t[i - j];
            T(j, i) = std::conj(t[i - j]);
        }
    }
    return T;
}

CVec toeplitz_adjoint(const CMat& C)
{
    if (C.rows() != C.cols())
        throw DimensionError(fmt::format(
            "toeplitz_adjoint: expected square matrix, got {}x{}", C.rows(),
            C.cols()));
    const Index n = C.rows();
    CVec out = CVec::Zero(n);
    for (Index j = 0; j < n; ++j)
        for (Index i = j; i < n; ++i)
            out[i - j] += C(i, j);
    return out;
}

double toeplitz_pairing(const CVec& s, const CVec& t)
{
    if (s.size() != t.size())
        throw DimensionError("toeplitz_pairing: length mismatch");
    if (s.size() == 0)
        return 0.0;
    double acc = (std::conj(s[0]) * t[0]).real();
    for (Index a = 1; a < s.size(); ++a)
        acc += 2.0 * (std::conj(s[a]) * t[a]).real();
    return acc;
}

CMat assemble_block(const CVec& x, const ToeplitzParam& t)
{
    const Index n = t.size();
    if (x.size() != 2 * n - 1)
        throw DimensionError(fmt::format(
            "assemble_block: x has length {}, expected 2n-1 = {}", x.size(),
            2 * n - 1));
    const CMat H = hankel_lift(x);
    const CMat T = toeplitz_lift(t);
    CMat M(2 * n, 2 * n);
    M.topLeftCorner(n, n)     = T.conjugate();
    M.topRightCorner(n, n)    = H.conjugate();
    M.bottomLeftCorner(n, n)  = H;
    M.bottomRightCorner(n, n) = T;
    return M;
}

CMat psd_rank_project(const CMat& W, Index K)
{
    if (W.rows() != W.cols())
        throw DimensionError("psd_rank_project: expected square matrix");
    const Index m = W.rows();
    if (K < 1 || K > m)
        throw ContractError(fmt::format(
            "psd_rank_project: rank {} outside [1, {}]", K, m));

    const double asym  = (W - W.adjoint()).norm();
    const double scale = std::max(1.0, W.norm());
    if (asym > 1e-8 * scale)
        throw ContractError(fmt::format(
            "psd_rank_project: input not Hermitian (||W - W^H|| = {:g})",
            asym));

    const CMat Ws = 0.5 * (W + W.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(Ws);
    if (eig.info() != Eigen::Success)
        throw NumericalError("psd_rank_project: eigendecomposition failed");

    // Eigenvalues come back in ascending order.
    const RVec& lambda = eig.eigenvalues();
    const double top   = lambda[m - 1];
    CMat out           = CMat::Zero(m, m);
    if (!(top > 0.0))
        return out;

    const double tau = 1e-12 * top;
    Index kept       = 0;
    while (kept < K && lambda[m - 1 - kept] > tau)
        ++kept;

    const auto V = eig.eigenvectors().rightCols(kept);
    const RVec l = lambda.tail(kept);
    out.noalias() = V * l.asDiagonal() * V.adjoint();
    return out;
}

} // namespace smart
