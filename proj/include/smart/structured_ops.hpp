#ifndef SMART_STRUCTURED_OPS_HPP
#define SMART_STRUCTURED_OPS_HPP

#include <smart/common.hpp>

namespace smart
{

///
/// First column of an n x n Hermitian Toeplitz matrix. Entry `a` (0-based)
/// sits on subdiagonal `a`; entry 0 is the (real) diagonal.
///
class ToeplitzParam
{
public:
    ToeplitzParam() = default;

    /// Throws ContractError if `values` is empty or values[0] has a nonzero
    /// imaginary part beyond rounding (|Im| > 1e-12 * max|values|).
    /// The imaginary part of values[0] is then set to exactly zero.
    explicit ToeplitzParam(CVec values);

    /// Zero parameter of length n.
    static ToeplitzParam zero(Index n);

    Index size() const { return values_.size(); }
    const CVec& values() const { return values_; }
    const Complex& operator[](Index a) const { return values_[a]; }

private:
    CVec values_;
};

/// D_H = [1, 2, ..., n, n-1, ..., 1], length 2n-1.
RVec hankel_weights(Index n);

/// D_T = [n, n-1, ..., 1], length n.
RVec toeplitz_weights(Index n);

/// n x n Hankel matrix with entry (i, j) = x[i + j]; x must have odd length.
CMat hankel_lift(const CVec& x);

/// Anti-diagonal sums: out[a] = sum_{i+j=a} C(i, j). C must be square.
CVec hankel_adjoint(const CMat& C);

/// Hermitian Toeplitz matrix with entry (i, j) = t[i - j] for i >= j.
CMat toeplitz_lift(const ToeplitzParam& t);

/// Subdiagonal sums: out[a] = sum_{i-j=a} C(i, j). C must be square.
///
/// For Hermitian C, D_T^{-1} * toeplitz_adjoint(C) is the least-squares
/// Toeplitz fit to C. Note that each subdiagonal with a >= 1 appears twice in
/// a Hermitian Toeplitz matrix, so the Frobenius pairing reads
///
///   Re tr(C^H T(t)) = Re(conj(s_0) t_0) + 2 * sum_{a>=1} Re(conj(s_a) t_a),
///
/// with s = toeplitz_adjoint(C). See `toeplitz_pairing`.
CVec toeplitz_adjoint(const CMat& C);

/// Inner product on Toeplitz parameters induced by the Frobenius product of
/// Hermitian Toeplitz matrices: Re(conj(s_0) t_0) + 2 sum_{a>=1} Re(conj(s_a) t_a).
double toeplitz_pairing(const CVec& s, const CVec& t);

/// 2n x 2n Hermitian block [[conj(T t), conj(H x)], [H x, T t]].
CMat assemble_block(const CVec& x, const ToeplitzParam& t);

/// Frobenius-nearest PSD matrix of rank <= K.
///
/// The input is symmetrized as (W + W^H)/2 before the eigendecomposition. At
/// most K eigenpairs are kept, and only those with eigenvalue above
/// 1e-12 * lambda_max. Throws ContractError if W is not Hermitian within
/// 1e-8 relative, or if K is outside [1, rows]; NumericalError if the
/// eigensolver fails.
CMat psd_rank_project(const CMat& W, Index K);

} // namespace smart

#endif // SMART_STRUCTURED_OPS_HPP
