#ifndef SMART_SIGNAL_MODEL_HPP
#define SMART_SIGNAL_MODEL_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <smart/common.hpp>
#include <smart/structured_ops.hpp>

namespace smart
{

///
/// Half-wavelength linear array on a uniform grid of `n_virtual` (odd)
/// positions, of which the sensors in `omega` are present.
///
/// Sensor indices are 0-based here; file formats use 1-based indices.
///
class ArrayGeometry
{
public:
    ArrayGeometry() = default;

    /// Throws ContractError unless n_virtual is odd and omega is nonempty,
    /// strictly increasing and within [0, n_virtual).
    ArrayGeometry(Index n_virtual, std::vector<Index> omega);

    /// All positions present.
    static ArrayGeometry uniform(Index n_virtual);

    Index n_virtual() const { return n_virtual_; }
    /// n' = (N' + 1) / 2, the dimension of the Hankel/Toeplitz blocks.
    Index half() const { return (n_virtual_ + 1) / 2; }
    const std::vector<Index>& omega() const { return omega_; }
    Index observed() const { return static_cast<Index>(omega_.size()); }
    bool is_full() const { return observed() == n_virtual_; }
    /// True when omega is {first, first+1, ..., last}.
    bool is_contiguous() const;
    /// 0/1 indicator of omega, length n_virtual.
    RVec mask() const;

private:
    Index n_virtual_ = 0;
    std::vector<Index> omega_;
};

///
/// Ground truth of K constant-modulus sources over L snapshots.
///
struct SourceEnsemble
{
    RVec theta; ///< DOAs in radians, in [-pi/2, pi/2)
    RVec b;     ///< moduli, > 0
    RMat phi;   ///< K x L phases in radians

    Index num_sources() const { return theta.size(); }
    Index num_snapshots() const { return phi.cols(); }

    /// Throws ContractError on shape mismatch, repeated angles, angles out
    /// of range or nonpositive moduli.
    void validate() const;
};

///
/// Snapshot matrix on the full grid; rows outside the geometry's omega are
/// zero. `snr_db` absent means noiseless.
///
struct Observation
{
    CMat Y;
    ArrayGeometry geometry;
    std::optional<double> snr_db;
};

/// a(theta) with entries exp(i*pi*m*sin(theta)), m = 0..N-1.
/// Throws DomainError unless theta in [-pi/2, pi/2).
CVec steering_vector(double theta, Index N);

/// N x K matrix [a(theta_1), ..., a(theta_K)].
CMat steering_matrix(const RVec& theta, Index N);

/// X = A(theta) diag(b) Phi with Phi(k, l) = exp(i phi(k, l)); N x L.
CMat synthesize(const SourceEnsemble& src, Index N);

/// Rows listed in omega copied, others zeroed.
CMat apply_mask(const CMat& X, const std::vector<Index>& omega);

/// Y = X + E, E circular Gaussian on the omega rows, scaled per realization
/// so that 10 log10(||X_omega||^2 / ||E_omega||^2) equals snr_db exactly.
/// An infinite snr_db returns X unchanged. Throws DomainError when X is zero
/// on omega.
CMat add_noise(const CMat& X, double snr_db, const std::vector<Index>& omega,
               std::uint64_t rng_seed);

/// Same as above, drawing from a caller-owned generator.
CMat add_noise(const CMat& X, double snr_db, const std::vector<Index>& omega,
               std::mt19937_64& rng);

/// t with T(t) = A_n(theta) diag(b) A_n(theta)^H.
ToeplitzParam toeplitz_truth(const SourceEnsemble& src, Index n);

/// Phases uniform on [0, 2pi).
RMat random_phases(Index K, Index L, std::mt19937_64& rng);

/// K distinct DOAs drawn uniformly in [-max_abs, max_abs] (radians, clipped
/// to [-pi/2, pi/2)) and rejected until every pair is at least
/// `min_separation` apart in the circular sin(theta) domain (period 2).
/// Returned sorted ascending. Throws DomainError if the packing is impossible.
RVec random_doas(Index K, double min_separation, std::mt19937_64& rng,
                 double max_abs = pi / 2);

/// Random ensemble: DOAs from random_doas with separation 2/n_virtual,
/// moduli uniform in [b_min, b_max], uniform phases.
SourceEnsemble random_ensemble(Index K, Index L, Index n_virtual,
                               std::mt19937_64& rng, double b_min = 0.5,
                               double b_max = 2.0,
                               double max_abs = pi / 2);

} // namespace smart

#endif // SMART_SIGNAL_MODEL_HPP
