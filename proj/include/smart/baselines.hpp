#ifndef SMART_BASELINES_HPP
#define SMART_BASELINES_HPP

#include <smart/common.hpp>
#include <smart/signal_model.hpp>

namespace smart
{

struct CovarianceEstimate
{
    CMat R; ///< M x M, Hermitian PSD
    Index snapshots_used = 0;
};

/// R = Y_obs Y_obs^H / L over the observed rows. Root-MUSIC needs a uniform
/// subarray, so a non-contiguous omega throws UnsupportedGeometryError.
CovarianceEstimate sample_covariance(const CMat& Y, const ArrayGeometry& geometry);

/// Covariance of a plain M x L block of snapshots (all rows observed).
CovarianceEstimate sample_covariance(const CMat& Y_obs);

/// Root-MUSIC on a half-wavelength ULA covariance. Returns K DOAs in
/// radians, ascending. Throws InfeasibleError unless 1 <= K < M.
RVec root_music(const CovarianceEstimate& cov, Index K);

} // namespace smart

#endif // SMART_BASELINES_HPP
