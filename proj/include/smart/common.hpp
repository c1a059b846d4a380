#ifndef SMART_COMMON_HPP
#define SMART_COMMON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace smart
{

using Index   = Eigen::Index;
using Complex = std::complex<double>;
using CVec    = Eigen::VectorXcd;
using CMat    = Eigen::MatrixXcd;
using RVec    = Eigen::VectorXd;
using RMat    = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / pi; }

//
// Error hierarchy. Every error thrown by the library derives from `Error`.
//
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes or lengths are incompatible.
class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Argument outside its mathematical domain (angle range, zero energy, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// A documented invariant on an input was violated.
class ContractError : public Error
{
public:
    using Error::Error;
};

/// A dense factorization did not succeed.
class NumericalError : public Error
{
public:
    using Error::Error;
};

/// The estimator cannot run on the requested array geometry.
class UnsupportedGeometryError : public Error
{
public:
    using Error::Error;
};

/// More sources requested than the estimator can resolve.
class InfeasibleError : public Error
{
public:
    using Error::Error;
};

/// Malformed configuration or command line.
class UsageError : public Error
{
public:
    using Error::Error;
};

} // namespace smart

#endif // SMART_COMMON_HPP
