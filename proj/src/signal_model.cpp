#include <smart/signal_model.hpp>

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace smart
{

ArrayGeometry::ArrayGeometry(Index n_virtual, std::vector<Index> omega)
    : n_virtual_(n_virtual), omega_(std::move(omega))
{
    if (n_virtual_ < 1 || n_virtual_ % 2 == 0)
        throw ContractError(fmt::format(
            "ArrayGeometry: virtual aperture must be odd and positive, got {}",
            n_virtual_));
    if (omega_.empty())
        throw ContractError("ArrayGeometry: empty sensor set");
    for (std::size_t i = 0; i < omega_.size(); ++i)
    {
        if (omega_[i] < 0 || omega_[i] >= n_virtual_)
            throw ContractError(fmt::format(
                "ArrayGeometry: sensor index {} outside [1, {}]",
                omega_[i] + 1, n_virtual_));
        if (i > 0 && omega_[i] <= omega_[i - 1])
            throw ContractError(
                "ArrayGeometry: sensor indices must be strictly increasing");
    }
}

ArrayGeometry ArrayGeometry::uniform(Index n_virtual)
{
    std::vector<Index> omega(static_cast<std::size_t>(std::max<Index>(n_virtual, 0)));
    for (Index i = 0; i < n_virtual; ++i)
        omega[static_cast<std::size_t>(i)] = i;
    return ArrayGeometry(n_virtual, std::move(omega));
}

bool ArrayGeometry::is_contiguous() const
{
    return omega_.back() - omega_.front() + 1 == observed();
}

RVec ArrayGeometry::mask() const
{
    RVec m = RVec::Zero(n_virtual_);
    for (Index q : omega_)
        m[q] = 1.0;
    return m;
}

void SourceEnsemble::validate() const
{
    const Index K = theta.size();
    if (K < 1)
        throw ContractError("SourceEnsemble: no sources");
    if (b.size() != K || phi.rows() != K)
        throw ContractError(fmt::format(
            "SourceEnsemble: {} angles but {} moduli and {} phase rows", K,
            b.size(), phi.rows()));
    if (phi.cols() < 1)
        throw ContractError("SourceEnsemble: no snapshots");
    for (Index k = 0; k < K; ++k)
    {
        if (!(theta[k] >= -pi / 2 && theta[k] < pi / 2))
            throw ContractError(fmt::format(
                "SourceEnsemble: angle {:g} rad outside [-pi/2, pi/2)",
                theta[k]));
        if (!(b[k] > 0.0))
            throw ContractError("SourceEnsemble: moduli must be positive");
        for (Index j = 0; j < k; ++j)
            if (theta[j] == theta[k])
                throw ContractError("SourceEnsemble: repeated angle");
    }
}

CVec steering_vector(double theta, Index N)
{
    if (!(theta >= -pi / 2 && theta < pi / 2))
        throw DomainError(fmt::format(
            "steering_vector: angle {:g} rad outside [-pi/2, pi/2)", theta));
    const double u = std::sin(theta);
    CVec a(N);
    for (Index m = 0; m < N; ++m)
        a[m] = std::polar(1.0, pi * static_cast<double>(m) * u);
    return a;
}

CMat steering_matrix(const RVec& theta, Index N)
{
    CMat A(N, theta.size());
    for (Index k = 0; k < theta.size(); ++k)
        A.col(k) = steering_vector(theta[k], N);
    return A;
}

CMat synthesize(const SourceEnsemble& src, Index N)
{
    src.validate();
    const Index K = src.num_sources();
    const Index L = src.num_snapshots();
    CMat S(K, L);
    for (Index l = 0; l < L; ++l)
        for (Index k = 0; k < K; ++k)
            S(k, l) = std::polar(src.b[k], src.phi(k, l));
    return steering_matrix(src.theta, N) * S;
}

CMat apply_mask(const CMat& X, const std::vector<Index>& omega)
{
    CMat out = CMat::Zero(X.rows(), X.cols());
    for (Index q : omega)
    {
        if (q < 0 || q >= X.rows())
            throw DimensionError(fmt::format(
                "apply_mask: sensor index {} outside [1, {}]", q + 1,
                X.rows()));
        out.row(q) = X.row(q);
    }
    return out;
}

CMat add_noise(const CMat& X, double snr_db, const std::vector<Index>& omega,
               std::uint64_t rng_seed)
{
    std::mt19937_64 rng(rng_seed);
    return add_noise(X, snr_db, omega, rng);
}

CMat add_noise(const CMat& X, double snr_db, const std::vector<Index>& omega,
               std::mt19937_64& rng)
{
    if (std::isinf(snr_db) && snr_db > 0)
        return X;
    if (std::isnan(snr_db))
        throw DomainError("add_noise: SNR is NaN");

    double signal = 0.0;
    for (Index q : omega)
    {
        if (q < 0 || q >= X.rows())
            throw DimensionError("add_noise: sensor index out of range");
        signal += X.row(q).squaredNorm();
    }
    if (!(signal > 0.0))
        throw DomainError("add_noise: signal is zero on the observed rows");

    std::normal_distribution<double> gauss(0.0, 1.0);
    CMat E = CMat::Zero(X.rows(), X.cols());
    for (Index l = 0; l < X.cols(); ++l)
        for (Index q : omega)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            E(q, l)         = Complex(re, im);
        }
    const double noise = E.squaredNorm();
    const double scale = std::sqrt(signal / (noise * std::pow(10.0, snr_db / 10.0)));
    return X + scale * E;
}

ToeplitzParam toeplitz_truth(const SourceEnsemble& src, Index n)
{
    CVec t = CVec::Zero(n);
    for (Index k = 0; k < src.theta.size(); ++k)
    {
        const double u = std::sin(src.theta[k]);
        for (Index a = 0; a < n; ++a)
            t[a] += std::polar(src.b[k], pi * static_cast<double>(a) * u);
    }
    return ToeplitzParam(std::move(t));
}

RMat random_phases(Index K, Index L, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 2.0 * pi);
    RMat phi(K, L);
    for (Index l = 0; l < L; ++l)
        for (Index k = 0; k < K; ++k)
            phi(k, l) = unif(rng);
    return phi;
}

namespace
{

double circular_sin_distance(double u, double v)
{
    const double d = std::fmod(std::abs(u - v), 2.0);
    return std::min(d, 2.0 - d);
}

} // namespace

RVec random_doas(Index K, double min_separation, std::mt19937_64& rng,
                 double max_abs)
{
    const double hi = std::min(max_abs, pi / 2);
    std::uniform_real_distribution<double> unif(-hi, hi);
    for (int attempt = 0; attempt < 2000; ++attempt)
    {
        RVec theta(K);
        bool ok = true;
        for (Index k = 0; k < K && ok; ++k)
        {
            double th = unif(rng);
            if (th >= pi / 2)
                th = -pi / 2;
            theta[k] = th;
            for (Index j = 0; j < k; ++j)
                if (circular_sin_distance(std::sin(theta[j]), std::sin(th)) <
                    min_separation)
                {
                    ok = false;
                    break;
                }
        }
        if (ok)
        {
            std::sort(theta.begin(), theta.end());
            return theta;
        }
    }

    // Dense packings are out of reach for rejection sampling. Place the
    // points directly in the sin domain: uniform gaps on top of the minimum
    // spacing, with the total span kept below 2 - d so the wrap-around gap
    // also respects the separation.
    const double s    = std::sin(hi);
    const double span = std::min(2.0 * s, 2.0 - min_separation);
    const double slack = span - static_cast<double>(K - 1) * min_separation;
    if (slack < 0.0)
        throw DomainError(fmt::format(
            "random_doas: cannot place {} sources with separation {:g}", K,
            min_separation));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double shift = (2.0 * s - span) * u01(rng);
    std::vector<double> gaps(static_cast<std::size_t>(K));
    for (auto& g : gaps)
        g = slack * u01(rng);
    std::sort(gaps.begin(), gaps.end());
    RVec theta(K);
    for (Index k = 0; k < K; ++k)
        theta[k] = std::asin(std::clamp(-s + shift + gaps[static_cast<std::size_t>(k)] +
                                            static_cast<double>(k) * min_separation,
                                        -s, s));
    return theta;
}

SourceEnsemble random_ensemble(Index K, Index L, Index n_virtual,
                               std::mt19937_64& rng, double b_min,
                               double b_max, double max_abs)
{
    SourceEnsemble src;
    src.theta = random_doas(K, 2.0 / static_cast<double>(n_virtual), rng, max_abs);
    std::uniform_real_distribution<double> unif(b_min, b_max);
    src.b.resize(K);
    for (Index k = 0; k < K; ++k)
        src.b[k] = unif(rng);
    src.phi = random_phases(K, L, rng);
    return src;
}

} // namespace smart
