//---------------------------------------------------------------------------//
//! \file shadowlab/perturb.hpp
//! Noise models, samplers, densities, certified distribution parameters,
//! tail-bound evaluators and smoothed-instance generation.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "lp_core.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>

namespace shadowlab
{
using Rng = std::mt19937_64;

//---------------------------------------------------------------------------//
// Noise specification
//---------------------------------------------------------------------------//
enum class NoiseKind
{
    gaussian,
    laplace,
    laplace_gaussian,
};

inline char const* to_string(NoiseKind k)
{
    switch (k)
    {
        case NoiseKind::gaussian:
            return "gaussian";
        case NoiseKind::laplace:
            return "laplace";
        case NoiseKind::laplace_gaussian:
            return "lg";
    }
    return "?";
}

inline NoiseKind noise_kind_from_string(std::string const& s)
{
    if (s == "gaussian")
        return NoiseKind::gaussian;
    if (s == "laplace")
        return NoiseKind::laplace;
    if (s == "lg" || s == "laplace-gaussian")
        return NoiseKind::laplace_gaussian;
    throw ConfigError("unknown noise kind '" + s + "'");
}

//! Default Laplace-Gaussian seam radius 4 sqrt(d log n).
inline double default_lg_radius(Index d, Index n)
{
    return 4.0 * std::sqrt(static_cast<double>(d) * std::log(static_cast<double>(n)));
}

struct NoiseSpec
{
    NoiseKind kind{NoiseKind::gaussian};
    double sigma{1.0};
    //! Seam radius in units of sigma; only meaningful for Laplace-Gaussian.
    std::optional<double> lg_radius;

    void validate() const
    {
        if (!(sigma > 0) || !std::isfinite(sigma))
            throw ConfigError("sigma must be positive and finite");
        if (kind == NoiseKind::laplace_gaussian && lg_radius && !(*lg_radius > 0))
            throw ConfigError("lg_radius must be positive");
    }

    //! Fill in the default seam radius for samples in dimension d.
    NoiseSpec resolved(Index d, Index n) const
    {
        NoiseSpec out = *this;
        if (kind == NoiseKind::laplace_gaussian && !out.lg_radius)
            out.lg_radius = default_lg_radius(d, std::max<Index>(n, 2));
        return out;
    }
};

//---------------------------------------------------------------------------//
// Elementary samplers
//---------------------------------------------------------------------------//
inline Vector standard_normal_vector(Index d, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = normal(rng);
    return v;
}

inline Vector uniform_sphere(Index d, Rng& rng)
{
    while (true)
    {
        Vector v = standard_normal_vector(d, rng);
        double const nrm = v.norm();
        if (nrm > 1e-300)
            return v / nrm;
    }
}

inline double uniform01(Rng& rng)
{
    // Open interval: never returns 0 or 1.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x;
    do
    {
        x = u(rng);
    } while (x <= 0.0 || x >= 1.0);
    return x;
}

//---------------------------------------------------------------------------//
/*!
 * Sampler for one noise distribution in a fixed dimension.
 *
 * The Laplace-Gaussian distribution is drawn as a two-component mixture of
 * its Gaussian core (radius below r sigma) and its exponential shell. The
 * mixture weight is the ratio of the two radial integrals, both expressed
 * through regularized incomplete gamma functions; the shell radius is drawn
 * by inverting the truncated Gamma(d) CDF.
 */
class NoiseSampler
{
  public:
    NoiseSampler(NoiseSpec spec, Index d) : spec_(std::move(spec)), d_(d)
    {
        spec_.validate();
        if (d_ < 1)
            throw ConfigError("noise dimension must be positive");
        if (spec_.kind == NoiseKind::laplace_gaussian)
        {
            if (!spec_.lg_radius)
                throw ConfigError("Laplace-Gaussian radius is unresolved");
            init_lg();
        }
    }

    Vector operator()(Rng& rng) const
    {
        switch (spec_.kind)
        {
            case NoiseKind::gaussian:
                return spec_.sigma * standard_normal_vector(d_, rng);
            case NoiseKind::laplace: {
                double const dd = static_cast<double>(d_);
                std::gamma_distribution<double> radius(dd, spec_.sigma / std::sqrt(dd));
                double const s = radius(rng);
                return s * uniform_sphere(d_, rng);
            }
            case NoiseKind::laplace_gaussian:
                return sample_lg(rng);
        }
        return {};
    }

    NoiseSpec const& spec() const { return spec_; }
    Index dim() const { return d_; }
    //! Mixture weight of the Gaussian core (Laplace-Gaussian only).
    double core_probability() const { return p_core_; }

  private:
    NoiseSpec spec_;
    Index d_;
    double p_core_{1.0};
    double core_mass_{1.0};   // P(d/2, r^2/2)
    double shell_mass_{0.0};  // Q(d, r^2)

    void init_lg()
    {
        using boost::math::gamma_p;
        using boost::math::gamma_q;
        double const dd = static_cast<double>(d_);
        double const r = *spec_.lg_radius;
        core_mass_ = gamma_p(dd / 2, r * r / 2);
        shell_mass_ = gamma_q(dd, r * r);
        // sigma^d and the sphere area are common to both and cancel.
        double const log_core = (dd / 2 - 1) * std::log(2.0) + std::lgamma(dd / 2)
                                + std::log(core_mass_);
        double const log_shell = r * r / 2 - dd * std::log(r) + std::lgamma(dd)
                                 + (shell_mass_ > 0 ? std::log(shell_mass_)
                                                    : -std::numeric_limits<double>::infinity());
        p_core_ = 1.0 / (1.0 + std::exp(log_shell - log_core));
    }

    Vector sample_lg(Rng& rng) const
    {
        double const sigma = spec_.sigma;
        double const r = *spec_.lg_radius;
        double const dd = static_cast<double>(d_);
        if (uniform01(rng) < p_core_)
        {
            if (core_mass_ >= 0.5)
            {
                // Rejection from the untruncated Gaussian.
                while (true)
                {
                    Vector x = sigma * standard_normal_vector(d_, rng);
                    if (x.norm() <= r * sigma)
                        return x;
                }
            }
            double const u = boost::math::gamma_p_inv(dd / 2, uniform01(rng) * core_mass_);
            return sigma * std::sqrt(2 * u) * uniform_sphere(d_, rng);
        }
        double const u = boost::math::gamma_q_inv(dd, uniform01(rng) * shell_mass_);
        return (sigma * u / r) * uniform_sphere(d_, rng);
    }
};

//! Draw one mean-zero noise vector.
inline Vector sample_noise(NoiseSpec const& spec, Index d, Rng& rng)
{
    return NoiseSampler(spec, d)(rng);
}

//---------------------------------------------------------------------------//
// Densities
//---------------------------------------------------------------------------//
//! Unnormalized Laplace-Gaussian density f_(center, sigma, r)(x).
inline double density_lg(Vector const& x, Vector const& center, double sigma, double r)
{
    double const dist = (x - center).norm();
    if (dist <= r * sigma)
        return std::exp(-dist * dist / (2 * sigma * sigma));
    return std::exp(-dist * r / sigma + r * r / 2);
}

//! Normalized Gaussian density N_d(center, sigma).
inline double density_gaussian(Vector const& x, Vector const& center, double sigma)
{
    double const dd = static_cast<double>(x.size());
    double const dist2 = (x - center).squaredNorm();
    return std::exp(-dist2 / (2 * sigma * sigma))
           / std::pow(2 * std::numbers::pi * sigma * sigma, dd / 2);
}

//---------------------------------------------------------------------------//
// Certified parameters
//---------------------------------------------------------------------------//
struct DistributionCertificate
{
    std::optional<double> L;  //!< log-Lipschitz constant; none for Gaussian
    double tau{0};            //!< line standard deviation lower bound
    double R_nd{0};           //!< cutoff radius at probability 1/(d C(n,d))
    double r_n{0};            //!< n-th deviation
};

//! Perturbation ceiling 1 / (36 sqrt(d log n)) for the Symmetric RV phase.
inline double sigma_bar(Index d, Index n)
{
    if (d < 2 || n < d)
        throw DomainError("sigma_bar needs n >= d >= 2");
    return 1.0 / (36.0 * std::sqrt(static_cast<double>(d) * std::log(static_cast<double>(n))));
}

//! log(d * C(n, d)) via lgamma.
inline double log_cutoff_count(Index d, Index n)
{
    double const dd = static_cast<double>(d);
    double const nn = static_cast<double>(n);
    return std::log(dd) + std::lgamma(nn + 1) - std::lgamma(dd + 1) - std::lgamma(nn - dd + 1);
}

namespace detail
{
//! Smallest x in [lo, hi] with pred(x) true, for monotone pred.
template<class Pred>
double bisect_first_true(double lo, double hi, Pred pred)
{
    while (!pred(hi))
        hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it)
    {
        double const mid = 0.5 * (lo + hi);
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}
}  // namespace detail

/*!
 * Certified (L, tau, R_{n,d}, r_n) for a noise kind.
 *
 * Laplace and Laplace-Gaussian (seam radius 4 sqrt(d log n)) use closed
 * forms. For the Gaussian, R_{n,d} inverts the full-dimensional tail bound at
 * failure probability 1/(d C(n,d)), and r_n is the smallest r whose tail
 * integral of the one-dimensional bound is at most r/n; both by bisection.
 */
inline DistributionCertificate certificate(NoiseKind kind, Index d, Index n, double sigma)
{
    if (d < 3)
        throw DomainError("certificates are defined for d >= 3");
    if (n < d)
        throw DomainError("certificates need n >= d");
    if (!(sigma > 0))
        throw DomainError("sigma must be positive");
    double const dd = static_cast<double>(d);
    double const nn = static_cast<double>(n);
    double const logn = std::log(nn);
    DistributionCertificate cert;
    switch (kind)
    {
        case NoiseKind::laplace:
            cert.L = std::sqrt(dd) / sigma;
            cert.R_nd = 14 * sigma * std::sqrt(dd) * logn;
            cert.r_n = 7 * sigma * logn;
            cert.tau = sigma / std::sqrt(dd * std::numbers::e);
            break;
        case NoiseKind::laplace_gaussian:
            cert.L = 4 * std::sqrt(dd * logn) / sigma;
            cert.R_nd = 4 * sigma * std::sqrt(dd * logn);
            cert.r_n = 4 * sigma * std::sqrt(logn);
            cert.tau = sigma / 4;
            break;
        case NoiseKind::gaussian: {
            double const log_p = -log_cutoff_count(d, n);
            // exp(-(d/2)(t-1)^2) <= p, t >= 1
            double const t = detail::bisect_first_true(
                1.0, 2.0, [&](double t) { return -(dd / 2) * (t - 1) * (t - 1) <= log_p; });
            cert.R_nd = t * sigma * std::sqrt(dd);
            // int_r^inf min(1, 2 exp(-s^2 / 2 sigma^2)) ds <= r / n
            auto tail_integral = [&](double r) {
                double const knee = sigma * std::sqrt(2 * std::log(2.0));
                double const gauss_part = sigma * std::sqrt(2 * std::numbers::pi)
                                          * std::erfc(std::max(r, knee) / (sigma * std::sqrt(2.0)));
                return std::max(0.0, knee - r) + gauss_part;
            };
            cert.r_n = detail::bisect_first_true(
                0.0, sigma, [&](double r) { return tail_integral(r) <= r / nn; });
            cert.tau = sigma;
            break;
        }
    }
    return cert;
}

//---------------------------------------------------------------------------//
// Tail bounds
//---------------------------------------------------------------------------//
enum class TailEquation
{
    gauss_full_d,
    gauss_1d,
    laplace_full_d,
    laplace_full_d_2,
    laplace_1d,
    lg_full_d,
    lg_1d,
};

inline char const* to_string(TailEquation e)
{
    switch (e)
    {
        case TailEquation::gauss_full_d:
            return "gauss-full-d";
        case TailEquation::gauss_1d:
            return "gauss-1d";
        case TailEquation::laplace_full_d:
            return "laplace-full-d";
        case TailEquation::laplace_full_d_2:
            return "laplace-full-d-2";
        case TailEquation::laplace_1d:
            return "laplace-1d";
        case TailEquation::lg_full_d:
            return "lg-full-d";
        case TailEquation::lg_1d:
            return "lg-1d";
    }
    return "?";
}

//! Tail bound value; \c lg_r is the Laplace-Gaussian seam radius.
inline double tail_bound(TailEquation eq, Index d, double t, double lg_r = 0)
{
    double const dd = static_cast<double>(d);
    switch (eq)
    {
        case TailEquation::gauss_full_d:
            return std::exp(-(dd / 2) * (t - 1) * (t - 1));
        case TailEquation::gauss_1d:
            return 2 * std::exp(-t * t / 2);
        case TailEquation::laplace_full_d:
            return std::exp(-dd * (t - std::log(t) - 1));
        case TailEquation::laplace_full_d_2:
            return std::exp(-dd * t / 7);
        case TailEquation::laplace_1d:
            return t <= 2 * std::sqrt(dd) ? 2 * std::exp(-t * t / 16)
                                          : std::exp(-std::sqrt(dd) * t / 7);
        case TailEquation::lg_full_d:
            return std::exp(-lg_r * t / 4);
        case TailEquation::lg_1d:
            return t >= lg_r ? std::exp(-lg_r * t / 4) : 3 * std::exp(-t * t / 4);
    }
    return 1.0;
}

//! Smallest t for which the bound is stated.
inline double tail_bound_min_t(TailEquation eq, double lg_r = 0)
{
    switch (eq)
    {
        case TailEquation::gauss_full_d:
        case TailEquation::laplace_full_d:
            return 1.0;
        case TailEquation::laplace_full_d_2:
            return 2.0;
        case TailEquation::lg_full_d:
            return lg_r;
        default:
            return 0.0;
    }
}

//! ||X|| >= t sigma sqrt(d) (Gaussian, Laplace) or ||X|| >= t sigma (LG).
struct NormTail
{
    double t;
};
//! |<X, theta>| >= t sigma.
struct DirTail
{
    Vector theta;
    double t;
};
using TailTest = std::variant<NormTail, DirTail>;

//! Threshold on ||X|| matching the norm-tail convention of each lemma.
inline double norm_tail_threshold(NoiseKind kind, Index d, double sigma, double t)
{
    if (kind == NoiseKind::laplace_gaussian)
        return t * sigma;
    return t * sigma * std::sqrt(static_cast<double>(d));
}

//! Empirical frequency of a tail event over \c samples draws.
inline double empirical_tail(NoiseSpec const& spec,
                             Index d,
                             TailTest const& test,
                             Index samples,
                             Rng& rng)
{
    if (samples < 1000)
        throw ConfigError("empirical_tail needs at least 1000 samples");
    NoiseSampler const sampler(spec, d);
    Index hits = 0;
    for (Index s = 0; s < samples; ++s)
    {
        Vector const x = sampler(rng);
        bool hit = false;
        if (auto const* nt = std::get_if<NormTail>(&test))
            hit = x.norm() >= norm_tail_threshold(spec.kind, d, spec.sigma, nt->t);
        else
        {
            auto const& dt = std::get<DirTail>(test);
            hit = std::abs(x.dot(dt.theta)) >= dt.t * spec.sigma;
        }
        hits += hit ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

//---------------------------------------------------------------------------//
// Smoothed instances
//---------------------------------------------------------------------------//
/*!
 * Centers plus noise. With \c perturb_rhs the rows (a_i, b_i) are perturbed
 * jointly in d+1 dimensions (Smooth LP); otherwise b is the all-ones vector
 * (Unit LP). The objective is never perturbed.
 */
struct SmoothedModel
{
    Matrix centers;   //!< n x d
    Vector center_b;  //!< n entries, used when perturb_rhs
    Vector c;
    NoiseSpec noise;
    bool perturb_rhs{true};

    Index n() const { return static_cast<Index>(centers.rows()); }
    Index d() const { return static_cast<Index>(centers.cols()); }

    void validate() const
    {
        noise.validate();
        if (static_cast<Index>(c.size()) != d() || c.isZero(0.0))
            throw ConfigError("objective must be a nonzero d-vector");
        if (n() < d() || d() < 1)
            throw ConfigError("centers must be n x d with n >= d");
        if (perturb_rhs && static_cast<Index>(center_b.size()) != n())
            throw ConfigError("center_b must have n entries");
        for (Eigen::Index i = 0; i < centers.rows(); ++i)
        {
            double norm2 = centers.row(i).squaredNorm();
            if (perturb_rhs)
                norm2 += center_b[i] * center_b[i];
            if (std::sqrt(norm2) > 1.0 + 1e-12)
                throw ConfigError("center row " + std::to_string(i) + " has norm above 1");
        }
    }
};

inline LPInstance sample_instance(SmoothedModel const& model, Rng& rng)
{
    model.validate();
    Index const n = model.n();
    Index const d = model.d();
    Index const dim = model.perturb_rhs ? d + 1 : d;
    NoiseSampler const sampler(model.noise.resolved(dim, n), dim);
    Matrix A = model.centers;
    Vector b = Vector::Ones(static_cast<Eigen::Index>(n));
    if (model.perturb_rhs)
        b = model.center_b;
    for (Index i = 0; i < n; ++i)
    {
        Vector const g = sampler(rng);
        auto const row = static_cast<Eigen::Index>(i);
        A.row(row) += g.head(static_cast<Eigen::Index>(d)).transpose();
        if (model.perturb_rhs)
            b[row] += g[static_cast<Eigen::Index>(d)];
    }
    return LPInstance::create(std::move(A), std::move(b), model.c);
}

//! Centers drawn uniformly from the unit sphere; with rhs, rows of (A, b).
inline SmoothedModel sphere_centered_model(
    Index n, Index d, Vector c, NoiseSpec noise, bool perturb_rhs, Rng& rng)
{
    SmoothedModel m;
    m.centers.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    m.center_b = Vector::Ones(static_cast<Eigen::Index>(n));
    for (Index i = 0; i < n; ++i)
    {
        Vector const u = uniform_sphere(perturb_rhs ? d + 1 : d, rng);
        m.centers.row(static_cast<Eigen::Index>(i)) = u.head(static_cast<Eigen::Index>(d)).transpose();
        if (perturb_rhs)
            m.center_b[static_cast<Eigen::Index>(i)] = u[static_cast<Eigen::Index>(d)];
    }
    m.c = std::move(c);
    m.noise = std::move(noise);
    m.perturb_rhs = perturb_rhs;
    return m;
}

}  // namespace shadowlab
