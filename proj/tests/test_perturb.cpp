//---------------------------------------------------------------------------//
//! \file tests/test_perturb.cpp
//---------------------------------------------------------------------------//
#include "shadowlab/perturb.hpp"

#include "support.hpp"

#include <algorithm>
#include <numbers>

namespace shadowlab
{
namespace test
{
namespace
{
//! Composite Simpson rule with m (even) panels.
template<class F>
double simpson(F f, double a, double b, int m = 20000)
{
    double const h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i)
        s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

double binom_slack(double p, Index n)
{
    return 3 * std::sqrt(p * (1 - p) / static_cast<double>(n));
}
}  // namespace

//---------------------------------------------------------------------------//
// Samplers
//---------------------------------------------------------------------------//
TEST(Sampler, gaussian_second_moment)
{
    Rng rng(1);
    NoiseSampler const s(NoiseSpec{NoiseKind::gaussian, 1.0, {}}, 4);
    double acc = 0;
    int const N = 100000;
    for (int i = 0; i < N; ++i)
        acc += s(rng).squaredNorm();
    EXPECT_NEAR(4.0, acc / N, 0.1);
}

TEST(Sampler, laplace_mean_norm)
{
    Rng rng(2);
    NoiseSampler const s(NoiseSpec{NoiseKind::laplace, 1.0, {}}, 9);
    double acc = 0;
    int const N = 100000;
    for (int i = 0; i < N; ++i)
        acc += s(rng).norm();
    EXPECT_NEAR(3.0, acc / N, 0.05);
}

TEST(Sampler, laplace_directional_variance)
{
    Rng rng(3);
    Index const d = 5;
    double const sigma = 0.7;
    NoiseSampler const s(NoiseSpec{NoiseKind::laplace, sigma, {}}, d);
    Vector theta = Vector::Ones(d).normalized();
    double acc = 0;
    int const N = 100000;
    for (int i = 0; i < N; ++i)
    {
        double const p = s(rng).dot(theta);
        acc += p * p;
    }
    double const expected = sigma * sigma * (1 + 1.0 / d);
    EXPECT_NEAR(expected, acc / N, 0.05 * expected);
}

TEST(Sampler, seed_determinism)
{
    for (auto kind : {NoiseKind::gaussian, NoiseKind::laplace, NoiseKind::laplace_gaussian})
    {
        NoiseSpec const spec = NoiseSpec{kind, 0.3, {}}.resolved(4, 20);
        Rng a(99);
        Rng b(99);
        for (int i = 0; i < 50; ++i)
            EXPECT_EQ(sample_noise(spec, 4, a), sample_noise(spec, 4, b)) << to_string(kind);
    }
}

TEST(Sampler, lg_needs_radius)
{
    EXPECT_THROW(NoiseSampler(NoiseSpec{NoiseKind::laplace_gaussian, 1.0, {}}, 3), ConfigError);
    EXPECT_THROW(NoiseSampler(NoiseSpec{NoiseKind::gaussian, -1.0, {}}, 3), ConfigError);
}

//! Radial CDF of the LG sampler against quadrature of t^{d-1} f(t), with a
//! small seam radius so both branches carry mass.
TEST(Sampler, lg_radial_distribution)
{
    Index const d = 3;
    double const sigma = 0.5;
    double const r = 1.5;
    auto radial = [&](double t) {
        return std::pow(t, d - 1.0)
               * (t <= r * sigma ? std::exp(-t * t / (2 * sigma * sigma))
                                 : std::exp(-t * r / sigma + r * r / 2));
    };
    double const upper = 60 * sigma;
    double const Z = simpson(radial, 0, r * sigma) + simpson(radial, r * sigma, upper);

    NoiseSampler const s(NoiseSpec{NoiseKind::laplace_gaussian, sigma, r}, d);
    double const core_mass = simpson(radial, 0, r * sigma) / Z;
    EXPECT_NEAR(core_mass, s.core_probability(), 1e-8);

    Rng rng(4);
    int const N = 100000;
    std::vector<double> norms(N);
    for (auto& v : norms)
        v = s(rng).norm();
    for (double q : {0.3, 0.6, 0.75, 1.0, 1.5, 2.5})
    {
        double const p = (q <= r * sigma ? simpson(radial, 0, q)
                                         : simpson(radial, 0, r * sigma) + simpson(radial, r * sigma, q))
                         / Z;
        double const emp = static_cast<double>(std::count_if(norms.begin(), norms.end(),
                                                             [&](double v) { return v <= q; }))
                           / N;
        EXPECT_NEAR(p, emp, binom_slack(std::clamp(p, 1e-3, 0.5), N) + 1e-4) << "radius " << q;
    }
}

//---------------------------------------------------------------------------//
// Densities
//---------------------------------------------------------------------------//
TEST(DensityLG, seam_peak_and_tail)
{
    Vector const center = vec({0.2, -0.1, 0.4});
    double const sigma = 0.8;
    double const r = 2.0;
    EXPECT_DOUBLE_EQ(1.0, density_lg(center, center, sigma, r));

    Vector dir = vec({1, 2, 2}) / 3.0;
    Vector const seam = center + r * sigma * dir;
    EXPECT_NEAR(std::exp(-r * r / 2), density_lg(seam, center, sigma, r), 1e-14);
    Vector const just_out = center + (r * sigma * (1 + 1e-12)) * dir;
    EXPECT_NEAR(density_lg(seam, center, sigma, r), density_lg(just_out, center, sigma, r), 1e-10);

    Vector const far = center + 3.0 * dir;
    EXPECT_NEAR(std::exp(-3.0 * 2 / 1.0 + 2), density_lg(far, center, 1.0, 2.0), 1e-15);
    EXPECT_NEAR(0.0183, density_lg(far, center, 1.0, 2.0), 1e-4);
}

TEST(DensityLG, proportional_to_gaussian_inside)
{
    Rng rng(5);
    Index const d = 4;
    double const sigma = 0.3;
    double const r = 4 * std::sqrt(d * std::log(20.0));
    Vector const center = uniform_sphere(d, rng) * 0.5;
    double ratio0 = 0;
    for (int i = 0; i < 1000; ++i)
    {
        // Uniform radius inside the seam ball, so both near and far points appear.
        double const rad = r * sigma * std::uniform_real_distribution<double>(0, 1)(rng);
        Vector const x = center + rad * uniform_sphere(d, rng);
        double const ratio = density_lg(x, center, sigma, r) / density_gaussian(x, center, sigma);
        if (i == 0)
            ratio0 = ratio;
        EXPECT_NEAR(ratio0, ratio, 1e-10 * ratio0);
    }
}

//---------------------------------------------------------------------------//
// Certificates
//---------------------------------------------------------------------------//
TEST(Certificate, laplace_closed_form)
{
    auto const c = certificate(NoiseKind::laplace, 4, 10, 0.5);
    ASSERT_TRUE(c.L);
    EXPECT_DOUBLE_EQ(4.0, *c.L);
    EXPECT_NEAR(0.5 / std::sqrt(4 * std::numbers::e), c.tau, 1e-15);
    EXPECT_NEAR(0.1516, c.tau, 1e-4);
    EXPECT_NEAR(14 * 0.5 * 2 * std::log(10.0), c.R_nd, 1e-12);
    EXPECT_NEAR(32.24, c.R_nd, 1e-2);
    EXPECT_NEAR(7 * 0.5 * std::log(10.0), c.r_n, 1e-12);
    EXPECT_NEAR(8.059, c.r_n, 1e-3);
    // Line variance at the log-Lipschitz limit.
    EXPECT_NEAR(1 / (std::sqrt(std::numbers::e) * *c.L), c.tau, 1e-15);
}

TEST(Certificate, laplace_gaussian_closed_form)
{
    auto const c = certificate(NoiseKind::laplace_gaussian, 3, 30, 0.1);
    ASSERT_TRUE(c.L);
    EXPECT_NEAR(40 * std::sqrt(3 * std::log(30.0)), *c.L, 1e-10);
    EXPECT_NEAR(127.8, *c.L, 0.1);
    EXPECT_DOUBLE_EQ(0.025, c.tau);
    EXPECT_GE(c.tau, 1 / (std::sqrt(std::numbers::e) * *c.L));
}

TEST(Certificate, gaussian_inverts_tail_bounds)
{
    Index const d = 4;
    Index const n = 12;
    double const sigma = 0.2;
    auto const c = certificate(NoiseKind::gaussian, d, n, sigma);
    EXPECT_FALSE(c.L);
    EXPECT_DOUBLE_EQ(sigma, c.tau);

    // exp(-(d/2)(t-1)^2) = 1/(d C(n,d))  =>  t = 1 + sqrt(2 log(d C(n,d)) / d)
    double const count = d * static_cast<double>(binomial(n, d));
    double const t = 1 + std::sqrt(2 * std::log(count) / d);
    EXPECT_NEAR(t * sigma * std::sqrt(static_cast<double>(d)), c.R_nd, 1e-9);

    // r_n balances the tail integral of min(1, 2 exp(-s^2 / 2 sigma^2)) with r/n.
    auto tail = [&](double s) { return std::min(1.0, 2 * std::exp(-s * s / (2 * sigma * sigma))); };
    double const integral = simpson(tail, c.r_n, c.r_n + 40 * sigma, 200000);
    EXPECT_NEAR(c.r_n / n, integral, 1e-8);
    EXPECT_GT(c.r_n, 0);
}

TEST(Certificate, domain)
{
    EXPECT_THROW(certificate(NoiseKind::laplace, 2, 10, 1.0), DomainError);
    EXPECT_THROW(certificate(NoiseKind::laplace, 5, 4, 1.0), DomainError);
}

TEST(SigmaBar, values_and_monotonicity)
{
    EXPECT_NEAR(1 / (36 * std::sqrt(3 * std::log(30.0))), sigma_bar(3, 30), 1e-15);
    EXPECT_NEAR(0.008696, sigma_bar(3, 30), 1e-6);
    EXPECT_NEAR(0.013622, sigma_bar(2, 8), 1e-6);
    for (Index d = 2; d < 8; ++d)
    {
        for (Index n = d + 1; n < 40; ++n)
        {
            EXPECT_LT(sigma_bar(d + 1, n + 1), sigma_bar(d, n + 1));
            EXPECT_LT(sigma_bar(d, n + 1), sigma_bar(d, n));
        }
    }
    EXPECT_THROW(sigma_bar(1, 4), DomainError);
}

//---------------------------------------------------------------------------//
// Tails
//---------------------------------------------------------------------------//
TEST(Tails, bound_values)
{
    EXPECT_NEAR(std::exp(-2.0), tail_bound(TailEquation::gauss_full_d, 4, 2.0), 1e-15);
    EXPECT_NEAR(0.1353, tail_bound(TailEquation::gauss_full_d, 4, 2.0), 1e-4);
    EXPECT_NEAR(std::exp(-8.0 / 7), tail_bound(TailEquation::laplace_full_d_2, 4, 2.0), 1e-15);
    EXPECT_NEAR(0.319, tail_bound(TailEquation::laplace_full_d_2, 4, 2.0), 1e-3);
    EXPECT_DOUBLE_EQ(2.0, tail_bound(TailEquation::laplace_1d, 4, 0.0));
    EXPECT_DOUBLE_EQ(3.0, tail_bound(TailEquation::lg_1d, 4, 0.0, 5.0));
}

TEST(Tails, empirical_examples)
{
    Rng rng(6);
    Index const N = 100000;
    double const g = empirical_tail(NoiseSpec{NoiseKind::gaussian, 1.0, {}}, 4, NormTail{2.0}, N, rng);
    double const gb = std::exp(-2.0);
    EXPECT_LE(g, gb + binom_slack(gb, N));

    double const l = empirical_tail(NoiseSpec{NoiseKind::laplace, 1.0, {}}, 4, NormTail{2.0}, N, rng);
    double const lb = std::exp(-8.0 / 7);
    EXPECT_LE(l, lb + binom_slack(lb, N));

    double const all = empirical_tail(NoiseSpec{NoiseKind::laplace, 1.0, {}}, 4,
                                      DirTail{vec({1, 0, 0, 0}), 0.0}, 1000, rng);
    EXPECT_DOUBLE_EQ(1.0, all);
    EXPECT_THROW(empirical_tail(NoiseSpec{NoiseKind::laplace, 1.0, {}}, 4, NormTail{1.0}, 10, rng),
                 ConfigError);
}

//! Mean of max_i |<theta, x_i>| over n samples is at most 2 r_n.
TEST(Tails, deviation_against_expected_maximum)
{
    Index const d = 4;
    Index const n = 20;
    double const sigma = 0.5;
    Vector const theta = vec({1, -1, 1, -1}) / 2.0;
    for (auto kind : {NoiseKind::gaussian, NoiseKind::laplace, NoiseKind::laplace_gaussian})
    {
        auto const cert = certificate(kind, d, n, sigma);
        NoiseSampler const s(NoiseSpec{kind, sigma, {}}.resolved(d, n), d);
        Rng rng(7);
        int const trials = 5000;
        double sum = 0;
        double sum2 = 0;
        for (int t = 0; t < trials; ++t)
        {
            double m = 0;
            for (Index i = 0; i < n; ++i)
                m = std::max(m, std::abs(s(rng).dot(theta)));
            sum += m;
            sum2 += m * m;
        }
        double const mean = sum / trials;
        double const sd = std::sqrt(std::max(0.0, sum2 / trials - mean * mean));
        EXPECT_LE(mean, 2 * cert.r_n + 3 * sd / std::sqrt(trials)) << to_string(kind);
    }
}

//! L times the median norm is at least d/3.
TEST(Tails, lipschitz_times_median)
{
    for (Index d : {3, 5, 8})
    {
        Index const n = 4 * d;
        for (auto kind : {NoiseKind::laplace, NoiseKind::laplace_gaussian})
        {
            double const sigma = 0.4;
            auto const cert = certificate(kind, d, n, sigma);
            NoiseSampler const s(NoiseSpec{kind, sigma, {}}.resolved(d, n), d);
            Rng rng(8);
            std::vector<double> norms(20001);
            for (auto& v : norms)
                v = s(rng).norm();
            std::nth_element(norms.begin(), norms.begin() + 10000, norms.end());
            EXPECT_GE(*cert.L * norms[10000], d / 3.0) << to_string(kind) << " d=" << d;
        }
    }
}

//---------------------------------------------------------------------------//
// Smoothed instances
//---------------------------------------------------------------------------//
TEST(SampleInstance, vanishing_noise_and_unit_rhs)
{
    Rng rng(9);
    auto model = sphere_centered_model(6, 3, vec({1, 2, 3}), NoiseSpec{NoiseKind::gaussian, 1e-12, {}}, true, rng);
    auto inst = sample_instance(model, rng);
    EXPECT_LE((inst.A - model.centers).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((inst.b - model.center_b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(model.c, inst.c);

    model.perturb_rhs = false;
    model.noise.sigma = 0.5;
    inst = sample_instance(model, rng);
    EXPECT_TRUE((inst.b.array() == 1.0).all());
    EXPECT_TRUE(inst.is_unit());
}

TEST(SampleInstance, reproducible)
{
    Rng r0(10);
    auto const model = sphere_centered_model(8, 3, vec({1, 0, 0}), NoiseSpec{NoiseKind::laplace, 0.2, {}}, true, r0);
    Rng a(11);
    Rng b(11);
    auto const x = sample_instance(model, a);
    auto const y = sample_instance(model, b);
    EXPECT_EQ(x.A, y.A);
    EXPECT_EQ(x.b, y.b);
}

TEST(SampleInstance, rejects_large_centers)
{
    SmoothedModel m;
    m.centers = rows({{1, 1}, {0, 1}});
    m.center_b = vec({0, 0});
    m.c = vec({1, 0});
    m.noise = NoiseSpec{NoiseKind::gaussian, 0.1, {}};
    Rng rng(12);
    EXPECT_THROW(sample_instance(m, rng), ConfigError);
    m.centers = rows({{0.6, 0}, {0, 1}});
    m.center_b = vec({0.8, 0});
    EXPECT_NO_THROW(sample_instance(m, rng));
    m.c = vec({0, 0});
    EXPECT_THROW(sample_instance(m, rng), ConfigError);
}

}  // namespace test
}  // namespace shadowlab
