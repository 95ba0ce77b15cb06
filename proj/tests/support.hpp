//---------------------------------------------------------------------------//
//! \file tests/support.hpp
//! Independent oracles and fixtures shared by the unit tests.
//!
//! Nothing here calls the library's solvers: vertices come from a full-pivot
//! LU on every d-subset, and path breakpoints from bisection over those
//! vertices.
//---------------------------------------------------------------------------//
#pragma once

#include "shadowlab/common.hpp"
#include "shadowlab/lp_core.hpp"
#include "shadowlab/perturb.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace shadowlab
{
namespace test
{
//---------------------------------------------------------------------------//
inline Matrix rows(std::initializer_list<std::initializer_list<double>> r)
{
    Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (auto const& row : r)
    {
        Eigen::Index j = 0;
        for (double v : row)
            m(i, j++) = v;
        ++i;
    }
    return m;
}

inline Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

//! Square |x_i| <= 1 with rows x1, x2, -x1, -x2.
inline LPInstance unit_square(Vector c)
{
    return LPInstance::create(rows({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}), Vector::Ones(4), std::move(c));
}

//! Cube |x_i| <= 1 in dimension d: rows e_1..e_d, then -e_1..-e_d.
inline LPInstance unit_cube(Index d, Vector c)
{
    auto const dd = static_cast<Eigen::Index>(d);
    Matrix A(2 * dd, dd);
    A << Matrix::Identity(dd, dd), -Matrix::Identity(dd, dd);
    return LPInstance::create(std::move(A), Vector::Ones(2 * dd), std::move(c));
}

inline bool rel_close(double a, double oracle, double tol = 1e-7)
{
    return std::abs(a - oracle) <= tol * std::max(1.0, std::abs(oracle));
}

//---------------------------------------------------------------------------//
// Vertex enumeration oracle
//---------------------------------------------------------------------------//
struct OracleVertex
{
    Vector x;
    std::vector<Index> basis;
};

//! All feasible basic points, via full-pivot LU rank tests.
inline std::vector<OracleVertex> enumerate_vertices(Matrix const& A, Vector const& b)
{
    std::vector<OracleVertex> out;
    auto const n = static_cast<Index>(A.rows());
    auto const d = static_cast<Index>(A.cols());
    double const ftol = 1e-9 * (1 + b.cwiseAbs().maxCoeff());
    for_each_subset(n, d, [&](std::vector<Index> const& S) {
        Matrix M(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        Vector r(static_cast<Eigen::Index>(d));
        for (Index i = 0; i < d; ++i)
        {
            M.row(static_cast<Eigen::Index>(i)) = A.row(static_cast<Eigen::Index>(S[i]));
            r[static_cast<Eigen::Index>(i)] = b[static_cast<Eigen::Index>(S[i])];
        }
        Eigen::FullPivLU<Matrix> lu(M);
        lu.setThreshold(1e-10);
        if (lu.rank() < static_cast<Eigen::Index>(d))
            return true;
        Vector const x = lu.solve(r);
        if (((A * x - b).array() > ftol).any())
            return true;
        out.push_back({x, S});
        return true;
    });
    return out;
}

//! Index of the vertex maximizing obj (first on ties).
inline Index argmax_vertex(std::vector<OracleVertex> const& vs, Vector const& obj)
{
    Index best = 0;
    for (Index i = 1; i < vs.size(); ++i)
        if (obj.dot(vs[i].x) > obj.dot(vs[best].x))
            best = i;
    return best;
}

//! Smallest lambda in (0, 1] at which the argmax of (1 - l) d + l c moves
//! away from the start maximizer, by bisection.
inline double first_breakpoint(std::vector<OracleVertex> const& vs, Vector const& d, Vector const& c)
{
    Vector const x0 = vs[argmax_vertex(vs, d)].x;
    auto moved = [&](double l) {
        Vector const obj = (1 - l) * d + l * c;
        return (vs[argmax_vertex(vs, obj)].x - x0).norm() > 1e-9;
    };
    if (!moved(1.0))
        return 1.0;
    double lo = 0;
    double hi = 1;
    for (int i = 0; i < 200; ++i)
    {
        double const mid = 0.5 * (lo + hi);
        (moved(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

//---------------------------------------------------------------------------//
// Random fixtures
//---------------------------------------------------------------------------//
//! Unit instance with rows on the sphere plus Gaussian noise.
inline LPInstance random_unit_instance(Index n, Index d, double sigma, Rng& rng)
{
    Vector const c = uniform_sphere(d, rng);
    SmoothedModel const m = sphere_centered_model(n, d, c, NoiseSpec{NoiseKind::gaussian, sigma, {}}, false, rng);
    return sample_instance(m, rng);
}

//! Smooth instance (rows of (A, b) perturbed jointly).
inline LPInstance random_smooth_instance(Index n, Index d, double sigma, NoiseKind kind, Rng& rng)
{
    Vector const c = uniform_sphere(d, rng);
    SmoothedModel const m = sphere_centered_model(n, d, c, NoiseSpec{kind, sigma, {}}, true, rng);
    return sample_instance(m, rng);
}

}  // namespace test
}  // namespace shadowlab
