//---------------------------------------------------------------------------//
//! \file shadowlab/polar_lab.hpp
//! Brute-force polar geometry: sections of conv(a_1..a_n) by a plane,
//! shadow vertex counts, kernel combinations, chord lengths and explicit
//! shadow-bound formulas.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "lp_core.hpp"
#include "perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace shadowlab
{
using Point2 = Eigen::Vector2d;

//---------------------------------------------------------------------------//
//! Orthonormal pair spanning a plane W.
struct PlaneBasis
{
    Vector u;
    Vector v;

    Index dim() const { return static_cast<Index>(u.size()); }

    Point2 project(Vector const& x) const { return {u.dot(x), v.dot(x)}; }

    //! Gram-Schmidt on (a, b).
    static PlaneBasis span(Vector const& a, Vector const& b)
    {
        if (a.size() != b.size() || a.size() < 2)
            throw DomainError("plane generators must be vectors of equal dimension >= 2");
        double const na = a.norm();
        if (!(na > 0))
            throw DomainError("plane generator is zero");
        PlaneBasis w;
        w.u = a / na;
        Vector r = b - w.u.dot(b) * w.u;
        double const nr = r.norm();
        if (!(nr > tol::degeneracy * std::max(1.0, b.norm())))
            throw DomainError("plane generators are linearly dependent");
        w.v = r / nr;
        return w;
    }

    //! span(e_i, e_j) in dimension d.
    static PlaneBasis axes(Index d, Index i, Index j)
    {
        Vector a = Vector::Zero(static_cast<Eigen::Index>(d));
        Vector b = a;
        a[static_cast<Eigen::Index>(i)] = 1;
        b[static_cast<Eigen::Index>(j)] = 1;
        return span(a, b);
    }

    //! Orthonormal complement (d x (d - 2)).
    Matrix complement() const
    {
        Matrix uv(2, u.size());
        uv.row(0) = u.transpose();
        uv.row(1) = v.transpose();
        return detail::null_space(uv);
    }
};

//---------------------------------------------------------------------------//
// Section of the polar polytope
//---------------------------------------------------------------------------//
struct PolarEdge
{
    Point2 from;
    Point2 to;
    std::vector<Index> generators;  //!< the d-subset I
    double length{0};
};

struct PolarSection
{
    std::vector<Point2> vertices;  //!< counterclockwise
    std::vector<PolarEdge> edges;
    double perimeter{0};

    Index edge_count() const { return edges.size(); }
    double edge_length_sum() const
    {
        double s = 0;
        for (auto const& e : edges)
            s += e.length;
        return s;
    }
};

namespace detail
{
//! Perimeter of a closed polygon.
inline double polygon_perimeter(std::vector<Point2> const& pts)
{
    if (pts.size() < 2)
        return 0;
    double p = 0;
    for (Index i = 0; i < pts.size(); ++i)
        p += (pts[(i + 1) % pts.size()] - pts[i]).norm();
    return p;
}

//! Deduplicate and order points counterclockwise around their centroid.
inline std::vector<Point2> order_ccw(std::vector<Point2> pts, double merge_tol)
{
    std::vector<Point2> unique;
    for (auto const& p : pts)
    {
        bool dup = false;
        for (auto const& q : unique)
            dup = dup || (p - q).norm() <= merge_tol;
        if (!dup)
            unique.push_back(p);
    }
    if (unique.empty())
        return unique;
    Point2 centroid = Point2::Zero();
    for (auto const& p : unique)
        centroid += p;
    centroid /= static_cast<double>(unique.size());
    std::sort(unique.begin(), unique.end(), [&](Point2 const& a, Point2 const& b) {
        return std::atan2(a.y() - centroid.y(), a.x() - centroid.x())
               < std::atan2(b.y() - centroid.y(), b.x() - centroid.x());
    });
    return unique;
}
}  // namespace detail

/*!
 * Section of Q = conv(rows of \c points) by the plane W.
 *
 * Every d-subset I is tested for facet-hood; the facet's intersection with W
 * is the set of barycentric weights mu >= 0 on the line
 * {mu : sum mu_j a_j in W, sum mu_j = 1}, which is clipped directly.
 */
inline PolarSection polar_section(Matrix const& points, PlaneBasis const& W)
{
    Index const n = static_cast<Index>(points.rows());
    Index const d = static_cast<Index>(points.cols());
    if (W.dim() != d)
        throw DomainError("plane dimension does not match the points");
    if (d < 2 || n < d)
        throw DomainError("polar_section needs n >= d >= 2");

    double const scale = 1.0 + points.rowwise().norm().maxCoeff();
    double const margin = tol::facet_margin * scale;
    Matrix const Wperp = W.complement();

    PolarSection out;
    for_each_subset(n, d, [&](std::vector<Index> const& I) {
        Matrix const AI = select_rows(points, I);

        // Facet normal h: h . (a_j - a_0) = 0 for j in I.
        Matrix diffs(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(d));
        for (Index j = 1; j < d; ++j)
            diffs.row(static_cast<Eigen::Index>(j - 1)) = AI.row(static_cast<Eigen::Index>(j)) - AI.row(0);
        Matrix const hs = detail::null_space(diffs);
        if (hs.cols() != 1)
            throw DegenerateConfiguration("affinely dependent subset");
        Vector const h = hs.col(0);
        double const off = h.dot(AI.row(0).transpose());
        int side = 0;
        for (Index k = 0; k < n; ++k)
        {
            if (std::find(I.begin(), I.end(), k) != I.end())
                continue;
            double const s = h.dot(points.row(static_cast<Eigen::Index>(k)).transpose()) - off;
            if (std::abs(s) <= margin)
                throw DegenerateConfiguration("point " + std::to_string(k)
                                              + " lies on the hyperplane of another subset");
            int const sg = s > 0 ? 1 : -1;
            if (side == 0)
                side = sg;
            else if (side != sg)
                return true;
        }

        // Barycentric line: [Wperp^T A_I^T; 1^T] mu = [0; 1].
        Matrix M(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(d));
        M.topRows(static_cast<Eigen::Index>(d - 2)) = Wperp.transpose() * AI.transpose();
        M.row(static_cast<Eigen::Index>(d - 2)).setOnes();
        Vector rhs = Vector::Zero(static_cast<Eigen::Index>(d - 1));
        rhs[static_cast<Eigen::Index>(d - 2)] = 1.0;
        Matrix const zs = detail::null_space(M);
        if (zs.cols() != 1)
            throw DegenerateConfiguration("facet meets W in more than a line");
        Vector const z = zs.col(0);
        Vector const mu0 = M.completeOrthogonalDecomposition().solve(rhs);

        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < z.size(); ++j)
        {
            if (std::abs(z[j]) <= tol::zero)
            {
                if (mu0[j] < 0)
                    return true;
                continue;
            }
            double const t = -mu0[j] / z[j];
            if (z[j] > 0)
                lo = std::max(lo, t);
            else
                hi = std::min(hi, t);
        }
        if (!(hi > lo))
            return true;

        Vector const p = AI.transpose() * (mu0 + lo * z);
        Vector const q = AI.transpose() * (mu0 + hi * z);
        PolarEdge e;
        e.from = W.project(p);
        e.to = W.project(q);
        e.generators = I;
        e.length = (e.to - e.from).norm();
        if (e.length <= tol::degeneracy * scale)
            throw DegenerateConfiguration("facet touches W in a single point");
        for (auto const& other : out.edges)
        {
            bool const same = ((other.from - e.from).norm() + (other.to - e.to).norm()
                               <= tol::degeneracy * scale)
                              || ((other.from - e.to).norm() + (other.to - e.from).norm()
                                  <= tol::degeneracy * scale);
            if (same)
                throw DegenerateConfiguration("two facets generate one edge");
        }
        out.edges.push_back(std::move(e));
        return true;
    });

    std::vector<Point2> ends;
    for (auto const& e : out.edges)
    {
        ends.push_back(e.from);
        ends.push_back(e.to);
    }
    out.vertices = detail::order_ccw(std::move(ends), 1e-9 * scale);
    out.perimeter = detail::polygon_perimeter(out.vertices);
    return out;
}

//! Right-hand side of the perimeter containment 2 pi max ||pi_W(a_i)||.
inline double perimeter_ceiling(Matrix const& points, PlaneBasis const& W)
{
    double m = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        m = std::max(m, W.project(points.row(i).transpose()).norm());
    return 2 * std::numbers::pi * m;
}

//---------------------------------------------------------------------------//
// Shadow vertex count
//---------------------------------------------------------------------------//
namespace detail
{
//! True when {w in R^2 : g_i . w >= 0} has nonempty interior.
inline bool cone_has_interior(std::vector<Point2> const& gens)
{
    std::vector<double> angles;
    double gmax = 0;
    for (auto const& g : gens)
        gmax = std::max(gmax, g.norm());
    for (auto const& g : gens)
        if (g.norm() > tol::degeneracy * std::max(1.0, gmax))
            angles.push_back(std::atan2(g.y(), g.x()));
    if (angles.size() < 2)
        return true;
    // Some w has g_i . w > 0 for all i iff the directions avoid a closed
    // half-plane, i.e. the largest circular gap exceeds pi.
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2 * std::numbers::pi - angles.back();
    for (Index i = 1; i < angles.size(); ++i)
        gap = std::max(gap, angles[i] - angles[i - 1]);
    return gap > std::numbers::pi + 1e-9;
}
}  // namespace detail

/*!
 * Number of vertices of the projection of {A x <= b} onto W.
 *
 * A vertex x projects to a vertex of the shadow iff its normal cone meets W
 * in a two-dimensional cone. The normal cone is the union of the basis cones
 * {A_B^T y : y >= 0} over all bases at x, so each feasible basis is tested
 * separately: w in W lies in it iff A_B^{-T} [u v] w >= 0. Vertices with
 * the same projection count once.
 */
inline Index shadow_vertices(LPInstance const& inst, PlaneBasis const& W)
{
    if (W.dim() != inst.d)
        throw DomainError("plane dimension does not match the instance");
    Matrix UV(static_cast<Eigen::Index>(inst.d), 2);
    UV.col(0) = W.u;
    UV.col(1) = W.v;
    double const merge = 1e-7 * (1.0 + inst.b.lpNorm<Eigen::Infinity>());

    std::vector<Point2> counted;
    for_each_subset(inst.n, inst.d, [&](std::vector<Index> const& S) {
        std::optional<BasisFactor> F;
        try
        {
            F.emplace(select_rows(inst.A, S));
        }
        catch (SingularBasis const&)
        {
            return true;
        }
        Vector const x = F->solve(select_entries(inst.b, S));
        if (!is_feasible_point(inst, x))
            return true;
        Point2 const px = W.project(x);
        for (auto const& y : counted)
            if ((y - px).norm() <= merge * (1.0 + px.norm()))
                return true;
        Vector const gu = F->solve_transpose(UV.col(0));
        Vector const gv = F->solve_transpose(UV.col(1));
        std::vector<Point2> gens;
        for (Eigen::Index i = 0; i < gu.size(); ++i)
            gens.emplace_back(gu[i], gv[i]);
        if (detail::cone_has_interior(gens))
            counted.push_back(px);
        return true;
    });
    return counted.size();
}

//! Number of extreme points of the convex hull of the projected vertices.
inline Index projected_hull_vertices(LPInstance const& inst, PlaneBasis const& W)
{
    std::vector<Point2> pts;
    for_each_subset(inst.n, inst.d, [&](std::vector<Index> const& S) {
        try
        {
            Vector const x = basis_point(inst, Basis{S});
            if (is_feasible_point(inst, x))
                pts.push_back(W.project(x));
        }
        catch (SingularBasis const&)
        {
        }
        return true;
    });
    std::sort(pts.begin(), pts.end(), [](Point2 const& a, Point2 const& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    double const eps = 1e-9 * (1.0 + inst.b.lpNorm<Eigen::Infinity>());
    std::vector<Point2> uniq;
    for (auto const& p : pts)
        if (uniq.empty() || (p - uniq.back()).norm() > eps)
            uniq.push_back(p);
    if (uniq.size() < 3)
        return uniq.size();
    auto cross = [](Point2 const& o, Point2 const& a, Point2 const& b) {
        return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
    };
    // Andrew's monotone chain; collinear points are dropped.
    std::vector<Point2> hull(2 * uniq.size());
    Index k = 0;
    for (Index i = 0; i < uniq.size(); ++i)
    {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], uniq[i]) <= eps)
            --k;
        hull[k++] = uniq[i];
    }
    for (Index i = uniq.size() - 1, t = k + 1; i-- > 0;)
    {
        while (k >= t && cross(hull[k - 2], hull[k - 1], uniq[i]) <= eps)
            --k;
        hull[k++] = uniq[i];
    }
    return k - 1;
}

//---------------------------------------------------------------------------//
// Shapes and chords
//---------------------------------------------------------------------------//
/*!
 * Kernel combination of a shape: rows of \c S are s_1..s_d in dimension
 * d - 2. Returns z with sum z_i s_i = 0, sum z_i = 0, ||z||_1 = 1 and the
 * first nonzero entry positive.
 */
inline Vector kernel_combination(Matrix const& S)
{
    auto const d = S.rows();
    if (S.cols() != d - 2 || d < 3)
        throw RankDeficientShape("shape must have d points in dimension d - 2");
    Matrix M(d - 1, d);
    M.topRows(d - 2) = S.transpose();
    M.row(d - 2).setOnes();
    Matrix const ns = detail::null_space(M, 1e-12);
    if (ns.cols() != 1)
        throw RankDeficientShape("shape points are affinely dependent");
    Vector z = ns.col(0);
    z /= z.lpNorm<1>();
    for (Eigen::Index i = 0; i < d; ++i)
    {
        if (std::abs(z[i]) > tol::degeneracy)
        {
            if (z[i] < 0)
                z = -z;
            break;
        }
    }
    return z;
}

//! y(S) = sum |z_i| s_i.
inline Vector chord_center(Matrix const& S)
{
    Vector const z = kernel_combination(S);
    return S.transpose() * z.cwiseAbs();
}

/*!
 * l1 length of the set of convex combinations of the shape that equal q.
 *
 * The set is a segment lambda_q + mu z; mu is bounded by the nonnegativity
 * of each coordinate.
 */
inline double chord_diameter(Matrix const& S, Vector const& q)
{
    Vector const z = kernel_combination(S);
    auto const d = S.rows();
    if (q.size() != d - 2)
        throw DomainError("query point has the wrong dimension");
    Matrix M(d - 1, d);
    M.topRows(d - 2) = S.transpose();
    M.row(d - 2).setOnes();
    Vector rhs(d - 1);
    rhs.head(d - 2) = q;
    rhs[d - 2] = 1.0;
    Vector const lam = M.completeOrthogonalDecomposition().solve(rhs);
    double const scale = 1.0 + S.cwiseAbs().maxCoeff();
    if ((M * lam - rhs).norm() > 1e-9 * scale)
        throw OutsideHull("query point is not an affine combination of the shape");
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i)
    {
        if (std::abs(z[i]) <= tol::zero)
        {
            if (lam[i] < -1e-9)
                throw OutsideHull("query point is outside the hull");
            continue;
        }
        double const t = -lam[i] / z[i];
        if (z[i] > 0)
            lo = std::max(lo, t);
        else
            hi = std::min(hi, t);
    }
    if (lo > hi + 1e-9)
        throw OutsideHull("query point is outside the hull");
    return std::max(0.0, hi - lo);
}

//---------------------------------------------------------------------------//
// Explicit bounds
//---------------------------------------------------------------------------//
/*!
 * 2 + 8 pi e^2 d^{3/2} (L / tau) (1 + R) (1 + 4 r_n): the perimeter bound
 * 2 pi (1 + 4 r_n) divided by the edge-length lower bound
 * (e^{-2} / (2 d L (1 + R))) (tau / (2 sqrt d)), plus two.
 */
inline double parametrized_edge_bound(double d, double L, double tau, double R, double r_n)
{
    if (!(d > 0 && L > 0 && tau > 0 && R >= 0 && r_n >= 0))
        throw DomainError("bound parameters out of range");
    double const e2 = std::exp(2.0);
    return 2.0 + 8 * std::numbers::pi * e2 * std::pow(d, 1.5) * (L / tau) * (1 + R) * (1 + 4 * r_n);
}

inline double parametrized_edge_bound(Index d, DistributionCertificate const& cert)
{
    if (!cert.L)
        throw DomainError("certificate has no log-Lipschitz constant");
    return parametrized_edge_bound(static_cast<double>(d), *cert.L, cert.tau, cert.R_nd, cert.r_n);
}

//! One plus the parametrized bound at the Laplace-Gaussian certificate.
inline double gaussian_shadow_bound(Index d, Index n, double sigma)
{
    return 1.0 + parametrized_edge_bound(d, certificate(NoiseKind::laplace_gaussian, d, n, sigma));
}

}  // namespace shadowlab
