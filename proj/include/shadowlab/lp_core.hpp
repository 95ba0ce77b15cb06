//---------------------------------------------------------------------------//
//! \file shadowlab/lp_core.hpp
//! LP data model, basis algebra, feasibility/optimality predicates and the
//! brute-force reference solver.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace shadowlab
{
//---------------------------------------------------------------------------//
/*!
 * Inequality-form linear program: maximize c^T x subject to A x <= b.
 *
 * Rows of \c A are the constraint normals a_i. Instances are value types and
 * are validated on construction through \c LPInstance::create.
 */
struct LPInstance
{
    Index d{0};
    Index n{0};
    Matrix A;
    Vector b;
    Vector c;

    static LPInstance create(Matrix A, Vector b, Vector c)
    {
        LPInstance inst;
        inst.d = static_cast<Index>(A.cols());
        inst.n = static_cast<Index>(A.rows());
        inst.A = std::move(A);
        inst.b = std::move(b);
        inst.c = std::move(c);
        inst.validate();
        return inst;
    }

    void validate() const
    {
        if (d < 1 || n < d)
            throw InvalidInstance("need n >= d >= 1, got n=" + std::to_string(n)
                                  + " d=" + std::to_string(d));
        if (static_cast<Index>(A.rows()) != n || static_cast<Index>(A.cols()) != d)
            throw InvalidInstance("A has the wrong shape");
        if (static_cast<Index>(b.size()) != n)
            throw InvalidInstance("b must have n entries");
        if (static_cast<Index>(c.size()) != d)
            throw InvalidInstance("c must have d entries");
        if (!A.allFinite() || !b.allFinite() || !c.allFinite())
            throw InvalidInstance("entries must be finite");
        if (c.isZero(0.0))
            throw InvalidInstance("objective must be nonzero");
    }

    //! True when every right-hand side is exactly one.
    bool is_unit() const { return (b.array() == 1.0).all(); }

    //! Copy with a different objective; the constraint system is shared.
    LPInstance with_objective(Vector obj) const
    {
        return LPInstance::create(A, b, std::move(obj));
    }

    //! Tolerance for componentwise feasibility of A x <= b.
    double feasibility_tol() const
    {
        return tol::degeneracy * (1.0 + b.lpNorm<Eigen::Infinity>());
    }
};

//---------------------------------------------------------------------------//
//! Ordered set of d constraint indices.
struct Basis
{
    std::vector<Index> indices;

    Index size() const { return indices.size(); }
    bool contains(Index i) const
    {
        return std::find(indices.begin(), indices.end(), i) != indices.end();
    }
    friend bool operator==(Basis const&, Basis const&) = default;

    //! Same members regardless of order.
    bool same_set(Basis const& other) const
    {
        auto a = indices;
        auto b = other.indices;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
    }

    std::string to_string() const
    {
        std::ostringstream os;
        os << '{';
        for (Index i = 0; i < indices.size(); ++i)
            os << (i ? "," : "") << indices[i];
        os << '}';
        return os.str();
    }
};

//! Rows of \c A selected by \c idx, in order.
inline Matrix select_rows(Matrix const& A, std::vector<Index> const& idx)
{
    Matrix out(static_cast<Eigen::Index>(idx.size()), A.cols());
    for (Index r = 0; r < idx.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = A.row(static_cast<Eigen::Index>(idx[r]));
    return out;
}

inline Vector select_entries(Vector const& v, std::vector<Index> const& idx)
{
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (Index r = 0; r < idx.size(); ++r)
        out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(idx[r])];
    return out;
}

//---------------------------------------------------------------------------//
/*!
 * LU factorization of a square basis matrix.
 *
 * Singularity is judged by the reciprocal condition estimate of the matrix
 * with rows scaled to unit length, so the test ignores row scaling. Every
 * solve applies one step of iterative refinement.
 */
class BasisFactor
{
  public:
    explicit BasisFactor(Matrix m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw SingularBasis("basis matrix must be square and nonempty");
        Matrix scaled = m_;
        for (Eigen::Index i = 0; i < m_.rows(); ++i)
        {
            double const nrm = m_.row(i).norm();
            if (nrm == 0.0)
                throw SingularBasis("zero row in basis");
            scaled.row(i) /= nrm;
        }
        lu_.compute(m_);
        lu_t_.compute(m_.transpose());
        rcond_ = Eigen::PartialPivLU<Matrix>(scaled).rcond();
        if (!(rcond_ > tol::degeneracy))
        {
            std::ostringstream os;
            os << "reciprocal condition " << rcond_;
            throw SingularBasis(os.str());
        }
    }

    //! Solve M x = rhs.
    Vector solve(Vector const& rhs) const
    {
        Vector x = lu_.solve(rhs);
        Vector r = rhs - m_ * x;
        x += lu_.solve(r);
        return x;
    }

    //! Solve M^T y = rhs.
    Vector solve_transpose(Vector const& rhs) const
    {
        Vector y = lu_t_.solve(rhs);
        Vector r = rhs - m_.transpose() * y;
        y += lu_t_.solve(r);
        return y;
    }

    Matrix const& matrix() const { return m_; }
    double rcond() const { return rcond_; }

  private:
    Matrix m_;
    Eigen::PartialPivLU<Matrix> lu_;
    Eigen::PartialPivLU<Matrix> lu_t_;
    double rcond_{0};
};

inline void check_basis_shape(LPInstance const& inst, Basis const& B)
{
    if (B.size() != inst.d)
        throw SingularBasis("basis has " + std::to_string(B.size())
                            + " indices, expected " + std::to_string(inst.d));
    for (Index i = 0; i < B.size(); ++i)
    {
        if (B.indices[i] >= inst.n)
            throw SingularBasis("basis index out of range");
        for (Index j = 0; j < i; ++j)
            if (B.indices[i] == B.indices[j])
                throw SingularBasis("repeated basis index");
    }
}

inline BasisFactor factor_basis(LPInstance const& inst, Basis const& B)
{
    check_basis_shape(inst, B);
    return BasisFactor(select_rows(inst.A, B.indices));
}

//---------------------------------------------------------------------------//
// Basis predicates
//---------------------------------------------------------------------------//
//! Vertex x_B = A_B^{-1} b_B.
inline Vector basis_point(LPInstance const& inst, Basis const& B)
{
    auto const f = factor_basis(inst, B);
    return f.solve(select_entries(inst.b, B.indices));
}

inline bool is_feasible_point(LPInstance const& inst, Vector const& x)
{
    return ((inst.A * x - inst.b).array() <= inst.feasibility_tol()).all();
}

inline bool is_feasible_basis(LPInstance const& inst, Basis const& B)
{
    return is_feasible_point(inst, basis_point(inst, B));
}

//! Dual coefficients obj^T A_B^{-1}, listed in basis order.
inline Vector dual_coeffs(LPInstance const& inst, Basis const& B, Vector const& obj)
{
    return factor_basis(inst, B).solve_transpose(obj);
}

inline double dual_tol(Vector const& obj)
{
    return tol::degeneracy * (1.0 + obj.lpNorm<Eigen::Infinity>());
}

//! obj^T A_B^{-1} >= -tol componentwise. Feasibility of B is not rechecked.
inline bool is_optimal_basis(LPInstance const& inst, Basis const& B, Vector const& obj)
{
    Vector const y = dual_coeffs(inst, B, obj);
    return (y.array() >= -dual_tol(obj)).all();
}

//---------------------------------------------------------------------------//
// Reference solver
//---------------------------------------------------------------------------//
struct SolveStatus
{
    enum class Kind
    {
        optimal,
        unbounded,
        infeasible,
        degenerate,
    };

    Kind kind{Kind::degenerate};
    Vector x;  //!< optimal point
    Basis basis;
    double value{0};
    Vector ray;  //!< unbounded direction: A r <= 0, c^T r > 0
    std::string diagnostic;

    static SolveStatus optimal(Vector x, Basis B, double value)
    {
        SolveStatus s;
        s.kind = Kind::optimal;
        s.x = std::move(x);
        s.basis = std::move(B);
        s.value = value;
        return s;
    }
    static SolveStatus unbounded(Vector r)
    {
        SolveStatus s;
        s.kind = Kind::unbounded;
        s.ray = std::move(r);
        return s;
    }
    static SolveStatus infeasible()
    {
        SolveStatus s;
        s.kind = Kind::infeasible;
        return s;
    }
    static SolveStatus degenerate(std::string why)
    {
        SolveStatus s;
        s.kind = Kind::degenerate;
        s.diagnostic = std::move(why);
        return s;
    }
};

inline char const* to_string(SolveStatus::Kind k)
{
    switch (k)
    {
        case SolveStatus::Kind::optimal:
            return "optimal";
        case SolveStatus::Kind::unbounded:
            return "unbounded";
        case SolveStatus::Kind::infeasible:
            return "infeasible";
        case SolveStatus::Kind::degenerate:
            return "degenerate";
    }
    return "?";
}

namespace detail
{
//! Orthonormal basis of the null space of M (columns).
inline Matrix null_space(Matrix const& M, double rel_tol = 1e-10)
{
    Eigen::Index const cols = M.cols();
    if (M.rows() == 0)
        return Matrix::Identity(cols, cols);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    auto const& s = svd.singularValues();
    double const smax = s.size() ? s[0] : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > rel_tol * std::max(1.0, smax))
            ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

//! Search for a direction r with A r <= 0 and c^T r > 0.
inline std::optional<Vector> find_improving_ray(LPInstance const& inst)
{
    double const atol = 1e-9;
    auto accept = [&](Vector r) -> std::optional<Vector> {
        double const nrm = r.norm();
        if (nrm == 0.0)
            return std::nullopt;
        r /= nrm;
        if (inst.c.dot(r) <= atol * inst.c.norm())
            return std::nullopt;
        for (Index i = 0; i < inst.n; ++i)
        {
            auto const row = inst.A.row(static_cast<Eigen::Index>(i));
            if (row.dot(r) > atol * row.norm())
                return std::nullopt;
        }
        return r;
    };

    // Lineality space: A r = 0 for every row.
    Matrix const lineality = null_space(inst.A);
    if (lineality.cols() > 0)
    {
        Vector const proj = lineality * (lineality.transpose() * inst.c);
        if (auto r = accept(proj))
            return r;
    }

    // Extreme rays of a pointed cone are tight at d-1 independent rows.
    std::optional<Vector> found;
    for_each_subset(inst.n, inst.d - 1, [&](std::vector<Index> const& S) {
        Matrix const ns = null_space(select_rows(inst.A, S));
        if (ns.cols() != 1)
            return true;
        Vector const r = ns.col(0);
        if (auto ok = accept(r))
        {
            found = ok;
            return false;
        }
        if (auto ok = accept(-r))
        {
            found = ok;
            return false;
        }
        return true;
    });
    return found;
}

//! Farkas certificate y >= 0, y^T A = 0, y^T b < 0 supported on <= d+1 rows.
inline bool has_farkas_certificate(LPInstance const& inst)
{
    Index const max_support = std::min(inst.n, inst.d + 1);
    double const btol = tol::degeneracy * (1.0 + inst.b.lpNorm<Eigen::Infinity>());
    bool found = false;
    for (Index k = 1; k <= max_support && !found; ++k)
    {
        for_each_subset(inst.n, k, [&](std::vector<Index> const& S) {
            // [A_S^T; 1^T] y = [0; 1]
            Matrix M(static_cast<Eigen::Index>(inst.d + 1), static_cast<Eigen::Index>(k));
            M.topRows(static_cast<Eigen::Index>(inst.d)) = select_rows(inst.A, S).transpose();
            M.row(static_cast<Eigen::Index>(inst.d)).setOnes();
            Vector rhs = Vector::Zero(static_cast<Eigen::Index>(inst.d + 1));
            rhs[static_cast<Eigen::Index>(inst.d)] = 1.0;
            Vector const y = M.completeOrthogonalDecomposition().solve(rhs);
            if ((M * y - rhs).norm() > 1e-9)
                return true;
            if ((y.array() < -1e-12).any())
                return true;
            if (y.dot(select_entries(inst.b, S)) < -btol)
            {
                found = true;
                return false;
            }
            return true;
        });
    }
    return found;
}
}  // namespace detail

/*!
 * Exhaustive reference solver for desk-scale instances.
 *
 * Unboundedness is decided first (a direction with A r <= 0 and c^T r > 0
 * makes the LP unbounded whether or not it is feasible). Otherwise every
 * d-subset of rows is tried as a basis; the best feasible one is optimal.
 * With no feasible basis, infeasibility must be certified by a Farkas
 * combination, else the polyhedron is nonempty without vertices and the
 * instance is reported degenerate.
 */
inline SolveStatus oracle_solve(LPInstance const& inst)
{
    if (auto r = detail::find_improving_ray(inst))
        return SolveStatus::unbounded(*r);

    double const ftol = inst.feasibility_tol();
    double const scale = 1.0 + inst.c.norm();
    std::optional<SolveStatus> best;
    std::string degenerate_why;

    for_each_subset(inst.n, inst.d, [&](std::vector<Index> const& S) {
        Basis B{S};
        Vector x;
        try
        {
            x = basis_point(inst, B);
        }
        catch (SingularBasis const&)
        {
            return true;
        }
        if (!is_feasible_point(inst, x))
            return true;
        double const value = inst.c.dot(x);
        if (!best)
        {
            best = SolveStatus::optimal(x, B, value);
            return true;
        }
        double const gap = value - best->value;
        double const vtol = tol::degeneracy * (scale + std::abs(best->value));
        if (std::abs(gap) <= vtol)
        {
            if ((x - best->x).norm() > 1e-7 * (1.0 + x.norm()))
                degenerate_why = "distinct feasible vertices tie on the objective";
        }
        else if (gap > 0)
        {
            best = SolveStatus::optimal(x, B, value);
            degenerate_why.clear();
        }
        return true;
    });

    if (best)
    {
        if (!degenerate_why.empty())
            return SolveStatus::degenerate(degenerate_why);
        Vector const slack = inst.b - inst.A * best->x;
        Index tight = 0;
        for (Eigen::Index i = 0; i < slack.size(); ++i)
            if (std::abs(slack[i]) <= ftol)
                ++tight;
        if (tight > inst.d)
            return SolveStatus::degenerate("optimal vertex is tight at "
                                           + std::to_string(tight) + " rows");
        return *best;
    }

    if (detail::has_farkas_certificate(inst))
        return SolveStatus::infeasible();
    return SolveStatus::degenerate("nonempty polyhedron without vertices");
}

}  // namespace shadowlab
