//---------------------------------------------------------------------------//
//! \file shadowlab/shadow_pivot.hpp
//! Shadow vertex pivot rule with full pivot tracing.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "lp_core.hpp"

#include <optional>
#include <sstream>
#include <vector>

namespace shadowlab
{
//---------------------------------------------------------------------------//
struct PivotStep
{
    Basis basis_before;
    double lambda{0};
    Index leaving{0};
    //! Absent when the ratio test found no blocking row.
    std::optional<Index> entering;
    //! c^T x at the vertex of \c basis_before.
    double objective_value{0};
};

struct ShadowOptions
{
    //! Row of the start basis to leave on the first pivot, skipping the
    //! dual computation (used from the degenerate start of the random
    //! vertex phase).
    std::optional<Index> forced_leaving;
    //! Stop right after this row enters the basis.
    std::optional<Index> stop_on_entering;
    //! Pivot cap; default C(n, d) + 1.
    std::optional<Index> max_pivots;
};

struct ShadowRunResult
{
    enum class Status
    {
        optimal,
        unbounded,
        stopped,
    };

    Status status{Status::optimal};
    Basis basis;  //!< final basis (the last one visited when unbounded)
    Vector x;     //!< vertex of \c basis
    Vector ray;   //!< unbounded edge direction
    double lambda{0};
    std::vector<PivotStep> trace;

    //! Every step is a pivot, including the final unbounded discovery.
    Index pivot_count() const { return trace.size(); }
};

inline char const* to_string(ShadowRunResult::Status s)
{
    switch (s)
    {
        case ShadowRunResult::Status::optimal:
            return "optimal";
        case ShadowRunResult::Status::unbounded:
            return "unbounded";
        case ShadowRunResult::Status::stopped:
            return "stopped";
    }
    return "?";
}

namespace detail
{
inline bool ties(double a, double b)
{
    return std::abs(a - b) <= tol::degeneracy * (1.0 + std::abs(a));
}

//! Lower end of {lambda >= 0 : yd + lambda * slope >= 0}.
inline double dual_interval_start(Vector const& yd, Vector const& slope)
{
    double lo = 0.0;
    for (Eigen::Index i = 0; i < yd.size(); ++i)
        if (yd[i] < 0 && slope[i] > tol::zero)
            lo = std::max(lo, -yd[i] / slope[i]);
    return lo;
}
}  // namespace detail

/*!
 * Follow the maximizers of c_lambda = (1 - lambda) d_obj + lambda c from a
 * basis optimal for d_obj until lambda reaches one or an unbounded edge is
 * found.
 *
 * Each dual coordinate of c_lambda^T A_B^{-1} is affine in lambda; the basis
 * stays optimal until the first coordinate with negative slope crosses zero.
 * That row leaves and the primal moves along -A_B^{-1} e_k to the first
 * blocking constraint, which enters.
 */
inline ShadowRunResult shadow_vertex_run(LPInstance const& inst,
                                         Vector const& c,
                                         Vector const& d_obj,
                                         Basis const& start,
                                         ShadowOptions const& opts = {})
{
    check_basis_shape(inst, start);
    if (static_cast<Index>(c.size()) != inst.d || static_cast<Index>(d_obj.size()) != inst.d)
        throw InvalidInstance("objective dimension mismatch");

    Index const cap = opts.max_pivots
                          ? *opts.max_pivots
                          : std::min<std::uint64_t>(binomial(inst.n, inst.d),
                                                    std::numeric_limits<std::uint64_t>::max() - 1)
                                + 1;
    double const ytol = std::max(dual_tol(c), dual_tol(d_obj));
    double const ftol = inst.feasibility_tol();

    ShadowRunResult result;
    Basis B = start;
    double lambda = 0.0;
    bool first = true;

    while (true)
    {
        BasisFactor const F(select_rows(inst.A, B.indices));
        Vector const x = F.solve(select_entries(inst.b, B.indices));
        Vector const yd = F.solve_transpose(d_obj);
        Vector const slope = F.solve_transpose(c) - yd;

        // Choose the leaving position.
        Index k_pos = 0;
        double lambda_next = lambda;
        if (first && opts.forced_leaving)
        {
            auto it = std::find(B.indices.begin(), B.indices.end(), *opts.forced_leaving);
            if (it == B.indices.end())
                throw InvalidInstance("forced leaving row is not in the start basis");
            k_pos = static_cast<Index>(it - B.indices.begin());
        }
        else
        {
            if (first)
            {
                for (Eigen::Index i = 0; i < yd.size(); ++i)
                {
                    if (yd[i] <= ytol)
                    {
                        std::ostringstream os;
                        os << "dual coordinate " << i << " of start basis " << B.to_string()
                           << " is " << yd[i];
                        throw NotOptimalStart(os.str());
                    }
                }
            }
            double best = std::numeric_limits<double>::infinity();
            double second = best;
            for (Eigen::Index i = 0; i < yd.size(); ++i)
            {
                if (!(slope[i] < -tol::zero))
                    continue;
                double const root = std::max(lambda, -yd[i] / slope[i]);
                if (root < best)
                {
                    second = best;
                    best = root;
                    k_pos = static_cast<Index>(i);
                }
                else if (root < second)
                {
                    second = root;
                }
            }
            if (best >= 1.0)
            {
                result.status = ShadowRunResult::Status::optimal;
                result.basis = B;
                result.x = x;
                result.lambda = 1.0;
                return result;
            }
            if (detail::ties(best, second))
            {
                std::ostringstream os;
                os << "two dual coordinates vanish at lambda=" << best;
                throw DegeneratePivot(os.str());
            }
            lambda_next = best;
        }

        if (result.trace.size() >= cap)
            throw MaxPivotsExceeded("exceeded " + std::to_string(cap) + " pivots");

        PivotStep step;
        step.basis_before = B;
        step.lambda = lambda_next;
        step.leaving = B.indices[k_pos];
        step.objective_value = c.dot(x);

        // Ratio test along the edge leaving row k.
        Vector ek = Vector::Zero(static_cast<Eigen::Index>(inst.d));
        ek[static_cast<Eigen::Index>(k_pos)] = 1.0;
        Vector const dir = -F.solve(ek);
        double best_t = std::numeric_limits<double>::infinity();
        double second_t = best_t;
        std::optional<Index> entering;
        for (Index j = 0; j < inst.n; ++j)
        {
            if (B.contains(j))
                continue;
            auto const row = inst.A.row(static_cast<Eigen::Index>(j));
            double const rate = row.dot(dir);
            if (!(rate > tol::zero * (1.0 + row.norm()) * (1.0 + dir.norm())))
                continue;
            double const slack = inst.b[static_cast<Eigen::Index>(j)] - row.dot(x);
            double const t = std::max(0.0, slack) / rate;
            if (slack < -ftol)
                throw DegeneratePivot("current basis point is infeasible at row "
                                      + std::to_string(j));
            if (t < best_t)
            {
                second_t = best_t;
                best_t = t;
                entering = j;
            }
            else if (t < second_t)
            {
                second_t = t;
            }
        }
        step.entering = entering;
        result.trace.push_back(step);

        if (!entering)
        {
            result.status = ShadowRunResult::Status::unbounded;
            result.basis = B;
            result.x = x;
            result.ray = dir / dir.norm();
            result.lambda = lambda_next;
            return result;
        }
        if (detail::ties(best_t, second_t))
        {
            std::ostringstream os;
            os << "ratio test tie at step " << best_t;
            throw DegeneratePivot(os.str());
        }

        B.indices[k_pos] = *entering;
        if (first && opts.forced_leaving)
        {
            BasisFactor const G(select_rows(inst.A, B.indices));
            Vector const yd2 = G.solve_transpose(d_obj);
            lambda = detail::dual_interval_start(yd2, G.solve_transpose(c) - yd2);
        }
        else
        {
            lambda = lambda_next;
        }
        first = false;

        if (opts.stop_on_entering && *entering == *opts.stop_on_entering)
        {
            result.status = ShadowRunResult::Status::stopped;
            result.basis = B;
            result.x = basis_point(inst, B);
            result.lambda = lambda;
            return result;
        }
    }
}

}  // namespace shadowlab
