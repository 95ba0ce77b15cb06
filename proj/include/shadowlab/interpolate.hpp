//---------------------------------------------------------------------------//
//! \file shadowlab/interpolate.hpp
//! Phase II through the interpolation LP and the two-phase driver.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "lp_core.hpp"
#include "perturb.hpp"
#include "phase_one.hpp"
#include "shadow_pivot.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace shadowlab
{
//---------------------------------------------------------------------------//
/*!
 * Interpolation LP in (x, lambda): rows [a_i | 1 - b_i] <= 1, then
 * lambda <= 1 at index n and -lambda <= 0 at index n + 1.
 */
struct IntLP
{
    LPInstance base;
    Index source_n{0};

    Index upper_row() const { return source_n; }
    Index lower_row() const { return source_n + 1; }
    //! (c, 0)
    Vector plane_c() const
    {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(base.d));
        v.head(static_cast<Eigen::Index>(base.d - 1)) = base.c.head(static_cast<Eigen::Index>(base.d - 1));
        return v;
    }
    //! e_lambda
    Vector plane_lambda() const
    {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(base.d));
        v[static_cast<Eigen::Index>(base.d - 1)] = 1.0;
        return v;
    }
};

inline IntLP build_int_lp(LPInstance const& inst)
{
    auto const n = static_cast<Eigen::Index>(inst.n);
    auto const d = static_cast<Eigen::Index>(inst.d);
    Matrix A = Matrix::Zero(n + 2, d + 1);
    A.topLeftCorner(n, d) = inst.A;
    A.block(0, d, n, 1) = (Vector::Ones(n) - inst.b);
    A(n, d) = 1.0;
    A(n + 1, d) = -1.0;
    Vector b = Vector::Ones(n + 2);
    b[n + 1] = 0.0;
    Vector c = Vector::Zero(d + 1);
    c.head(d) = inst.c;
    return IntLP{LPInstance::create(std::move(A), std::move(b), std::move(c)), inst.n};
}

//---------------------------------------------------------------------------//
enum class PhaseOneKind
{
    symrv,
    dd,
};

inline char const* to_string(PhaseOneKind k)
{
    return k == PhaseOneKind::symrv ? "symrv" : "dd";
}

inline PhaseOneKind phase_one_from_string(std::string const& s)
{
    if (s == "symrv")
        return PhaseOneKind::symrv;
    if (s == "dd")
        return PhaseOneKind::dd;
    throw ConfigError("unknown Phase I '" + s + "'");
}

struct TwoPhaseResult
{
    enum class Status
    {
        optimal,
        unbounded,
        infeasible,
    };

    Status status{Status::optimal};
    Vector x;
    double value{0};
    Basis basis;  //!< optimal basis of the source instance
    Index phase1_pivots{0};
    Index phase2_pivots{0};
    Index restarts{0};

    PhaseOneOutcome phase1;
    std::optional<ShadowRunResult> phase2;
    Vector phase2_start_objective;
};

inline char const* to_string(TwoPhaseResult::Status s)
{
    switch (s)
    {
        case TwoPhaseResult::Status::optimal:
            return "optimal";
        case TwoPhaseResult::Status::unbounded:
            return "unbounded";
        case TwoPhaseResult::Status::infeasible:
            return "infeasible";
    }
    return "?";
}

namespace detail
{
//! DD needs c_1 != 0; swap in the first nonzero coordinate if necessary.
inline PhaseOneOutcome dd_with_permutation(LPInstance const& unit)
{
    double const small = tol::zero * (1.0 + unit.c.norm());
    if (std::abs(unit.c[0]) > small)
        return dd_solve(unit);
    Eigen::Index swap = 1;
    while (swap < unit.c.size() && std::abs(unit.c[swap]) <= small)
        ++swap;
    Matrix A = unit.A;
    Vector c = unit.c;
    A.col(0).swap(A.col(swap));
    std::swap(c[0], c[swap]);
    PhaseOneOutcome out = dd_solve(LPInstance::create(std::move(A), unit.b, std::move(c)));
    if (out.x.size())
        std::swap(out.x[0], out.x[swap]);
    if (out.ray.size())
        std::swap(out.ray[0], out.ray[swap]);
    out.stages.clear();
    return out;
}
}  // namespace detail

/*!
 * Solve max c^T x, A x <= b.
 *
 * Phase I solves the same system with b replaced by ones. Its optimal basis,
 * together with -lambda <= 0, is a vertex of the interpolation LP that is
 * optimal for (cos theta c, sin theta) near theta = -pi/2; the shadow run
 * toward e_lambda stops when lambda <= 1 enters.
 */
inline TwoPhaseResult two_phase_solve(LPInstance const& inst,
                                      PhaseOneKind phase1,
                                      SymRVConfig const& cfg,
                                      Rng& rng)
{
    TwoPhaseResult out;
    LPInstance const unit
        = LPInstance::create(inst.A, Vector::Ones(static_cast<Eigen::Index>(inst.n)), inst.c);

    out.phase1 = phase1 == PhaseOneKind::dd ? detail::dd_with_permutation(unit)
                                            : symmetric_rv_solve(unit, cfg, rng);
    out.phase1_pivots = out.phase1.pivots_total;
    out.restarts = out.phase1.restarts_used;
    if (out.phase1.status == PhaseOneOutcome::Status::restart_exhausted)
        throw RestartExhausted("Phase I gave up after " + std::to_string(out.restarts)
                               + " restarts");
    if (out.phase1.status == PhaseOneOutcome::Status::unbounded)
    {
        out.status = TwoPhaseResult::Status::unbounded;
        return out;
    }

    IntLP const ilp = build_int_lp(inst);
    Basis start = out.phase1.basis;
    start.indices.push_back(ilp.lower_row());

    Vector const cc = ilp.plane_c();
    Vector const el = ilp.plane_lambda();
    double offset = 1.0 / 16;
    bool certified = false;
    Vector d_obj;
    for (int it = 0; it < 60 && !certified; ++it, offset /= 2)
    {
        double const theta = -std::numbers::pi / 2 + offset;
        d_obj = std::cos(theta) * cc + std::sin(theta) * el;
        try
        {
            Vector const y = dual_coeffs(ilp.base, start, d_obj);
            certified = (y.array() > dual_tol(d_obj)).all();
        }
        catch (SingularBasis const& err)
        {
            throw DegenerateInstance(err.what());
        }
    }
    if (!certified)
        throw DegenerateInstance("no start objective certifies the Phase II basis");
    out.phase2_start_objective = d_obj;

    ShadowOptions opts;
    opts.stop_on_entering = ilp.upper_row();
    try
    {
        out.phase2 = shadow_vertex_run(ilp.base, el, d_obj, start, opts);
    }
    catch (DegeneratePivot const& err)
    {
        throw DegenerateInstance(err.what());
    }
    catch (SingularBasis const& err)
    {
        throw DegenerateInstance(err.what());
    }
    out.phase2_pivots = out.phase2->pivot_count();

    switch (out.phase2->status)
    {
        case ShadowRunResult::Status::unbounded:
            out.status = TwoPhaseResult::Status::unbounded;
            return out;
        case ShadowRunResult::Status::optimal:
            out.status = TwoPhaseResult::Status::infeasible;
            return out;
        case ShadowRunResult::Status::stopped:
            break;
    }

    Basis B;
    for (Index i : out.phase2->basis.indices)
        if (i != ilp.upper_row())
            B.indices.push_back(i);
    auto const d = static_cast<Eigen::Index>(inst.d);
    out.x = out.phase2->x.head(d);
    out.basis = B;
    out.value = inst.c.dot(out.x);
    out.status = TwoPhaseResult::Status::optimal;
    return out;
}

//! Sample an instance from the model and solve it.
inline TwoPhaseResult two_phase_solve(SmoothedModel const& model, PhaseOneKind phase1, Rng& rng)
{
    LPInstance const inst = sample_instance(model, rng);
    SymRVConfig cfg;
    cfg.noise_sigma = model.noise.sigma;
    return two_phase_solve(inst, phase1, cfg, rng);
}

}  // namespace shadowlab
