//---------------------------------------------------------------------------//
//! \file shadowlab/phase_one.hpp
//! Phase I for max c^T x, A x <= 1: the symmetric random vertex method and
//! the dimension-by-dimension method.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "lp_core.hpp"
#include "perturb.hpp"
#include "shadow_pivot.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace shadowlab
{
//---------------------------------------------------------------------------//
// Shared outcome
//---------------------------------------------------------------------------//
enum class AttemptReason
{
    optimal,
    unbounded,
    infeasible_start,  //!< A x0 < 1 fails
    start_optimal,     //!< x0 already optimal for c
    cut_off,           //!< optimum of the augmented LP is tight at an added row
    degenerate,
};

inline char const* to_string(AttemptReason r)
{
    switch (r)
    {
        case AttemptReason::optimal:
            return "optimal";
        case AttemptReason::unbounded:
            return "unbounded";
        case AttemptReason::infeasible_start:
            return "infeasible_start";
        case AttemptReason::start_optimal:
            return "start_optimal";
        case AttemptReason::cut_off:
            return "cut_off";
        case AttemptReason::degenerate:
            return "degenerate";
    }
    return "?";
}

//! One restriction solved by the dimension-by-dimension method.
struct DDStage
{
    Index k{0};
    LPInstance lp;   //!< A restricted to the first k columns, b = 1
    Vector d_obj;    //!< start objective of the stage's shadow run
    Basis start;     //!< basis reached by the lifting pivot
    ShadowRunResult run;
};

struct PhaseOneOutcome
{
    enum class Status
    {
        optimal,
        unbounded,
        restart_exhausted,
    };

    Status status{Status::optimal};
    Vector x;
    Basis basis;
    double value{0};
    Vector ray;
    Index restarts_used{0};
    Index pivots_total{0};
    bool used_fallback{false};
    std::vector<AttemptReason> attempts;
    std::vector<DDStage> stages;
};

inline char const* to_string(PhaseOneOutcome::Status s)
{
    switch (s)
    {
        case PhaseOneOutcome::Status::optimal:
            return "optimal";
        case PhaseOneOutcome::Status::unbounded:
            return "unbounded";
        case PhaseOneOutcome::Status::restart_exhausted:
            return "restart_exhausted";
    }
    return "?";
}

inline void require_unit(LPInstance const& inst)
{
    if (!inst.is_unit())
        throw InvalidInstance("Phase I expects b = 1");
}

//---------------------------------------------------------------------------//
// Symmetric random vertex
//---------------------------------------------------------------------------//
struct SymRVConfig
{
    //! Shift of the added rows along l e_i; default 1 / (6 sqrt(log d)).
    std::optional<double> ell;
    double offset{4.0};
    Index max_restarts{1000};
    double fallback_threshold{2.0};
    //! Noise level of A; defaults to the ceiling sigma_bar(d, n).
    std::optional<double> noise_sigma;
};

//! Uniform rotation: QR of a Gaussian matrix with R's diagonal made positive.
inline Matrix haar_rotation(Index d, Rng& rng)
{
    auto const dd = static_cast<Eigen::Index>(d);
    Matrix G(dd, dd);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < dd; ++j)
        for (Eigen::Index i = 0; i < dd; ++i)
            G(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    Matrix const R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dd; ++j)
        if (R(j, j) < 0)
            Q.col(j) *= -1.0;
    return Q;
}

//! Added rows of one attempt: v_i^+ at 2i, v_i^- at 2i + 1.
struct MirroredRows
{
    Matrix R;
    Matrix V;  //!< (2d - 2) x d
    Vector dir;  //!< R e_d
    Vector x0;
    std::vector<Vector> shifts;  //!< R (l e_i + g_i)
};

inline MirroredRows sample_mirrored_rows(Index d, double ell, double offset, double sigma, Rng& rng)
{
    auto const dd = static_cast<Eigen::Index>(d);
    MirroredRows m;
    m.R = haar_rotation(d, rng);
    m.dir = m.R.col(dd - 1);
    m.V.resize(2 * (dd - 1), dd);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i + 1 < dd; ++i)
    {
        Vector s = Vector::Zero(dd);
        s[i] = ell;
        for (Eigen::Index j = 0; j < dd; ++j)
            s[j] += normal(rng);
        Vector const shift = m.R * s;
        m.shifts.push_back(shift);
        m.V.row(2 * i) = (offset * m.dir + shift).transpose();
        m.V.row(2 * i + 1) = (offset * m.dir - shift).transpose();
    }
    // <v_i^+, x> = 1 for i < d and <2 offset dir, x> = 2.
    Matrix M(dd, dd);
    Vector rhs = Vector::Ones(dd);
    for (Eigen::Index i = 0; i + 1 < dd; ++i)
        M.row(i) = m.V.row(2 * i);
    M.row(dd - 1) = (2 * offset * m.dir).transpose();
    rhs[dd - 1] = 2.0;
    m.x0 = BasisFactor(M).solve(rhs);
    return m;
}

struct SymRVAttempt
{
    AttemptReason reason{AttemptReason::degenerate};
    Index pivots{0};
    std::optional<ShadowRunResult> run;
    std::optional<LPInstance> augmented;  //!< A stacked over V
    Vector d_obj;
    Vector x;
    Basis basis;
};

inline double default_ell(Index d)
{
    return 1.0 / (6.0 * std::sqrt(std::log(static_cast<double>(d))));
}

/*!
 * One pass through the restart loop on an already scaled instance.
 *
 * \c sigma is the noise level of the added rows.
 */
inline SymRVAttempt symmetric_rv_attempt(LPInstance const& inst,
                                         SymRVConfig const& cfg,
                                         double sigma,
                                         Rng& rng)
{
    Index const d = inst.d;
    Index const n = inst.n;
    auto const dd = static_cast<Eigen::Index>(d);
    double const ell = cfg.ell ? *cfg.ell : default_ell(d);
    SymRVAttempt out;

    MirroredRows rows;
    try
    {
        rows = sample_mirrored_rows(d, ell, cfg.offset, sigma, rng);
    }
    catch (SingularBasis const&)
    {
        return out;
    }
    out.d_obj = rows.dir;

    if (!((inst.A * rows.x0).array() < 1.0).all())
    {
        out.reason = AttemptReason::infeasible_start;
        return out;
    }

    // sum_i lambda_i R (l e_i + g_i) - lambda_d dir = c
    Matrix M(dd, dd);
    for (Eigen::Index i = 0; i + 1 < dd; ++i)
        M.col(i) = rows.shifts[static_cast<Index>(i)];
    M.col(dd - 1) = -rows.dir;
    Vector lam;
    try
    {
        lam = BasisFactor(M).solve(inst.c);
    }
    catch (SingularBasis const&)
    {
        return out;
    }
    double weight = lam[dd - 1];
    for (Eigen::Index i = 0; i + 1 < dd; ++i)
        weight += cfg.offset * std::abs(lam[i]);
    if (weight <= 0)
    {
        out.reason = AttemptReason::start_optimal;
        return out;
    }

    Matrix Aaug(static_cast<Eigen::Index>(n) + rows.V.rows(), dd);
    Aaug << inst.A, rows.V;
    out.augmented = LPInstance::create(std::move(Aaug),
                                       Vector::Ones(static_cast<Eigen::Index>(n) + rows.V.rows()),
                                       inst.c);
    LPInstance const& aug = *out.augmented;

    auto row_of = [&](Index i, bool plus) { return n + 2 * i + (plus ? 0 : 1); };
    Basis start;
    for (Index i = 0; i + 1 < d; ++i)
        start.indices.push_back(row_of(i, lam[static_cast<Eigen::Index>(i)] >= 0));
    Index const extra = row_of(0, lam[0] < 0);
    start.indices.push_back(extra);

    ShadowOptions opts;
    opts.forced_leaving = extra;
    try
    {
        out.run = shadow_vertex_run(aug, inst.c, rows.dir, start, opts);
    }
    catch (DegeneratePivot const&)
    {
        return out;
    }
    catch (SingularBasis const&)
    {
        return out;
    }
    catch (MaxPivotsExceeded const&)
    {
        return out;
    }
    out.pivots = out.run->pivot_count();
    out.basis = out.run->basis;
    out.x = out.run->x;

    if (out.run->status == ShadowRunResult::Status::unbounded)
    {
        out.reason = AttemptReason::unbounded;
        return out;
    }
    // Tight added rows sit at 1 up to rounding, so test with a margin.
    bool strictly_inside = ((rows.V * out.x).array() < 1.0 - aug.feasibility_tol()).all();
    for (Index i : out.basis.indices)
        strictly_inside = strictly_inside && i < n;
    out.reason = strictly_inside ? AttemptReason::optimal : AttemptReason::cut_off;
    return out;
}

/*!
 * Solve max c^T x, A x <= 1 by restarting the symmetric random vertex loop.
 *
 * When the noise level exceeds sigma_bar, A is scaled down by
 * sigma_bar / sigma; the reported point is mapped back to the original
 * instance.
 */
inline PhaseOneOutcome symmetric_rv_solve(LPInstance const& inst, SymRVConfig const& cfg, Rng& rng)
{
    require_unit(inst);
    if (inst.d < 2)
        throw DomainError("the symmetric random vertex method needs d >= 2");
    double const sbar = sigma_bar(inst.d, inst.n);
    double const sigma = cfg.noise_sigma ? *cfg.noise_sigma : sbar;
    double const scale = sigma > sbar ? sbar / sigma : 1.0;
    LPInstance const scaled = LPInstance::create(scale * inst.A, inst.b, inst.c);

    PhaseOneOutcome out;
    if (scaled.A.rowwise().norm().maxCoeff() > cfg.fallback_threshold)
    {
        out.used_fallback = true;
        SolveStatus const s = oracle_solve(inst);
        switch (s.kind)
        {
            case SolveStatus::Kind::optimal:
                out.status = PhaseOneOutcome::Status::optimal;
                out.x = s.x;
                out.basis = s.basis;
                out.value = s.value;
                return out;
            case SolveStatus::Kind::unbounded:
                out.status = PhaseOneOutcome::Status::unbounded;
                out.ray = s.ray;
                return out;
            default:
                throw DegenerateInstance("fallback solver: " + s.diagnostic);
        }
    }

    for (Index attempt = 0; attempt < cfg.max_restarts; ++attempt)
    {
        SymRVAttempt const a = symmetric_rv_attempt(scaled, cfg, std::min(sigma, sbar), rng);
        out.attempts.push_back(a.reason);
        out.pivots_total += a.pivots;
        if (a.reason == AttemptReason::unbounded)
        {
            out.status = PhaseOneOutcome::Status::unbounded;
            out.ray = a.run->ray;
            out.restarts_used = attempt;
            return out;
        }
        if (a.reason == AttemptReason::optimal)
        {
            out.status = PhaseOneOutcome::Status::optimal;
            out.basis = a.basis;
            out.x = scale * a.x;
            out.value = inst.c.dot(out.x);
            out.restarts_used = attempt;
            return out;
        }
    }
    out.status = PhaseOneOutcome::Status::restart_exhausted;
    out.restarts_used = cfg.max_restarts;
    return out;
}

//---------------------------------------------------------------------------//
// Dimension by dimension
//---------------------------------------------------------------------------//
namespace detail
{
inline Vector pad(Vector const& v, Index d)
{
    Vector out = Vector::Zero(static_cast<Eigen::Index>(d));
    out.head(v.size()) = v;
    return out;
}

inline LPInstance restriction(LPInstance const& inst, Index k, Vector obj)
{
    auto const kk = static_cast<Eigen::Index>(k);
    return LPInstance::create(inst.A.leftCols(kk), inst.b, std::move(obj));
}
}  // namespace detail

/*!
 * Solve max c^T x, A x <= 1 through the restrictions x_{k+1} = ... = 0.
 *
 * The restriction to x_1 is an interval. Between stages the previous optimum
 * is lifted: it lies on the edge tight at the previous basis, and the ratio
 * test along that edge (in the direction that favours the new coordinate)
 * reaches a vertex optimal for an objective between c_{k-1} and c_k. The
 * stage's shadow run continues from there.
 */
inline PhaseOneOutcome dd_solve(LPInstance const& inst)
{
    require_unit(inst);
    Index const d = inst.d;
    Index const n = inst.n;
    double const c1 = inst.c[0];
    if (std::abs(c1) <= tol::zero * (1.0 + inst.c.norm()))
        throw ZeroLeadingObjective("c_1 is zero; permute coordinates first");

    PhaseOneOutcome out;

    // Stage 1: a_i1 x_1 <= 1.
    std::optional<Index> arg;
    double best = 0;
    double second = 0;
    for (Index i = 0; i < n; ++i)
    {
        double const a = inst.A(static_cast<Eigen::Index>(i), 0) * (c1 > 0 ? 1.0 : -1.0);
        if (a <= 0)
            continue;
        if (!arg || a > best)
        {
            second = best;
            best = a;
            arg = i;
        }
        else if (a > second)
        {
            second = a;
        }
    }
    if (!arg)
    {
        out.status = PhaseOneOutcome::Status::unbounded;
        out.ray = Vector::Zero(static_cast<Eigen::Index>(d));
        out.ray[0] = c1 > 0 ? 1.0 : -1.0;
        return out;
    }
    if (detail::ties(best, second))
        throw DegenerateInstance("stage 1 interval endpoint is tight at two rows");
    Basis B{{*arg}};
    Vector x(1);
    x[0] = 1.0 / inst.A(static_cast<Eigen::Index>(*arg), 0);

    for (Index k = 2; k <= d; ++k)
    {
        auto const kk = static_cast<Eigen::Index>(k);
        Vector const c_prev = inst.c.head(kk - 1);
        Vector const c_k = inst.c.head(kk);
        LPInstance const lp = detail::restriction(inst, k, c_k);

        // Dual of the previous basis and the edge leaving the plane x_k = 0.
        Matrix const Aprev = select_rows(inst.A.leftCols(kk - 1), B.indices);
        BasisFactor const F(Aprev);
        Vector const y = F.solve_transpose(c_prev);
        Vector const col = select_rows(inst.A.col(kk - 1), B.indices);
        double const beta = y.dot(col);
        double const gap = inst.c[kk - 1] - beta;
        if (std::abs(gap) <= tol::degeneracy * (1.0 + inst.c.norm()))
            throw DegenerateInstance("stage " + std::to_string(k)
                                     + ": previous optimum is optimal for the new objective");
        double const sign = gap > 0 ? 1.0 : -1.0;
        Vector e(kk);
        e.head(kk - 1) = -F.solve(col) * sign;
        e[kk - 1] = sign;

        Vector const xk = detail::pad(x, k);
        double step = std::numeric_limits<double>::infinity();
        double step2 = step;
        std::optional<Index> entering;
        for (Index j = 0; j < n; ++j)
        {
            if (B.contains(j))
                continue;
            auto const row = lp.A.row(static_cast<Eigen::Index>(j));
            double const rate = row.dot(e);
            if (!(rate > tol::zero * (1.0 + row.norm()) * (1.0 + e.norm())))
                continue;
            double const t = std::max(0.0, 1.0 - row.dot(xk)) / rate;
            if (t < step)
            {
                step2 = step;
                step = t;
                entering = j;
            }
            else if (t < step2)
            {
                step2 = t;
            }
        }
        out.pivots_total += 1;
        if (!entering)
        {
            out.status = PhaseOneOutcome::Status::unbounded;
            out.ray = detail::pad(e / e.norm(), d);
            return out;
        }
        if (detail::ties(step, step2))
            throw DegenerateInstance("stage " + std::to_string(k) + ": lifting ratio test tie");

        Basis start = B;
        start.indices.push_back(*entering);

        // Start objective c_{k-1} + (beta + sign delta) e_k, strictly optimal.
        double delta = std::abs(gap) / 2;
        Vector d_obj;
        bool certified = false;
        for (int it = 0; it < 60 && !certified; ++it, delta /= 2)
        {
            d_obj = detail::pad(c_prev, k);
            d_obj[kk - 1] = beta + sign * delta;
            Vector const yd = dual_coeffs(lp, start, d_obj);
            certified = (yd.array() > dual_tol(d_obj)).all();
        }
        if (!certified)
            throw DegenerateInstance("stage " + std::to_string(k)
                                     + ": could not certify the lifted vertex");

        DDStage stage{k, lp, d_obj, start, {}};
        try
        {
            stage.run = shadow_vertex_run(lp, c_k, d_obj, start);
        }
        catch (DegeneratePivot const& err)
        {
            throw DegenerateInstance(err.what());
        }
        out.pivots_total += stage.run.pivot_count();
        out.stages.push_back(stage);

        if (stage.run.status == ShadowRunResult::Status::unbounded)
        {
            out.status = PhaseOneOutcome::Status::unbounded;
            out.ray = detail::pad(stage.run.ray, d);
            return out;
        }
        B = stage.run.basis;
        x = stage.run.x;
    }

    out.status = PhaseOneOutcome::Status::optimal;
    out.basis = B;
    out.x = x;
    out.value = inst.c.dot(x);
    return out;
}

}  // namespace shadowlab
