//---------------------------------------------------------------------------//
//! \file shadowlab/sweep.hpp
//! Parameter sweeps, tail verification tables and CSV/JSON reporting.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "interpolate.hpp"
#include "io.hpp"
#include "perturb.hpp"
#include "polar_lab.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace shadowlab
{
//---------------------------------------------------------------------------//
// Configuration and records
//---------------------------------------------------------------------------//
enum class SweepMode
{
    solve,
    polar_count,
    tails,
};

inline SweepMode sweep_mode_from_string(std::string const& s)
{
    if (s == "solve")
        return SweepMode::solve;
    if (s == "polar-count")
        return SweepMode::polar_count;
    if (s == "tails")
        return SweepMode::tails;
    throw ConfigError("unknown sweep mode '" + s + "'");
}

enum class CenterKind
{
    sphere,
    zero,
    file,
};

struct SweepConfig
{
    std::vector<Index> d_list;
    std::vector<Index> n_list;
    std::vector<double> sigma_list;
    NoiseKind dist{NoiseKind::gaussian};
    Index trials{1};
    std::uint64_t master_seed{0};
    PhaseOneKind phase1{PhaseOneKind::dd};
    SweepMode mode{SweepMode::solve};
    CenterKind centers{CenterKind::sphere};
    //! Centers for CenterKind::file: rows of A, and b for Smooth LP runs.
    std::optional<LPInstance> center_file;
    bool timing{false};
    Index threads{1};
    Index max_resamples{20};

    void validate() const
    {
        if (trials < 1)
            throw ConfigError("trials must be at least 1");
        if (d_list.empty() || n_list.empty() || sigma_list.empty())
            throw ConfigError("d, n and sigma lists must be nonempty");
        if (mode == SweepMode::tails)
            throw ConfigError("tail verification runs through verify_tails, not run_sweep");
        for (double s : sigma_list)
            if (!(s > 0))
                throw ConfigError("sigma must be positive");
        for (Index d : d_list)
            for (Index n : n_list)
                if (d < 2 || n < d)
                    throw ConfigError("every (d, n) pair needs n >= d >= 2");
        if (centers == CenterKind::file)
        {
            if (!center_file)
                throw ConfigError("file centers requested without a file");
            if (d_list.size() != 1 || n_list.size() != 1 || d_list[0] != center_file->d
                || n_list[0] != center_file->n)
                throw ConfigError("file centers fix the grid to its own (d, n)");
        }
    }
};

struct SweepRecord
{
    Index d{0};
    Index n{0};
    double sigma{0};
    Index trial{0};
    std::uint64_t seed{0};
    std::string status;
    std::optional<Index> phase1_pivots;
    std::optional<Index> phase2_pivots;
    std::optional<Index> restarts;
    std::optional<Index> polar_edges;
    std::optional<Index> shadow_vertices;
    std::optional<double> bound_value;
    double wall_ms{0};
    //! Degenerate draws replaced before this record; not emitted.
    Index resamples{0};

    friend bool operator==(SweepRecord const&, SweepRecord const&) = default;
};

struct CellSummary
{
    Index d{0};
    Index n{0};
    double sigma{0};
    Index trials{0};
    double mean_pivots{0};
    Index max_pivots{0};
    double mean_edges{0};
    Index max_edges{0};
    std::optional<double> bound_value;
};

struct SweepSummary
{
    std::vector<CellSummary> cells;
    Index resampled_draws{0};
    Index total_draws{0};
    //! Cells with a bound where the mean edge count is below it.
    double fraction_within_bound{0};
};

struct SweepResult
{
    std::vector<SweepRecord> records;
    SweepSummary summary;
};

//---------------------------------------------------------------------------//
// One trial
//---------------------------------------------------------------------------//
namespace detail
{
inline SmoothedModel sweep_model(SweepConfig const& cfg,
                                 Index d,
                                 Index n,
                                 double sigma,
                                 bool perturb_rhs,
                                 Vector c,
                                 Rng& rng)
{
    NoiseSpec const noise{cfg.dist, sigma, std::nullopt};
    switch (cfg.centers)
    {
        case CenterKind::sphere:
            return sphere_centered_model(n, d, std::move(c), noise, perturb_rhs, rng);
        case CenterKind::zero: {
            SmoothedModel m;
            m.centers = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
            m.center_b = Vector::Zero(static_cast<Eigen::Index>(n));
            m.c = std::move(c);
            m.noise = noise;
            m.perturb_rhs = perturb_rhs;
            return m;
        }
        case CenterKind::file: {
            SmoothedModel m;
            m.centers = cfg.center_file->A;
            m.center_b = cfg.center_file->b;
            m.c = std::move(c);
            m.noise = noise;
            m.perturb_rhs = perturb_rhs;
            return m;
        }
    }
    return {};
}

inline std::optional<double> cell_bound(NoiseKind kind, Index d, Index n, double sigma)
{
    if (d < 3)
        return std::nullopt;
    if (kind == NoiseKind::gaussian)
        return gaussian_shadow_bound(d, n, sigma);
    return parametrized_edge_bound(d, certificate(kind, d, n, sigma));
}

//! Fill \c rec from one draw; throws on degenerate draws.
inline void run_trial(SweepConfig const& cfg, SweepRecord& rec, Rng& rng)
{
    Index const d = rec.d;
    Index const n = rec.n;
    if (cfg.mode == SweepMode::solve)
    {
        Vector const c = uniform_sphere(d, rng);
        SmoothedModel const model = sweep_model(cfg, d, n, rec.sigma, true, c, rng);
        TwoPhaseResult const r = two_phase_solve(model, cfg.phase1, rng);
        rec.status = to_string(r.status);
        rec.phase1_pivots = r.phase1_pivots;
        rec.phase2_pivots = r.phase2_pivots;
        rec.restarts = r.restarts;
        return;
    }
    // Polar count: unit instance, plane spanned by the first two axes.
    Vector c = Vector::Zero(static_cast<Eigen::Index>(d));
    c[1] = 1.0;
    SmoothedModel const model = sweep_model(cfg, d, n, rec.sigma, false, c, rng);
    LPInstance const inst = sample_instance(model, rng);
    PlaneBasis const W = PlaneBasis::axes(d, 0, 1);
    PolarSection const sec = polar_section(inst.A, W);
    rec.polar_edges = sec.edge_count();
    rec.shadow_vertices = shadow_vertices(inst, W);
    SolveStatus const s = oracle_solve(inst);
    switch (s.kind)
    {
        case SolveStatus::Kind::optimal:
            rec.status = "optimal";
            break;
        case SolveStatus::Kind::unbounded:
            rec.status = "unbounded";
            break;
        case SolveStatus::Kind::infeasible:
            rec.status = "infeasible";
            break;
        case SolveStatus::Kind::degenerate:
            throw DegenerateInstance(s.diagnostic);
    }
    rec.bound_value = cell_bound(cfg.dist, d, n, rec.sigma);
}
}  // namespace detail

/*!
 * Run every (d, n, sigma, trial) cell of the grid.
 *
 * Record k draws from derive_seed(master_seed, k); a degenerate draw is
 * replaced by one from derive_seed(seed, attempt). Records are placed by
 * index, so output does not depend on the number of threads.
 */
inline SweepResult run_sweep(SweepConfig const& cfg)
{
    cfg.validate();
    std::vector<SweepRecord> records;
    for (Index d : cfg.d_list)
        for (Index n : cfg.n_list)
            for (double s : cfg.sigma_list)
                for (Index t = 0; t < cfg.trials; ++t)
                {
                    SweepRecord r;
                    r.d = d;
                    r.n = n;
                    r.sigma = s;
                    r.trial = t;
                    r.seed = derive_seed(cfg.master_seed, records.size());
                    records.push_back(r);
                }

    auto work = [&](SweepRecord& rec) {
        auto const start = std::chrono::steady_clock::now();
        for (Index attempt = 0;; ++attempt)
        {
            if (attempt > cfg.max_resamples)
            {
                rec.status = "degenerate-resampled";
                break;
            }
            SweepRecord trial = rec;
            Rng rng(attempt == 0 ? rec.seed : derive_seed(rec.seed, attempt));
            try
            {
                detail::run_trial(cfg, trial, rng);
                trial.resamples = attempt;
                rec = trial;
                break;
            }
            catch (DegenerateInstance const&)
            {
            }
            catch (DegenerateConfiguration const&)
            {
            }
            catch (DegeneratePivot const&)
            {
            }
            catch (SingularBasis const&)
            {
            }
            catch (Error const& e)
            {
                // Recorded, never fatal for the sweep.
                rec.status = std::string("error: ") + e.what();
                break;
            }
            rec.resamples = attempt + 1;
        }
        if (cfg.timing)
        {
            std::chrono::duration<double, std::milli> const el
                = std::chrono::steady_clock::now() - start;
            rec.wall_ms = el.count();
        }
    };

    Index const threads = std::max<Index>(1, std::min(cfg.threads, records.size()));
    if (threads == 1)
    {
        for (auto& r : records)
            work(r);
    }
    else
    {
        std::atomic<Index> next{0};
        std::vector<std::thread> pool;
        for (Index t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (Index i = next++; i < records.size(); i = next++)
                    work(records[i]);
            });
        for (auto& th : pool)
            th.join();
    }

    // Summaries in grid order.
    SweepResult out;
    std::map<std::tuple<Index, Index, double>, std::vector<SweepRecord const*>> cells;
    std::vector<std::tuple<Index, Index, double>> order;
    for (auto const& r : records)
    {
        auto key = std::make_tuple(r.d, r.n, r.sigma);
        if (!cells.count(key))
            order.push_back(key);
        cells[key].push_back(&r);
        out.summary.total_draws += 1 + r.resamples;
        out.summary.resampled_draws += r.resamples;
    }
    Index with_bound = 0;
    Index within = 0;
    for (auto const& key : order)
    {
        CellSummary cs;
        std::tie(cs.d, cs.n, cs.sigma) = key;
        Index count_p = 0;
        Index count_e = 0;
        for (auto const* r : cells[key])
        {
            ++cs.trials;
            if (r->phase1_pivots)
            {
                Index const p = *r->phase1_pivots + r->phase2_pivots.value_or(0);
                cs.mean_pivots += static_cast<double>(p);
                cs.max_pivots = std::max(cs.max_pivots, p);
                ++count_p;
            }
            if (r->polar_edges)
            {
                cs.mean_edges += static_cast<double>(*r->polar_edges);
                cs.max_edges = std::max(cs.max_edges, *r->polar_edges);
                ++count_e;
            }
            if (r->bound_value)
                cs.bound_value = r->bound_value;
        }
        if (count_p)
            cs.mean_pivots /= static_cast<double>(count_p);
        if (count_e)
            cs.mean_edges /= static_cast<double>(count_e);
        if (cs.bound_value && count_e)
        {
            ++with_bound;
            within += cs.mean_edges <= *cs.bound_value ? 1 : 0;
        }
        out.summary.cells.push_back(cs);
    }
    out.summary.fraction_within_bound
        = with_bound ? static_cast<double>(within) / static_cast<double>(with_bound) : 1.0;
    out.records = std::move(records);
    return out;
}

//---------------------------------------------------------------------------//
// Emission
//---------------------------------------------------------------------------//
inline constexpr char const* sweep_csv_header
    = "d,n,sigma,trial,seed,status,phase1_pivots,phase2_pivots,restarts,polar_edges,"
      "shadow_vertices,bound_value,wall_ms";

namespace detail
{
inline std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template<class T>
std::string fmt_opt(std::optional<T> const& v)
{
    if (!v)
        return {};
    if constexpr (std::is_floating_point_v<T>)
        return fmt_double(*v);
    else
        return std::to_string(*v);
}
}  // namespace detail

inline std::string records_to_csv(std::vector<SweepRecord> const& records)
{
    std::ostringstream os;
    os << sweep_csv_header << '\n';
    for (auto const& r : records)
    {
        os << r.d << ',' << r.n << ',' << detail::fmt_double(r.sigma) << ',' << r.trial << ','
           << r.seed << ',' << r.status << ',' << detail::fmt_opt(r.phase1_pivots) << ','
           << detail::fmt_opt(r.phase2_pivots) << ',' << detail::fmt_opt(r.restarts) << ','
           << detail::fmt_opt(r.polar_edges) << ',' << detail::fmt_opt(r.shadow_vertices) << ','
           << detail::fmt_opt(r.bound_value) << ',' << detail::fmt_double(r.wall_ms) << '\n';
    }
    return os.str();
}

inline json record_to_json(SweepRecord const& r)
{
    auto opt = [](auto const& v) { return v ? json(*v) : json(nullptr); };
    return json{{"d", r.d},
                {"n", r.n},
                {"sigma", r.sigma},
                {"trial", r.trial},
                {"seed", r.seed},
                {"status", r.status},
                {"phase1_pivots", opt(r.phase1_pivots)},
                {"phase2_pivots", opt(r.phase2_pivots)},
                {"restarts", opt(r.restarts)},
                {"polar_edges", opt(r.polar_edges)},
                {"shadow_vertices", opt(r.shadow_vertices)},
                {"bound_value", opt(r.bound_value)},
                {"wall_ms", r.wall_ms}};
}

inline SweepRecord record_from_json(json const& j)
{
    auto opt_index = [&](char const* key) -> std::optional<Index> {
        if (j.at(key).is_null())
            return std::nullopt;
        return j.at(key).get<Index>();
    };
    SweepRecord r;
    r.d = j.at("d").get<Index>();
    r.n = j.at("n").get<Index>();
    r.sigma = j.at("sigma").get<double>();
    r.trial = j.at("trial").get<Index>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.phase1_pivots = opt_index("phase1_pivots");
    r.phase2_pivots = opt_index("phase2_pivots");
    r.restarts = opt_index("restarts");
    r.polar_edges = opt_index("polar_edges");
    r.shadow_vertices = opt_index("shadow_vertices");
    if (!j.at("bound_value").is_null())
        r.bound_value = j.at("bound_value").get<double>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

inline std::string records_to_json(std::vector<SweepRecord> const& records)
{
    json arr = json::array();
    for (auto const& r : records)
        arr.push_back(record_to_json(r));
    return arr.dump(2) + "\n";
}

inline std::vector<SweepRecord> records_from_json(std::string const& text)
{
    std::vector<SweepRecord> out;
    try
    {
        for (auto const& j : json::parse(text))
            out.push_back(record_from_json(j));
    }
    catch (json::exception const& e)
    {
        throw IOError(e.what());
    }
    return out;
}

//! Write records as "csv" or "json"; an empty path means standard output.
inline void emit(std::vector<SweepRecord> const& records,
                 std::string const& format,
                 std::string const& path)
{
    std::string text;
    if (format == "csv")
        text = records_to_csv(records);
    else if (format == "json")
        text = records_to_json(records);
    else
        throw ConfigError("unknown format '" + format + "'");
    if (path.empty() || path == "-")
    {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    write_text_file(path, text);
}

//---------------------------------------------------------------------------//
// Tail verification
//---------------------------------------------------------------------------//
struct TailRow
{
    TailEquation equation;
    bool directional{false};
    double t{0};
    double empirical{0};
    double bound{0};
    double slack{0};
    bool pass{false};
};

//! Three binomial standard deviations at p = min(bound, 1).
inline double binomial_slack(double bound, Index samples)
{
    double const p = std::min(bound, 1.0);
    return 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(samples));
}

namespace detail
{
inline std::vector<double> sorted_unique(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}
}  // namespace detail

/*!
 * Compare empirical tail frequencies with each lemma branch of the given
 * distribution over a fixed t-grid. All rows share one sample set.
 */
inline std::vector<TailRow> verify_tails(
    NoiseKind kind, Index d, Index n, double sigma, Index samples, std::uint64_t seed)
{
    if (samples < 10000)
        throw ConfigError("verify_tails needs at least 10^4 samples");
    NoiseSpec const spec = NoiseSpec{kind, sigma, std::nullopt}.resolved(d, n);
    double const r = spec.lg_radius.value_or(0.0);
    double const sd = std::sqrt(static_cast<double>(d));

    std::vector<std::pair<TailEquation, std::vector<double>>> grid;
    switch (kind)
    {
        case NoiseKind::gaussian:
            grid = {{TailEquation::gauss_full_d, {1.0, 1.25, 1.5, 2.0, 2.5, 3.0}},
                    {TailEquation::gauss_1d, {0.0, 0.5, 1.0, 2.0, 3.0, 4.0}}};
            break;
        case NoiseKind::laplace:
            grid = {{TailEquation::laplace_full_d, {1.0, 1.25, 1.5, 2.0, 3.0}},
                    {TailEquation::laplace_full_d_2, {2.0, 3.0, 4.0}},
                    {TailEquation::laplace_1d,
                     detail::sorted_unique({0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 2 * sd, 2.5 * sd, 3 * sd})}};
            break;
        case NoiseKind::laplace_gaussian:
            grid = {{TailEquation::lg_full_d, {r, 1.1 * r, 1.25 * r}},
                    {TailEquation::lg_1d,
                     detail::sorted_unique({0.0, 1.0, 2.0, 3.0, 4.0, 0.5 * r, r, 1.2 * r})}};
            break;
    }

    Rng rng(seed);
    NoiseSampler const sampler(spec, d);
    Vector const theta = Vector::Ones(static_cast<Eigen::Index>(d)) / sd;
    std::vector<double> norms(samples);
    std::vector<double> projs(samples);
    for (Index s = 0; s < samples; ++s)
    {
        Vector const x = sampler(rng);
        norms[s] = x.norm();
        projs[s] = std::abs(x.dot(theta));
    }

    std::vector<TailRow> rows;
    for (auto const& [eq, ts] : grid)
    {
        bool const dir = eq == TailEquation::gauss_1d || eq == TailEquation::laplace_1d
                         || eq == TailEquation::lg_1d;
        for (double t : ts)
        {
            double const thr = dir ? t * sigma : norm_tail_threshold(kind, d, sigma, t);
            auto const& vals = dir ? projs : norms;
            Index hits = 0;
            for (double v : vals)
                hits += v >= thr ? 1 : 0;
            TailRow row;
            row.equation = eq;
            row.directional = dir;
            row.t = t;
            row.empirical = static_cast<double>(hits) / static_cast<double>(samples);
            row.bound = tail_bound(eq, d, t, r);
            row.slack = binomial_slack(row.bound, samples);
            row.pass = row.empirical <= row.bound + row.slack;
            rows.push_back(row);
        }
    }
    return rows;
}

inline std::string tails_to_csv(std::vector<TailRow> const& rows)
{
    std::ostringstream os;
    os << "equation,event,t,empirical,bound,slack,pass\n";
    for (auto const& r : rows)
        os << to_string(r.equation) << ',' << (r.directional ? "direction" : "norm") << ','
           << detail::fmt_double(r.t) << ',' << detail::fmt_double(r.empirical) << ','
           << detail::fmt_double(r.bound) << ',' << detail::fmt_double(r.slack) << ','
           << (r.pass ? "pass" : "fail") << '\n';
    return os.str();
}

}  // namespace shadowlab
