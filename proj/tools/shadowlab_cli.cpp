//---------------------------------------------------------------------------//
//! \file tools/shadowlab_cli.cpp
//! Command-line driver: gen, solve, sweep, polar, tails, bound.
//---------------------------------------------------------------------------//
#include "shadowlab/interpolate.hpp"
#include "shadowlab/io.hpp"
#include "shadowlab/perturb.hpp"
#include "shadowlab/polar_lab.hpp"
#include "shadowlab/sweep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

using namespace shadowlab;

namespace
{
constexpr int exit_config = 2;
constexpr int exit_io = 3;

void write_output(std::string const& path, std::string const& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

//! Smoothed model for gen/solve, centers on the sphere or from a file.
SmoothedModel make_model(Index d,
                         Index n,
                         double sigma,
                         std::string const& dist,
                         bool unit,
                         std::string const& centers,
                         Rng& rng)
{
    Vector const c = uniform_sphere(d, rng);
    NoiseSpec const noise{noise_kind_from_string(dist), sigma, std::nullopt};
    if (centers == "sphere")
        return sphere_centered_model(n, d, c, noise, !unit, rng);
    SmoothedModel m;
    m.c = c;
    m.noise = noise;
    m.perturb_rhs = !unit;
    if (centers == "zero")
    {
        m.centers = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        m.center_b = Vector::Zero(static_cast<Eigen::Index>(n));
        return m;
    }
    LPInstance const file = instance_from_json(read_json_file(centers));
    m.centers = file.A;
    m.center_b = file.b;
    m.c = file.c;
    return m;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shadow vertex simplex laboratory"};
    app.require_subcommand(1);

    // Shared flags.
    Index d = 3;
    Index n = 10;
    double sigma = 0.1;
    std::string dist = "gaussian";
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string phase1 = "dd";
    std::string centers = "sphere";
    std::string in;

    auto* gen = app.add_subcommand("gen", "sample a smoothed instance");
    bool unit = false;
    gen->add_option("--d", d, "dimension");
    gen->add_option("--n", n, "number of constraints");
    gen->add_option("--sigma", sigma, "noise scale");
    gen->add_option("--dist", dist, "gaussian | laplace | lg");
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("--centers", centers, "sphere | zero | <instance.json>");
    gen->add_flag("--unit", unit, "b = 1 (no right-hand side noise)");
    gen->add_option("--out", out, "output path (default stdout)");

    auto* solve = app.add_subcommand("solve", "run the two-phase solver");
    bool trace = false;
    bool check = false;
    solve->add_option("--in", in, "instance JSON; sampled from flags when absent");
    solve->add_option("--d", d);
    solve->add_option("--n", n);
    solve->add_option("--sigma", sigma, "noise scale (also the Phase I noise level)");
    solve->add_option("--dist", dist);
    solve->add_option("--seed", seed);
    solve->add_option("--phase1", phase1, "symrv | dd");
    solve->add_flag("--trace", trace, "include the Phase II pivot trace");
    solve->add_flag("--check", check, "compare against the reference solver");
    solve->add_option("--out", out);

    auto* sweep = app.add_subcommand("sweep", "grid sweep to CSV or JSON");
    std::vector<Index> d_list{3};
    std::vector<Index> n_list{10};
    std::vector<double> sigma_list{0.1};
    Index trials = 10;
    std::string mode = "solve";
    bool timing = false;
    Index threads = 1;
    std::string sweep_format = "csv";
    sweep->add_option("--d", d_list, "dimensions")->delimiter(',');
    sweep->add_option("--n", n_list, "constraint counts")->delimiter(',');
    sweep->add_option("--sigma", sigma_list, "noise scales")->delimiter(',');
    sweep->add_option("--dist", dist);
    sweep->add_option("--trials", trials);
    sweep->add_option("--seed", seed);
    sweep->add_option("--phase1", phase1);
    sweep->add_option("--mode", mode, "solve | polar-count");
    sweep->add_option("--centers", centers, "sphere | zero | <instance.json>");
    sweep->add_flag("--timing", timing, "record wall-clock milliseconds");
    sweep->add_option("--threads", threads);
    sweep->add_option("--out", out);
    sweep->add_option("--format", sweep_format, "csv | json");

    auto* polar = app.add_subcommand("polar", "section of conv(rows of A) by a plane");
    std::vector<double> w1;
    std::vector<double> w2;
    polar->add_option("--in", in, "instance JSON (rows of A are the points)")->required();
    polar->add_option("--w1", w1, "first plane generator (default e1)")->delimiter(',');
    polar->add_option("--w2", w2, "second plane generator (default e2)")->delimiter(',');
    polar->add_option("--out", out);

    auto* tails = app.add_subcommand("tails", "Monte-Carlo tail-bound table");
    Index samples = 100000;
    std::string tails_format = "csv";
    tails->add_option("--dist", dist);
    tails->add_option("--d", d);
    tails->add_option("--n", n);
    tails->add_option("--sigma", sigma);
    tails->add_option("--samples", samples);
    tails->add_option("--seed", seed);
    tails->add_option("--format", tails_format, "csv | json");
    tails->add_option("--out", out);

    auto* bound = app.add_subcommand("bound", "certificate and explicit shadow bound");
    bound->add_option("--dist", dist);
    bound->add_option("--d", d);
    bound->add_option("--n", n);
    bound->add_option("--sigma", sigma);
    bound->add_option("--out", out);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try
    {
        if (*gen)
        {
            Rng rng(derive_seed(seed, 0));
            SmoothedModel const model = make_model(d, n, sigma, dist, unit, centers, rng);
            LPInstance const inst = sample_instance(model, rng);
            json meta{{"noise", noise_to_json(model.noise)},
                      {"seed", seed},
                      {"unit", unit},
                      {"centers", centers}};
            write_output(out, instance_to_json(inst, meta).dump(2) + "\n");
        }
        else if (*solve)
        {
            Rng rng(derive_seed(seed, 0));
            LPInstance inst = in.empty()
                                  ? sample_instance(make_model(d, n, sigma, dist, false, centers, rng), rng)
                                  : instance_from_json(read_json_file(in));
            SymRVConfig cfg;
            cfg.noise_sigma = sigma;
            TwoPhaseResult const r = two_phase_solve(inst, phase_one_from_string(phase1), cfg, rng);
            json j = two_phase_to_json(r, trace);
            if (check)
            {
                SolveStatus const s = oracle_solve(inst);
                j["reference"] = {{"status", to_string(s.kind)}};
                if (s.kind == SolveStatus::Kind::optimal)
                    j["reference"]["value"] = s.value;
            }
            write_output(out, j.dump(2) + "\n");
        }
        else if (*sweep)
        {
            SweepConfig cfg;
            cfg.d_list = d_list;
            cfg.n_list = n_list;
            cfg.sigma_list = sigma_list;
            cfg.dist = noise_kind_from_string(dist);
            cfg.trials = trials;
            cfg.master_seed = seed;
            cfg.phase1 = phase_one_from_string(phase1);
            cfg.mode = sweep_mode_from_string(mode);
            cfg.timing = timing;
            cfg.threads = threads;
            if (centers == "sphere")
                cfg.centers = CenterKind::sphere;
            else if (centers == "zero")
                cfg.centers = CenterKind::zero;
            else
            {
                cfg.centers = CenterKind::file;
                cfg.center_file = instance_from_json(read_json_file(centers));
            }
            SweepResult const res = run_sweep(cfg);
            emit(res.records, sweep_format, out);
            std::fprintf(stderr,
                         "cells=%zu records=%zu resampled=%zu within_bound=%.3f\n",
                         res.summary.cells.size(),
                         res.records.size(),
                         res.summary.resampled_draws,
                         res.summary.fraction_within_bound);
        }
        else if (*polar)
        {
            LPInstance const inst = instance_from_json(read_json_file(in));
            Vector a = Vector::Zero(static_cast<Eigen::Index>(inst.d));
            Vector b = a;
            if (w1.empty())
                a[0] = 1;
            else
                a = Eigen::Map<Vector>(w1.data(), static_cast<Eigen::Index>(w1.size()));
            if (w2.empty())
                b[1] = 1;
            else
                b = Eigen::Map<Vector>(w2.data(), static_cast<Eigen::Index>(w2.size()));
            PlaneBasis const W = PlaneBasis::span(a, b);
            PolarSection const sec = polar_section(inst.A, W);
            json j = polar_to_json(sec);
            j["edge_count"] = sec.edge_count();
            j["perimeter_ceiling"] = perimeter_ceiling(inst.A, W);
            write_output(out, j.dump(2) + "\n");
        }
        else if (*tails)
        {
            auto const rows = verify_tails(noise_kind_from_string(dist), d, n, sigma, samples, seed);
            if (tails_format == "csv")
            {
                write_output(out, tails_to_csv(rows));
            }
            else
            {
                json arr = json::array();
                for (auto const& r : rows)
                    arr.push_back({{"equation", to_string(r.equation)},
                                   {"event", r.directional ? "direction" : "norm"},
                                   {"t", r.t},
                                   {"empirical", r.empirical},
                                   {"bound", r.bound},
                                   {"slack", r.slack},
                                   {"pass", r.pass}});
                write_output(out, arr.dump(2) + "\n");
            }
        }
        else if (*bound)
        {
            NoiseKind const kind = noise_kind_from_string(dist);
            DistributionCertificate const cert = certificate(kind, d, n, sigma);
            json j{{"dist", to_string(kind)},
                   {"d", d},
                   {"n", n},
                   {"sigma", sigma},
                   {"certificate", certificate_to_json(cert)},
                   {"sigma_bar", sigma_bar(d, n)}};
            if (cert.L)
                j["parametrized_edge_bound"] = parametrized_edge_bound(d, cert);
            j["gaussian_shadow_bound"] = gaussian_shadow_bound(d, n, sigma);
            write_output(out, j.dump(2) + "\n");
        }
    }
    catch (ConfigError const& e)
    {
        std::cerr << e.what() << '\n';
        return exit_config;
    }
    catch (IOError const& e)
    {
        std::cerr << e.what() << '\n';
        return exit_io;
    }
    catch (InvalidInstance const& e)
    {
        std::cerr << e.what() << '\n';
        return exit_config;
    }
    catch (DomainError const& e)
    {
        std::cerr << e.what() << '\n';
        return exit_config;
    }
    catch (Error const& e)
    {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
