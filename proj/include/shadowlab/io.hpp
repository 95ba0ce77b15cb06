//---------------------------------------------------------------------------//
//! \file shadowlab/io.hpp
//! JSON conversion for instances, noise specs, certificates, traces and
//! solver results.
//---------------------------------------------------------------------------//
#pragma once

#include "common.hpp"
#include "interpolate.hpp"
#include "lp_core.hpp"
#include "perturb.hpp"
#include "polar_lab.hpp"
#include "shadow_pivot.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace shadowlab
{
using json = nlohmann::json;

//---------------------------------------------------------------------------//
// Dense helpers
//---------------------------------------------------------------------------//
inline json to_json_vector(Vector const& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

inline json to_json_matrix(Matrix const& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.push_back(to_json_vector(m.row(i).transpose()));
    return out;
}

inline Vector vector_from_json(json const& j)
{
    if (!j.is_array())
        throw InvalidInstance("expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Index i = 0; i < j.size(); ++i)
    {
        if (!j[i].is_number())
            throw InvalidInstance("expected a number");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Matrix matrix_from_json(json const& j, Index cols)
{
    if (!j.is_array())
        throw InvalidInstance("expected an array of rows");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (Index i = 0; i < j.size(); ++i)
    {
        Vector const row = vector_from_json(j[i]);
        if (static_cast<Index>(row.size()) != cols)
            throw InvalidInstance("row " + std::to_string(i) + " has the wrong length");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

//---------------------------------------------------------------------------//
// Instances
//---------------------------------------------------------------------------//
inline json instance_to_json(LPInstance const& inst, json meta = json::object())
{
    json j;
    j["d"] = inst.d;
    j["n"] = inst.n;
    j["A"] = to_json_matrix(inst.A);
    j["b"] = to_json_vector(inst.b);
    j["c"] = to_json_vector(inst.c);
    if (!meta.empty())
        j["meta"] = std::move(meta);
    return j;
}

inline LPInstance instance_from_json(json const& j)
{
    try
    {
        Index const d = j.at("d").get<Index>();
        Index const n = j.at("n").get<Index>();
        Matrix A = matrix_from_json(j.at("A"), d);
        if (static_cast<Index>(A.rows()) != n)
            throw InvalidInstance("A has " + std::to_string(A.rows()) + " rows, n = "
                                  + std::to_string(n));
        return LPInstance::create(std::move(A), vector_from_json(j.at("b")),
                                  vector_from_json(j.at("c")));
    }
    catch (json::exception const& e)
    {
        throw InvalidInstance(e.what());
    }
}

inline json read_json_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IOError("cannot open '" + path + "'");
    try
    {
        return json::parse(in);
    }
    catch (json::parse_error const& e)
    {
        throw IOError("'" + path + "': " + e.what());
    }
}

inline void write_text_file(std::string const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IOError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw IOError("write to '" + path + "' failed");
}

//---------------------------------------------------------------------------//
// Noise and certificates
//---------------------------------------------------------------------------//
inline json noise_to_json(NoiseSpec const& s)
{
    json j{{"kind", to_string(s.kind)}, {"sigma", s.sigma}};
    if (s.lg_radius)
        j["lg_radius"] = *s.lg_radius;
    return j;
}

inline NoiseSpec noise_from_json(json const& j)
{
    try
    {
        NoiseSpec s;
        s.kind = noise_kind_from_string(j.at("kind").get<std::string>());
        s.sigma = j.at("sigma").get<double>();
        if (j.contains("lg_radius"))
            s.lg_radius = j.at("lg_radius").get<double>();
        s.validate();
        return s;
    }
    catch (json::exception const& e)
    {
        throw ConfigError(e.what());
    }
}

inline json certificate_to_json(DistributionCertificate const& c)
{
    json j;
    j["L"] = c.L ? json(*c.L) : json(nullptr);
    j["tau"] = c.tau;
    j["R_nd"] = c.R_nd;
    j["r_n"] = c.r_n;
    return j;
}

//---------------------------------------------------------------------------//
// Runs
//---------------------------------------------------------------------------//
inline json trace_to_json(std::vector<PivotStep> const& trace)
{
    json out = json::array();
    for (auto const& s : trace)
    {
        json j;
        j["lambda"] = s.lambda;
        j["leaving"] = s.leaving;
        j["entering"] = s.entering ? json(*s.entering) : json("unbounded");
        j["objective_value"] = s.objective_value;
        out.push_back(std::move(j));
    }
    return out;
}

inline json two_phase_to_json(TwoPhaseResult const& r, bool with_trace = false)
{
    json j;
    j["status"] = to_string(r.status);
    if (r.status == TwoPhaseResult::Status::optimal)
    {
        j["x"] = to_json_vector(r.x);
        j["value"] = r.value;
    }
    j["phase1_pivots"] = r.phase1_pivots;
    j["phase2_pivots"] = r.phase2_pivots;
    j["restarts"] = r.restarts;
    json reasons = json::array();
    for (auto a : r.phase1.attempts)
        reasons.push_back(to_string(a));
    j["attempts"] = std::move(reasons);
    if (with_trace && r.phase2)
        j["phase2_trace"] = trace_to_json(r.phase2->trace);
    return j;
}

inline json polar_to_json(PolarSection const& p)
{
    json j;
    json verts = json::array();
    for (auto const& v : p.vertices)
        verts.push_back({v.x(), v.y()});
    j["vertices"] = std::move(verts);
    json edges = json::array();
    for (auto const& e : p.edges)
    {
        edges.push_back({{"from", {e.from.x(), e.from.y()}},
                         {"to", {e.to.x(), e.to.y()}},
                         {"generators", e.generators},
                         {"length", e.length}});
    }
    j["edges"] = std::move(edges);
    j["perimeter"] = p.perimeter;
    return j;
}

}  // namespace shadowlab
