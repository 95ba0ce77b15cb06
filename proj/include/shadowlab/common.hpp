//---------------------------------------------------------------------------//
//! \file shadowlab/common.hpp
//! Shared vocabulary: dense types, error hierarchy, tolerances, subset
//! enumeration and seed derivation.
//---------------------------------------------------------------------------//
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace shadowlab
{
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::size_t;

//---------------------------------------------------------------------------//
// Tolerances
//---------------------------------------------------------------------------//
namespace tol
{
//! Relative degeneracy tolerance used for determinants, ties and feasibility.
inline constexpr double degeneracy = 1e-9;
//! Below this a slope or a ratio-test denominator is treated as zero.
inline constexpr double zero = 1e-13;
//! Strict side margin for facet tests in the polar oracle.
inline constexpr double facet_margin = 1e-10;
}  // namespace tol

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define SHADOWLAB_DEFINE_ERROR(NAME)        \
    class NAME : public Error               \
    {                                       \
      public:                               \
        explicit NAME(std::string const& m) \
            : Error(#NAME ": " + m)         \
        {                                   \
        }                                   \
    }

SHADOWLAB_DEFINE_ERROR(InvalidInstance);
SHADOWLAB_DEFINE_ERROR(SingularBasis);
SHADOWLAB_DEFINE_ERROR(DegenerateInstance);
SHADOWLAB_DEFINE_ERROR(DegeneratePivot);
SHADOWLAB_DEFINE_ERROR(NotOptimalStart);
SHADOWLAB_DEFINE_ERROR(MaxPivotsExceeded);
SHADOWLAB_DEFINE_ERROR(DomainError);
SHADOWLAB_DEFINE_ERROR(DegenerateConfiguration);
SHADOWLAB_DEFINE_ERROR(RankDeficientShape);
SHADOWLAB_DEFINE_ERROR(OutsideHull);
SHADOWLAB_DEFINE_ERROR(RestartExhausted);
SHADOWLAB_DEFINE_ERROR(ZeroLeadingObjective);
SHADOWLAB_DEFINE_ERROR(ConfigError);
SHADOWLAB_DEFINE_ERROR(IOError);

#undef SHADOWLAB_DEFINE_ERROR

//---------------------------------------------------------------------------//
// Combinatorics
//---------------------------------------------------------------------------//
//! Binomial coefficient, saturating at the largest representable value.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
    {
        std::uint64_t const num = n - k + i;
        // result * num / i is exact at each step; guard the multiply.
        if (result > max / num)
            return max;
        result = result * num / i;
    }
    return result;
}

/*!
 * Visit every k-subset of {0..n-1} in lexicographic order.
 *
 * The visitor receives the current subset; returning false stops the walk.
 */
inline void for_each_subset(Index n,
                            Index k,
                            std::function<bool(std::vector<Index> const&)> const& visit)
{
    if (k > n)
        return;
    std::vector<Index> idx(k);
    for (Index i = 0; i < k; ++i)
        idx[i] = i;
    while (true)
    {
        if (!visit(idx))
            return;
        if (k == 0)
            return;
        Index pos = k;
        while (pos > 0 && idx[pos - 1] == n - k + pos - 1)
            --pos;
        if (pos == 0)
            return;
        ++idx[pos - 1];
        for (Index j = pos; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

//---------------------------------------------------------------------------//
// Seeds
//---------------------------------------------------------------------------//
//! SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Independent stream seed for (master, index); stable across platforms.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace shadowlab
