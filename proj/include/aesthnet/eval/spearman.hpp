#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"

namespace aesthnet {

/// Fractional (average) ranks, 1-based: ties receive the mean of the rank
/// positions they span.
inline std::vector<double> fractional_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw UndefinedCorrelationError(
        "correlation undefined: an input has zero rank variance");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

/// Tie-aware Spearman's ρ: Pearson correlation of fractional ranks.
inline double spearman_rho(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ValidationError("spearman_rho: length mismatch");
  if (a.size() < 2)
    throw UndefinedCorrelationError("spearman_rho needs n >= 2");
  for (double x : a)
    if (!std::isfinite(x)) throw ValidationError("spearman_rho: non-finite value");
  for (double x : b)
    if (!std::isfinite(x)) throw ValidationError("spearman_rho: non-finite value");
  const double rho = detail::pearson(fractional_ranks(a), fractional_ranks(b));
  // Guard against |rho| creeping past 1 by floating-point accumulation.
  return std::max(-1.0, std::min(1.0, rho));
}

/// Two-sided p-value for H0: ρ = 0, via the t-approximation
/// t = ρ sqrt((n-2)/(1-ρ²)) with n-2 degrees of freedom.
inline double rho_significance(double rho, std::size_t n) {
  if (n < 4) throw ValidationError("rho_significance needs n >= 4");
  if (!(rho >= -1.0 && rho <= 1.0))
    throw ValidationError("rho outside [-1,1]");
  if (rho == 1.0 || rho == -1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

/// Slow verification mode: permutation test on ρ. Counts permutations with
/// |ρ*| >= |ρ_observed| under `resamples` seeded shuffles of b.
inline double rho_significance_permutation(const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           std::size_t resamples,
                                           std::uint64_t seed) {
  const double observed = std::fabs(spearman_rho(a, b));
  const std::vector<double> ranks_a = fractional_ranks(a);
  std::vector<double> ranks_b = fractional_ranks(b);
  Rng rng(detail::mix(seed, 0x7065726dULL));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    rng.shuffle(ranks_b);
    const double rho = detail::pearson(ranks_a, ranks_b);
    if (std::fabs(rho) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(resamples + 1);
}

}  // namespace aesthnet
