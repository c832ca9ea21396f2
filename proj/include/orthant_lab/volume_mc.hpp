#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "orthant_lab/error.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/random.hpp"
#include "orthant_lab/sphere_geom.hpp"

namespace orthant_lab {

/// Hit-or-miss estimate of |A| / omega_{dim-1}.
struct VolumeEstimate {
  DomainSpec domain;
  std::int64_t n = 0;
  double fraction = 0.0;
  double std_error = 0.0;  ///< binomial sqrt(f(1-f)/n)
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double batch_stderr = 0.0;  ///< spread of the per-chunk fractions
};

/// Sample counts are split into `opts.chunks` chunks, chunk i drawing from
/// substream i, so the estimate depends on (seed, chunks) only.
inline VolumeEstimate estimate_fraction(const DomainSpec& domain, std::int64_t n,
                                        const McOptions& opts = {}) {
  domain.validate();
  if (n < 1) throw InvalidArgument("estimate_fraction: n must be >= 1");
  if (opts.chunks < 1) throw InvalidArgument("estimate_fraction: chunks must be >= 1");

  std::vector<std::int64_t> hits(static_cast<std::size_t>(opts.chunks), 0);
  parallel_for(hits.size(), opts.threads, [&](std::size_t c) {
    Rng rng = make_stream(opts.seed, c);
    std::vector<double> x(static_cast<std::size_t>(domain.dim));
    const std::int64_t m = chunk_size(n, opts.chunks, static_cast<int>(c));
    std::int64_t h = 0;
    for (std::int64_t s = 0; s < m; ++s) {
      sample_uniform_sphere(std::span<double>(x), rng);
      h += contains_unchecked(domain, x) ? 1 : 0;
    }
    hits[c] = h;
  });

  std::int64_t total = 0;
  for (auto h : hits) total += h;

  VolumeEstimate est;
  est.domain = domain;
  est.n = n;
  est.fraction = static_cast<double>(total) / static_cast<double>(n);
  est.std_error = std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(n));
  est.ci_lo = std::max(0.0, est.fraction - 1.96 * est.std_error);
  est.ci_hi = std::min(1.0, est.fraction + 1.96 * est.std_error);

  // Batch means over the non-empty chunks.
  double sum = 0.0, sum2 = 0.0;
  int used = 0;
  for (int c = 0; c < opts.chunks; ++c) {
    const std::int64_t m = chunk_size(n, opts.chunks, c);
    if (m == 0) continue;
    const double f = static_cast<double>(hits[static_cast<std::size_t>(c)]) / static_cast<double>(m);
    sum += f;
    sum2 += f * f;
    ++used;
  }
  if (used > 1) {
    const double mean = sum / used;
    const double var = std::max(0.0, (sum2 - used * mean * mean) / (used - 1));
    est.batch_stderr = std::sqrt(var / used);
  }
  return est;
}

/// Certified upper bound on |V_{k,d}(a)| / omega_{d-1}.
struct RecursionBound {
  int k = 0;
  int d = 0;
  double a = 0.0;
  double bound_fraction = 0.0;
};

namespace detail {

class RecursionCache {
 public:
  using Key = std::tuple<int, int, std::uint64_t>;

  bool find(const Key& key, double& out) const {
    std::shared_lock lock(mutex_);
    auto it = values_.find(key);
    if (it == values_.end()) return false;
    out = it->second;
    return true;
  }

  void insert(const Key& key, double value) {
    std::unique_lock lock(mutex_);
    values_.emplace(key, value);
  }

  static RecursionCache& instance() {
    static RecursionCache cache;
    return cache;
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, double> values_;
};

// |V_{k,d}(a)| <= |V_{k-1,d}(a)| + c |V_{k-1,d-1}(a')| with a' = a / sqrt(1 - a^2),
// divided through by omega_{d-1}; depth counts how often a was transformed.
//
// The slice x_k = s contributes |H_s| ds / sqrt(1 - s^2) and |H_s| carries a
// factor (1 - s^2)^{(d-2)/2}, so c = int_0^a (1 - s^2)^{(d-3)/2} ds. That is
// at most a once d >= 3; on the circle it equals asin(a), which is larger.
inline double unfold_recursion(int k, int d, double a, int depth) {
  if (k == 0 || a == 0.0) return std::ldexp(1.0, -d);
  // S^0 = {-1, +1}; for a < 1 only +1 survives.
  if (d == 1) return 0.5;

  const RecursionCache::Key key{k, d, std::bit_cast<std::uint64_t>(a)};
  double cached = 0.0;
  if (RecursionCache::instance().find(key, cached)) return cached;

  const double next_a = a / std::sqrt(1.0 - a * a);
  if (!(next_a < 1.0)) throw ParameterOverflow(d - 1, depth + 1, next_a);

  const double same = unfold_recursion(k - 1, d, a, depth);
  const double slice_weight = d == 2 ? std::asin(a) : a;
  const double cross =
      slice_weight * sphere_area_ratio(d - 1) * unfold_recursion(k - 1, d - 1, next_a, depth + 1);
  const double value = same + cross;
  RecursionCache::instance().insert(key, value);
  return value;
}

}  // namespace detail

/// Unfolds the slab recursion down to |V_{0,m}| / omega_{m-1} = 2^{-m}.
inline RecursionBound recursion_bound(int k, int d, double a) {
  if (d < 1) throw InvalidArgument("recursion_bound: d must be >= 1");
  if (k < 0 || k > d) throw InvalidArgument("recursion_bound: k must lie in [0, d]");
  if (!(a >= 0.0 && a < 1.0)) throw InvalidArgument("recursion_bound: a must lie in [0, 1)");
  return {k, d, a, detail::unfold_recursion(k, d, a, 0)};
}

struct Lemma1Row {
  int d = 0;
  double a = 0.0;
  double bound_fraction = 0.0;
  double ratio = 0.0;  ///< bound_fraction * 2^d
};

struct Lemma1Report {
  double exponent = 0.0;
  std::vector<Lemma1Row> rows;
  double max_ratio = 0.0;
  int argmax_d = 0;
  /// Set when exponent <= 3/2, outside the regime a_d << d^{-3/2}.
  bool outside_hypothesis = false;
};

/// Ratios recursion_bound(d, d, d^{-exponent}) * 2^d for d = 2..d_max.
inline Lemma1Report lemma1_report(int d_max, double exponent) {
  if (d_max < 2) throw InvalidArgument("lemma1_report: d_max must be >= 2");
  Lemma1Report rep;
  rep.exponent = exponent;
  rep.outside_hypothesis = !(exponent > 1.5);
  for (int d = 2; d <= d_max; ++d) {
    const double a = std::pow(static_cast<double>(d), -exponent);
    const auto b = recursion_bound(d, d, a);
    const double ratio = std::ldexp(b.bound_fraction, d);
    rep.rows.push_back({d, a, b.bound_fraction, ratio});
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax_d = d;
    }
  }
  return rep;
}

}  // namespace orthant_lab
