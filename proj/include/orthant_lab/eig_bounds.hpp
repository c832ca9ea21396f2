#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "orthant_lab/error.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/random.hpp"
#include "orthant_lab/sphere_geom.hpp"

namespace orthant_lab {

/// Cubic smoothstep cutoff of width a: theta(t) = 0 for t >= 0, 1 for t <= -a.
class CutoffProfile {
 public:
  explicit CutoffProfile(double a) : a_(a) {
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("CutoffProfile: width a must lie in (0, 1)");
  }

  /// Width a = alpha * d^{-3/2}.
  static CutoffProfile from_scaling(double alpha, int d) {
    return CutoffProfile(alpha * std::pow(static_cast<double>(d), -1.5));
  }

  double width() const noexcept { return a_; }

 private:
  double a_;
};

inline double theta(double t, const CutoffProfile& p) {
  if (t >= 0.0) return 0.0;
  const double u = -t / p.width();
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

/// d theta / dt; nonpositive, peak magnitude 1.5/a at t = -a/2.
inline double theta_prime(double t, const CutoffProfile& p) {
  if (t >= 0.0) return 0.0;
  const double u = -t / p.width();
  if (u >= 1.0) return 0.0;
  return -6.0 * u * (1.0 - u) / p.width();
}

namespace detail {

inline std::size_t argmin_lowest(std::span<const double> x) {
  std::size_t j = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[j]) j = i;
  return j;
}

}  // namespace detail

/// eta(x) = max_i theta(x_i) = theta(min_i x_i).
inline double eta(std::span<const double> x, const CutoffProfile& p) {
  return theta(x[detail::argmin_lowest(x)], p);
}

inline double eta(const SpherePoint& x, const CutoffProfile& p) { return eta(x.coords(), p); }

/// |grad_S eta|^2 = theta'(x_j)^2 (1 - x_j^2) with j the lowest-index argmin.
inline double grad_norm_sq_eta(std::span<const double> x, const CutoffProfile& p) {
  const double xj = x[detail::argmin_lowest(x)];
  const double g = theta_prime(xj, p);
  return g * g * std::max(0.0, 1.0 - xj * xj);
}

inline double grad_norm_sq_eta(const SpherePoint& x, const CutoffProfile& p) {
  return grad_norm_sq_eta(x.coords(), p);
}

/// Monte Carlo estimate of the Rayleigh quotient Y(eta) = E|grad eta|^2 / E eta^2.
struct RayleighEstimate {
  int dim = 0;
  double a = 0.0;
  std::int64_t n = 0;
  double bound = 0.0;
  double std_error = 0.0;
  double numerator = 0.0;    ///< E |grad eta|^2 under the uniform law
  double denominator = 0.0;  ///< E eta^2 under the uniform law
  double numerator_stderr = 0.0;
  double denominator_stderr = 0.0;
  double covariance = 0.0;  ///< Cov of the two sample means
};

namespace detail {

/// Running sums of (num, den) pairs, merged chunk by chunk in index order.
struct PairMoments {
  double s_n = 0.0, s_d = 0.0, s_nn = 0.0, s_dd = 0.0, s_nd = 0.0;
  std::int64_t count = 0;

  void add(double num, double den) {
    s_n += num;
    s_d += den;
    s_nn += num * num;
    s_dd += den * den;
    s_nd += num * den;
    ++count;
  }

  void merge(const PairMoments& o) {
    s_n += o.s_n;
    s_d += o.s_d;
    s_nn += o.s_nn;
    s_dd += o.s_dd;
    s_nd += o.s_nd;
    count += o.count;
  }
};

inline RayleighEstimate finish_rayleigh(int dim, double a, const PairMoments& m) {
  RayleighEstimate r;
  r.dim = dim;
  r.a = a;
  r.n = m.count;
  const double n = static_cast<double>(m.count);
  r.numerator = m.s_n / n;
  r.denominator = m.s_d / n;
  const double var_n = std::max(0.0, (m.s_nn - n * r.numerator * r.numerator) / (n - 1.0));
  const double var_d = std::max(0.0, (m.s_dd - n * r.denominator * r.denominator) / (n - 1.0));
  const double cov = (m.s_nd - n * r.numerator * r.denominator) / (n - 1.0);
  r.numerator_stderr = std::sqrt(var_n / n);
  r.denominator_stderr = std::sqrt(var_d / n);
  r.covariance = cov / n;
  if (!(r.denominator > 4.0 * r.denominator_stderr) || !(r.denominator > 0.0))
    throw InsufficientSamples("rayleigh_upper_bound: denominator not significantly positive (d=" +
                              std::to_string(dim) + ", a=" + std::to_string(a) + ")");
  r.bound = r.numerator / r.denominator;
  // Delta method for a ratio of correlated means.
  const double var_ratio = (var_n - 2.0 * r.bound * cov + r.bound * r.bound * var_d) /
                           (n * r.denominator * r.denominator);
  r.std_error = std::sqrt(std::max(0.0, var_ratio));
  return r;
}

/// Sign-averaged contributions of one magnitude sample for every cutoff width.
///
/// Signs of a uniform sphere point are independent fair coins given the
/// magnitudes. With magnitudes sorted descending, the j-th largest is the
/// minimizing coordinate (as -m_j) with probability 2^{-(j+1)}; all signs
/// positive gives eta = 0.
inline void sign_averaged_terms(std::span<const double> sorted_desc,
                                std::span<const CutoffProfile> profiles, std::span<double> num,
                                std::span<double> den) {
  std::fill(num.begin(), num.end(), 0.0);
  std::fill(den.begin(), den.end(), 0.0);
  double w = 0.5;
  for (double m : sorted_desc) {
    if (w == 0.0) break;
    const double tangential = std::max(0.0, 1.0 - m * m);
    for (std::size_t p = 0; p < profiles.size(); ++p) {
      const double th = theta(-m, profiles[p]);
      const double g = theta_prime(-m, profiles[p]);
      den[p] += w * th * th;
      num[p] += w * g * g * tangential;
    }
    w *= 0.5;
  }
}

inline constexpr std::int64_t kMinRayleighSamples = 10000;

inline void validate_rayleigh_inputs(int d, std::int64_t n, const McOptions& opts) {
  if (d < 2) throw InvalidArgument("rayleigh_upper_bound: d must be >= 2");
  if (n < kMinRayleighSamples)
    throw InvalidArgument("rayleigh_upper_bound: n must be >= " + std::to_string(kMinRayleighSamples));
  if (opts.chunks < 1) throw InvalidArgument("rayleigh_upper_bound: chunks must be >= 1");
}

/// One pass of sign-averaged samples shared by all profiles (common random numbers).
inline std::vector<PairMoments> sign_averaged_moments(int d, std::span<const CutoffProfile> profiles,
                                                      std::int64_t n, const McOptions& opts) {
  validate_rayleigh_inputs(d, n, opts);
  const std::size_t np = profiles.size();
  std::vector<std::vector<PairMoments>> per_chunk(static_cast<std::size_t>(opts.chunks),
                                                  std::vector<PairMoments>(np));
  parallel_for(per_chunk.size(), opts.threads, [&](std::size_t c) {
    Rng rng = make_stream(opts.seed, c);
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> num(np), den(np);
    const std::int64_t m = chunk_size(n, opts.chunks, static_cast<int>(c));
    for (std::int64_t s = 0; s < m; ++s) {
      sample_uniform_sphere(std::span<double>(x), rng);
      for (double& v : x) v = std::abs(v);
      std::sort(x.begin(), x.end(), std::greater<>());
      sign_averaged_terms(x, profiles, num, den);
      for (std::size_t p = 0; p < np; ++p) per_chunk[c][p].add(num[p], den[p]);
    }
  });
  std::vector<PairMoments> total(np);
  for (const auto& chunk : per_chunk)
    for (std::size_t p = 0; p < np; ++p) total[p].merge(chunk[p]);
  return total;
}

}  // namespace detail

/// Upper bound on lambda_1(d) from the Rayleigh quotient of the cutoff eta,
/// integrated with the sign-averaging estimator so the variance does not grow
/// like 2^d.
///
/// eta vanishes on the closed positive orthant, so it lives on the mirror
/// image -U_d of the orthant complement; the two are isometric and share
/// lambda_1(d).
inline RayleighEstimate rayleigh_upper_bound(int d, const CutoffProfile& profile, std::int64_t n,
                                             const McOptions& opts = {}) {
  const CutoffProfile profiles[] = {profile};
  const auto moments = detail::sign_averaged_moments(d, profiles, n, opts);
  return detail::finish_rayleigh(d, profile.width(), moments[0]);
}

/// Plain hit-or-miss version of the same quotient; kept as an oracle for small d.
inline RayleighEstimate rayleigh_plain(int d, const CutoffProfile& profile, std::int64_t n,
                                       const McOptions& opts = {}) {
  detail::validate_rayleigh_inputs(d, n, opts);
  std::vector<detail::PairMoments> per_chunk(static_cast<std::size_t>(opts.chunks));
  parallel_for(per_chunk.size(), opts.threads, [&](std::size_t c) {
    Rng rng = make_stream(opts.seed, c);
    std::vector<double> x(static_cast<std::size_t>(d));
    const std::int64_t m = chunk_size(n, opts.chunks, static_cast<int>(c));
    for (std::int64_t s = 0; s < m; ++s) {
      sample_uniform_sphere(std::span<double>(x), rng);
      const double e = eta(x, profile);
      per_chunk[c].add(grad_norm_sq_eta(x, profile), e * e);
    }
  });
  detail::PairMoments total;
  for (const auto& chunk : per_chunk) total.merge(chunk);
  return detail::finish_rayleigh(d, profile.width(), total);
}

/// 16 log-spaced widths in [1e-3 d^{-3/2}, 0.5] plus d^{-3/2} itself, ascending.
inline std::vector<double> default_cutoff_grid(int d) {
  const double scale = std::pow(static_cast<double>(d), -1.5);
  const double lo = 1e-3 * scale, hi = 0.5;
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(lo * std::pow(hi / lo, i / 15.0));
  if (scale < 1.0) grid.push_back(scale);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct CutoffChoice {
  double a_star = 0.0;
  RayleighEstimate estimate;
  std::vector<RayleighEstimate> scan;  ///< every grid point that passed the denominator check
};

/// Grid point minimizing bound + one stderr. All widths share one sample stream.
inline CutoffChoice optimize_cutoff(int d, std::span<const double> a_grid, std::int64_t n,
                                    const McOptions& opts = {}) {
  if (a_grid.empty()) throw InvalidArgument("optimize_cutoff: empty grid");
  std::vector<CutoffProfile> profiles;
  profiles.reserve(a_grid.size());
  for (double a : a_grid) profiles.emplace_back(a);
  const auto moments = detail::sign_averaged_moments(d, profiles, n, opts);

  CutoffChoice choice;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    RayleighEstimate r;
    try {
      r = detail::finish_rayleigh(d, profiles[p].width(), moments[p]);
    } catch (const InsufficientSamples&) {
      continue;
    }
    choice.scan.push_back(r);
    if (r.bound + r.std_error < best) {
      best = r.bound + r.std_error;
      choice.a_star = r.a;
      choice.estimate = r;
    }
  }
  if (choice.scan.empty())
    throw InsufficientSamples("optimize_cutoff: no grid point passed the denominator check (d=" +
                              std::to_string(d) + ")");
  return choice;
}

namespace detail {

// lambda_1(d+1) >= d(d-2)(1-x)/(4x) with x = (1 - f)^{2/d}, f the excluded fraction.
inline double sobolev_lower_bound(int dim, double excluded_fraction) {
  if (dim <= 3)
    throw InvalidArgument("yamabe_lower_bound: not applicable for dim <= 3 (got " +
                          std::to_string(dim) + ")");
  const double d = dim - 1;
  const double one_minus_x = -std::expm1((2.0 / d) * std::log1p(-excluded_fraction));
  const double x = 1.0 - one_minus_x;
  return d * (d - 2.0) * one_minus_x / (4.0 * x);
}

}  // namespace detail

/// Closed-form Sobolev (Yamabe) lower bound on lambda_1(dim), with the
/// support volume fraction 1 - 2^{-(dim-1)} of omega_{dim-1}.
inline double yamabe_lower_bound(int dim) {
  return detail::sobolev_lower_bound(dim, std::ldexp(1.0, -(dim - 1)));
}

/// Same bound with the sign-symmetric support volume (1 - 2^{-dim}) omega_{dim-1}.
inline double yamabe_lower_bound_symmetric(int dim) {
  return detail::sobolev_lower_bound(dim, std::ldexp(1.0, -dim));
}

/// Survival exponent p = sqrt(lambda + c^2) - c with c = d/2 - 1.
inline double p_from_lambda(double lambda, int d) {
  if (!(lambda >= 0.0)) throw InvalidArgument("p_from_lambda: lambda must be >= 0");
  if (d < 1) throw InvalidArgument("p_from_lambda: d must be >= 1");
  const double c = 0.5 * d - 1.0;
  const double root = std::sqrt(lambda + c * c);
  // Rationalized form avoids cancellation when lambda << c^2.
  return c > 0.0 ? lambda / (root + c) : root - c;
}

/// Inverse of p_from_lambda: lambda = p (p + d - 2).
inline double lambda_from_p(double p, int d) {
  if (!(p >= 0.0)) throw InvalidArgument("lambda_from_p: p must be >= 0");
  if (d < 1) throw InvalidArgument("lambda_from_p: d must be >= 1");
  return p * (p + static_cast<double>(d - 2));
}

/// p_from_lambda(lambda, d) * d / lambda, which tends to 1 as lambda/d -> 0 and d -> infinity.
inline double corollary_ratio(double lambda, int d) {
  if (!(lambda > 0.0)) throw InvalidArgument("corollary_ratio: lambda must be > 0");
  return p_from_lambda(lambda, d) * d / lambda;
}

struct PointEstimate {
  double value = 0.0;
  std::string source;  ///< "mc-exponent", "spectral-s2" or "literature"
};

struct EigenvalueBounds {
  int dim = 0;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double lower_symmetric = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double upper_stderr = std::numeric_limits<double>::quiet_NaN();
  double a_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<PointEstimate> point_estimates;
  double lower_ratio = std::numeric_limits<double>::quiet_NaN();  ///< lower 2^d / d
  double upper_ratio = std::numeric_limits<double>::quiet_NaN();  ///< upper 2^d / d^3

  bool sandwich_holds() const {
    if (std::isnan(lower) || std::isnan(upper)) return true;
    return lower <= upper + 4.0 * upper_stderr;
  }
};

/// Yamabe lower bound (dim >= 4) and optimized Rayleigh upper bound (dim >= 2).
inline EigenvalueBounds compute_bounds(int dim, std::int64_t samples, const McOptions& opts = {}) {
  if (dim < 2) throw InvalidArgument("compute_bounds: dim must be >= 2");
  EigenvalueBounds b;
  b.dim = dim;
  if (dim >= 4) {
    b.lower = yamabe_lower_bound(dim);
    b.lower_symmetric = yamabe_lower_bound_symmetric(dim);
    b.lower_ratio = std::ldexp(b.lower, dim) / dim;
  }
  const auto grid = default_cutoff_grid(dim);
  const auto choice = optimize_cutoff(dim, grid, samples, opts);
  b.upper = choice.estimate.bound;
  b.upper_stderr = choice.estimate.std_error;
  b.a_star = choice.a_star;
  b.upper_ratio = std::ldexp(b.upper, dim) / (static_cast<double>(dim) * dim * dim);
  return b;
}

struct CorollaryRow {
  int d = 0;
  double lambda_lower = 0.0;
  double ratio_lower = 0.0;
  double lambda_upper = 0.0;
  double ratio_upper = 0.0;
  /// Set when either ratio is more than 1e-2 away from 1.
  bool flagged = false;
};

/// p d / lambda evaluated on both bounds of each record.
inline std::vector<CorollaryRow> corollary_check(std::span<const EigenvalueBounds> bounds) {
  std::vector<CorollaryRow> rows;
  for (const auto& b : bounds) {
    if (b.dim < 4) throw InvalidArgument("corollary_check: dims must be >= 4");
    CorollaryRow r;
    r.d = b.dim;
    r.lambda_lower = b.lower;
    r.ratio_lower = corollary_ratio(b.lower, b.dim);
    r.lambda_upper = b.upper;
    r.ratio_upper = std::isnan(b.upper) ? b.upper : corollary_ratio(b.upper, b.dim);
    r.flagged = std::abs(r.ratio_lower - 1.0) > 1e-2 ||
                (!std::isnan(r.ratio_upper) && std::abs(r.ratio_upper - 1.0) > 1e-2);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace orthant_lab
