#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orthant_lab/eig_bounds.hpp"
#include "orthant_lab/error.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/random.hpp"

namespace orthant_lab {

enum class WalkModel { Brownian, Lattice };

inline std::string to_string(WalkModel m) { return m == WalkModel::Brownian ? "brownian" : "lattice"; }

inline WalkModel parse_walk_model(const std::string& s) {
  if (s == "brownian") return WalkModel::Brownian;
  if (s == "lattice") return WalkModel::Lattice;
  throw InvalidArgument("unknown walk model '" + s + "'");
}

/// d independent particles started at `start`; the walk dies the first time
/// every coordinate is negative.
struct WalkConfig {
  int dim = 1;
  WalkModel model = WalkModel::Brownian;
  double step = 1e-2;  ///< Brownian time step h; the lattice always steps once per unit time
  std::vector<double> start;  ///< empty selects default_start
  double t_max = 1e3;
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 42;

  /// (1,...,1)/sqrt(d) for Brownian motion, (1,...,1) on the lattice.
  static std::vector<double> default_start(int dim, WalkModel model) {
    const double v = model == WalkModel::Lattice ? 1.0 : 1.0 / std::sqrt(static_cast<double>(dim));
    return std::vector<double>(static_cast<std::size_t>(dim), v);
  }

  std::vector<double> start_point() const {
    return start.empty() ? default_start(dim, model) : start;
  }

  double time_step() const { return model == WalkModel::Lattice ? 1.0 : step; }

  std::int64_t n_steps() const {
    return static_cast<std::int64_t>(std::floor(t_max / time_step() * (1.0 + 1e-12)));
  }

  void validate() const {
    if (dim < 1) throw InvalidArgument("WalkConfig: invalid dimension " + std::to_string(dim));
    if (!(t_max > 0.0)) throw InvalidArgument("WalkConfig: t_max must be > 0");
    if (model == WalkModel::Brownian && !(step > 0.0))
      throw InvalidArgument("WalkConfig: step must be > 0");
    if (n_paths < 0) throw InvalidArgument("WalkConfig: n_paths must be >= 0");
    const auto x = start_point();
    if (static_cast<int>(x.size()) != dim)
      throw InvalidArgument("WalkConfig: start has " + std::to_string(x.size()) +
                            " coordinates, expected " + std::to_string(dim));
    if (std::none_of(x.begin(), x.end(), [](double v) { return v > 0.0; }))
      throw InvalidArgument("WalkConfig: start needs at least one positive coordinate");
    if (model == WalkModel::Lattice &&
        std::any_of(x.begin(), x.end(), [](double v) { return v != std::round(v); }))
      throw InvalidArgument("WalkConfig: lattice start must have integer coordinates");
  }
};

namespace detail {

inline constexpr std::int64_t kCensored = -1;

/// Step index at which every coordinate is first < 0, or kCensored.
inline std::int64_t exit_step(const WalkConfig& cfg, std::span<const double> start, Rng& rng) {
  const std::int64_t n_steps = cfg.n_steps();
  const std::size_t d = start.size();
  if (cfg.model == WalkModel::Lattice) {
    std::vector<std::int64_t> x(d);
    std::size_t negative = 0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = static_cast<std::int64_t>(std::llround(start[i]));
      negative += x[i] < 0 ? 1 : 0;
    }
    std::uint64_t bits = 0;
    int left = 0;
    for (std::int64_t s = 1; s <= n_steps; ++s) {
      for (std::size_t i = 0; i < d; ++i) {
        if (left == 0) {
          bits = rng();
          left = 64;
        }
        const bool was_negative = x[i] < 0;
        x[i] += (bits & 1u) ? 1 : -1;
        bits >>= 1;
        --left;
        negative += static_cast<std::size_t>(x[i] < 0) - static_cast<std::size_t>(was_negative);
      }
      if (negative == d) return s;
    }
    return kCensored;
  }

  std::vector<double> x(start.begin(), start.end());
  std::size_t negative = 0;
  for (double v : x) negative += v < 0.0 ? 1 : 0;
  std::normal_distribution<double> gauss;
  const double scale = std::sqrt(cfg.step);
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      const bool was_negative = x[i] < 0.0;
      x[i] += scale * gauss(rng);
      negative += static_cast<std::size_t>(x[i] < 0.0) - static_cast<std::size_t>(was_negative);
    }
    if (negative == d) return s;
  }
  return kCensored;
}

}  // namespace detail

/// Exit time of one path, or std::nullopt when it is still alive at t_max.
inline std::optional<double> sample_exit_time(const WalkConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto start = cfg.start_point();
  const std::int64_t s = detail::exit_step(cfg, start, rng);
  if (s == detail::kCensored) return std::nullopt;
  return static_cast<double>(s) * cfg.time_step();
}

/// Exit step of every path (detail::kCensored when alive at t_max), path i
/// drawing from its own substream.
inline std::vector<std::int64_t> simulate_exit_steps(const WalkConfig& cfg, int threads = 1) {
  cfg.validate();
  const auto start = cfg.start_point();
  std::vector<std::int64_t> steps(static_cast<std::size_t>(cfg.n_paths));
  const int chunks = kDefaultChunks;
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    const std::int64_t per = (cfg.n_paths + chunks - 1) / chunks;
    const std::int64_t lo = static_cast<std::int64_t>(c) * per;
    const std::int64_t hi = std::min(cfg.n_paths, lo + per);
    for (std::int64_t p = lo; p < hi; ++p) {
      Rng rng = make_path_stream(cfg.seed, static_cast<std::uint64_t>(p));
      steps[static_cast<std::size_t>(p)] = detail::exit_step(cfg, start, rng);
    }
  });
  return steps;
}

/// Empirical P(tau > t) on a geometric grid with 32 points per decade.
struct SurvivalCurve {
  int dim = 0;
  WalkModel model = WalkModel::Brownian;
  double step = 0.0;
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> std_error;
  std::vector<std::int64_t> alive;
  std::int64_t n_paths = 0;
  double censored_fraction = 0.0;  ///< share of paths still alive at t_max
};

inline constexpr int kGridPointsPerDecade = 32;
inline constexpr int kMaxGridDecades = 8;

/// t_max 10^{-k/32} for k >= 0 down to the first step time, ascending.
inline std::vector<double> survival_grid(double t_max, double first_time) {
  std::vector<double> t;
  for (int k = 0; k <= kGridPointsPerDecade * kMaxGridDecades; ++k) {
    const double v = t_max * std::pow(10.0, -static_cast<double>(k) / kGridPointsPerDecade);
    if (v < first_time * (1.0 - 1e-12)) break;
    t.push_back(v);
  }
  std::reverse(t.begin(), t.end());
  return t;
}

inline SurvivalCurve survival_from_exit_steps(const WalkConfig& cfg,
                                              std::vector<std::int64_t> steps) {
  const double dt = cfg.time_step();
  if (cfg.n_steps() < 1)
    throw InvalidArgument("survival_curve: t_max is shorter than one time step");
  const std::int64_t n = static_cast<std::int64_t>(steps.size());
  if (n < 1) throw InvalidArgument("survival_curve: no paths");

  const std::int64_t never = std::numeric_limits<std::int64_t>::max();
  for (auto& s : steps)
    if (s == detail::kCensored) s = never;
  std::sort(steps.begin(), steps.end());

  SurvivalCurve c;
  c.dim = cfg.dim;
  c.model = cfg.model;
  c.step = dt;
  c.n_paths = n;
  c.times = survival_grid(cfg.t_max, dt);
  for (double t : c.times) {
    // Alive at t means the exit step s satisfies s * dt > t.
    const auto last_dead =
        static_cast<std::int64_t>(std::floor(t / dt * (1.0 + 1e-12)));
    const auto it = std::upper_bound(steps.begin(), steps.end(), last_dead);
    const std::int64_t alive = static_cast<std::int64_t>(steps.end() - it);
    const double s = static_cast<double>(alive) / static_cast<double>(n);
    c.alive.push_back(alive);
    c.survival.push_back(s);
    c.std_error.push_back(std::sqrt(s * (1.0 - s) / static_cast<double>(n)));
  }
  const auto censored = std::count(steps.begin(), steps.end(), never);
  c.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
  if (c.alive.front() == 0)
    throw DegenerateCurve("survival_curve: every path exited before the first grid time");
  return c;
}

inline SurvivalCurve survival_curve(const WalkConfig& cfg, int threads = 1) {
  cfg.validate();
  if (cfg.n_paths < 1) throw InvalidArgument("survival_curve: n_paths must be >= 1");
  if (cfg.n_steps() < 1)
    throw InvalidArgument("survival_curve: t_max is shorter than one time step");
  return survival_from_exit_steps(cfg, simulate_exit_steps(cfg, threads));
}

/// Power-law fit log S = intercept + slope log t over a window of the curve.
struct ExponentFit {
  int dim = 0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int points = 0;
  double r_squared = 0.0;
  double p_hat = 0.0;  ///< -2 slope
  double p_stderr = 0.0;
  double lambda_hat = 0.0;  ///< p_hat (p_hat + d - 2)
  double lambda_stderr = 0.0;
};

inline constexpr int kMinFitPoints = 8;

/// Weighted least squares on (log t, log S) with weights 1/Var(log S).
///
/// The slope error uses the full covariance of the log-survival estimates,
/// Cov(log S_s, log S_t) = (1 - S_s) / (n S_s) for s <= t, since every grid
/// point is computed from the same paths.
inline ExponentFit fit_tail_exponent(const SurvivalCurve& curve, double t_lo, double t_hi) {
  if (!(t_lo > 0.0 && t_hi > t_lo)) throw FitWindowError("fit_tail_exponent: invalid window");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    const double t = curve.times[i];
    if (t >= t_lo * (1.0 - 1e-9) && t <= t_hi * (1.0 + 1e-9)) idx.push_back(i);
  }
  if (static_cast<int>(idx.size()) < kMinFitPoints)
    throw FitWindowError("fit_tail_exponent: window holds " + std::to_string(idx.size()) +
                         " grid points, need at least " + std::to_string(kMinFitPoints));
  for (auto i : idx)
    if (curve.alive[i] == 0)
      throw FitWindowError("fit_tail_exponent: survival reaches 0 inside the window");
  if (curve.survival[idx.back()] >= 0.9)
    throw FitWindowError("fit_tail_exponent: survival at the window end is still >= 0.9");

  const double n = static_cast<double>(curve.n_paths);
  const std::size_t m = idx.size();
  std::vector<double> x(m), y(m), var(m), w(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = curve.survival[idx[j]];
    x[j] = std::log(curve.times[idx[j]]);
    y[j] = std::log(s);
    var[j] = std::max(1.0 - s, 1.0 / n) / (n * s);
    w[j] = 1.0 / var[j];
  }
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sw += w[j];
    swx += w[j] * x[j];
    swy += w[j] * y[j];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sxx += w[j] * (x[j] - xbar) * (x[j] - xbar);
    sxy += w[j] * (x[j] - xbar) * (y[j] - ybar);
  }
  ExponentFit f;
  f.dim = curve.dim;
  f.points = static_cast<int>(m);
  f.t_lo = curve.times[idx.front()];
  f.t_hi = curve.times[idx.back()];
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;

  // slope = sum_j c_j y_j; Var = c^T Sigma c with Sigma_jk = var[min(j,k)] on the ascending grid.
  std::vector<double> coef(m);
  for (std::size_t j = 0; j < m; ++j) coef[j] = w[j] * (x[j] - xbar) / sxx;
  double v = 0.0;
  double tail = 0.0;  // sum_{k > j} coef[k]
  for (std::size_t jj = m; jj-- > 0;) {
    v += coef[jj] * coef[jj] * var[jj] + 2.0 * coef[jj] * var[jj] * tail;
    tail += coef[jj];
  }
  f.slope_stderr = std::sqrt(std::max(0.0, v));

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double r = y[j] - (f.intercept + f.slope * x[j]);
    ss_res += w[j] * r * r;
    ss_tot += w[j] * (y[j] - ybar) * (y[j] - ybar);
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  f.p_hat = -2.0 * f.slope;
  f.p_stderr = 2.0 * f.slope_stderr;
  f.lambda_hat = f.p_hat * (f.p_hat + static_cast<double>(curve.dim - 2));
  f.lambda_stderr = std::abs(2.0 * f.p_hat + static_cast<double>(curve.dim - 2)) * f.p_stderr;
  return f;
}

/// Default window: the top decade [t_max / 10, t_max] of the curve.
inline ExponentFit fit_tail_exponent(const SurvivalCurve& curve) {
  const double t_max = curve.times.back();
  return fit_tail_exponent(curve, t_max / 10.0, t_max);
}

// ---------------------------------------------------------------------------
// Occupation time of the closed positive orthant over [0, 1].

enum class OccupationRule {
  /// Each step contributes E[time in the orthant | endpoints] of the Brownian bridge.
  BridgeAveraged,
  /// h * #{grid times k h, k = 1..N, in the orthant}.
  Riemann,
};

namespace detail {

/// 16-point Gauss-Legendre nodes and weights mapped to [0, 1].
struct GaussLegendre16 {
  std::array<double, 16> node{};
  std::array<double, 16> weight{};

  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      node[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
      weight[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  static const GaussLegendre16& get() {
    static const GaussLegendre16 rule;
    return rule;
  }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Expected fraction of [0, h] a d-dimensional Brownian bridge from a to b
/// spends in the closed positive orthant.
inline double bridge_orthant_fraction(std::span<const double> a, std::span<const double> b,
                                      double h, std::vector<std::size_t>& uncertain) {
  // Beyond 8 bridge standard deviations (max sqrt(h)/2) a coordinate's sign is settled.
  const double band = 4.0 * std::sqrt(h);
  uncertain.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= band && b[i] >= band) continue;
    if (a[i] <= -band && b[i] <= -band) return 0.0;
    uncertain.push_back(i);
  }
  if (uncertain.empty()) return 1.0;
  const auto& gl = GaussLegendre16::get();
  double total = 0.0;
  for (std::size_t q = 0; q < gl.node.size(); ++q) {
    const double s = gl.node[q];
    const double sd = std::sqrt(s * (1.0 - s) * h);
    double prod = 1.0;
    for (auto i : uncertain) prod *= normal_cdf((a[i] + (b[i] - a[i]) * s) / sd);
    total += gl.weight[q] * prod;
  }
  return total;
}

}  // namespace detail

/// One sample of T = int_0^1 1{B(t) in R_+^d} dt for Brownian motion from the origin.
inline double occupation_time_sample(int dim, double h, Rng& rng,
                                     OccupationRule rule = OccupationRule::BridgeAveraged) {
  if (dim < 1) throw InvalidArgument("occupation_time_sample: invalid dimension");
  if (!(h > 0.0 && h <= 1e-2)) throw InvalidArgument("occupation_time_sample: need 0 < h <= 1e-2");
  const auto n_steps = static_cast<std::int64_t>(std::llround(1.0 / h));
  const double dt = 1.0 / static_cast<double>(n_steps);
  const double scale = std::sqrt(dt);
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> prev(d, 0.0), cur(d, 0.0);
  std::vector<std::size_t> scratch;
  scratch.reserve(d);
  std::normal_distribution<double> gauss;
  double occupied = 0.0;
  for (std::int64_t s = 0; s < n_steps; ++s) {
    bool inside = true;
    for (std::size_t i = 0; i < d; ++i) {
      cur[i] = prev[i] + scale * gauss(rng);
      inside = inside && cur[i] >= 0.0;
    }
    if (rule == OccupationRule::Riemann)
      occupied += inside ? 1.0 : 0.0;
    else
      occupied += detail::bridge_orthant_fraction(prev, cur, dt, scratch);
    std::swap(prev, cur);
  }
  return std::clamp(occupied * dt, 0.0, 1.0);
}

/// n occupation samples in chunked substreams, ordered by sample index.
inline std::vector<double> occupation_times(int dim, double h, std::int64_t n,
                                            const McOptions& opts = {},
                                            OccupationRule rule = OccupationRule::BridgeAveraged) {
  if (n < 0) throw InvalidArgument("occupation_times: n must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<std::int64_t> offset(static_cast<std::size_t>(opts.chunks) + 1, 0);
  for (int c = 0; c < opts.chunks; ++c)
    offset[static_cast<std::size_t>(c) + 1] = offset[static_cast<std::size_t>(c)] + chunk_size(n, opts.chunks, c);
  parallel_for(static_cast<std::size_t>(opts.chunks), opts.threads, [&](std::size_t c) {
    Rng rng = make_stream(opts.seed, c);
    for (std::int64_t i = offset[c]; i < offset[c + 1]; ++i)
      out[static_cast<std::size_t>(i)] = occupation_time_sample(dim, h, rng, rule);
  });
  return out;
}

/// CDF of the arcsine law, (2/pi) asin(sqrt(t)).
inline double arcsine_cdf(double t) {
  return (2.0 / std::numbers::pi) * std::asin(std::sqrt(std::clamp(t, 0.0, 1.0)));
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double f = cdf(samples[i]);
    dist = std::max({dist, std::abs(static_cast<double>(j) / n - f), std::abs(f - static_cast<double>(i) / n)});
    i = j;
  }
  return dist;
}

/// Empirical P(T <= t).
inline double empirical_cdf(std::span<const double> sorted, double t) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

// ---------------------------------------------------------------------------
// Path rendering.

struct PathRow {
  int path = 0;
  std::int64_t step = 0;
  double t = 0.0;
  std::vector<std::int64_t> coords;
};

struct PathTable {
  int dim = 0;
  int attempts = 0;
  std::vector<PathRow> rows;
};

/// Full trajectories of the first n lattice paths (by substream index) that
/// survive to t_max. Gives up after 10000 attempts per requested path.
inline PathTable render_paths(const WalkConfig& cfg, int n) {
  if (cfg.dim < 1 || cfg.dim > 3)
    throw InvalidArgument("render_paths: only dimensions 1..3 can be rendered");
  if (n < 0 || n > 10) throw InvalidArgument("render_paths: n must lie in [0, 10]");
  WalkConfig lattice = cfg;
  lattice.model = WalkModel::Lattice;
  if (cfg.model != WalkModel::Lattice) lattice.start.clear();
  lattice.validate();

  PathTable table;
  table.dim = cfg.dim;
  const auto d = static_cast<std::size_t>(cfg.dim);
  const std::int64_t n_steps = lattice.n_steps();
  const auto start = lattice.start_point();
  int found = 0;
  for (int attempt = 0; found < n && attempt < 10000 * n; ++attempt) {
    ++table.attempts;
    Rng rng = make_path_stream(lattice.seed, static_cast<std::uint64_t>(attempt));
    std::vector<PathRow> path;
    std::vector<std::int64_t> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = std::llround(start[i]);
    path.push_back({found, 0, 0.0, x});
    bool alive = true;
    std::uint64_t bits = 0;
    int left = 0;
    for (std::int64_t s = 1; s <= n_steps && alive; ++s) {
      std::size_t negative = 0;
      for (std::size_t i = 0; i < d; ++i) {
        if (left == 0) {
          bits = rng();
          left = 64;
        }
        x[i] += (bits & 1u) ? 1 : -1;
        bits >>= 1;
        --left;
        negative += x[i] < 0 ? 1 : 0;
      }
      if (negative == d) alive = false;
      path.push_back({found, s, static_cast<double>(s), x});
    }
    if (!alive) continue;
    table.rows.insert(table.rows.end(), path.begin(), path.end());
    ++found;
  }
  return table;
}

}  // namespace orthant_lab
