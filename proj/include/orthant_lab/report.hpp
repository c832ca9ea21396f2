#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "orthant_lab/eig_bounds.hpp"
#include "orthant_lab/error.hpp"
#include "orthant_lab/fpt_sim.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/random.hpp"
#include "orthant_lab/spectral_s2.hpp"

namespace orthant_lab {

/// Sample budgets for each engine the report drives.
struct ReportBudgets {
  std::int64_t paths = 20000;
  double t_max = 1e3;
  double step = 1.0;
  WalkModel model = WalkModel::Brownian;
  std::int64_t rayleigh_samples = 100000;
  int spectral_n_theta = 32;
  int spectral_levels = 4;
};

inline constexpr int kMaxReportMcDim = 16;

/// One dimension of the consolidated table; NaN marks a column an engine does not fill.
struct ReportRow {
  static constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

  int dim = 0;
  double p_mc = kNone;
  double p_mc_stderr = kNone;
  double lambda_mc = kNone;
  double lambda_mc_stderr = kNone;
  double lambda_spectral = kNone;
  double yamabe_lower = kNone;
  double rayleigh_upper = kNone;
  double rayleigh_stderr = kNone;
  double a_star = kNone;
  double lower_ratio = kNone;  ///< yamabe_lower 2^d / d
  double upper_ratio = kNone;  ///< rayleigh_upper 2^d / d^3
  bool sandwich_ok = true;
  std::string note;  ///< why an engine left its columns empty
};

/// Checks yamabe_lower <= lambda_mc <= rayleigh_upper within 4 combined stderr.
inline bool sandwich_consistent(const ReportRow& r) {
  if (r.dim < 4) return true;
  bool ok = true;
  if (!std::isnan(r.yamabe_lower) && !std::isnan(r.lambda_mc))
    ok = ok && r.yamabe_lower <= r.lambda_mc + 4.0 * r.lambda_mc_stderr;
  if (!std::isnan(r.lambda_mc) && !std::isnan(r.rayleigh_upper))
    ok = ok && r.lambda_mc <= r.rayleigh_upper + 4.0 * std::hypot(r.lambda_mc_stderr, r.rayleigh_stderr);
  if (!std::isnan(r.yamabe_lower) && !std::isnan(r.rayleigh_upper))
    ok = ok && r.yamabe_lower <= r.rayleigh_upper + 4.0 * r.rayleigh_stderr;
  return ok;
}

namespace detail {

template <class F>
auto annotate_dim(int dim, F&& f) {
  const std::string prefix = "dim=" + std::to_string(dim) + ": ";
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  }
}

}  // namespace detail

/// Builds one row per requested dim. Engines that do not apply to a dim
/// leave their columns NaN. Each engine draws from a seed derived
/// from (seed, dim), so rows do not depend on which other dims are requested.
inline std::vector<ReportRow> report(std::span<const int> dims, const ReportBudgets& budgets,
                                     std::uint64_t seed, int threads = 1) {
  for (int d : dims)
    if (d < 1 || d > kMaxReportMcDim)
      throw InvalidArgument("report: dims must lie in [1, " + std::to_string(kMaxReportMcDim) +
                            "], got " + std::to_string(d));
  std::vector<ReportRow> rows;
  for (int d : dims) {
    ReportRow row;
    row.dim = d;
    const std::uint64_t dim_seed = splitmix64(seed ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(d)));

    // A tail that has not decayed by t_max leaves the MC columns empty
    // rather than aborting the table; every other failure propagates.
    detail::annotate_dim(d, [&] {
      WalkConfig cfg;
      cfg.dim = d;
      cfg.model = budgets.model;
      cfg.step = budgets.step;
      cfg.t_max = budgets.t_max;
      cfg.n_paths = budgets.paths;
      cfg.seed = dim_seed;
      ExponentFit fit;
      try {
        fit = fit_tail_exponent(survival_curve(cfg, threads));
      } catch (const FitWindowError& e) {
        row.note = e.what();
        return 0;
      }
      row.p_mc = fit.p_hat;
      row.p_mc_stderr = fit.p_stderr;
      row.lambda_mc = fit.lambda_hat;
      row.lambda_mc_stderr = fit.lambda_stderr;
      return 0;
    });

    if (d == 3) {
      detail::annotate_dim(d, [&] {
        GridSpec g{budgets.spectral_n_theta, 2 * budgets.spectral_n_theta, DomainSpec::orthant_complement(3)};
        row.lambda_spectral = solve_levels(g, budgets.spectral_levels).extrapolation.lambda;
        return 0;
      });
    }

    if (d >= 4) {
      detail::annotate_dim(d, [&] {
        McOptions opts;
        opts.seed = splitmix64(dim_seed + 1);
        opts.threads = threads;
        const auto b = compute_bounds(d, budgets.rayleigh_samples, opts);
        row.yamabe_lower = b.lower;
        row.rayleigh_upper = b.upper;
        row.rayleigh_stderr = b.upper_stderr;
        row.a_star = b.a_star;
        row.lower_ratio = b.lower_ratio;
        row.upper_ratio = b.upper_ratio;
        return 0;
      });
    }
    row.sandwich_ok = sandwich_consistent(row);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace orthant_lab
