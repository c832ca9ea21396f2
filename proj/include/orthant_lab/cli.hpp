#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "orthant_lab/eig_bounds.hpp"
#include "orthant_lab/error.hpp"
#include "orthant_lab/fpt_sim.hpp"
#include "orthant_lab/io.hpp"
#include "orthant_lab/parallel.hpp"
#include "orthant_lab/report.hpp"
#include "orthant_lab/spectral_s2.hpp"
#include "orthant_lab/sphere_geom.hpp"
#include "orthant_lab/volume_mc.hpp"

#ifndef ORTHANT_LAB_VERSION
#define ORTHANT_LAB_VERSION "0.1.0"
#endif

namespace orthant_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

using json = nlohmann::ordered_json;

namespace detail {

inline std::int64_t as_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e18)
    throw InvalidArgument(std::string(what) + " must be a non-negative integer");
  return static_cast<std::int64_t>(v);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Writes `<out>.manifest.json` describing how `out` was produced.
inline void write_manifest(const std::string& out, const std::string& subcommand,
                           const std::vector<std::string>& args, CLI::App& sub,
                           std::uint64_t seed, int threads) {
  json params = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    std::string name = opt->get_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    if (opt->count() > 0) {
      const auto& r = opt->results();
      params[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      params[name] = opt->get_default_str();
    }
  }
  json m;
  m["subcommand"] = subcommand;
  m["argv"] = args;
  m["parameters"] = params;
  m["seed"] = seed;
  m["threads"] = threads;
  m["artifact_version"] = ORTHANT_LAB_VERSION;
  m["timestamp"] = utc_timestamp();
  auto f = io::open_output(out + ".manifest.json");
  f << m.dump(2) << '\n';
}

/// `path` with its extension replaced by `ext` (which includes the dot).
inline std::string with_extension(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ext;
  return path.substr(0, dot) + ext;
}

inline DomainSpec parse_volume_domain(const std::string& name, int dim, int k, double a, double beta) {
  if (name == "orthant-complement") return DomainSpec::orthant_complement(dim);
  if (name == "negative-orthant") return DomainSpec::negative_orthant(dim);
  if (name == "sigma-slab") return DomainSpec::sigma_slab(dim, a);
  if (name == "v-slab") return DomainSpec::v_slab(k < 0 ? dim : k, dim, a);
  if (name == "hemisphere") return DomainSpec::hemisphere(dim);
  if (name == "lune") return DomainSpec::lune(beta, dim);
  throw InvalidArgument("unknown domain '" + name + "'");
}

inline json fit_json(const ExponentFit& f, const WalkConfig& cfg) {
  json j;
  j["dim"] = cfg.dim;
  j["model"] = to_string(cfg.model);
  j["step"] = cfg.time_step();
  j["window"] = {f.t_lo, f.t_hi};
  j["slope"] = f.slope;
  j["slope_stderr"] = f.slope_stderr;
  j["p_hat"] = f.p_hat;
  j["p_stderr"] = f.p_stderr;
  j["lambda_hat"] = f.lambda_hat;
  j["r2"] = f.r_squared;
  return j;
}

inline json nan_to_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"orthant_lab: survival exponents and Dirichlet eigenvalue bounds for the orthant complement"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  int threads = default_threads();
  std::string out_path;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", seed, "Run seed")->capture_default_str();
    s->add_option("--threads", threads, "Worker threads (default ORTHANT_LAB_THREADS)")
        ->check(CLI::PositiveNumber);
    s->add_option("--out", out_path, "Output file (stdout when omitted)");
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Path simulation of the exit time, survival curve and tail fit");
  int sim_dim = 0;
  std::string sim_model = "brownian";
  double sim_step = 0.25, sim_tmax = 1e3, sim_paths = 1e5;
  std::string sim_start, sim_window;
  int sim_render = -1;
  sim->add_option("--dim", sim_dim, "Number of particles d")->required();
  sim->add_option("--model", sim_model, "brownian|lattice")->capture_default_str();
  sim->add_option("--step", sim_step, "Brownian time step h")->capture_default_str();
  sim->add_option("--tmax", sim_tmax, "Censoring horizon")->capture_default_str();
  sim->add_option("--paths", sim_paths, "Number of paths")->capture_default_str();
  sim->add_option("--start", sim_start, "Start point x1,...,xd (default (1,...,1)/sqrt(d))");
  sim->add_option("--window", sim_window, "Fit window lo,hi (default top decade)");
  sim->add_option("--render", sim_render, "Emit N surviving lattice paths (d <= 3) instead of a survival curve");
  add_common(sim);

  // volume
  auto* vol = app.add_subcommand("volume", "Hit-or-miss volume fractions and the slab recursion bound");
  std::string vol_domain = "sigma-slab", vol_dims = "5", vol_a = "0";
  int vol_k = -1;
  double vol_beta = 1.5 * std::numbers::pi, vol_samples = 1e6;
  bool vol_lemma1 = false;
  int vol_dmax = 25;
  double vol_exponent = 1.6;
  vol->add_option("--domain", vol_domain,
                  "orthant-complement|negative-orthant|sigma-slab|v-slab|hemisphere|lune")
      ->capture_default_str();
  vol->add_option("--dims", vol_dims, "Dimensions: 'a..b' or a comma list")->capture_default_str();
  vol->add_option("--k", vol_k, "v-slab k (default: dim)");
  vol->add_option("--a", vol_a, "Slab parameters, comma list")->capture_default_str();
  vol->add_option("--beta", vol_beta, "Lune angle")->capture_default_str();
  vol->add_option("--samples", vol_samples, "Samples per estimate")->capture_default_str();
  vol->add_flag("--lemma1", vol_lemma1, "Tabulate recursion_bound(d,d,d^-exponent) 2^d instead");
  vol->add_option("--dmax", vol_dmax, "Largest d for --lemma1")->capture_default_str();
  vol->add_option("--exponent", vol_exponent, "Slab exponent for --lemma1")->capture_default_str();
  add_common(vol);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Yamabe lower and Rayleigh upper bounds on lambda_1(d)");
  std::string bnd_dims = "4..12";
  double bnd_samples = 1e5;
  bnd->add_option("--dims", bnd_dims, "Dimensions")->capture_default_str();
  bnd->add_option("--samples", bnd_samples, "Magnitude samples per dimension")->capture_default_str();
  add_common(bnd);

  // spectral
  auto* spc = app.add_subcommand("spectral", "Finite-volume Dirichlet eigensolver on S^2");
  std::string spc_domain = "u3";
  double spc_beta = 1.5 * std::numbers::pi, spc_tol = 1e-8;
  int spc_ntheta = 32, spc_nphi = 64, spc_levels = 4;
  spc->add_option("--domain", spc_domain, "u3|hemisphere|lune")->capture_default_str();
  spc->add_option("--beta", spc_beta, "Lune angle in radians")->capture_default_str();
  spc->add_option("--ntheta", spc_ntheta, "Coarsest colatitude intervals")->capture_default_str();
  spc->add_option("--nphi", spc_nphi, "Coarsest azimuth intervals")->capture_default_str();
  spc->add_option("--levels", spc_levels, "Number of grids, each refined by 2")->capture_default_str();
  spc->add_option("--tol", spc_tol, "Relative residual tolerance")->capture_default_str();
  add_common(spc);

  // report
  auto* rep = app.add_subcommand("report", "Cross-engine table of exponents and eigenvalue bounds");
  std::string rep_dims = "1..6", rep_model = "brownian";
  double rep_paths = 2e4, rep_tmax = 1e3, rep_step = 1.0, rep_samples = 1e5;
  int rep_levels = 4;
  rep->add_option("--dims", rep_dims, "Dimensions (1..16)")->capture_default_str();
  rep->add_option("--paths", rep_paths, "Paths per dimension")->capture_default_str();
  rep->add_option("--tmax", rep_tmax, "Censoring horizon")->capture_default_str();
  rep->add_option("--step", rep_step, "Brownian time step")->capture_default_str();
  rep->add_option("--model", rep_model, "brownian|lattice")->capture_default_str();
  rep->add_option("--samples", rep_samples, "Rayleigh magnitude samples")->capture_default_str();
  rep->add_option("--levels", rep_levels, "Spectral grid levels at dim 3")->capture_default_str();
  add_common(rep);

  // selfcheck
  auto* chk = app.add_subcommand("selfcheck", "Closed-form oracle suite");
  add_common(chk);

  // replay
  auto* rpl = app.add_subcommand("replay", "Re-run the invocation recorded in a manifest");
  std::string rpl_manifest;
  int rpl_threads = 0;
  std::string rpl_out;
  rpl->add_option("manifest", rpl_manifest, "Manifest JSON")->required();
  rpl->add_option("--threads", rpl_threads, "Override the recorded thread count");
  rpl->add_option("--out", rpl_out, "Override the recorded output path");

  std::vector<const char*> argv{"orthant_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (rpl->parsed()) {
      std::ifstream f(rpl_manifest);
      if (!f) throw InvalidArgument("cannot read manifest '" + rpl_manifest + "'");
      const auto m = nlohmann::json::parse(f, nullptr, false);
      if (m.is_discarded() || !m.contains("argv")) throw InvalidArgument("malformed manifest");
      auto replay_args = m["argv"].get<std::vector<std::string>>();
      auto set_flag = [&](const std::string& flag, const std::string& value) {
        for (std::size_t i = 0; i + 1 < replay_args.size(); ++i)
          if (replay_args[i] == flag) {
            replay_args[i + 1] = value;
            return;
          }
        replay_args.push_back(flag);
        replay_args.push_back(value);
      };
      if (rpl_threads > 0) set_flag("--threads", std::to_string(rpl_threads));
      if (!rpl_out.empty()) set_flag("--out", rpl_out);
      return run(replay_args, out, err);
    }

    auto with_output = [&](auto&& write) {
      if (out_path.empty()) {
        write(out);
      } else {
        auto f = io::open_output(out_path);
        write(f);
      }
    };

    CLI::App* chosen = app.get_subcommands().front();
    auto finish = [&] {
      if (!out_path.empty()) detail::write_manifest(out_path, chosen->get_name(), args, *chosen, seed, threads);
    };

    if (sim->parsed()) {
      WalkConfig cfg;
      cfg.dim = sim_dim;
      cfg.model = parse_walk_model(sim_model);
      cfg.step = sim_step;
      cfg.t_max = sim_tmax;
      cfg.n_paths = detail::as_count(sim_paths, "--paths");
      cfg.seed = seed;
      if (!sim_start.empty()) cfg.start = io::parse_real_list(sim_start);
      cfg.validate();

      if (sim_render >= 0) {
        const auto table = render_paths(cfg, sim_render);
        with_output([&](std::ostream& os) {
          std::vector<std::string> header{"path", "step", "t"};
          for (int i = 1; i <= cfg.dim; ++i) header.push_back("x" + std::to_string(i));
          io::write_csv_row(os, header);
          for (const auto& r : table.rows) {
            std::vector<std::string> f{io::format_int(r.path), io::format_int(r.step), io::format_double(r.t)};
            for (auto c : r.coords) f.push_back(io::format_int(c));
            io::write_csv_row(os, f);
          }
        });
        finish();
        return kExitOk;
      }

      const auto curve = survival_curve(cfg, threads);
      with_output([&](std::ostream& os) {
        io::write_csv_row(os, {"t", "survival", "stderr", "alive", "total"});
        for (std::size_t i = 0; i < curve.times.size(); ++i)
          io::write_csv_row(os, {io::format_double(curve.times[i]), io::format_double(curve.survival[i]),
                                 io::format_double(curve.std_error[i]), io::format_int(curve.alive[i]),
                                 io::format_int(curve.n_paths)});
      });
      finish();

      double lo = cfg.t_max / 10.0, hi = cfg.t_max;
      if (!sim_window.empty()) {
        const auto w = io::parse_real_list(sim_window);
        if (w.size() != 2) throw InvalidArgument("--window expects lo,hi");
        lo = w[0];
        hi = w[1];
      }
      const auto fit = fit_tail_exponent(curve, lo, hi);
      json summary = detail::fit_json(fit, cfg);
      // Sensitivity: the decade below the primary window.
      try {
        const auto alt = fit_tail_exponent(curve, lo / 10.0, lo);
        summary["window_sensitivity"] = {{"window", {alt.t_lo, alt.t_hi}}, {"p_hat", alt.p_hat}, {"p_stderr", alt.p_stderr}};
      } catch (const FitWindowError&) {
        summary["window_sensitivity"] = nullptr;
      }
      if (out_path.empty()) {
        err << summary.dump() << '\n';
      } else {
        auto f = io::open_output(out_path + ".fit.json");
        f << summary.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (vol->parsed()) {
      const auto dims = io::parse_int_range(vol_dims);
      const auto as = io::parse_real_list(vol_a);
      const auto samples = detail::as_count(vol_samples, "--samples");
      if (vol_lemma1) {
        const auto rep1 = lemma1_report(vol_dmax, vol_exponent);
        if (rep1.outside_hypothesis)
          err << "warning: exponent " << vol_exponent << " <= 3/2 lies outside the lemma's hypothesis\n";
        with_output([&](std::ostream& os) {
          io::write_csv_row(os, {"d", "a", "bound_fraction", "ratio"});
          for (const auto& r : rep1.rows)
            io::write_csv_row(os, {io::format_int(r.d), io::format_double(r.a), io::format_double(r.bound_fraction),
                                   io::format_double(r.ratio)});
        });
        err << "max ratio " << io::format_double(rep1.max_ratio) << " at d=" << rep1.argmax_d << '\n';
        finish();
        return kExitOk;
      }
      const bool slab = vol_domain == "sigma-slab" || vol_domain == "v-slab";
      std::vector<std::vector<std::string>> lines;
      McOptions opts;
      opts.seed = seed;
      opts.threads = threads;
      for (int d : dims) {
        const std::vector<double> a_values = slab ? as : std::vector<double>{0.0};
        for (double a : a_values) {
          const auto domain = detail::parse_volume_domain(vol_domain, d, vol_k, a, vol_beta);
          const auto est = estimate_fraction(domain, samples, opts);
          std::string bound;
          if (slab) {
            try {
              const int k = domain.tag == DomainTag::SigmaSlab ? d : domain.k;
              bound = io::format_double(recursion_bound(k, d, a).bound_fraction);
            } catch (const Error& e) {
              err << "warning: no recursion bound for d=" << d << ", a=" << a << ": " << e.what() << '\n';
            }
          }
          lines.push_back({domain.name(), io::format_int(d),
                           slab ? io::format_int(domain.tag == DomainTag::SigmaSlab ? d : domain.k) : "",
                           slab ? io::format_double(a) : "", io::format_int(est.n),
                           io::format_double(est.fraction), io::format_double(est.std_error),
                           io::format_double(est.ci_lo), io::format_double(est.ci_hi), bound});
        }
      }
      with_output([&](std::ostream& os) {
        io::write_csv_row(os, {"domain", "dim", "k", "a", "n", "fraction", "stderr", "ci_lo", "ci_hi", "bound_fraction"});
        for (const auto& l : lines) io::write_csv_row(os, l);
      });
      finish();
      return kExitOk;
    }

    if (bnd->parsed()) {
      const auto dims = io::parse_int_range(bnd_dims);
      const auto samples = detail::as_count(bnd_samples, "--samples");
      std::vector<EigenvalueBounds> all;
      for (int d : dims) {
        McOptions opts;
        opts.seed = splitmix64(seed + static_cast<std::uint64_t>(d));
        opts.threads = threads;
        all.push_back(compute_bounds(d, samples, opts));
      }
      with_output([&](std::ostream& os) {
        io::write_csv_row(os, {"dim", "lower", "upper", "upper_stderr", "a_star", "lower_ratio", "upper_ratio"});
        for (const auto& b : all)
          io::write_csv_row(os, {io::format_int(b.dim), io::format_double(b.lower), io::format_double(b.upper),
                                 io::format_double(b.upper_stderr), io::format_double(b.a_star),
                                 io::format_double(b.lower_ratio), io::format_double(b.upper_ratio)});
      });
      finish();
      return kExitOk;
    }

    if (spc->parsed()) {
      DomainSpec domain;
      if (spc_domain == "u3")
        domain = DomainSpec::orthant_complement(3);
      else if (spc_domain == "hemisphere")
        domain = DomainSpec::hemisphere(3);
      else if (spc_domain == "lune")
        domain = DomainSpec::lune(spc_beta);
      else
        throw InvalidArgument("unknown spectral domain '" + spc_domain + "'");
      const auto study = solve_levels(GridSpec{spc_ntheta, spc_nphi, domain}, spc_levels, spc_tol);
      json j;
      j["domain"] = spc_domain;
      j["grids"] = json::array();
      j["lambdas"] = json::array();
      for (const auto& r : study.results) {
        j["grids"].push_back({r.grid.n_theta, r.grid.n_phi});
        j["lambdas"].push_back(r.lambda);
      }
      j["extrapolated"] = study.extrapolation.lambda;
      j["q"] = detail::nan_to_null(study.extrapolation.order);
      j["reliable"] = study.extrapolation.reliable;
      if (!study.extrapolation.warning.empty()) err << "warning: " << study.extrapolation.warning << '\n';
      with_output([&](std::ostream& os) { os << j.dump(2) << '\n'; });
      finish();
      return kExitOk;
    }

    if (rep->parsed()) {
      const auto dims = io::parse_int_range(rep_dims);
      ReportBudgets budgets;
      budgets.paths = detail::as_count(rep_paths, "--paths");
      budgets.t_max = rep_tmax;
      budgets.step = rep_step;
      budgets.model = parse_walk_model(rep_model);
      budgets.rayleigh_samples = detail::as_count(rep_samples, "--samples");
      budgets.spectral_levels = rep_levels;
      const auto rows = report(dims, budgets, seed, threads);
      const std::vector<std::string> header{"dim", "p_mc", "p_mc_stderr", "lambda_mc", "lambda_spectral",
                                            "yamabe_lower", "rayleigh_upper", "rayleigh_stderr",
                                            "lower_ratio", "upper_ratio", "sandwich_ok", "note"};
      with_output([&](std::ostream& os) {
        io::write_csv_row(os, header);
        for (const auto& r : rows)
          io::write_csv_row(os, {io::format_int(r.dim), io::format_double(r.p_mc), io::format_double(r.p_mc_stderr),
                                 io::format_double(r.lambda_mc), io::format_double(r.lambda_spectral),
                                 io::format_double(r.yamabe_lower), io::format_double(r.rayleigh_upper),
                                 io::format_double(r.rayleigh_stderr), io::format_double(r.lower_ratio),
                                 io::format_double(r.upper_ratio), r.sandwich_ok ? "true" : "false", r.note});
      });
      if (!out_path.empty()) {
        json arr = json::array();
        for (const auto& r : rows)
          arr.push_back({{"dim", r.dim},
                         {"p_mc", detail::nan_to_null(r.p_mc)},
                         {"p_mc_stderr", detail::nan_to_null(r.p_mc_stderr)},
                         {"lambda_mc", detail::nan_to_null(r.lambda_mc)},
                         {"lambda_spectral", detail::nan_to_null(r.lambda_spectral)},
                         {"yamabe_lower", detail::nan_to_null(r.yamabe_lower)},
                         {"rayleigh_upper", detail::nan_to_null(r.rayleigh_upper)},
                         {"rayleigh_stderr", detail::nan_to_null(r.rayleigh_stderr)},
                         {"lower_ratio", detail::nan_to_null(r.lower_ratio)},
                         {"upper_ratio", detail::nan_to_null(r.upper_ratio)},
                         {"sandwich_ok", r.sandwich_ok},
                         {"note", r.note}});
        auto f = io::open_output(detail::with_extension(out_path, ".json"));
        f << arr.dump(2) << '\n';
      }
      for (const auto& r : rows)
        if (!r.sandwich_ok) err << "warning: sandwich violated beyond tolerance at dim=" << r.dim << '\n';
      finish();
      return kExitOk;
    }

    if (chk->parsed()) {
      struct Check {
        std::string name;
        bool pass;
        std::string detail;
      };
      std::vector<Check> checks;
      auto fmt = [](double v) { return io::format_double(v); };

      {  // d = 1 survival against the reflection principle
        WalkConfig cfg;
        cfg.dim = 1;
        cfg.start = {1.0};
        cfg.step = 1e-3;
        cfg.t_max = 1.0;
        cfg.n_paths = 20000;
        cfg.seed = seed;
        const auto c = survival_curve(cfg, threads);
        double worst = 0.0;
        for (std::size_t i = 0; i < c.times.size(); ++i) {
          const double exact = std::erf(1.0 / std::sqrt(2.0 * c.times[i]));
          const double allowance = std::erf((1.0 + 0.5826 * std::sqrt(cfg.step)) / std::sqrt(2.0 * c.times[i])) - exact;
          const double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(c.n_paths));
          const double band = 4.0 * sd + allowance + 1.0 / static_cast<double>(c.n_paths);
          worst = std::max(worst, std::abs(c.survival[i] - exact) / band);
        }
        checks.push_back({"erf-survival-d1", worst <= 1.0, "max normalized gap " + fmt(worst)});
      }
      {  // arcsine law
        McOptions o;
        o.seed = seed;
        o.threads = threads;
        const auto t = occupation_times(1, 1e-3, 20000, o);
        const double ks = ks_distance(t, arcsine_cdf);
        checks.push_back({"arcsine-occupation-d1", ks <= 0.02, "KS " + fmt(ks)});
      }
      {
        const auto r = smallest_eigenvalue(assemble_operator({64, 128, DomainSpec::hemisphere(3)}));
        checks.push_back({"hemisphere-lambda", std::abs(r.lambda - 2.0) <= 0.02, "lambda " + fmt(r.lambda)});
      }
      {
        const auto r = smallest_eigenvalue(assemble_operator({64, 128, DomainSpec::lune(1.5 * std::numbers::pi)}));
        checks.push_back({"lune-lambda", std::abs(r.lambda - 10.0 / 9.0) <= 0.02 * 10.0 / 9.0, "lambda " + fmt(r.lambda)});
      }
      {
        const double p2 = p_from_lambda(4.0 / 9.0, 2);
        const double l3 = lambda_from_p(0.4542, 3);
        const double rt = lambda_from_p(p_from_lambda(0.123, 17), 17);
        const bool ok = std::abs(p2 - 2.0 / 3.0) <= 1e-12 && std::abs(l3 - 0.4542 * 1.4542) <= 1e-12 &&
                        std::abs(rt - 0.123) <= 1e-12 * 0.123;
        checks.push_back({"lambda-p-conversions", ok, "p(4/9,2)=" + fmt(p2) + " lambda(0.4542,3)=" + fmt(l3)});
      }
      bool all = true;
      with_output([&](std::ostream& os) {
        for (const auto& c : checks) {
          os << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << c.detail << '\n';
          all = all && c.pass;
        }
      });
      finish();
      return all ? kExitOk : kExitNumerical;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace orthant_lab::cli
