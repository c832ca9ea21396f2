// Acceptance suite: one PASS/FAIL line per check, grouped by criterion.
// Usage: orthant_lab_acceptance [c1 ... c8 | all]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "orthant_lab/cli.hpp"
#include "orthant_lab/orthant_lab.hpp"

namespace ol = orthant_lab;

namespace {

struct Outcome {
  std::string name;
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<Outcome> criterion1() {
  const auto t0 = Clock::now();
  ol::WalkConfig cfg;
  cfg.dim = 1;
  cfg.start = {1.0};
  cfg.step = 1e-3;
  cfg.t_max = 1.0;
  cfg.n_paths = 100000;
  cfg.seed = 20240601;
  const auto c = ol::survival_curve(cfg, ol::default_threads());
  const double elapsed = seconds_since(t0);
  const double n = static_cast<double>(c.n_paths);
  double worst = 0.0, worst_t = 0.0;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const double t = c.times[i];
    const double exact = std::erf(1.0 / std::sqrt(2.0 * t));
    const double allowance = std::erf((1.0 + 0.5826 * std::sqrt(cfg.step)) / std::sqrt(2.0 * t)) - exact;
    const double band = 4.0 * std::sqrt(exact * (1.0 - exact) / n) + allowance + 1.0 / n;
    const double gap = std::abs(c.survival[i] - exact) / band;
    if (gap > worst) {
      worst = gap;
      worst_t = t;
    }
  }
  return {{"d1 survival matches erf(1/sqrt(2t)) at every grid point", worst <= 1.0,
           "max |S-erf|/band = " + fmt(worst) + " at t=" + fmt(worst_t) + " over " +
               std::to_string(c.times.size()) + " points"},
          {"d1 oracle run under one minute", elapsed < 60.0, fmt(elapsed) + " s"}};
}

std::vector<Outcome> criterion2() {
  struct Case {
    int d;
    double p, tol;
  };
  std::vector<Outcome> out;
  for (const Case c : {Case{1, 1.0, 0.05}, Case{2, 2.0 / 3.0, 0.05}, Case{3, 0.4542, 0.06}}) {
    const auto t0 = Clock::now();
    ol::WalkConfig cfg;
    cfg.dim = c.d;
    cfg.step = 0.25;
    cfg.t_max = 1e3;
    cfg.n_paths = 100000;
    cfg.seed = 7000 + static_cast<std::uint64_t>(c.d);
    const auto fit = ol::fit_tail_exponent(ol::survival_curve(cfg, ol::default_threads()));
    out.push_back({"p_hat(" + std::to_string(c.d) + ") = " + fmt(c.p) + " +- " + fmt(c.tol),
                   std::abs(fit.p_hat - c.p) <= c.tol,
                   "p_hat = " + fmt(fit.p_hat) + " +- " + fmt(fit.p_stderr) + ", " + fmt(seconds_since(t0)) + " s"});
  }
  return out;
}

std::vector<Outcome> criterion3() {
  std::vector<Outcome> out;
  const auto t0 = Clock::now();
  const auto study = ol::solve_levels({32, 64, ol::DomainSpec::orthant_complement(3)}, 4);
  std::string lam;
  for (const auto& r : study.results) lam += fmt(r.lambda) + " ";
  out.push_back({"extrapolated lambda_1(3) = 0.660 +- 0.03",
                 std::abs(study.extrapolation.lambda - 0.660) <= 0.03 && study.extrapolation.reliable,
                 "levels " + lam + "-> " + fmt(study.extrapolation.lambda) + " (q = " +
                     fmt(study.extrapolation.order) + ", " + fmt(seconds_since(t0)) + " s)"});

  auto timed = [&](const ol::DomainSpec& dom, double target, double rel, const std::string& label) {
    const auto s = Clock::now();
    const auto r = ol::smallest_eigenvalue(ol::assemble_operator({256, 512, dom}));
    const double dt = seconds_since(s);
    out.push_back({label, std::abs(r.lambda - target) <= rel * target,
                   "lambda = " + fmt(r.lambda) + " at 256x512, " + fmt(dt) + " s"});
    out.push_back({label + ": solve under 2 minutes at 256x512", dt < 120.0, fmt(dt) + " s"});
  };
  timed(ol::DomainSpec::hemisphere(3), 2.0, 0.01, "hemisphere lambda = 2 +- 1%");
  timed(ol::DomainSpec::lune(1.5 * std::numbers::pi), 10.0 / 9.0, 0.02, "lune(3pi/2) lambda = 10/9 +- 2%");
  const auto s = Clock::now();
  const auto r = ol::smallest_eigenvalue(ol::assemble_operator({256, 512, ol::DomainSpec::orthant_complement(3)}));
  const double dt = seconds_since(s);
  out.push_back({"U_3 solve under 2 minutes at 256x512", dt < 120.0,
                 "lambda = " + fmt(r.lambda) + ", " + fmt(dt) + " s"});
  return out;
}

std::vector<Outcome> criterion4() {
  std::vector<Outcome> out;
  const std::int64_t samples = 100000;
  std::vector<ol::EigenvalueBounds> all;
  for (int d = 4; d <= 30; ++d) {
    ol::McOptions o;
    o.seed = ol::splitmix64(900 + static_cast<std::uint64_t>(d));
    o.threads = ol::default_threads();
    all.push_back(ol::compute_bounds(d, samples, o));
  }

  bool sandwich = true;
  std::string worst;
  for (const auto& b : all) {
    if (b.dim > 12) break;
    if (!b.sandwich_holds()) {
      sandwich = false;
      worst += " d=" + std::to_string(b.dim);
    }
  }
  out.push_back({"yamabe_lower <= rayleigh_upper + 4 stderr for d in [4,12]", sandwich,
                 sandwich ? "all 9 dimensions" : "violated at" + worst});

  ol::WalkConfig cfg;
  cfg.dim = 4;
  cfg.step = 1.0;
  cfg.t_max = 1e3;
  cfg.n_paths = 20000;
  cfg.seed = 4444;
  const auto fit = ol::fit_tail_exponent(ol::survival_curve(cfg, ol::default_threads()));
  const double lower4 = all.front().lower;
  out.push_back({"yamabe_lower(4) <= lambda_hat from MC exponent at d=4",
                 lower4 <= fit.lambda_hat + 4.0 * fit.lambda_stderr,
                 fmt(lower4) + " <= " + fmt(fit.lambda_hat) + " +- " + fmt(fit.lambda_stderr)});

  double lo_min = INFINITY, lo_max = 0.0, up_min = INFINITY, up_max = 0.0;
  for (const auto& b : all) {
    lo_min = std::min(lo_min, b.lower_ratio);
    lo_max = std::max(lo_max, b.lower_ratio);
    up_min = std::min(up_min, b.upper_ratio);
    up_max = std::max(up_max, b.upper_ratio);
  }
  const bool lo_ok = std::isfinite(lo_min) && std::isfinite(lo_max) && lo_min > 0.0;
  const bool up_ok = std::isfinite(up_min) && std::isfinite(up_max) && up_min > 0.0;
  out.push_back({"yamabe_lower 2^d/d stays in a finite positive bracket over d in [4,30]", lo_ok,
                 "range [" + fmt(lo_min) + ", " + fmt(lo_max) + "]"});
  out.push_back({"rayleigh_upper 2^d/d^3 stays in a finite positive bracket over d in [4,30]", up_ok,
                 "range [" + fmt(up_min) + ", " + fmt(up_max) + "]"});
  return out;
}

std::vector<Outcome> criterion5() {
  std::vector<Outcome> out;
  std::string table;
  for (int d : {4, 8, 12, 16, 20, 30}) {
    const double lambda = ol::yamabe_lower_bound(d);
    table += " d=" + std::to_string(d) + ":" + fmt(ol::corollary_ratio(lambda, d));
  }
  const double l20 = ol::yamabe_lower_bound(20);
  const double r20 = ol::corollary_ratio(l20, 20);
  out.push_back({"p_from_lambda(yamabe_lower(d), d) d / yamabe_lower(d) within 1e-2 of 1 by d = 20",
                 std::abs(r20 - 1.0) <= 1e-2, "ratios" + table});
  return out;
}

std::vector<Outcome> criterion6() {
  std::vector<Outcome> out;
  const auto rep = ol::lemma1_report(25, 1.6);
  bool finite = true;
  for (const auto& r : rep.rows) finite = finite && std::isfinite(r.ratio) && r.ratio > 0.0;
  const auto ratio_at = [&](int d) {
    for (const auto& r : rep.rows)
      if (r.d == d) return r.ratio;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double early = ratio_at(13) - ratio_at(3);
  const double late = ratio_at(25) - ratio_at(15);
  out.push_back({"recursion_bound(d,d,d^-1.6) 2^d bounded over d <= 25", finite && late < early,
                 "max " + fmt(rep.max_ratio) + " at d=" + std::to_string(rep.argmax_d) + ", growth d3..13 " +
                     fmt(early) + " vs d15..25 " + fmt(late)});

  ol::McOptions o;
  o.threads = ol::default_threads();
  double worst_z = -INFINITY;
  int cells = 0;
  std::uint64_t stream = 0;
  for (int d : {3, 5, 8, 10})
    for (int k : {1, (d + 1) / 2, d})
      for (double a : {0.05, 0.1, 0.2}) {
        o.seed = 6000 + stream++;
        const auto dom = k == d ? ol::DomainSpec::sigma_slab(d, a) : ol::DomainSpec::v_slab(k, d, a);
        const auto est = ol::estimate_fraction(dom, 1000000, o);
        const double b = ol::recursion_bound(k, d, a).bound_fraction;
        worst_z = std::max(worst_z, (est.fraction - b) / est.std_error);
        ++cells;
      }
  out.push_back({"recursion bound dominates MC volume on a (k,d,a) grid within 4 stderr", worst_z <= 4.0,
                 std::to_string(cells) + " cells, max (mc - bound)/stderr = " + fmt(worst_z)});

  double worst = 0.0;
  for (int d = 1; d <= 12; ++d) {
    o.seed = 6100 + static_cast<std::uint64_t>(d);
    const auto est = ol::estimate_fraction(ol::DomainSpec::sigma_slab(d, 0.0), 1000000, o);
    const double exact = std::ldexp(1.0, -d);
    const double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(est.n));
    worst = std::max(worst, std::abs(est.fraction - exact) / sd);
  }
  out.push_back({"MC fraction of Sigma_d(0) equals 2^-d within 4 stderr for d <= 12", worst <= 4.0,
                 "max |z| = " + fmt(worst)});
  return out;
}

std::vector<Outcome> criterion7() {
  std::vector<Outcome> out;
  ol::McOptions o;
  o.threads = ol::default_threads();
  o.seed = 7777;
  const auto t0 = Clock::now();
  const auto t1 = ol::occupation_times(1, 1e-3, 100000, o);
  const double ks = ol::ks_distance(t1, ol::arcsine_cdf);
  out.push_back({"d1 occupation KS to arcsine <= 0.01", ks <= 0.01,
                 "KS = " + fmt(ks) + " (1e5 samples, h=1e-3, " + fmt(seconds_since(t0)) + " s)"});

  for (int d : {2, 3}) {
    ol::WalkConfig cfg;
    cfg.dim = d;
    cfg.step = 1.0;
    cfg.t_max = 1e3;
    cfg.n_paths = 20000;
    cfg.seed = 7100 + static_cast<std::uint64_t>(d);
    const double p = ol::fit_tail_exponent(ol::survival_curve(cfg, o.threads)).p_hat;
    o.seed = 7200 + static_cast<std::uint64_t>(d);
    auto samples = ol::occupation_times(d, 1e-3, 20000, o);
    std::sort(samples.begin(), samples.end());
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i <= 20; ++i) {
      const double t = std::pow(10.0, -3.0 + 2.0 * i / 20.0);
      const double r = ol::empirical_cdf(samples, t) / std::pow(t, p / 2.0);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    out.push_back({"d" + std::to_string(d) + " P(T<=t)/t^(p/2) within a factor-10 band on [1e-3,1e-1]",
                   lo > 0.0 && hi / lo <= 10.0,
                   "p_hat = " + fmt(p) + ", ratio range [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(hi / lo)});
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::vector<Outcome> criterion8() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("orthant_lab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Job {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> sidecars;
  };
  const std::vector<Job> jobs{
      {"simulate", {"simulate", "--dim", "3", "--paths", "4000", "--step", "1"}, {".fit.json"}},
      {"simulate-render", {"simulate", "--dim", "2", "--model", "lattice", "--render", "3", "--tmax", "50"}, {}},
      {"volume", {"volume", "--domain", "sigma-slab", "--dims", "3..6", "--a", "0.1,0.2", "--samples", "200000"}, {}},
      {"volume-lemma1", {"volume", "--lemma1", "--dmax", "12"}, {}},
      {"bounds", {"bounds", "--dims", "4..7", "--samples", "20000"}, {}},
      {"spectral", {"spectral", "--ntheta", "16", "--nphi", "32", "--levels", "3"}, {}},
      {"report", {"report", "--dims", "2..5", "--paths", "2000", "--tmax", "200", "--samples", "20000", "--levels", "3"}, {".json"}},
      {"selfcheck", {"selfcheck"}, {}},
  };
  std::vector<Outcome> out;
  for (const auto& job : jobs) {
    const fs::path first = dir / (job.name + ".a.out");
    const fs::path second = dir / (job.name + ".b.out");
    const fs::path third = dir / (job.name + ".c.out");
    std::ostringstream sink, errs;
    auto args = job.args;
    args.insert(args.end(), {"--threads", "1", "--out", first.string()});
    int rc = ol::cli::run(args, sink, errs);
    const int rc_replay = ol::cli::run({"replay", first.string() + ".manifest.json", "--threads", "1", "--out", second.string()}, sink, errs);
    const int rc_threads = ol::cli::run({"replay", first.string() + ".manifest.json", "--threads", "4", "--out", third.string()}, sink, errs);
    auto sidecar_path = [](const fs::path& p, const std::string& s) {
      return s == ".json" ? fs::path(ol::cli::detail::with_extension(p.string(), s)) : fs::path(p.string() + s);
    };
    bool same = rc == rc_replay && rc == rc_threads && rc != ol::cli::kExitUsage;
    const std::string a = slurp(first);
    same = same && !a.empty() && a == slurp(second) && a == slurp(third);
    for (const auto& s : job.sidecars) {
      const std::string sa = slurp(sidecar_path(first, s));
      same = same && !sa.empty() && sa == slurp(sidecar_path(second, s)) && sa == slurp(sidecar_path(third, s));
    }
    out.push_back({job.name + " output byte-identical under replay and 1 vs 4 threads", same,
                   "exit " + std::to_string(rc) + "/" + std::to_string(rc_replay) + "/" + std::to_string(rc_threads) +
                       ", " + std::to_string(a.size()) + " bytes" + (errs.str().empty() ? "" : ", stderr: " + errs.str().substr(0, 200))});
  }
  fs::remove_all(dir);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<std::vector<Outcome>()>> suite{
      {"c1", criterion1}, {"c2", criterion2}, {"c3", criterion3}, {"c4", criterion4},
      {"c5", criterion5}, {"c6", criterion6}, {"c7", criterion7}, {"c8", criterion8}};

  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty() || (wanted.size() == 1 && wanted[0] == "all")) {
    wanted.clear();
    for (const auto& [k, v] : suite) wanted.push_back(k);
  }
  bool all_pass = true;
  for (const auto& key : wanted) {
    const auto it = suite.find(key);
    if (it == suite.end()) {
      std::cerr << "unknown criterion '" << key << "'\n";
      return 2;
    }
    std::vector<Outcome> results;
    try {
      results = it->second();
    } catch (const std::exception& e) {
      results.push_back({"criterion raised an exception", false, e.what()});
    }
    for (const auto& r : results) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << key << ' ' << r.name << " [" << r.detail << "]\n" << std::flush;
      all_pass = all_pass && r.pass;
    }
  }
  return all_pass ? 0 : 1;
}
