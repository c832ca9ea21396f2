#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "orthant_lab/eig_bounds.hpp"

namespace ol = orthant_lab;

namespace {

ol::McOptions opts(std::uint64_t seed) {
  ol::McOptions o;
  o.seed = seed;
  return o;
}

// Rayleigh quotient of eta on S^1 by midpoint quadrature in the angle.
double circle_quotient(double a) {
  const ol::CutoffProfile p(a);
  const int n = 2000000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = (i + 0.5) * 2.0 * std::numbers::pi / n;
    const double x[2] = {std::cos(phi), std::sin(phi)};
    const double e = ol::eta(x, p);
    num += ol::grad_norm_sq_eta(x, p);
    den += e * e;
  }
  return num / den;
}

}  // namespace

TEST(Theta, EndpointsAndMidpoint) {
  const ol::CutoffProfile p(0.2);
  EXPECT_EQ(ol::theta(0.0, p), 0.0);
  EXPECT_EQ(ol::theta(0.3, p), 0.0);
  EXPECT_EQ(ol::theta(-0.2, p), 1.0);
  EXPECT_EQ(ol::theta(-0.9, p), 1.0);
  EXPECT_NEAR(ol::theta(-0.1, p), 0.5, 1e-15);
}

TEST(Theta, SlopeBoundedByTwoOverA) {
  for (double a : {1e-4, 0.01, 0.3, 0.9}) {
    const ol::CutoffProfile p(a);
    double peak = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double t = -1.5 * a + 2.0 * a * i / 100000.0;
      peak = std::max(peak, std::abs(ol::theta_prime(t, p)));
    }
    EXPECT_NEAR(peak * a, 1.5, 1e-6);
    EXPECT_LE(peak, 2.0 / a);
  }
}

TEST(Theta, DerivativeMatchesFiniteDifference) {
  const ol::CutoffProfile p(0.1);
  for (double t : {-0.09, -0.05, -0.031, -0.002}) {
    const double h = 1e-7;
    const double fd = (ol::theta(t + h, p) - ol::theta(t - h, p)) / (2 * h);
    EXPECT_NEAR(ol::theta_prime(t, p), fd, 1e-6);
  }
}

TEST(CutoffProfile, RejectsOutOfRangeWidth) {
  EXPECT_THROW(ol::CutoffProfile(0.0), ol::InvalidArgument);
  EXPECT_THROW(ol::CutoffProfile(1.0), ol::InvalidArgument);
  EXPECT_NEAR(ol::CutoffProfile::from_scaling(1.0, 4).width(), 0.125, 1e-15);
}

TEST(Eta, PlateausAndMidpoint) {
  const ol::CutoffProfile p(0.1);
  EXPECT_EQ(ol::eta(ol::SpherePoint::normalized({0.0, 1.0, 2.0}), p), 0.0);
  EXPECT_EQ(ol::eta(ol::SpherePoint::normalized({0.3, -0.5, 0.8}), p), 1.0);
  const double x1 = -0.05;
  const double r = std::sqrt((1.0 - x1 * x1) / 2.0);
  const ol::SpherePoint x({x1, r, r});
  EXPECT_NEAR(ol::eta(x, p), 0.5, 1e-12);
  EXPECT_NEAR(ol::grad_norm_sq_eta(x, p), std::pow(1.5 / 0.1, 2) * (1.0 - x1 * x1), 1e-9);
}

TEST(GradNormSqEta, VanishesOffTheShellAndIsBounded) {
  const ol::CutoffProfile p(0.05);
  EXPECT_EQ(ol::grad_norm_sq_eta(ol::SpherePoint::normalized({0.1, 1.0}), p), 0.0);
  EXPECT_EQ(ol::grad_norm_sq_eta(ol::SpherePoint::normalized({-0.5, 1.0}), p), 0.0);
  ol::Rng rng = ol::make_stream(8, 0);
  for (int i = 0; i < 20000; ++i) {
    const auto x = ol::sample_uniform_sphere(3, rng);
    EXPECT_LE(ol::grad_norm_sq_eta(x, p), 4.0 / (0.05 * 0.05));
  }
}

TEST(GradNormSqEta, MatchesTangentFiniteDifferences) {
  const ol::CutoffProfile p(0.2);
  ol::Rng rng = ol::make_stream(9, 0);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int trial = 0; trial < 4000 && checked < 60; ++trial) {
    const int d = 3 + trial % 5;
    auto x = ol::sample_uniform_sphere(d, rng);
    std::vector<double> c(x.coords().begin(), x.coords().end());
    const std::size_t j = std::min_element(c.begin(), c.end()) - c.begin();
    const double u = -c[j] / p.width();
    if (!(u > 0.05 && u < 0.95)) continue;
    std::vector<double> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 1e-3) continue;

    // Tangential gradient theta'(x_j) (e_j - x_j x).
    const double tp = ol::theta_prime(c[j], p);
    std::vector<double> grad(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) grad[i] = -tp * c[j] * c[i] + (i == j ? tp : 0.0);
    double gsq = 0.0;
    for (double v : grad) gsq += v * v;
    EXPECT_NEAR(ol::grad_norm_sq_eta(x, p), gsq, 1e-9 * gsq);

    for (int dir = 0; dir < 2; ++dir) {
      std::vector<double> v(c.size());
      double dot = 0.0;
      for (auto& vi : v) vi = g(rng);
      for (std::size_t i = 0; i < c.size(); ++i) dot += v[i] * c[i];
      double vn = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        v[i] -= dot * c[i];
        vn += v[i] * v[i];
      }
      vn = std::sqrt(vn);
      for (auto& vi : v) vi /= vn;
      const double h = 1e-6;
      std::vector<double> plus(c), minus(c);
      for (std::size_t i = 0; i < c.size(); ++i) {
        plus[i] += h * v[i];
        minus[i] -= h * v[i];
      }
      const double fd = (ol::eta(ol::SpherePoint::normalized(plus), p) -
                         ol::eta(ol::SpherePoint::normalized(minus), p)) / (2 * h);
      double exact = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) exact += grad[i] * v[i];
      EXPECT_LE(std::abs(fd - exact), 1e-4 * std::max(std::abs(exact), std::sqrt(gsq)));
    }
    ++checked;
  }
  EXPECT_GE(checked, 30);
}

TEST(RayleighUpperBound, CircleAgreesWithQuadrature) {
  const double exact = circle_quotient(0.05);
  const auto r = ol::rayleigh_upper_bound(2, ol::CutoffProfile(0.05), 1000000, opts(10));
  EXPECT_NEAR(r.bound, exact, 4.0 * r.std_error);
  EXPECT_GE(r.bound, 4.0 / 9.0 - 4.0 * r.std_error);
}

TEST(RayleighUpperBound, SignAveragingAgreesWithPlainSampling) {
  for (int d = 2; d <= 8; ++d) {
    const ol::CutoffProfile p(std::pow(double(d), -1.5));
    const auto rb = ol::rayleigh_upper_bound(d, p, 200000, opts(20 + d));
    const auto plain = ol::rayleigh_plain(d, p, 2000000, opts(40 + d));
    EXPECT_LE(std::abs(rb.numerator - plain.numerator),
              4.0 * std::hypot(rb.numerator_stderr, plain.numerator_stderr)) << d;
    EXPECT_LE(std::abs(rb.denominator - plain.denominator),
              4.0 * std::hypot(rb.denominator_stderr, plain.denominator_stderr)) << d;
    // Per-sample spread: the sign-averaged estimator draws ten times fewer samples here.
    EXPECT_LT(rb.std_error * std::sqrt(200000.0), plain.std_error * std::sqrt(2000000.0)) << d;
  }
}

TEST(RayleighUpperBound, StaysAboveYamabeLowerBound) {
  for (int d = 4; d <= 12; ++d) {
    const auto r = ol::rayleigh_upper_bound(d, ol::CutoffProfile::from_scaling(1.0, d), 50000, opts(60 + d));
    EXPECT_GE(r.bound, ol::yamabe_lower_bound(d) - 4.0 * r.std_error) << d;
  }
}

TEST(RayleighUpperBound, NormalizedAtScalingWidthStaysBounded) {
  for (int d = 4; d <= 12; ++d) {
    const auto r = ol::rayleigh_upper_bound(d, ol::CutoffProfile::from_scaling(1.0, d), 50000, opts(80 + d));
    const double ratio = std::ldexp(r.bound, d) / (d * d * d);
    EXPECT_GT(ratio, 0.1) << d;
    EXPECT_LT(ratio, 10.0) << d;
  }
}

TEST(RayleighUpperBound, ThreadCountDoesNotChangeTheEstimate) {
  auto o1 = opts(5), o4 = opts(5);
  o4.threads = 4;
  const ol::CutoffProfile p(0.1);
  EXPECT_EQ(ol::rayleigh_upper_bound(9, p, 40000, o1).bound, ol::rayleigh_upper_bound(9, p, 40000, o4).bound);
}

TEST(RayleighUpperBound, RejectsTooFewSamples) {
  EXPECT_THROW(ol::rayleigh_upper_bound(4, ol::CutoffProfile(0.1), 100, opts(1)), ol::InvalidArgument);
  EXPECT_THROW(ol::rayleigh_upper_bound(1, ol::CutoffProfile(0.1), 100000, opts(1)), ol::InvalidArgument);
}

TEST(FinishRayleigh, ReportsInsufficientSamplesForAVanishingDenominator) {
  ol::detail::PairMoments m;
  for (int i = 0; i < 10000; ++i) m.add(0.0, i == 0 ? 1e-6 : 0.0);
  EXPECT_THROW(ol::detail::finish_rayleigh(5, 0.1, m), ol::InsufficientSamples);
}

TEST(OptimizeCutoff, CircleNeverBeatsTheTrueEigenvalue) {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.01 * std::pow(50.0, i / 10.0));
  const auto c = ol::optimize_cutoff(2, grid, 1000000, opts(3));
  EXPECT_GE(c.estimate.bound, 4.0 / 9.0 - 4.0 * c.estimate.std_error);
  EXPECT_NEAR(c.estimate.bound, circle_quotient(c.a_star), 4.0 * c.estimate.std_error);
  EXPECT_EQ(c.scan.size(), grid.size());
}

TEST(OptimizeCutoff, SingletonGrid) {
  const double grid[] = {0.2};
  const auto c = ol::optimize_cutoff(5, grid, 20000, opts(4));
  EXPECT_EQ(c.a_star, 0.2);
  EXPECT_EQ(c.scan.size(), 1u);
}

TEST(OptimizeCutoff, NeverWorseThanAnyGridPoint) {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(1e-3 * std::pow(300.0, i / 12.0));
  const auto c = ol::optimize_cutoff(6, grid, 50000, opts(5));
  for (const auto& r : c.scan) EXPECT_LE(c.estimate.bound + c.estimate.std_error, r.bound + r.std_error + 1e-15);
  EXPECT_THROW(ol::optimize_cutoff(6, std::vector<double>{}, 50000, opts(5)), ol::InvalidArgument);
}

TEST(DefaultCutoffGrid, ContainsScalingWidth) {
  for (int d : {2, 4, 17}) {
    const auto g = ol::default_cutoff_grid(d);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_NE(std::find(g.begin(), g.end(), std::pow(double(d), -1.5)), g.end());
    EXPECT_NEAR(g.back(), 0.5, 1e-15);
  }
}

TEST(YamabeLowerBound, DimensionFour) {
  const double x = std::pow(7.0 / 8.0, 2.0 / 3.0);
  EXPECT_NEAR(ol::yamabe_lower_bound(4), 3.0 * (1.0 - x) / (4.0 * x), 1e-14);
  EXPECT_NEAR(ol::yamabe_lower_bound(4), 0.0698, 1e-4);
}

TEST(YamabeLowerBound, NormalizedStaysBracketed) {
  for (int dim = 10; dim <= 60; ++dim) {
    const double r = std::ldexp(ol::yamabe_lower_bound(dim), dim) / dim;
    EXPECT_GE(r, 0.1) << dim;
    EXPECT_LE(r, 10.0) << dim;
    const double s = std::ldexp(ol::yamabe_lower_bound_symmetric(dim), dim) / dim;
    EXPECT_NEAR(s / r, 0.5, 0.05) << dim;
  }
}

TEST(YamabeLowerBound, NotApplicableBelowFour) {
  EXPECT_THROW(ol::yamabe_lower_bound(3), ol::InvalidArgument);
  EXPECT_THROW(ol::yamabe_lower_bound_symmetric(2), ol::InvalidArgument);
}

TEST(Conversions, KnownExponents) {
  EXPECT_NEAR(ol::p_from_lambda(4.0 / 9.0, 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ol::lambda_from_p(0.4542, 3), 0.66050, 1e-5);
  EXPECT_NEAR(ol::p_from_lambda(0.0, 1), 1.0, 0.0);
  for (int d = 2; d <= 50; ++d) EXPECT_EQ(ol::p_from_lambda(0.0, d), 0.0);
}

TEST(Conversions, RoundTrip) {
  for (int d = 1; d <= 100; ++d)
    for (double e = -9.0; e <= 3.0; e += 0.25) {
      const double lambda = std::pow(10.0, e);
      // On the line p stays near 1, so p(p - 1) keeps only absolute precision.
      const double tol = d == 1 ? 1e-12 * lambda + 4e-16 : 1e-12 * lambda;
      EXPECT_NEAR(ol::lambda_from_p(ol::p_from_lambda(lambda, d), d), lambda, tol) << d << ' ' << e;
    }
}

TEST(Conversions, RejectNegativeInputs) {
  EXPECT_THROW(ol::p_from_lambda(-1e-3, 3), ol::InvalidArgument);
  EXPECT_THROW(ol::lambda_from_p(-1e-3, 3), ol::InvalidArgument);
  EXPECT_THROW(ol::p_from_lambda(1.0, 0), ol::InvalidArgument);
}

TEST(CorollaryRatio, SmallEigenvalueLimit) {
  // p d / lambda = d / (d - 2) + O(lambda) for small lambda.
  EXPECT_NEAR(ol::corollary_ratio(1e-6, 100), 100.0 / 98.0, 1e-6);
  EXPECT_NEAR(ol::corollary_ratio(1e-9, 20000), 1.0, 2e-4);
}

TEST(CorollaryCheck, FlagsLargeEigenvalues) {
  ol::EigenvalueBounds b;
  b.dim = 12;
  b.lower = 12.0;
  b.upper = 12.0;
  const auto rows = ol::corollary_check(std::span(&b, 1));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].flagged);
  EXPECT_GT(std::abs(rows[0].ratio_lower - 1.0), 0.05);
}

TEST(CorollaryCheck, LowerBoundRatioApproachesDOverDMinusTwo) {
  std::vector<ol::EigenvalueBounds> bs;
  for (int d : {20, 40, 80}) {
    ol::EigenvalueBounds b;
    b.dim = d;
    b.lower = ol::yamabe_lower_bound(d);
    bs.push_back(b);
  }
  for (const auto& r : ol::corollary_check(bs)) {
    EXPECT_NEAR(r.ratio_lower, r.d / (r.d - 2.0), 1e-6);
    EXPECT_TRUE(std::isnan(r.ratio_upper));
  }
}

TEST(ComputeBounds, SandwichAndRatios) {
  for (int d : {4, 7, 11}) {
    const auto b = ol::compute_bounds(d, 40000, opts(100 + d));
    EXPECT_TRUE(b.sandwich_holds()) << d;
    EXPECT_GE(b.lower, 0.0);
    EXPECT_GE(b.upper, 0.0);
    EXPECT_NEAR(b.lower_ratio, std::ldexp(b.lower, d) / d, 1e-12 * b.lower_ratio);
    EXPECT_NEAR(b.upper_ratio, std::ldexp(b.upper, d) / (d * d * d), 1e-12 * b.upper_ratio);
  }
  const auto b3 = ol::compute_bounds(3, 40000, opts(1));
  EXPECT_TRUE(std::isnan(b3.lower));
  EXPECT_GT(b3.upper, 0.66);
}
