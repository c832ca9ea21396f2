#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orthant_lab/error.hpp"
#include "orthant_lab/random.hpp"

namespace orthant_lab {

/// Unit vector on S^{d-1}.
class SpherePoint {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Takes ownership of coordinates that already have unit norm.
  explicit SpherePoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw InvalidArgument("SpherePoint: dimension must be >= 1");
    if (std::abs(norm(coords_) - 1.0) > kNormTolerance)
      throw InvalidArgument("SpherePoint: coordinates are not unit norm");
  }

  /// Normalizes an arbitrary nonzero vector onto the sphere.
  static SpherePoint normalized(std::vector<double> v) {
    const double r = norm(v);
    if (!(r > 0.0) || !std::isfinite(r))
      throw InvalidArgument("SpherePoint: cannot normalize a zero or non-finite vector");
    for (double& x : v) x /= r;
    return SpherePoint(std::move(v));
  }

  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const noexcept { return coords_; }

  static double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }

 private:
  std::vector<double> coords_;
};

enum class DomainTag { OrthantComplement, NegativeOrthant, SigmaSlab, VSlab, Hemisphere, Lune };

/// A spherical subdomain of S^{dim-1}.
///
/// Only the parameters demanded by the tag are meaningful: `a` for the slabs,
/// `k` for VSlab, `beta` for Lune. Build through the named factories.
struct DomainSpec {
  DomainTag tag = DomainTag::OrthantComplement;
  int dim = 1;
  double a = 0.0;
  int k = 0;
  double beta = 0.0;

  static DomainSpec orthant_complement(int d) { return checked({DomainTag::OrthantComplement, d}); }
  static DomainSpec negative_orthant(int d) { return checked({DomainTag::NegativeOrthant, d}); }
  /// [-a,1]^d intersected with the sphere.
  static DomainSpec sigma_slab(int d, double a) { return checked({DomainTag::SigmaSlab, d, a}); }
  /// ([-a,1]^k x [0,1]^{d-k}) intersected with the sphere.
  static DomainSpec v_slab(int k, int d, double a) { return checked({DomainTag::VSlab, d, a, k}); }
  static DomainSpec hemisphere(int d) { return checked({DomainTag::Hemisphere, d}); }
  /// Azimuth of (x_1, x_2) in (0, beta); the axis x_1 = x_2 = 0 is excluded.
  static DomainSpec lune(double beta, int d = 3) {
    return checked({DomainTag::Lune, d, 0.0, 0, beta});
  }

  std::string name() const {
    switch (tag) {
      case DomainTag::OrthantComplement: return "orthant-complement";
      case DomainTag::NegativeOrthant: return "negative-orthant";
      case DomainTag::SigmaSlab: return "sigma-slab";
      case DomainTag::VSlab: return "v-slab";
      case DomainTag::Hemisphere: return "hemisphere";
      case DomainTag::Lune: return "lune";
    }
    return "unknown";
  }

  void validate() const {
    if (dim < 1) throw InvalidArgument("DomainSpec: invalid dimension " + std::to_string(dim));
    const bool slab = tag == DomainTag::SigmaSlab || tag == DomainTag::VSlab;
    if (slab && !(a >= 0.0 && a <= 1.0))
      throw InvalidArgument("DomainSpec: slab parameter a must lie in [0,1]");
    if (!slab && a != 0.0) throw InvalidArgument("DomainSpec: a given for a non-slab domain");
    if (tag == DomainTag::VSlab && (k < 0 || k > dim))
      throw InvalidArgument("DomainSpec: k must lie in [0, dim]");
    if (tag != DomainTag::VSlab && k != 0)
      throw InvalidArgument("DomainSpec: k given for a non-VSlab domain");
    if (tag == DomainTag::Lune) {
      if (dim < 2) throw InvalidArgument("DomainSpec: lune needs dim >= 2");
      if (!(beta > 0.0 && beta <= 2.0 * std::numbers::pi))
        throw InvalidArgument("DomainSpec: lune angle must lie in (0, 2pi]");
    } else if (beta != 0.0) {
      throw InvalidArgument("DomainSpec: beta given for a non-lune domain");
    }
  }

 private:
  static DomainSpec checked(DomainSpec s) {
    s.validate();
    return s;
  }
};

/// Fills `out` with a uniform point of S^{out.size()-1} (normalized Gaussian vector).
inline void sample_uniform_sphere(std::span<double> out, Rng& rng) {
  std::normal_distribution<double> gauss;
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& x : out) {
      x = gauss(rng);
      r2 += x * x;
    }
  } while (!(r2 > 0.0));
  const double inv = 1.0 / std::sqrt(r2);
  for (double& x : out) x *= inv;
}

inline SpherePoint sample_uniform_sphere(int d, Rng& rng) {
  if (d < 1) throw InvalidArgument("sample_uniform_sphere: invalid dimension " + std::to_string(d));
  std::vector<double> v(static_cast<std::size_t>(d));
  sample_uniform_sphere(std::span<double>(v), rng);
  return SpherePoint::normalized(std::move(v));
}

/// Membership test on raw coordinates; the caller guarantees x.size() == domain.dim.
///
/// A point with a zero coordinate and all others <= 0 is not in the open
/// negative orthant, hence belongs to the orthant complement.
inline bool contains_unchecked(const DomainSpec& domain, std::span<const double> x) {
  switch (domain.tag) {
    case DomainTag::OrthantComplement:
      for (double v : x)
        if (!(v < 0.0)) return true;
      return false;
    case DomainTag::NegativeOrthant:
      for (double v : x)
        if (!(v < 0.0)) return false;
      return true;
    case DomainTag::SigmaSlab:
      for (double v : x)
        if (v < -domain.a) return false;
      return true;
    case DomainTag::VSlab:
      for (int i = 0; i < domain.dim; ++i) {
        const double lo = i < domain.k ? -domain.a : 0.0;
        if (x[static_cast<std::size_t>(i)] < lo) return false;
      }
      return true;
    case DomainTag::Hemisphere:
      return x.back() > 0.0;
    case DomainTag::Lune: {
      if (x[0] == 0.0 && x[1] == 0.0) return false;
      double phi = std::atan2(x[1], x[0]);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      return phi > 0.0 && phi < domain.beta;
    }
  }
  return false;
}

inline bool contains(const DomainSpec& domain, std::span<const double> x) {
  if (static_cast<int>(x.size()) != domain.dim)
    throw InvalidArgument("contains: point dimension " + std::to_string(x.size()) +
                          " does not match domain dimension " + std::to_string(domain.dim));
  return contains_unchecked(domain, x);
}

inline bool contains(const DomainSpec& domain, const SpherePoint& x) {
  return contains(domain, x.coords());
}

/// log of omega_d = |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2).
inline double log_sphere_area(int d) {
  if (d < 0) throw InvalidArgument("sphere_area: negative dimension");
  const double h = 0.5 * (d + 1);
  return std::log(2.0) + h * std::log(std::numbers::pi) - std::lgamma(h);
}

/// Surface measure of the unit sphere S^d in R^{d+1}.
inline double sphere_area(int d) { return std::exp(log_sphere_area(d)); }

/// omega_{d-1} / omega_d, evaluated in log space.
inline double sphere_area_ratio(int d) {
  return std::exp(log_sphere_area(d - 1) - log_sphere_area(d));
}

/// Volume fraction of the orthant complement U_{d+1} inside S^d: the value
/// implied by sign symmetry next to the shifted constant 1 - 2^{-d}.
struct ComplementVolumeComparison {
  int d = 0;
  double symmetric = 0.0;
  double shifted = 0.0;
};

inline ComplementVolumeComparison compare_complement_volume(int d) {
  if (d < 1) throw InvalidArgument("compare_complement_volume: d must be >= 1");
  return {d, 1.0 - std::ldexp(1.0, -(d + 1)), 1.0 - std::ldexp(1.0, -d)};
}

}  // namespace orthant_lab
