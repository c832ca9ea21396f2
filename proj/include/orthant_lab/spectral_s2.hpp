#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "orthant_lab/error.hpp"
#include "orthant_lab/sphere_geom.hpp"

namespace orthant_lab {

/// Tensor (theta, phi) grid on S^2 for one of the supported Dirichlet domains.
///
/// Node 0 is the north pole, node 1 + (i-1) n_phi + j sits at
/// (theta_i, phi_j) = (i h_theta, j h_phi) for 1 <= i < n_theta, and the
/// last node is the south pole.
struct GridSpec {
  int n_theta = 64;
  int n_phi = 128;
  DomainSpec domain = DomainSpec::orthant_complement(3);

  double h_theta() const { return std::numbers::pi / n_theta; }
  double h_phi() const { return 2.0 * std::numbers::pi / n_phi; }
  int node_count() const { return 2 + (n_theta - 1) * n_phi; }
  int ring_node(int i, int j) const { return 1 + (i - 1) * n_phi + ((j % n_phi) + n_phi) % n_phi; }
  int south_pole() const { return node_count() - 1; }

  GridSpec refined() const { return {2 * n_theta, 2 * n_phi, domain}; }

  void validate() const {
    if (n_theta < 16) throw InvalidArgument("GridSpec: n_theta must be >= 16");
    if (n_phi < 32) throw InvalidArgument("GridSpec: n_phi must be >= 32");
    if (n_phi % 2 != 0) throw InvalidArgument("GridSpec: n_phi must be even");
    if (domain.dim != 3) throw InvalidArgument("GridSpec: spectral domains live on S^2 (dim 3)");
    switch (domain.tag) {
      case DomainTag::OrthantComplement:
      case DomainTag::Hemisphere:
      case DomainTag::Lune:
        break;
      default:
        throw InvalidArgument("GridSpec: unsupported spectral domain '" + domain.name() + "'");
    }
  }
};

/// Finite-volume Laplace-Beltrami operator: -Delta u = lambda u becomes
/// K u = lambda M u with K the symmetric stiffness matrix and M the diagonal
/// of spherical cell areas. Dirichlet nodes are removed from the unknowns.
struct SphereOperator {
  GridSpec grid;
  Eigen::SparseMatrix<double> full_stiffness;  ///< all nodes, rows sum to zero
  Eigen::VectorXd full_mass;                   ///< cell areas, summing to 4 pi
  std::vector<bool> dirichlet;
  std::vector<int> unknown_of_node;  ///< -1 on Dirichlet nodes
  std::vector<int> node_of_unknown;
  Eigen::SparseMatrix<double> stiffness;  ///< restricted to the unknowns
  Eigen::VectorXd mass;

  /// M^{-1/2} K M^{-1/2} on the unknowns.
  Eigen::SparseMatrix<double> symmetrized() const {
    const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
    return s.asDiagonal() * stiffness * s.asDiagonal();
  }

  /// Expands a vector of unknowns to the full grid, zero on the Dirichlet set.
  Eigen::VectorXd expand(const Eigen::VectorXd& u) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(grid.node_count());
    for (int k = 0; k < static_cast<int>(node_of_unknown.size()); ++k) full[node_of_unknown[k]] = u[k];
    return full;
  }

  /// Area-weighted share of the sphere flagged as Dirichlet.
  double dirichlet_area_fraction() const {
    double area = 0.0;
    for (int v = 0; v < grid.node_count(); ++v)
      if (dirichlet[static_cast<std::size_t>(v)]) area += full_mass[v];
    return area / full_mass.sum();
  }
};

namespace detail {

/// Closed Dirichlet set of the domain, evaluated at a grid node.
inline bool in_dirichlet_set(const GridSpec& g, double theta, double phi, bool pole) {
  constexpr double eps = 1e-12;
  const double x = std::sin(theta) * std::cos(phi);
  const double y = std::sin(theta) * std::sin(phi);
  const double z = std::cos(theta);
  switch (g.domain.tag) {
    case DomainTag::OrthantComplement:
      return x <= eps && y <= eps && z <= eps;
    case DomainTag::Hemisphere:
      return z <= eps;
    case DomainTag::Lune:
      if (pole) return true;
      return !(phi > eps && phi < g.domain.beta - eps);
    default:
      throw InvalidArgument("in_dirichlet_set: unsupported domain");
  }
}

}  // namespace detail

inline SphereOperator assemble_operator(const GridSpec& grid) {
  grid.validate();
  const int nt = grid.n_theta, np = grid.n_phi, nn = grid.node_count();
  const double ht = grid.h_theta(), hp = grid.h_phi();

  SphereOperator op;
  op.grid = grid;
  op.full_mass.resize(nn);
  op.dirichlet.assign(static_cast<std::size_t>(nn), false);

  const double cap = 2.0 * std::numbers::pi * (1.0 - std::cos(0.5 * ht));
  op.full_mass[0] = cap;
  op.full_mass[grid.south_pole()] = cap;
  op.dirichlet[0] = detail::in_dirichlet_set(grid, 0.0, 0.0, true);
  op.dirichlet[static_cast<std::size_t>(grid.south_pole())] =
      detail::in_dirichlet_set(grid, std::numbers::pi, 0.0, true);
  for (int i = 1; i < nt; ++i) {
    const double th = i * ht;
    const double area = 2.0 * hp * std::sin(th) * std::sin(0.5 * ht);
    for (int j = 0; j < np; ++j) {
      const int v = grid.ring_node(i, j);
      op.full_mass[v] = area;
      op.dirichlet[static_cast<std::size_t>(v)] = detail::in_dirichlet_set(grid, th, j * hp, false);
    }
  }

  // Each edge couples two cells through a face: coefficient = face length / node distance.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nn) * 5);
  auto edge = [&](int p, int q, double c) {
    trip.emplace_back(p, p, c);
    trip.emplace_back(q, q, c);
    trip.emplace_back(p, q, -c);
    trip.emplace_back(q, p, -c);
  };
  const double pole_coef = std::sin(0.5 * ht) * hp / ht;
  for (int j = 0; j < np; ++j) {
    edge(0, grid.ring_node(1, j), pole_coef);
    edge(grid.south_pole(), grid.ring_node(nt - 1, j), pole_coef);
  }
  for (int i = 1; i < nt; ++i) {
    const double th = i * ht;
    const double phi_coef = ht / (std::sin(th) * hp);
    const double theta_coef = std::sin(th + 0.5 * ht) * hp / ht;
    for (int j = 0; j < np; ++j) {
      edge(grid.ring_node(i, j), grid.ring_node(i, j + 1), phi_coef);
      if (i + 1 < nt) edge(grid.ring_node(i, j), grid.ring_node(i + 1, j), theta_coef);
    }
  }
  op.full_stiffness.resize(nn, nn);
  op.full_stiffness.setFromTriplets(trip.begin(), trip.end());

  op.unknown_of_node.assign(static_cast<std::size_t>(nn), -1);
  for (int v = 0; v < nn; ++v) {
    if (op.dirichlet[static_cast<std::size_t>(v)]) continue;
    op.unknown_of_node[static_cast<std::size_t>(v)] = static_cast<int>(op.node_of_unknown.size());
    op.node_of_unknown.push_back(v);
  }
  const int nu = static_cast<int>(op.node_of_unknown.size());
  if (nu == 0) throw InvalidArgument("assemble_operator: domain has no interior nodes");

  std::vector<Eigen::Triplet<double>> reduced;
  reduced.reserve(static_cast<std::size_t>(op.full_stiffness.nonZeros()));
  for (int col = 0; col < nn; ++col) {
    const int uc = op.unknown_of_node[static_cast<std::size_t>(col)];
    if (uc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.full_stiffness, col); it; ++it) {
      const int ur = op.unknown_of_node[static_cast<std::size_t>(it.row())];
      if (ur >= 0) reduced.emplace_back(ur, uc, it.value());
    }
  }
  op.stiffness.resize(nu, nu);
  op.stiffness.setFromTriplets(reduced.begin(), reduced.end());
  op.mass.resize(nu);
  for (int k = 0; k < nu; ++k) op.mass[k] = op.full_mass[op.node_of_unknown[static_cast<std::size_t>(k)]];
  return op;
}

struct SpectralResult {
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< ||M^{-1} K u - lambda u||_M / ||u||_M
  GridSpec grid;
  bool extrapolated = false;
  Eigen::VectorXd eigenvector;  ///< full grid, M-normalized, positive inside
};

/// Smallest Dirichlet eigenvalue by inverse iteration (shift 0) in the
/// M-weighted inner product; K is factorized once.
inline SpectralResult smallest_eigenvalue(const SphereOperator& op, double tol = 1e-8,
                                          int max_iterations = 1000) {
  if (!(tol > 0.0)) throw InvalidArgument("smallest_eigenvalue: tol must be > 0");
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(op.stiffness);
  if (solver.info() != Eigen::Success)
    throw NumericalError("smallest_eigenvalue: factorization of the stiffness matrix failed");

  const auto& m = op.mass;
  auto m_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(m.cwiseProduct(v))); };

  Eigen::VectorXd u = Eigen::VectorXd::Ones(m.size());
  u /= m_norm(u);
  SpectralResult res;
  res.grid = op.grid;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd rhs = m.cwiseProduct(u);
    u = solver.solve(rhs);
    u /= m_norm(u);
    const Eigen::VectorXd ku = op.stiffness * u;
    const double lambda = u.dot(ku);
    const Eigen::VectorXd r = ku - lambda * m.cwiseProduct(u);
    residual = std::sqrt(r.dot(r.cwiseQuotient(m)));
    if (residual <= tol * lambda) {
      if (u.sum() < 0.0) u = -u;
      res.lambda = lambda;
      res.iterations = it;
      res.residual = residual;
      res.eigenvector = op.expand(u);
      return res;
    }
  }
  throw ConvergenceError("smallest_eigenvalue: no convergence after " +
                             std::to_string(max_iterations) + " iterations",
                         residual);
}

struct Extrapolation {
  double lambda = 0.0;  ///< lambda_0 of lambda(h) = lambda_0 + c h^q
  double order = 0.0;   ///< q, estimated from the three finest levels
  bool reliable = true;
  std::string warning;
};

/// Richardson extrapolation over results on grids refined by a factor 2.
inline Extrapolation richardson_extrapolate(const std::vector<double>& lambdas) {
  if (lambdas.size() < 3) throw InvalidArgument("richardson_extrapolate: need at least 3 levels");
  const std::size_t n = lambdas.size();
  const double l1 = lambdas[n - 3], l2 = lambdas[n - 2], l3 = lambdas[n - 1];
  const double d12 = l1 - l2, d23 = l2 - l3;
  Extrapolation e;
  if (d23 == 0.0) {
    e.lambda = l3;
    e.order = std::numeric_limits<double>::infinity();
    return e;
  }
  if (!(d12 / d23 > 1.0)) {
    e.lambda = l3;
    e.order = std::numeric_limits<double>::quiet_NaN();
    e.reliable = false;
    e.warning = "extrapolation unreliable: non-monotone or non-contracting sequence";
    return e;
  }
  e.order = std::log2(d12 / d23);
  e.lambda = l3 - d23 / (std::exp2(e.order) - 1.0);
  return e;
}

inline Extrapolation richardson_extrapolate(const std::vector<SpectralResult>& results) {
  std::vector<double> l;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i > 0 && (results[i].grid.n_theta != 2 * results[i - 1].grid.n_theta ||
                  results[i].grid.n_phi != 2 * results[i - 1].grid.n_phi))
      throw InvalidArgument("richardson_extrapolate: grids must refine by a factor 2");
    l.push_back(results[i].lambda);
  }
  return richardson_extrapolate(l);
}

/// Solves on `levels` grids starting from `coarsest`, each refined by 2.
struct SpectralStudy {
  std::vector<SpectralResult> results;
  Extrapolation extrapolation;
};

inline SpectralStudy solve_levels(const GridSpec& coarsest, int levels, double tol = 1e-8) {
  if (levels < 1) throw InvalidArgument("solve_levels: levels must be >= 1");
  SpectralStudy study;
  GridSpec g = coarsest;
  for (int l = 0; l < levels; ++l) {
    study.results.push_back(smallest_eigenvalue(assemble_operator(g), tol));
    g = g.refined();
  }
  if (levels >= 3) {
    study.extrapolation = richardson_extrapolate(study.results);
  } else {
    study.extrapolation.lambda = study.results.back().lambda;
    study.extrapolation.order = std::numeric_limits<double>::quiet_NaN();
    study.extrapolation.reliable = false;
    study.extrapolation.warning = "fewer than 3 levels: no extrapolation";
  }
  return study;
}

}  // namespace orthant_lab
