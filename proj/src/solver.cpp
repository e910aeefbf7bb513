#include "freqlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

namespace freqlab {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::manufactured_A:
      return "manufactured-A";
    case Provenance::manufactured_B:
      return "manufactured-B";
    case Provenance::picard:
      return "picard";
  }
  return "?";
}

std::size_t SolutionExpansion::index_of(int ell, int sector) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].degree() == ell && modes[i].sector() == sector) return i;
  throw SelectionError("mode (l=" + std::to_string(ell) + ", j=" + std::to_string(sector) +
                       ") is not part of the expansion");
}

std::size_t SolutionExpansion::index_of(int ell) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].degree() == ell) return i;
  throw SelectionError("degree " + std::to_string(ell) + " is not part of the expansion");
}

std::vector<int> SolutionExpansion::sectors() const {
  std::vector<int> out;
  for (const auto& m : modes)
    if (std::find(out.begin(), out.end(), m.sector()) == out.end()) out.push_back(m.sector());
  return out;
}

std::vector<std::size_t> SolutionExpansion::sector_indices(int sector) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].sector() == sector) out.push_back(i);
  return out;
}

bool SolutionExpansion::is_trivial(double floor) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (phi[i].sup_norm() > floor || phi_tilde[i].sup_norm() > floor) return false;
  return true;
}

SolutionExpansion SolutionExpansion::scaled(double c) const {
  SolutionExpansion out = *this;
  for (auto& f : out.phi) f = f.scaled(c);
  for (auto& f : out.phi_tilde) f = f.scaled(c);
  return out;
}

namespace {

// Sector ladders covering the requested (sector, degree) pairs.
SolutionExpansion ladder_expansion(const GridPtr& grid, int dimension,
                                   const std::map<int, int>& top_degree) {
  SolutionExpansion e;
  e.dimension = dimension;
  const PolarQuadrature quad(dimension);
  for (const auto& [sector, top] : top_degree) {
    for (int l : sector_degrees(sector, top)) {
      e.modes.push_back(build_mode(dimension, l, sector, quad));
      e.phi.push_back(RadialFunction::zero(grid));
      e.phi_tilde.push_back(RadialFunction::zero(grid));
    }
  }
  return e;
}

int default_sector(int ell, std::optional<int> sector) {
  const int j = sector.value_or(ell % 2);
  if (j < 0 || j > ell || (ell - j) % 2 != 0)
    throw SelectionError("antisymmetric mode excluded: degree " + std::to_string(ell) +
                         " is not in sector " + std::to_string(j));
  return j;
}

}  // namespace

SolutionExpansion manufactured_A(const GridPtr& grid, int dimension, int ell, double amplitude,
                                 std::optional<int> sector) {
  const int j = default_sector(ell, sector);
  auto e = ladder_expansion(grid, dimension, {{j, ell}});
  e.provenance = Provenance::manufactured_A;
  const auto i = e.index_of(ell, j);
  e.phi[i] = RadialFunction::from_monomials(grid, {{amplitude, static_cast<double>(ell)}});
  e.phi[i].vanishing_order_hint = ell;
  return e;
}

SolutionExpansion manufactured_B(const GridPtr& grid, int dimension, int k, double v_amplitude,
                                 std::optional<HarmonicAddon> addon, std::optional<int> sector) {
  if (dimension < kMinDimension) throw ConfigurationError("dimension must exceed 3");
  const int j = default_sector(k, sector);
  std::map<int, int> top{{j, k}};
  int addon_sector = j;
  if (addon) {
    if (addon->ell < 0) throw SelectionError("addon degree must be non-negative");
    addon_sector = (addon->ell >= j && (addon->ell - j) % 2 == 0) ? j : addon->ell % 2;
    top[addon_sector] = std::max(top.count(addon_sector) ? top[addon_sector] : addon_sector, addon->ell);
  }
  auto e = ladder_expansion(grid, dimension, top);
  e.provenance = Provenance::manufactured_B;
  const double a = v_amplitude;
  const double c = a / (2.0 * (2.0 * k + dimension + 1.0));
  const auto i = e.index_of(k, j);
  e.phi_tilde[i] = RadialFunction::from_monomials(grid, {{a, static_cast<double>(k)}});
  e.phi[i] = RadialFunction::from_monomials(grid, {{c, k + 2.0}});
  if (addon) {
    const auto m = e.index_of(addon->ell, addon_sector);
    e.phi[m] = e.phi[m] + RadialFunction::from_monomials(
                              grid, {{addon->amplitude, static_cast<double>(addon->ell)}});
  }
  return e;
}

double coupling_threshold(int dimension, int sector, double fraction) {
  return fraction * (dimension + 2.0 * sector - 1.0);
}

namespace {

double coefficient_delta(const SolutionExpansion& a, const SolutionExpansion& b) {
  double diff = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t n = 0; n < a.phi[i].size(); ++n) {
      diff = std::max(diff, std::abs(a.phi[i][n] - b.phi[i][n]));
      diff = std::max(diff, std::abs(a.phi_tilde[i][n] - b.phi_tilde[i][n]));
    }
    scale = std::max({scale, b.phi[i].sup_norm(), b.phi_tilde[i].sup_norm()});
  }
  return diff / scale;
}

BoundaryDatum datum_for(const std::map<int, BoundaryDatum>& boundary, int ell) {
  const auto it = boundary.find(ell);
  return it == boundary.end() ? BoundaryDatum{} : it->second;
}

SolutionExpansion blend(const SolutionExpansion& fresh, const SolutionExpansion& old, double w) {
  SolutionExpansion out = fresh;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.phi[i] = fresh.phi[i].scaled(w) + old.phi[i].scaled(1.0 - w);
    out.phi_tilde[i] = fresh.phi_tilde[i].scaled(w) + old.phi_tilde[i].scaled(1.0 - w);
  }
  return out;
}

}  // namespace

SolutionExpansion picard_sweep(const SolutionExpansion& current,
                               const std::map<int, BoundaryDatum>& boundary) {
  SolutionExpansion next = current;
  const int N = current.dimension;
  for (int sector : current.sectors()) {
    const auto idx = current.sector_indices(sector);
    std::vector<HalfSphereMode> modes;
    std::vector<RadialFunction> phis;
    for (auto i : idx) {
      modes.push_back(current.modes[i]);
      phis.push_back(current.phi[i]);
    }
    const auto zeta = zeta_functions(modes, phis, current.potential);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto i = idx[k];
      const int ell = current.modes[i].degree();
      const auto datum = datum_for(boundary, ell);
      next.phi_tilde[i] = solve_branch(zeta[k], datum.q, ell, N).phi;
      next.phi[i] = solve_branch(next.phi_tilde[i].scaled(-1.0), datum.p, ell, N).phi;
    }
  }
  return next;
}

std::pair<SolutionExpansion, PicardReport> picard_solve(const PicardProblem& problem,
                                                        const PicardOptions& options) {
  if (!problem.grid) throw ConfigurationError("picard_solve needs a grid");
  if (!(options.tol > 0.0)) throw ConfigurationError("tolerance must be positive");
  if (options.max_iter < 1) throw ConfigurationError("max_iter must be positive");
  const int N = problem.dimension;
  const int j = problem.sector;
  const auto degrees = sector_degrees(j, problem.l_max);
  for (const auto& [ell, datum] : problem.boundary)
    if (std::find(degrees.begin(), degrees.end(), ell) == degrees.end())
      throw SelectionError("boundary datum for degree " + std::to_string(ell) +
                           " lies outside the sector ladder (antisymmetric or truncated mode)");

  const double R = problem.grid->radius();
  const double coupling = problem.potential.sup_norm(R) * R;
  const double threshold = coupling_threshold(N, j, options.coupling_fraction);
  if (!(coupling < threshold))
    throw DomainError("coupling ||h||R = " + std::to_string(coupling) +
                      " exceeds the admissible bound " + std::to_string(threshold));

  auto current = ladder_expansion(problem.grid, N, {{j, problem.l_max}});
  current.provenance = Provenance::picard;
  current.potential = problem.potential;

  // Start from the homogeneous solutions (g = 0).
  for (std::size_t i = 0; i < current.size(); ++i) {
    const int ell = current.modes[i].degree();
    const auto datum = datum_for(problem.boundary, ell);
    current.phi_tilde[i] = solve_branch(RadialFunction::zero(problem.grid), datum.q, ell, N).phi;
    current.phi[i] =
        solve_branch(current.phi_tilde[i].scaled(-1.0), datum.p, ell, N).phi;
  }

  PicardReport report;
  double previous = -1.0;
  bool damp = false;
  for (int it = 1; it <= options.max_iter; ++it) {
    auto next = picard_sweep(current, problem.boundary);
    if (damp) next = blend(next, current, options.damping);
    const double delta = coefficient_delta(next, current);
    if (previous > 0.0) {
      const double rate = delta / previous;
      report.contraction_estimates.push_back(rate);
      if (rate > 0.9 && options.damping > 0.0 && options.damping < 1.0 && !damp) {
        damp = true;
        report.damped = true;
      }
    }
    previous = delta;
    current = std::move(next);
    report.iterations = it;
    report.final_delta = delta;
    if (delta < options.tol) {
      report.converged = true;
      return {std::move(current), std::move(report)};
    }
  }
  throw ConvergenceError("Picard iteration did not converge in " +
                             std::to_string(options.max_iter) + " iterations (delta " +
                             std::to_string(report.final_delta) + ")",
                         report);
}

std::vector<ModeResidual> residual(const SolutionExpansion& expansion) {
  std::vector<ModeResidual> out;
  const auto& grid = expansion.grid();
  const std::size_t n = grid.size();
  const int N = expansion.dimension;

  auto ode_residual = [&](const RadialFunction& f, const std::vector<double>& forcing,
                          double lambda) {
    const auto d2 = f.second_derivative_samples();
    std::vector<double> d1(n);
    if (f.has_derivative()) {
      std::copy(f.derivatives().begin(), f.derivatives().end(), d1.begin());
    } else {
      const auto ds = log_derivative(grid, f.values());
      for (std::size_t i = 0; i < n; ++i) d1[i] = ds[i] / grid.r(i);
    }
    double worst = 0.0;
    for (std::size_t i = 4; i + 4 < n; ++i) {
      const double r = grid.r(i);
      const double a = -d2[i];
      const double b = -N * d1[i] / r;
      const double c = lambda * f[i] / (r * r);
      const double g = forcing[i];
      const double scale = std::abs(a) + std::abs(b) + std::abs(c) + std::abs(g);
      if (scale == 0.0) continue;
      worst = std::max(worst, std::abs(a + b + c - g) / scale);
    }
    return worst;
  };

  for (int sector : expansion.sectors()) {
    const auto idx = expansion.sector_indices(sector);
    std::vector<HalfSphereMode> modes;
    std::vector<RadialFunction> phis;
    for (auto i : idx) {
      modes.push_back(expansion.modes[i]);
      phis.push_back(expansion.phi[i]);
    }
    const auto zeta = zeta_functions(modes, phis, expansion.potential);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto i = idx[k];
      const double lambda = expansion.modes[i].eigenvalue();
      std::vector<double> minus_v(n);
      for (std::size_t m = 0; m < n; ++m) minus_v[m] = -expansion.phi_tilde[i][m];
      const std::vector<double> z(zeta[k].values().begin(), zeta[k].values().end());
      out.push_back({expansion.modes[i].degree(), sector,
                     ode_residual(expansion.phi[i], minus_v, lambda),
                     ode_residual(expansion.phi_tilde[i], z, lambda)});
    }
  }
  return out;
}

double max_residual(const SolutionExpansion& expansion) {
  double worst = 0.0;
  for (const auto& r : residual(expansion)) worst = std::max({worst, r.u, r.v});
  return worst;
}

void write_solution_csv(std::ostream& out, const SolutionExpansion& expansion) {
  out << "r";
  for (const auto& m : expansion.modes)
    out << ",phi_j" << m.sector() << "_l" << m.degree() << ",phit_j" << m.sector() << "_l"
        << m.degree();
  out << '\n';
  char buf[32];
  const auto& grid = expansion.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid.r(i));
    out << buf;
    for (std::size_t k = 0; k < expansion.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", expansion.phi[k][i]);
      out << buf;
      std::snprintf(buf, sizeof buf, ",%.17g", expansion.phi_tilde[k][i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace freqlab
