#pragma once

// Truncated sector expansions
//
//   U = sum_l phi_l(r) Y_l(theta),  V = sum_l phit_l(r) Y_l(theta)
//
// of solutions of  Delta U = V,  Delta V = 0  in B_R^+ with
// dU/dnu = 0 and dV/dnu = h u on the flat boundary, h radial.  In
// coefficient form (L_l = -d^2 - (N/r) d + l(N-1+l)/r^2):
//
//   L_l phi_l = -phit_l,      L_l phit_l = zeta_l.

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "freqlab/errors.hpp"
#include "freqlab/harmonics.hpp"
#include "freqlab/radial.hpp"

namespace freqlab {

enum class Provenance { manufactured_A, manufactured_B, picard };

const char* to_string(Provenance p);

struct SolutionExpansion {
  int dimension = 0;
  /// Modes, grouped by sector, degrees increasing within a sector.
  std::vector<HalfSphereMode> modes;
  std::vector<RadialFunction> phi;
  std::vector<RadialFunction> phi_tilde;
  Potential potential;
  Provenance provenance = Provenance::picard;

  const RadialGrid& grid() const { return phi.front().grid(); }
  const GridPtr& grid_ptr() const { return phi.front().grid_ptr(); }
  double radius() const { return grid().radius(); }
  std::size_t size() const { return modes.size(); }

  /// Index of mode (sector, ell); throws SelectionError if absent.
  std::size_t index_of(int ell, int sector) const;
  /// Index of the lowest-sector mode of degree ell.
  std::size_t index_of(int ell) const;
  std::vector<int> sectors() const;
  /// Mode indices of one sector.
  std::vector<std::size_t> sector_indices(int sector) const;

  /// True when every coefficient stays below the floor.
  bool is_trivial(double floor = kVanishingFloor) const;

  SolutionExpansion scaled(double c) const;
};

struct HarmonicAddon {
  int ell = 0;
  double amplitude = 0.0;
};

/// U = amplitude r^l Y_l, V = 0 (h = 0).  The sector defaults to l mod 2.
SolutionExpansion manufactured_A(const GridPtr& grid, int dimension, int ell, double amplitude,
                                 std::optional<int> sector = std::nullopt);

/// V = a r^k Y_k, U = a r^{k+2} Y_k / (2(2k+N+1)) + b r^{l0} Y_{l0} (h = 0).
/// The addon joins the sector of k when the parity allows it, otherwise the
/// sector l0 mod 2.
SolutionExpansion manufactured_B(const GridPtr& grid, int dimension, int k, double v_amplitude,
                                 std::optional<HarmonicAddon> addon = std::nullopt,
                                 std::optional<int> sector = std::nullopt);

struct PicardReport {
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> contraction_estimates;
  bool damped = false;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, PicardReport report)
      : Error(what), report_(std::move(report)) {}
  const PicardReport& report() const { return report_; }

 private:
  PicardReport report_;
};

/// Boundary data (phi_l(R), phit_l(R)).
struct BoundaryDatum {
  double p = 0.0;
  double q = 0.0;
};

struct PicardOptions {
  double tol = 1e-8;
  int max_iter = 200;
  /// Damping factor applied once a contraction estimate exceeds 0.9; values
  /// <= 0 disable damping.
  double damping = 0.5;
  /// Admissible ||h||_inf R as a fraction of N + 2j - 1.
  double coupling_fraction = 0.5;
};

struct PicardProblem {
  GridPtr grid;
  int dimension = 4;
  int sector = 0;
  int l_max = 8;
  Potential potential;
  std::map<int, BoundaryDatum> boundary;
};

/// Fixed point of phit <- solve(zeta(phi), q), phi <- solve(-phit, p).  The
/// delta is the sup-norm change over all coefficients divided by
/// max(1, sup-norm of the iterate).  Throws ConvergenceError after max_iter.
std::pair<SolutionExpansion, PicardReport> picard_solve(const PicardProblem& problem,
                                                        const PicardOptions& options = {});

/// One sweep of the fixed-point map applied to an expansion.
SolutionExpansion picard_sweep(const SolutionExpansion& current, const std::map<int, BoundaryDatum>& boundary);

/// Bound on ||h||_inf R below which picard_solve accepts a sector.
double coupling_threshold(int dimension, int sector, double fraction = 0.5);

struct ModeResidual {
  int ell = 0;
  int sector = 0;
  double u = 0.0;  // L phi + phit
  double v = 0.0;  // L phit - zeta
};

/// Pointwise relative residual of both coefficient ODEs, maximised over the
/// interior nodes (four nodes trimmed at each end).  Each term is
/// normalised by |phi''| + |N phi'/r| + |lambda phi/r^2| + |forcing|.
std::vector<ModeResidual> residual(const SolutionExpansion& expansion);

/// Largest entry of residual().
double max_residual(const SolutionExpansion& expansion);

/// CSV snapshot: r, then phi and phit for every mode.
void write_solution_csv(std::ostream& out, const SolutionExpansion& expansion);

}  // namespace freqlab
