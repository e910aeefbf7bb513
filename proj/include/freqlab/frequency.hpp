#pragma once

// Almgren-type functionals of a truncated expansion, evaluated spectrally:
//
//   H(r) = sum (phi^2 + phit^2)
//   D(r) = r^{1-N} [ int_0^r E(s) ds - int_0^r h s^{N-1} (sum e phi)(sum e phit) ds ]
//   E(s) = sum (phi'^2 + lam phi^2/s^2 + phit'^2 + lam phit^2/s^2 + phi phit) s^N
//   N(r) = D/H,   B(r) = r^N sum (phi'^2 + lam phi^2/r^2 + phit'^2 + lam phit^2/r^2)
//
// Boundary sums run within each sector (Z_j is orthonormal on S^{N-1}).

#include <optional>
#include <ostream>
#include <vector>

#include "freqlab/solver.hpp"

namespace freqlab {

/// H at or below this value counts as a vanishing mass.
inline constexpr double kMassFloor = 1e-280;

struct FrequencyTrace {
  std::vector<double> r;
  std::vector<double> H;
  std::vector<double> D;
  std::vector<double> N;
  std::vector<double> B;
  std::vector<double> res_Hprime;
  std::vector<double> res_pohozaev1;
  std::vector<double> res_pohozaev2;
};

double mass_H(const SolutionExpansion& e, double r);
double energy_D(const SolutionExpansion& e, double r);
/// D/H; throws DegenerateMassError when H is below the floor.
double frequency_N(const SolutionExpansion& e, double r);
double boundary_energy_B(const SolutionExpansion& e, double r);

struct PohozaevResidual {
  double first = 0.0;
  double second = 0.0;
};

/// Relative residuals of the two integral identities obtained by testing
/// with (U, V) and with (z.grad U, z.grad V):
///
///   int_{B_r^+} (|grad U|^2 + |grad V|^2 + UV) = int_{S_r^+} (U U_r + V V_r) + int_{B_r'} h u v
///
///   -(N-1)/2 int (|grad U|^2 + |grad V|^2) + int V (z.grad U) + (r/2) B(r)
///       = int_{B_r'} h u (x.grad v) + r int_{S_r^+} (U_r^2 + V_r^2)
PohozaevResidual check_pohozaev(const SolutionExpansion& e, double r);

/// Trace over every grid node.  Throws DegenerateMassError when H drops to
/// the floor anywhere.
FrequencyTrace compute_trace(const SolutionExpansion& e);

/// Relative floor used by check_H_derivative: |H' - 2D/r| is measured
/// against max(|2D/r|, floor * H/r).
inline constexpr double kHprimeFloor = 1e-6;

/// max_i |H'_num - 2D/r| / max(|2D/r|, floor H/r) over the trace; H' by
/// 9-point differences in log r.  Also fills trace.res_Hprime.
double check_H_derivative(FrequencyTrace& trace, double floor = kHprimeFloor);
double check_H_derivative(const FrequencyTrace& trace, double floor = kHprimeFloor);

struct GammaEstimate {
  double gamma_fit = 0.0;
  int ell = 0;
  double distance = 0.0;       // |gamma_fit - ell|
  double slope_gamma = 0.0;    // half the log-log slope of H
  double estimator_gap = 0.0;  // |gamma_fit - slope_gamma|
  double delta = 0.0;          // exponent of the correction term
};

inline constexpr double kGammaClassificationTol = 0.1;
inline constexpr double kEstimatorAgreementTol = 2e-2;

/// Fits N(r) ~ gamma + c r^delta on the smallest decade and cross-checks
/// with the H-slope.  Throws ClassificationError when gamma is more than 0.1
/// from an integer or the two estimators disagree by more than 2e-2.
GammaEstimate extract_gamma(const FrequencyTrace& trace);

/// Indices of the nodes in [r_0, 10 r_0].
std::vector<std::size_t> smallest_decade(const FrequencyTrace& trace);

/// min H over the trace.
double min_mass(const FrequencyTrace& trace);

/// min N over the smallest decade.
double min_frequency_small(const FrequencyTrace& trace);

/// Smallest C in {0, 1, 10, 100} for which r -> exp(C r)(1 + N(r)) is
/// nondecreasing within slack * max(1, |value|) per step.
std::optional<double> quasi_monotonicity_constant(const FrequencyTrace& trace,
                                                  double slack = 1e-6);

/// max over the smallest decade of |H(2r)/H(r) / 4^ell - 1|.
double doubling_error(const SolutionExpansion& e, const FrequencyTrace& trace, int ell);

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace);

}  // namespace freqlab
