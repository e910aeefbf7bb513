#pragma once

// Blow-up profiles: the homogeneous limits r^l (Psi_1, Psi_2) of the
// rescalings lambda^{-l} (U, V)(lambda z), their coefficients from the
// boundary/volume integral formulas, and the unique-continuation probe.

#include <optional>
#include <string>
#include <vector>

#include "freqlab/solver.hpp"

namespace freqlab {

/// Classification constants (reported alongside every probe).
inline constexpr double kUcFloor = 1e-14;
inline constexpr double kUcOrderMargin = 0.5;

struct BlowupProfile {
  int ell = 0;
  /// Sector of each coefficient (one entry per mode of degree ell).
  std::vector<int> sectors;
  std::vector<double> alphas;
  std::vector<double> alpha_primes;
  /// sum alpha^2 + alpha'^2
  double norm = 0.0;
  /// Multiplicity M_l of the eigenvalue (m-copies share the radial data).
  long long multiplicity = 0;
};

/// Coefficients of the degree-ell blow-up profile:
///
///   alpha  = R^{-l} phi(R)  + R^{1-N-2l}/(N+2l-1) int_0^R t^{N+l} phit
///                           - 1/(N+2l-1) int_0^R t^{1-l} phit
///   alpha' = R^{-l} phit(R) - R^{1-N-2l}/(N+2l-1) int_0^R t^{N+l} zeta
///                           + 1/(N+2l-1) int_0^R t^{1-l} zeta
///
/// Throws SelectionError when no mode has degree ell and NumericalError
/// when an integrand is not integrable at the origin.
BlowupProfile alpha_coefficients(const SolutionExpansion& e, int ell);

struct RescalingLimit {
  std::vector<int> sectors;
  std::vector<double> phi_limits;        // lim lambda^{-l} phi(lambda)
  std::vector<double> phi_tilde_limits;  // lim lambda^{-l} phit(lambda)
};

/// Extrapolates lambda^{-l} phi and lambda^{-l} phit to lambda = 0 from four
/// radii of the smallest decade (Neville, depth 3).  Throws ResolutionError
/// when the last extrapolation step exceeds ten times the previous one.
RescalingLimit rescaling_limit(const SolutionExpansion& e, int ell);

/// max |alpha - limit| over the coefficients, relative to sqrt(profile norm).
double agreement_error(const BlowupProfile& profile, const RescalingLimit& limit);

enum class UcClass { nontrivial_finite_order, trivial, violation };

const char* to_string(UcClass c);

struct UcResult {
  UcClass classification = UcClass::trivial;
  /// Smallest vanishing order over the U coefficients (+inf if none).
  double u_order = 0.0;
  std::string note;
};

/// Unique-continuation dichotomy: U vanishing beyond n_max must come with a
/// trivial pair.
UcResult uc_probe(const SolutionExpansion& e, int n_max = 10, double floor = kUcFloor,
                  double margin = kUcOrderMargin);

/// Profile record with the fixed field set
/// ell, gamma_fit, alpha, alpha_prime, profile_norm, uc_classification,
/// agreement_rel_err.
std::string profile_json(const BlowupProfile& profile, double gamma_fit, const UcResult& uc,
                         double agreement_rel_err);

}  // namespace freqlab
