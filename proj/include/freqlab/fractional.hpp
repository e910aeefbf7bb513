#pragma once

// Fourier-side check of the extension characterisation of (-Delta)^{3/2}.
// For one frequency |xi| the bounded solution of (d^2/dt^2 - xi^2)^2 U = 0 on
// t > 0 with U(0) = uhat and U'(0) = 0 is (a + b t) e^{-xi t}, a = uhat,
// b = xi uhat.  Then V = U'' - xi^2 U has V(0) = -2 xi^2 uhat (v = 2 Delta u)
// and K V'(0) = xi^3 uhat with K = 1/2.

#include <span>
#include <utility>
#include <vector>

namespace freqlab {

inline constexpr double kDtnConstant = 0.5;

struct ModeExtension {
  double xi = 0.0;
  double uhat = 0.0;
  double a = 0.0;
  double b = 0.0;

  /// k-th t-derivative of (a + b t) e^{-xi t}.
  double value(double t, int k = 0) const;
  /// (d^2/dt^2 - xi^2) U at t.
  double laplacian(double t) const;
  /// d/dt of the Laplacian profile at t.
  double laplacian_derivative(double t) const;
};

/// Throws DomainError for xi <= 0.
ModeExtension extend_mode(double xi, double uhat);

/// Trace V(0) of the Laplacian profile.
double laplacian_trace(const ModeExtension& mode);

/// (K * dV/dt(0), xi^3 uhat).
std::pair<double, double> dtn_check(double xi, double uhat);

/// Relative difference of the two dtn_check values (0 when both vanish).
double dtn_relative_error(double xi, double uhat);

struct SpectralMode {
  double xi = 0.0;
  double uhat = 0.0;
};

/// K * dV/dt(0) for every mode.
std::vector<double> dtn_apply(std::span<const SpectralMode> spectrum);

}  // namespace freqlab
