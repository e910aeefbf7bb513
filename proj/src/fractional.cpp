#include "freqlab/fractional.hpp"

#include <cmath>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

double ModeExtension::value(double t, int k) const {
  if (k < 0) throw DomainError("derivative order must be non-negative");
  // d^k/dt^k [(a + b t) e^{-xi t}] = (-xi)^k e^{-xi t} [(a + b t) - k b / xi]
  return std::pow(-xi, k) * std::exp(-xi * t) * ((a + b * t) - k * b / xi);
}

double ModeExtension::laplacian(double t) const { return value(t, 2) - xi * xi * value(t, 0); }

double ModeExtension::laplacian_derivative(double t) const {
  return value(t, 3) - xi * xi * value(t, 1);
}

ModeExtension extend_mode(double xi, double uhat) {
  if (!(xi > 0.0)) throw DomainError("frequency must be positive (got " + std::to_string(xi) + ")");
  return {xi, uhat, uhat, xi * uhat};
}

double laplacian_trace(const ModeExtension& mode) { return mode.laplacian(0.0); }

std::pair<double, double> dtn_check(double xi, double uhat) {
  const auto mode = extend_mode(xi, uhat);
  return {kDtnConstant * mode.laplacian_derivative(0.0), xi * xi * xi * uhat};
}

double dtn_relative_error(double xi, double uhat) {
  const auto [ext, ref] = dtn_check(xi, uhat);
  const double scale = std::max(std::abs(ext), std::abs(ref));
  return scale == 0.0 ? 0.0 : std::abs(ext - ref) / scale;
}

std::vector<double> dtn_apply(std::span<const SpectralMode> spectrum) {
  std::vector<double> out;
  out.reserve(spectrum.size());
  for (const auto& m : spectrum) out.push_back(dtn_check(m.xi, m.uhat).first);
  return out;
}

}  // namespace freqlab
