#pragma once

// Radial coefficient functions on a geometric grid and the Volterra
// representation of the regular solution of
//
//   -phi'' - (N/r) phi' + l(N-1+l) r^{-2} phi = g   on (0, R].
//
// All quadrature runs in s = log r.  Every interval integral interpolates
// G = Phi * exp(-kappa s) (Phi = integrand * r, kappa the local log-slope of
// Phi) with a degree-8 polynomial and integrates exp(kappa s) * G with
// Gauss-Legendre, so pure powers are integrated exactly.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "freqlab/harmonics.hpp"

namespace freqlab {

inline constexpr int kDefaultGridPoints = 400;
inline constexpr double kDefaultRho = 1e-5;
inline constexpr double kVanishingFloor = 1e-14;

/// Geometric grid r_i = R * rho^{1 - i/(n-1)}, i = 0..n-1.
class RadialGrid {
 public:
  RadialGrid(double radius, int points = kDefaultGridPoints, double rho = kDefaultRho);

  double radius() const { return radius_; }
  double rho() const { return rho_; }
  std::size_t size() const { return r_.size(); }
  /// Spacing in log r.
  double step() const { return step_; }
  double r(std::size_t i) const { return r_[i]; }
  double s(std::size_t i) const { return s_[i]; }
  std::span<const double> radii() const { return r_; }

  /// Index of the node equal to r (relative tolerance 1e-12), if any.
  std::optional<std::size_t> find_node(double r) const;
  /// Largest i with r_i <= r (clamped to the grid).
  std::size_t lower_index(double r) const;

 private:
  double radius_;
  double rho_;
  double step_;
  std::vector<double> r_;
  std::vector<double> s_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(double radius, int points = kDefaultGridPoints, double rho = kDefaultRho);

/// c * r^p
struct Monomial {
  double coefficient;
  double power;
};

/// Samples of a radial function (and optionally of its derivative) on a
/// shared grid.  Functions built from monomials keep the closed form so they
/// can be evaluated exactly off the grid.
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values, std::vector<double> derivatives = {});

  static RadialFunction zero(GridPtr grid);
  static RadialFunction from_monomials(GridPtr grid, std::vector<Monomial> terms);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> derivatives() const { return derivatives_; }
  bool has_derivative() const { return !derivatives_.empty(); }
  const std::optional<std::vector<Monomial>>& closed_form() const { return closed_; }

  double operator[](std::size_t i) const { return values_[i]; }

  /// Value at an arbitrary r in [r_0, R]; exact for closed forms, otherwise
  /// degree-8 interpolation in log r.
  double operator()(double r) const;
  double derivative_at(double r) const;
  /// Second derivative: exact for closed forms, otherwise differentiates
  /// the stored derivative samples.
  std::vector<double> second_derivative_samples() const;

  /// phi' as its own function (requires derivative samples).
  RadialFunction derivative() const;

  double sup_norm() const;
  bool is_zero() const;

  std::optional<double> vanishing_order_hint;

  RadialFunction scaled(double c) const;
  /// Copy with one sample replaced (drops the closed form).
  RadialFunction with_value(std::size_t i, double v) const;

  friend RadialFunction operator+(const RadialFunction& a, const RadialFunction& b);
  friend RadialFunction operator-(const RadialFunction& a, const RadialFunction& b);

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> derivatives_;
  std::optional<std::vector<Monomial>> closed_;
};

// ---------------------------------------------------------------------------
// Quadrature and differentiation on the grid.

/// int_0^{r_i} t^p f(t) dt for every node.  The weight t^p is applied
/// analytically.  The piece (0, r_0) follows the local power law of the
/// integrand; throws NumericalError when t^{p+1} f does not vanish at 0.
std::vector<double> integral_from_zero(const RadialGrid& grid, std::span<const double> f,
                                       double weight_power = 0.0);

/// int_{r_i}^R t^p f(t) dt for every node.
std::vector<double> integral_to_end(const RadialGrid& grid, std::span<const double> f,
                                    double weight_power = 0.0);

/// int_{r_i}^{r_{i+1}} t^p f(t) dt, one entry per interval.
std::vector<double> interval_integrals(const RadialGrid& grid, std::span<const double> f,
                                       double weight_power = 0.0);

/// int_0^r t^p f(t) dt for any r in [r_0, R].
double integral_from_zero_at(const RadialGrid& grid, std::span<const double> f, double r,
                             double weight_power = 0.0);

/// df/ds (s = log r) at every node with 9-point stencils.
std::vector<double> log_derivative(const RadialGrid& grid, std::span<const double> f);

/// Interpolates samples at an arbitrary r in [r_0, R].
double interpolate(const RadialGrid& grid, std::span<const double> f, double r);

// ---------------------------------------------------------------------------
// Potentials.

/// Radial potential h(|x|) on the flat boundary.
class Potential {
 public:
  enum class Kind { zero, constant, polynomial, table };

  static Potential zero();
  static Potential constant(double value);
  /// h(s) = sum_k c_k s^k
  static Potential polynomial(std::vector<double> coefficients);
  /// C^1 cubic Hermite interpolation of tabulated samples, clamped outside.
  static Potential table(std::vector<double> radii, std::vector<double> values);

  Kind kind() const { return kind_; }
  double operator()(double s) const;
  /// max |h| on [0, R] (sampled on the table nodes / a fine mesh).
  double sup_norm(double radius) const;
  Potential scaled(double c) const;
  bool is_zero() const { return kind_ == Kind::zero; }

  std::span<const double> coefficients() const { return coeffs_; }
  std::span<const double> table_radii() const { return radii_; }

 private:
  Kind kind_ = Kind::zero;
  std::vector<double> coeffs_;
  std::vector<double> radii_;
  std::vector<double> slopes_;
};

const char* to_string(Potential::Kind kind);

// ---------------------------------------------------------------------------
// Branch solutions.

/// Constants of the Volterra form for one branch.  `first` multiplies r^l,
/// `second` the singular homogeneous solution r^{-(N-1)-l}; for regular
/// solutions second = int_0^R t^{N+l} g dt / (N+2l-1).
struct BranchConstants {
  double first = 0.0;
  double second = 0.0;
};

/// Paired constants (c for the U coefficient, d for the V coefficient).
struct BranchCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  int ell = 0;
  int dimension = 0;
};

struct BranchSolution {
  RadialFunction phi;
  BranchConstants constants;
  /// r^{-(N-1)-l} int_0^r t^{N+l} g / (N+2l-1): the folded second branch.
  RadialFunction remainder;
  /// lim r^{-l} phi(r) when t^{1-l} g is integrable at 0.
  std::optional<double> limit;
};

/// Regular solution with phi(R) = boundary_value.  The returned function
/// carries analytic derivative samples.  Throws RegularityError if g grows
/// faster than t^{-1} at the origin.
BranchSolution solve_branch(const RadialFunction& forcing, double boundary_value, int ell,
                            int dimension);

/// Exponent p of the local power law |f| ~ r^p over the smallest decade of
/// the grid where |f| exceeds the floor on at least 8 nodes.  Returns +inf
/// when f never exceeds the floor.  Throws EstimationError with fewer than
/// 4 usable points.
double vanishing_order(const RadialFunction& f, double floor = kVanishingFloor);

/// Same fit on an explicit window [r_lo, r_hi].
double vanishing_order(const RadialFunction& f, double r_lo, double r_hi,
                       double floor = kVanishingFloor);

/// zeta_l(lambda) = (h(lambda)/lambda) e_l sum_{l'} e_{l'} phi_{l'}(lambda) for every
/// target mode of one sector.
std::vector<double> zeta_from_trace(std::span<const HalfSphereMode> sector_modes,
                                    std::span<const RadialFunction> phis, const Potential& h,
                                    double lambda);

/// zeta_l sampled on the grid for every mode.
std::vector<RadialFunction> zeta_functions(std::span<const HalfSphereMode> sector_modes,
                                           std::span<const RadialFunction> phis,
                                           const Potential& h);

}  // namespace freqlab
