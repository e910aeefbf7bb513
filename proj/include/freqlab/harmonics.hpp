#pragma once

// Equator-symmetric spherical harmonics on the upper half-sphere S^N_+ in
// R^{N+1}.  A mode of degree l in sector j factors as
//
//   Y(theta) = c_norm * sin(psi)^j * C_{l-j}^{(j+(N-1)/2)}(cos psi) * Z_j(theta')
//
// where psi is the angle from the pole e = (0,...,0,1), theta' in S^{N-1} and
// Z_j is a unit-norm degree-j harmonic on S^{N-1}.  Only l - j even is
// admitted, which makes the profile even in cos(psi) and gives the Neumann
// condition on the equator.

#include <span>
#include <vector>

namespace freqlab {

/// Smallest ambient half-space dimension N accepted (R^{N+1}, N > 3).
inline constexpr int kMinDimension = 4;
/// Highest degree for which the recurrences are considered stable.
inline constexpr int kMaxDegree = 64;
/// Default polar quadrature order.
inline constexpr int kDefaultQuadratureOrder = 48;

/// Laplace-Beltrami eigenvalue l(N-1+l) on S^N.
double eigenvalue(int ell, int dimension);

/// Ultraspherical polynomial C_n^{(alpha)}(x) by the three-term recurrence.
double gegenbauer_eval(int n, double alpha, double x);

/// k-th derivative of C_n^{(alpha)} at x, using d/dx C_n^a = 2a C_{n-1}^{a+1}.
double gegenbauer_derivative(int n, double alpha, double x, int k = 1);

/// Surface area of the unit sphere S^d (embedded in R^{d+1}).
double sphere_area(int d);

/// Surface area of S^N_+.
double half_sphere_area(int dimension);

/// Dimension of the space of degree-j spherical harmonics on S^{N-1}.
long long sector_dimension(int dimension, int j);

/// Multiplicity M_l of lambda_l for the Neumann problem on S^N_+, counted as
/// the sum of sector dimensions over j <= l with l - j even.
long long multiplicity(int dimension, int ell);

/// Degrees j, j+2, ..., l_max of a sector.
std::vector<int> sector_degrees(int sector, int l_max);

/// Gauss rule on psi in (0, pi/2) for the density sin(psi)^{N-1}.
///
/// Built from the 2K-point Gauss-Gegenbauer rule (alpha = (N-1)/2) in
/// x = cos(psi), keeping the K positive nodes.  Integrands that are even
/// polynomials in cos(psi) of degree <= 4K-1 times the density are exact.
class PolarQuadrature {
 public:
  PolarQuadrature(int dimension, int order = kDefaultQuadratureOrder);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// Sum of the weights; should equal the integral of sin^{N-1} on (0, pi/2).
  double total_weight() const;

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

 private:
  int dimension_;
  int order_;
  std::vector<double> nodes_;    // psi_i, increasing
  std::vector<double> weights_;  // include sin(psi)^{N-1}
};

/// One symmetric half-sphere harmonic restricted to a fixed sector
/// representative Z_j.  Immutable after construction.
class HalfSphereMode {
 public:
  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  int sector() const { return sector_; }
  double eigenvalue() const { return eigenvalue_; }
  /// Normalisation of the polar profile: int f^2 sin^{N-1} dpsi = 1/c_norm^2.
  double norm_constant() const { return norm_constant_; }
  /// Normalised profile at psi = pi/2 (the equator).
  double equator_value() const { return equator_value_; }

  /// Normalised polar profile c_norm * f(psi) and its psi-derivatives.
  double profile(double psi) const;
  double profile_derivative(double psi) const;
  double profile_second_derivative(double psi) const;

 private:
  friend HalfSphereMode build_mode(int, int, int, const PolarQuadrature&);
  HalfSphereMode(int dimension, int degree, int sector);

  double raw(double psi) const;
  double raw_derivative(double psi) const;
  double raw_second_derivative(double psi) const;

  int dimension_;
  int degree_;
  int sector_;
  double alpha_;
  double eigenvalue_;
  double norm_constant_ = 1.0;
  double equator_value_ = 0.0;
};

/// Builds the normalised mode (N, l, j).  Throws SelectionError when l - j
/// is odd or j > l, ConfigurationError when N < 4.
HalfSphereMode build_mode(int dimension, int ell, int sector, const PolarQuadrature& quad);
HalfSphereMode build_mode(int dimension, int ell, int sector);

/// All modes j, j+2, ..., l_max of one sector.
std::vector<HalfSphereMode> build_sector(int dimension, int sector, int l_max);

/// Closed-form value of int_0^{pi/2} f^2 sin^{N-1} dpsi for the raw profile.
double closed_form_profile_norm2(int dimension, int ell, int sector);

/// Max |Gram - I| over the mode set.  Pairs from different sectors are
/// orthogonal through Z_j and contribute an exact zero.
double verify_orthonormality(std::span<const HalfSphereMode> modes, const PolarQuadrature& quad);

/// sup_i |-Delta_S Y - lambda Y| / max|Y| over the quadrature nodes, using
/// the polar form of the Laplace-Beltrami operator.
double eigen_residual(const HalfSphereMode& mode, const PolarQuadrature& quad);

}  // namespace freqlab
