#include "freqlab/harmonics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

namespace {

void require_dimension(int dimension) {
  if (dimension < kMinDimension)
    throw ConfigurationError("dimension must exceed 3 (got N=" + std::to_string(dimension) + ")");
}

// s^k with the convention that a vanishing coefficient never reaches here
// with a negative exponent.
double ipow(double s, int k) { return k == 0 ? 1.0 : std::pow(s, k); }

long long binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double eigenvalue(int ell, int dimension) {
  require_dimension(dimension);
  if (ell < 0) throw DomainError("degree must be non-negative");
  const long long lam = static_cast<long long>(ell) * (dimension - 1 + ell);
  return static_cast<double>(lam);
}

double gegenbauer_eval(int n, double alpha, double x) {
  if (!(alpha > 0.0)) throw DomainError("Gegenbauer parameter must be positive");
  if (n < 0) throw DomainError("Gegenbauer degree must be non-negative");
  if (std::abs(x) > 1.0) throw DomainError("Gegenbauer argument outside [-1, 1]");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * alpha * x;
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * x * (k + alpha) * cur - (k + 2.0 * alpha - 1.0) * prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double gegenbauer_derivative(int n, double alpha, double x, int k) {
  double factor = 1.0;
  for (int i = 0; i < k; ++i) {
    if (n - i <= 0) return 0.0;
    factor *= 2.0 * (alpha + i);
  }
  return factor * gegenbauer_eval(n - k, alpha + k, x);
}

double sphere_area(int d) {
  const double half = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double half_sphere_area(int dimension) { return 0.5 * sphere_area(dimension); }

long long sector_dimension(int dimension, int j) {
  require_dimension(dimension);
  if (j < 0) return 0;
  return binomial(j + dimension - 1, dimension - 1) - binomial(j + dimension - 3, dimension - 1);
}

long long multiplicity(int dimension, int ell) {
  long long total = 0;
  for (int j = ell % 2; j <= ell; j += 2) total += sector_dimension(dimension, j);
  return total;
}

std::vector<int> sector_degrees(int sector, int l_max) {
  if (sector < 0) throw SelectionError("sector must be non-negative");
  if (l_max < sector || (l_max - sector) % 2 != 0)
    throw SelectionError("L_max must be >= sector with matching parity (symmetric modes only)");
  std::vector<int> out;
  for (int l = sector; l <= l_max; l += 2) out.push_back(l);
  return out;
}

// ---------------------------------------------------------------------------
// PolarQuadrature

PolarQuadrature::PolarQuadrature(int dimension, int order) : dimension_(dimension), order_(order) {
  require_dimension(dimension);
  if (order < 1) throw ConfigurationError("quadrature order must be positive");

  const int n = 2 * order;
  const double alpha = 0.5 * (dimension - 1);
  const double mu0 =
      std::sqrt(std::numbers::pi) * std::exp(std::lgamma(alpha + 0.5) - std::lgamma(alpha + 1.0));

  // Golub-Welsch for the initial nodes.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  auto beta = [alpha](int k) {
    return k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0));
  };
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(beta(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> xs(eig.eigenvalues().data(), eig.eigenvalues().data() + n);

  for (double& x : xs) {
    // Newton polish on C_n^alpha.
    for (int it = 0; it < 4; ++it) {
      const double p = gegenbauer_eval(n, alpha, x);
      const double dp = gegenbauer_derivative(n, alpha, x, 1);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-17) break;
    }
  }

  // Christoffel weights from the orthonormal recurrence.
  for (double x : xs) {
    if (x <= 0.0) continue;
    double p_prev = 0.0;
    double p_cur = 1.0 / std::sqrt(mu0);
    double sum = p_cur * p_cur;
    for (int k = 0; k + 1 < n; ++k) {
      const double bk = k == 0 ? 0.0 : std::sqrt(beta(k));
      const double p_next = (x * p_cur - bk * p_prev) / std::sqrt(beta(k + 1));
      p_prev = p_cur;
      p_cur = p_next;
      sum += p_cur * p_cur;
    }
    nodes_.push_back(std::acos(x));
    weights_.push_back(1.0 / sum);
  }
  // acos reverses the order; keep psi increasing.
  std::reverse(nodes_.begin(), nodes_.end());
  std::reverse(weights_.begin(), weights_.end());
}

double PolarQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

// ---------------------------------------------------------------------------
// HalfSphereMode

HalfSphereMode::HalfSphereMode(int dimension, int degree, int sector)
    : dimension_(dimension),
      degree_(degree),
      sector_(sector),
      alpha_(sector + 0.5 * (dimension - 1)),
      eigenvalue_(freqlab::eigenvalue(degree, dimension)) {}

double HalfSphereMode::raw(double psi) const {
  const double s = std::sin(psi);
  const double c = std::cos(psi);
  return ipow(s, sector_) * gegenbauer_eval(degree_ - sector_, alpha_, c);
}

double HalfSphereMode::raw_derivative(double psi) const {
  const int j = sector_;
  const int n = degree_ - sector_;
  const double s = std::sin(psi);
  const double c = std::cos(psi);
  const double C = gegenbauer_eval(n, alpha_, c);
  const double dC = gegenbauer_derivative(n, alpha_, c, 1);
  double out = -ipow(s, j + 1) * dC;
  if (j > 0) out += j * ipow(s, j - 1) * c * C;
  return out;
}

double HalfSphereMode::raw_second_derivative(double psi) const {
  const int j = sector_;
  const int n = degree_ - sector_;
  const double s = std::sin(psi);
  const double c = std::cos(psi);
  const double C = gegenbauer_eval(n, alpha_, c);
  const double dC = gegenbauer_derivative(n, alpha_, c, 1);
  const double d2C = gegenbauer_derivative(n, alpha_, c, 2);
  double out = -j * ipow(s, j) * C - (2 * j + 1) * ipow(s, j) * c * dC + ipow(s, j + 2) * d2C;
  if (j > 1) out += j * (j - 1) * ipow(s, j - 2) * c * c * C;
  return out;
}

double HalfSphereMode::profile(double psi) const { return norm_constant_ * raw(psi); }
double HalfSphereMode::profile_derivative(double psi) const {
  return norm_constant_ * raw_derivative(psi);
}
double HalfSphereMode::profile_second_derivative(double psi) const {
  return norm_constant_ * raw_second_derivative(psi);
}

HalfSphereMode build_mode(int dimension, int ell, int sector, const PolarQuadrature& quad) {
  require_dimension(dimension);
  if (quad.dimension() != dimension)
    throw ConfigurationError("quadrature built for a different dimension");
  if (sector < 0 || ell < sector)
    throw SelectionError("mode requires degree >= sector >= 0");
  if ((ell - sector) % 2 != 0)
    throw SelectionError("antisymmetric mode excluded: degree - sector must be even");
  if (ell > kMaxDegree) throw DomainError("degree above the supported maximum");

  HalfSphereMode mode(dimension, ell, sector);
  const double norm2 = quad.integrate([&](double psi) {
    const double f = mode.raw(psi);
    return f * f;
  });
  mode.norm_constant_ = 1.0 / std::sqrt(norm2);
  mode.equator_value_ = mode.norm_constant_ * mode.raw(0.5 * std::numbers::pi);
  if (!(std::abs(mode.equator_value_) > 1e-12))
    throw NumericalError("symmetric mode vanishes on the equator");
  return mode;
}

HalfSphereMode build_mode(int dimension, int ell, int sector) {
  return build_mode(dimension, ell, sector, PolarQuadrature(dimension));
}

std::vector<HalfSphereMode> build_sector(int dimension, int sector, int l_max) {
  const PolarQuadrature quad(dimension);
  std::vector<HalfSphereMode> out;
  for (int l : sector_degrees(sector, l_max)) out.push_back(build_mode(dimension, l, sector, quad));
  return out;
}

double closed_form_profile_norm2(int dimension, int ell, int sector) {
  const double alpha = sector + 0.5 * (dimension - 1);
  const int n = ell - sector;
  const double log_full = std::log(std::numbers::pi) + (1.0 - 2.0 * alpha) * std::log(2.0) +
                          std::lgamma(n + 2.0 * alpha) - std::lgamma(n + 1.0) -
                          std::log(n + alpha) - 2.0 * std::lgamma(alpha);
  return 0.5 * std::exp(log_full);
}

double verify_orthonormality(std::span<const HalfSphereMode> modes, const PolarQuadrature& quad) {
  double worst = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    if (modes[a].dimension() != quad.dimension())
      throw ConfigurationError("modes and quadrature disagree on the dimension");
    for (std::size_t b = a; b < modes.size(); ++b) {
      double gram = 0.0;
      if (modes[a].sector() == modes[b].sector()) {
        gram = quad.integrate(
            [&](double psi) { return modes[a].profile(psi) * modes[b].profile(psi); });
      }
      const double target = a == b ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(gram - target));
    }
  }
  return worst;
}

double eigen_residual(const HalfSphereMode& mode, const PolarQuadrature& quad) {
  const int N = mode.dimension();
  const int j = mode.sector();
  const double angular = static_cast<double>(j) * (j + N - 2);
  double worst = 0.0;
  double scale = 0.0;
  for (double psi : quad.nodes()) {
    const double s = std::sin(psi);
    const double c = std::cos(psi);
    const double f = mode.profile(psi);
    const double lap = mode.profile_second_derivative(psi) +
                       (N - 1) * (c / s) * mode.profile_derivative(psi) - angular / (s * s) * f;
    worst = std::max(worst, std::abs(-lap - mode.eigenvalue() * f));
    scale = std::max(scale, std::abs(f));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace freqlab
