#include "freqlab/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

namespace {

constexpr int kStencil = 9;  // degree-8 local polynomials
constexpr int kGaussPoints = 16;

struct GaussLegendre {
  std::array<double, kGaussPoints> x{};
  std::array<double, kGaussPoints> w{};
  GaussLegendre() {
    const int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss() {
  static const GaussLegendre g;
  return g;
}

// Barycentric weights for equispaced nodes 0..8.
const std::array<double, kStencil>& bary() {
  static const std::array<double, kStencil> w = [] {
    std::array<double, kStencil> out{};
    double c = 1.0;
    for (int k = 0; k < kStencil; ++k) {
      out[k] = (k % 2 == 0 ? 1.0 : -1.0) * c;
      c = c * (kStencil - 1 - k) / (k + 1);
    }
    return out;
  }();
  return w;
}

std::array<double, kStencil> lagrange_basis(double x) {
  std::array<double, kStencil> out{};
  for (int k = 0; k < kStencil; ++k) {
    if (x == static_cast<double>(k)) {
      out[k] = 1.0;
      return out;
    }
  }
  const auto& w = bary();
  double denom = 0.0;
  for (int k = 0; k < kStencil; ++k) {
    out[k] = w[k] / (x - k);
    denom += out[k];
  }
  for (double& v : out) v /= denom;
  return out;
}

// Fornberg finite-difference weights for the first derivative at x0 over
// nodes 0..8.
std::array<double, kStencil> fornberg_first(double x0) {
  constexpr int m = 1;
  double c[kStencil][m + 1] = {};
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = 0.0 - x0;
  for (int i = 1; i < kStencil; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = i - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = i - j;
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, kStencil> out{};
  for (int k = 0; k < kStencil; ++k) out[k] = c[k][1];
  return out;
}

const std::array<std::array<double, kStencil>, kStencil>& derivative_weights() {
  static const auto table = [] {
    std::array<std::array<double, kStencil>, kStencil> t{};
    for (int x0 = 0; x0 < kStencil; ++x0) t[x0] = fornberg_first(x0);
    return t;
  }();
  return table;
}

void require_grid(const RadialGrid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw ConfigurationError("sample count does not match the grid");
}

std::size_t interval_stencil(std::size_t i, std::size_t n) {
  const long st = static_cast<long>(i) - 3;
  return static_cast<std::size_t>(std::clamp<long>(st, 0, static_cast<long>(n) - kStencil));
}

// Local exponent in s of samples y over the stencil: exact for pure powers.
// Zero when the samples change sign or the two stencil halves disagree,
// which happens near zero crossings where a power law is a poor model.
double local_kappa(const double* y, double h) {
  for (int k = 0; k < kStencil; ++k)
    if (y[k] == 0.0 || (y[k] > 0) != (y[0] > 0)) return 0.0;
  const int mid = (kStencil - 1) / 2;
  const double ka = std::log(y[mid] / y[0]) / (mid * h);
  const double kb = std::log(y[kStencil - 1] / y[mid]) / (mid * h);
  if (std::abs(ka - kb) > 0.25) return 0.0;
  return 0.5 * (ka + kb);
}

// int t^p f(t) dt over [s_st + xa h, s_st + xb h], f sampled at st..st+8.
// The weight t^{p+1} (the extra power from dt = t ds) is applied
// analytically; only f * exp(-kappa_f s) is interpolated.
double stencil_integral(const RadialGrid& grid, std::span<const double> f, double p,
                        std::size_t st, double xa, double xb) {
  const double h = grid.step();
  const double* y = f.data() + st;
  const double kf = local_kappa(y, h);
  const double kappa = kf + p + 1.0;
  std::array<double, kStencil> g{};
  for (int k = 0; k < kStencil; ++k) g[k] = y[k] * std::exp(-kf * h * k);
  const auto& gl = gauss();
  const double half = 0.5 * (xb - xa);
  const double mid = 0.5 * (xb + xa);
  double sum = 0.0;
  for (int q = 0; q < kGaussPoints; ++q) {
    const double x = mid + half * gl.x[q];
    const auto basis = lagrange_basis(x);
    double val = 0.0;
    for (int k = 0; k < kStencil; ++k) val += basis[k] * g[k];
    sum += gl.w[q] * std::exp(kappa * h * x) * val;
  }
  return sum * half * h * std::pow(grid.r(st), p + 1.0);
}

std::vector<double> interval_pieces(const RadialGrid& grid, std::span<const double> f, double p) {
  const std::size_t n = grid.size();
  std::vector<double> out(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t st = interval_stencil(i, n);
    const double xa = static_cast<double>(i - st);
    out[i] = stencil_integral(grid, f, p, st, xa, xa + 1.0);
  }
  return out;
}

// int_{-inf}^{s_0} Phi ds assuming log|Phi| = a + kappa s + c r near the origin.
double head_integral(const RadialGrid& grid, std::span<const double> f, double p) {
  std::array<double, kStencil> phi{};
  for (int k = 0; k < kStencil; ++k) phi[k] = f[k] * std::pow(grid.r(k), p + 1.0);
  const double p0 = phi[0];
  if (p0 == 0.0) return 0.0;
  const double h = grid.step();
  const double p4 = phi[4];
  const double p8 = phi[8];
  const bool same = (p4 != 0.0 && p8 != 0.0 && (p0 > 0) == (p4 > 0) && (p0 > 0) == (p8 > 0));
  double kappa = 0.0;
  double corr = 0.0;  // c * r_0
  if (same) {
    const double x4 = 4 * h;
    const double x8 = 8 * h;
    const double q4 = std::expm1(x4) - x4;
    const double q8 = std::expm1(x8) - x8;
    const double y4 = std::log(p4 / p0);
    const double y8 = std::log(p8 / p0);
    const double det = x4 * q8 - x8 * q4;
    const double kprime = (y4 * q8 - y8 * q4) / det;
    corr = (x4 * y8 - x8 * y4) / det;
    kappa = kprime - corr;
    if (std::abs(corr) > 0.5) {
      corr = 0.0;
      kappa = y8 / x8;
    }
  } else {
    const double p1 = phi[1];
    if (p1 == 0.0 || (p1 > 0) != (p0 > 0))
      throw NumericalError("integrand oscillates at the innermost node");
    kappa = std::log(p1 / p0) / h;
  }
  if (!(kappa > 1e-3))
    throw NumericalError("integrand is not integrable at the origin (local exponent " +
                         std::to_string(kappa - 1.0) + ")");
  return p0 * (1.0 / kappa - corr / (kappa * (kappa + 1.0)));
}

}  // namespace

// ---------------------------------------------------------------------------
// RadialGrid

RadialGrid::RadialGrid(double radius, int points, double rho) : radius_(radius), rho_(rho) {
  if (!(radius > 0.0)) throw ConfigurationError("radius must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigurationError("grid ratio rho must lie in (0, 1)");
  if (points < 16) throw ConfigurationError("radial grid needs at least 16 points");
  const double s0 = std::log(radius * rho);
  const double s1 = std::log(radius);
  step_ = (s1 - s0) / (points - 1);
  r_.resize(points);
  s_.resize(points);
  for (int i = 0; i < points; ++i) {
    s_[i] = s0 + step_ * i;
    r_[i] = std::exp(s_[i]);
  }
  r_.back() = radius;
  s_.back() = s1;
  r_.front() = radius * rho;
}

std::optional<std::size_t> RadialGrid::find_node(double r) const {
  const std::size_t i = lower_index(r);
  for (std::size_t k = i; k <= std::min(i + 1, size() - 1); ++k)
    if (std::abs(r_[k] - r) <= 1e-12 * r_[k]) return k;
  return std::nullopt;
}

std::size_t RadialGrid::lower_index(double r) const {
  if (r <= r_.front()) return 0;
  if (r >= r_.back()) return size() - 1;
  auto it = std::upper_bound(r_.begin(), r_.end(), r);
  return static_cast<std::size_t>(it - r_.begin()) - 1;
}

GridPtr make_grid(double radius, int points, double rho) {
  return std::make_shared<const RadialGrid>(radius, points, rho);
}

// ---------------------------------------------------------------------------
// Grid calculus

std::vector<double> integral_from_zero(const RadialGrid& grid, std::span<const double> f,
                                       double weight_power) {
  require_grid(grid, f);
  const auto pieces = interval_pieces(grid, f, weight_power);
  std::vector<double> out(grid.size());
  out[0] = head_integral(grid, f, weight_power);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) out[i + 1] = out[i] + pieces[i];
  return out;
}

std::vector<double> integral_to_end(const RadialGrid& grid, std::span<const double> f,
                                    double weight_power) {
  require_grid(grid, f);
  const auto pieces = interval_pieces(grid, f, weight_power);
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = grid.size() - 1; i-- > 0;) out[i] = out[i + 1] + pieces[i];
  return out;
}

std::vector<double> interval_integrals(const RadialGrid& grid, std::span<const double> f,
                                       double weight_power) {
  require_grid(grid, f);
  return interval_pieces(grid, f, weight_power);
}

double integral_from_zero_at(const RadialGrid& grid, std::span<const double> f, double r,
                             double weight_power) {
  require_grid(grid, f);
  if (r < grid.r(0) * (1 - 1e-12) || r > grid.radius() * (1 + 1e-12))
    throw DomainError("radius outside the grid range");
  const auto cumulative = integral_from_zero(grid, f, weight_power);
  const std::size_t i = grid.lower_index(r);
  if (i + 1 >= grid.size()) return cumulative.back();
  const std::size_t st = interval_stencil(i, grid.size());
  const double xa = static_cast<double>(i - st);
  const double xb = xa + (std::log(r) - grid.s(i)) / grid.step();
  if (xb <= xa) return cumulative[i];
  return cumulative[i] + stencil_integral(grid, f, weight_power, st, xa, xb);
}

std::vector<double> log_derivative(const RadialGrid& grid, std::span<const double> f) {
  require_grid(grid, f);
  const std::size_t n = grid.size();
  const double h = grid.step();
  const auto& table = derivative_weights();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long st_l = std::clamp<long>(static_cast<long>(i) - 4, 0, static_cast<long>(n) - kStencil);
    const std::size_t st = static_cast<std::size_t>(st_l);
    const int x0 = static_cast<int>(i - st);
    const double* y = f.data() + st;
    const double kappa = local_kappa(y, h);
    // Differences against the centre value keep constants exact.
    double dg = 0.0;
    for (int k = 0; k < kStencil; ++k)
      dg += table[x0][k] * (y[k] * std::exp(-kappa * h * (k - x0)) - y[x0]);
    out[i] = kappa * y[x0] + dg / h;
  }
  return out;
}

double interpolate(const RadialGrid& grid, std::span<const double> f, double r) {
  require_grid(grid, f);
  if (r < grid.r(0) * (1 - 1e-12) || r > grid.radius() * (1 + 1e-12))
    throw DomainError("radius outside the grid range");
  if (auto node = grid.find_node(r)) return f[*node];
  const std::size_t i = grid.lower_index(r);
  const std::size_t st = interval_stencil(std::min(i, grid.size() - 2), grid.size());
  const double x = (std::log(r) - grid.s(st)) / grid.step();
  const double* y = f.data() + st;
  const double kappa = local_kappa(y, grid.step());
  const auto basis = lagrange_basis(x);
  double val = 0.0;
  for (int k = 0; k < kStencil; ++k) val += basis[k] * y[k] * std::exp(-kappa * grid.step() * k);
  return val * std::exp(kappa * grid.step() * x);
}

// ---------------------------------------------------------------------------
// RadialFunction

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values,
                               std::vector<double> derivatives)
    : grid_(std::move(grid)), values_(std::move(values)), derivatives_(std::move(derivatives)) {
  if (!grid_) throw ConfigurationError("radial function needs a grid");
  if (values_.size() != grid_->size()) throw ConfigurationError("sample count does not match the grid");
  if (!derivatives_.empty() && derivatives_.size() != grid_->size())
    throw ConfigurationError("derivative sample count does not match the grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericalError("radial function has non-finite samples");
}

RadialFunction RadialFunction::zero(GridPtr grid) {
  const std::size_t n = grid->size();
  RadialFunction f(std::move(grid), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
  f.closed_ = std::vector<Monomial>{};
  return f;
}

RadialFunction RadialFunction::from_monomials(GridPtr grid, std::vector<Monomial> terms) {
  const std::size_t n = grid->size();
  std::vector<double> v(n, 0.0);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid->r(i);
    for (const auto& t : terms) {
      v[i] += t.coefficient * std::pow(r, t.power);
      if (t.power != 0.0) d[i] += t.coefficient * t.power * std::pow(r, t.power - 1.0);
    }
  }
  RadialFunction f(std::move(grid), std::move(v), std::move(d));
  f.closed_ = std::move(terms);
  return f;
}

double RadialFunction::operator()(double r) const {
  if (closed_) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    double v = 0.0;
    for (const auto& t : *closed_) v += t.coefficient * std::pow(r, t.power);
    return v;
  }
  return interpolate(*grid_, values_, r);
}

double RadialFunction::derivative_at(double r) const {
  if (closed_) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    double v = 0.0;
    for (const auto& t : *closed_)
      if (t.power != 0.0) v += t.coefficient * t.power * std::pow(r, t.power - 1.0);
    return v;
  }
  if (has_derivative()) return interpolate(*grid_, derivatives_, r);
  const auto ds = log_derivative(*grid_, values_);
  return interpolate(*grid_, ds, r) / r;
}

std::vector<double> RadialFunction::second_derivative_samples() const {
  const std::size_t n = size();
  std::vector<double> out(n, 0.0);
  if (closed_) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = grid_->r(i);
      for (const auto& t : *closed_)
        if (t.power != 0.0 && t.power != 1.0)
          out[i] += t.coefficient * t.power * (t.power - 1.0) * std::pow(r, t.power - 2.0);
    }
    return out;
  }
  if (has_derivative()) {
    const auto ds = log_derivative(*grid_, derivatives_);
    for (std::size_t i = 0; i < n; ++i) out[i] = ds[i] / grid_->r(i);
    return out;
  }
  const auto fs = log_derivative(*grid_, values_);
  const auto fss = log_derivative(*grid_, fs);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid_->r(i);
    out[i] = (fss[i] - fs[i]) / (r * r);
  }
  return out;
}

RadialFunction RadialFunction::derivative() const {
  if (closed_) {
    std::vector<Monomial> d;
    for (const auto& t : *closed_)
      if (t.power != 0.0) d.push_back({t.coefficient * t.power, t.power - 1.0});
    return from_monomials(grid_, std::move(d));
  }
  if (!has_derivative()) throw NumericalError("no analytic derivative attached to this function");
  RadialFunction d(grid_, derivatives_, second_derivative_samples());
  return d;
}

double RadialFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool RadialFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

RadialFunction RadialFunction::scaled(double c) const {
  RadialFunction out = *this;
  for (double& v : out.values_) v *= c;
  for (double& v : out.derivatives_) v *= c;
  if (out.closed_)
    for (auto& t : *out.closed_) t.coefficient *= c;
  return out;
}

RadialFunction RadialFunction::with_value(std::size_t i, double v) const {
  RadialFunction out = *this;
  out.values_.at(i) = v;
  out.closed_.reset();
  return out;
}

namespace {

RadialFunction combine(const RadialFunction& a, const RadialFunction& b, double sign) {
  if (a.grid_ptr() != b.grid_ptr() && a.grid().radii().data() != b.grid().radii().data()) {
    const auto ra = a.grid().radii();
    const auto rb = b.grid().radii();
    if (!std::equal(ra.begin(), ra.end(), rb.begin(), rb.end()))
      throw ConfigurationError("radial functions live on different grids");
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + sign * b[i];
  std::vector<double> d;
  if (a.has_derivative() && b.has_derivative()) {
    d.resize(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.derivatives()[i] + sign * b.derivatives()[i];
  }
  if (a.closed_form() && b.closed_form()) {
    std::vector<Monomial> terms = *a.closed_form();
    for (auto t : *b.closed_form()) {
      t.coefficient *= sign;
      auto it = std::find_if(terms.begin(), terms.end(),
                             [&](const Monomial& m) { return m.power == t.power; });
      if (it != terms.end())
        it->coefficient += t.coefficient;
      else
        terms.push_back(t);
    }
    return RadialFunction::from_monomials(a.grid_ptr(), std::move(terms));
  }
  return RadialFunction(a.grid_ptr(), std::move(v), std::move(d));
}

}  // namespace

RadialFunction operator+(const RadialFunction& a, const RadialFunction& b) {
  return combine(a, b, 1.0);
}

RadialFunction operator-(const RadialFunction& a, const RadialFunction& b) {
  return combine(a, b, -1.0);
}

// ---------------------------------------------------------------------------
// Potential

Potential Potential::zero() { return Potential{}; }

Potential Potential::constant(double value) {
  Potential p;
  p.kind_ = Kind::constant;
  p.coeffs_ = {value};
  return p;
}

Potential Potential::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw ConfigurationError("polynomial potential needs coefficients");
  Potential p;
  p.kind_ = Kind::polynomial;
  p.coeffs_ = std::move(coefficients);
  return p;
}

Potential Potential::table(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw ConfigurationError("table potential needs matching radius/value lists of length >= 2");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigurationError("table radii must increase strictly");
  Potential p;
  p.kind_ = Kind::table;
  const std::size_t n = radii.size();
  p.slopes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      p.slopes_[i] = (values[1] - values[0]) / (radii[1] - radii[0]);
    } else if (i + 1 == n) {
      p.slopes_[i] = (values[n - 1] - values[n - 2]) / (radii[n - 1] - radii[n - 2]);
    } else {
      const double hl = radii[i] - radii[i - 1];
      const double hr = radii[i + 1] - radii[i];
      const double dl = (values[i] - values[i - 1]) / hl;
      const double dr = (values[i + 1] - values[i]) / hr;
      p.slopes_[i] = (hr * dl + hl * dr) / (hl + hr);
    }
  }
  p.radii_ = std::move(radii);
  p.coeffs_ = std::move(values);
  return p;
}

double Potential::operator()(double s) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return coeffs_[0];
    case Kind::polynomial: {
      double v = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) v = v * s + coeffs_[k];
      return v;
    }
    case Kind::table: {
      if (s <= radii_.front()) return coeffs_.front();
      if (s >= radii_.back()) return coeffs_.back();
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      const double h = radii_[i + 1] - radii_[i];
      const double t = (s - radii_[i]) / h;
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
      const double h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t);
      const double h11 = t * t * (t - 1);
      return h00 * coeffs_[i] + h10 * h * slopes_[i] + h01 * coeffs_[i + 1] +
             h11 * h * slopes_[i + 1];
    }
  }
  return 0.0;
}

double Potential::sup_norm(double radius) const {
  if (kind_ == Kind::zero) return 0.0;
  if (kind_ == Kind::constant) return std::abs(coeffs_[0]);
  double m = 0.0;
  constexpr int samples = 4000;
  for (int i = 0; i <= samples; ++i) m = std::max(m, std::abs((*this)(radius * i / samples)));
  if (kind_ == Kind::table)
    for (double v : coeffs_) m = std::max(m, std::abs(v));
  return m;
}

Potential Potential::scaled(double c) const {
  Potential p = *this;
  for (double& v : p.coeffs_) v *= c;
  for (double& v : p.slopes_) v *= c;
  return p;
}

const char* to_string(Potential::Kind kind) {
  switch (kind) {
    case Potential::Kind::zero:
      return "zero";
    case Potential::Kind::constant:
      return "constant";
    case Potential::Kind::polynomial:
      return "polynomial";
    case Potential::Kind::table:
      return "table";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Branch solutions

namespace {

// Minimal admissible power of the forcing at the origin: zeta = O(r^{l0 - 1})
// with l0 >= 0.
constexpr double kMinForcingExponent = -1.0;
constexpr double kRegularitySlack = 0.25;

std::optional<std::vector<double>> try_integral_from_zero(const RadialGrid& grid,
                                                          std::span<const double> f, double p) {
  // The head extrapolation is only trusted for clearly integrable data.
  const double p0 = f[0] * std::pow(grid.r(0), p + 1.0);
  const double p8 = f[8] * std::pow(grid.r(8), p + 1.0);
  if (p0 != 0.0) {
    if (p8 == 0.0 || (p0 > 0) != (p8 > 0)) return std::nullopt;
    if (std::log(p8 / p0) / (8 * grid.step()) < 0.5) return std::nullopt;
  }
  try {
    return integral_from_zero(grid, f, p);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

BranchSolution solve_branch(const RadialFunction& forcing, double boundary_value, int ell,
                            int dimension) {
  if (dimension < kMinDimension) throw ConfigurationError("dimension must exceed 3");
  if (ell < 0) throw DomainError("degree must be non-negative");
  const auto& grid = forcing.grid();
  const GridPtr gp = forcing.grid_ptr();
  const double R = grid.radius();
  const int N = dimension;
  const double kernel = N + 2.0 * ell - 1.0;

  if (forcing.is_zero()) {
    const double c1 = boundary_value * std::pow(R, -ell);
    BranchSolution out{RadialFunction::from_monomials(gp, {{c1, static_cast<double>(ell)}}),
                       {c1, 0.0},
                       RadialFunction::zero(gp),
                       c1};
    out.phi.vanishing_order_hint = c1 == 0.0 ? std::numeric_limits<double>::infinity() : ell;
    return out;
  }

  try {
    const double p = vanishing_order(forcing);
    if (p < kMinForcingExponent - kRegularitySlack)
      throw RegularityError("forcing too singular at the origin: fitted exponent " +
                            std::to_string(p) + " below " + std::to_string(kMinForcingExponent));
  } catch (const EstimationError&) {
    // Too few resolved samples to judge; the quadrature head check below
    // still rejects non-integrable data.
  }

  const std::size_t n = grid.size();
  const auto g = forcing.values();
  std::vector<double> second_int;
  try {
    second_int = integral_from_zero(grid, g, N + ell);
  } catch (const NumericalError& e) {
    throw RegularityError(std::string("forcing not integrable against t^{N+l}: ") + e.what());
  }
  const double c2 = second_int.back() / kernel;
  const double c1 = std::pow(R, -ell) * (boundary_value - std::pow(R, 1.0 - N - ell) * c2);

  std::vector<double> bracket(n);
  std::optional<double> limit;
  if (auto head = try_integral_from_zero(grid, g, 1.0 - ell)) {
    const double K = c1 + head->back() / kernel;
    for (std::size_t i = 0; i < n; ++i) bracket[i] = K - (*head)[i] / kernel;
    limit = K;
  } else {
    const auto tail = integral_to_end(grid, g, 1.0 - ell);
    for (std::size_t i = 0; i < n; ++i) bracket[i] = c1 + tail[i] / kernel;
  }

  std::vector<double> v(n);
  std::vector<double> d(n);
  std::vector<double> rem(n);
  std::vector<double> rem_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    const double sing = std::pow(r, 1.0 - N - ell) * second_int[i] / kernel;
    rem[i] = sing;
    rem_d[i] = (1.0 - N - ell) * sing / r + forcing[i] * r / kernel;
    v[i] = std::pow(r, ell) * bracket[i] + sing;
    d[i] = (ell == 0 ? 0.0 : ell * std::pow(r, ell - 1) * bracket[i]) + (1.0 - N - ell) * sing / r;
  }
  v.back() = boundary_value;

  BranchSolution out{RadialFunction(gp, std::move(v), std::move(d)), {c1, c2},
                     RadialFunction(gp, std::move(rem), std::move(rem_d)), limit};
  return out;
}

// ---------------------------------------------------------------------------
// Vanishing order

namespace {

double fit_slope(const RadialGrid& grid, std::span<const double> f, std::size_t lo,
                 std::size_t hi, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!(std::abs(f[i]) > floor)) continue;
    const double x = grid.s(i);
    const double y = std::log(std::abs(f[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 4) throw EstimationError("fewer than 4 usable points for the vanishing-order fit");
  const double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace

double vanishing_order(const RadialFunction& f, double floor) {
  const auto& grid = f.grid();
  const auto vals = f.values();
  const std::size_t n = grid.size();
  for (std::size_t start = 0; start < n; ++start) {
    if (!(std::abs(vals[start]) > floor)) continue;
    std::size_t end = start;
    int above = 0;
    while (end + 1 < n && grid.r(end + 1) <= 10.0 * grid.r(start) * (1 + 1e-12)) ++end;
    for (std::size_t i = start; i <= end; ++i)
      if (std::abs(vals[i]) > floor) ++above;
    if (above >= 8 || end + 1 == n) return fit_slope(grid, vals, start, end, floor);
  }
  return std::numeric_limits<double>::infinity();
}

double vanishing_order(const RadialFunction& f, double r_lo, double r_hi, double floor) {
  const auto& grid = f.grid();
  std::size_t lo = grid.lower_index(r_lo);
  if (grid.r(lo) < r_lo * (1 - 1e-12)) ++lo;
  const std::size_t hi = grid.lower_index(r_hi);
  if (lo > hi) throw EstimationError("empty fit window");
  return fit_slope(grid, f.values(), lo, hi, floor);
}

// ---------------------------------------------------------------------------
// zeta

std::vector<double> zeta_from_trace(std::span<const HalfSphereMode> sector_modes,
                                    std::span<const RadialFunction> phis, const Potential& h,
                                    double lambda) {
  if (!(lambda > 0.0)) throw DomainError("zeta requires a positive radius");
  if (sector_modes.size() != phis.size())
    throw ConfigurationError("one radial coefficient per mode is required");
  for (const auto& m : sector_modes)
    if (m.sector() != sector_modes.front().sector())
      throw ConfigurationError("zeta_from_trace works within one sector");
  std::vector<double> out(sector_modes.size(), 0.0);
  if (h.is_zero()) return out;
  double trace = 0.0;
  for (std::size_t k = 0; k < phis.size(); ++k) trace += sector_modes[k].equator_value() * phis[k](lambda);
  const double factor = h(lambda) / lambda * trace;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = sector_modes[k].equator_value() * factor;
  return out;
}

std::vector<RadialFunction> zeta_functions(std::span<const HalfSphereMode> sector_modes,
                                           std::span<const RadialFunction> phis,
                                           const Potential& h) {
  if (sector_modes.size() != phis.size() || phis.empty())
    throw ConfigurationError("one radial coefficient per mode is required");
  const GridPtr gp = phis.front().grid_ptr();
  std::vector<RadialFunction> out;
  if (h.is_zero()) {
    for (std::size_t k = 0; k < phis.size(); ++k) out.push_back(RadialFunction::zero(gp));
    return out;
  }
  const auto& grid = *gp;
  const std::size_t n = grid.size();
  std::vector<double> factor(n);
  for (std::size_t i = 0; i < n; ++i) {
    double trace = 0.0;
    for (std::size_t k = 0; k < phis.size(); ++k) trace += sector_modes[k].equator_value() * phis[k][i];
    factor[i] = h(grid.r(i)) / grid.r(i) * trace;
  }
  for (std::size_t k = 0; k < phis.size(); ++k) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = sector_modes[k].equator_value() * factor[i];
    out.emplace_back(gp, std::move(v));
  }
  return out;
}

}  // namespace freqlab
