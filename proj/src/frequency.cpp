#include "freqlab/frequency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace freqlab {

namespace {

// Point values of every mode and the sector-summed quantities the
// functionals need.
struct PointData {
  double mass = 0.0;    // sum phi^2 + phit^2
  double grad = 0.0;    // sum phi'^2 + lam phi^2/r^2 + (same for phit)
  double uv = 0.0;      // sum phi phit
  double flux = 0.0;    // sum phi phi' + phit phit'
  double radial = 0.0;  // sum phi'^2 + phit'^2
  double v_du = 0.0;    // sum phit phi'
  double trace_uv = 0.0;   // sum_sectors (sum e phi)(sum e phit)
  double trace_udv = 0.0;  // sum_sectors (sum e phi)(sum e phit')
};

struct ModeValue {
  double u, du, v, dv;
};

PointData combine(const SolutionExpansion& e, const std::vector<ModeValue>& vals, double r) {
  PointData p;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto& m = vals[i];
    const double lam = e.modes[i].eigenvalue();
    p.mass += m.u * m.u + m.v * m.v;
    p.grad += m.du * m.du + m.dv * m.dv + lam * (m.u * m.u + m.v * m.v) / (r * r);
    p.uv += m.u * m.v;
    p.flux += m.u * m.du + m.v * m.dv;
    p.radial += m.du * m.du + m.dv * m.dv;
    p.v_du += m.v * m.du;
  }
  for (int sector : e.sectors()) {
    double tu = 0.0, tv = 0.0, tdv = 0.0;
    for (auto i : e.sector_indices(sector)) {
      const double eq = e.modes[i].equator_value();
      tu += eq * vals[i].u;
      tv += eq * vals[i].v;
      tdv += eq * vals[i].dv;
    }
    p.trace_uv += tu * tv;
    p.trace_udv += tu * tdv;
  }
  return p;
}

std::vector<double> derivative_samples(const RadialFunction& f) {
  if (f.has_derivative()) return {f.derivatives().begin(), f.derivatives().end()};
  const auto ds = log_derivative(f.grid(), f.values());
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds[i] / f.grid().r(i);
  return out;
}

std::vector<PointData> node_data(const SolutionExpansion& e) {
  const auto& grid = e.grid();
  const std::size_t n = grid.size();
  std::vector<std::vector<double>> du(e.size()), dv(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    du[k] = derivative_samples(e.phi[k]);
    dv[k] = derivative_samples(e.phi_tilde[k]);
  }
  std::vector<PointData> out(n);
  std::vector<ModeValue> vals(e.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < e.size(); ++k)
      vals[k] = {e.phi[k][i], du[k][i], e.phi_tilde[k][i], dv[k][i]};
    out[i] = combine(e, vals, grid.r(i));
  }
  return out;
}

PointData point_data(const SolutionExpansion& e, double r) {
  std::vector<ModeValue> vals(e.size());
  for (std::size_t k = 0; k < e.size(); ++k)
    vals[k] = {e.phi[k](r), e.phi[k].derivative_at(r), e.phi_tilde[k](r),
               e.phi_tilde[k].derivative_at(r)};
  return combine(e, vals, r);
}

// Integrands on the grid without their power weights; weights() holds the
// power of s each one is integrated against.
struct Integrands {
  std::vector<double> energy;    // (grad + uv) s^N
  std::vector<double> boundary;  // h trace_uv s^{N-1}
  std::vector<double> gradient;  // grad s^N
  std::vector<double> v_zdu;     // phit phi' s^{N+1}
  std::vector<double> h_udv;     // h (sum e phi)(sum e phit') s^N
};

struct Weights {
  double energy, boundary, gradient, v_zdu, h_udv;
};

Weights weights(int N) { return {double(N), N - 1.0, double(N), N + 1.0, double(N)}; }

Integrands integrands(const SolutionExpansion& e, const std::vector<PointData>& data) {
  const auto& grid = e.grid();
  const std::size_t n = grid.size();
  Integrands I;
  I.energy.resize(n);
  I.boundary.resize(n);
  I.gradient.resize(n);
  I.v_zdu.resize(n);
  I.h_udv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = e.potential(grid.r(i));
    I.energy[i] = data[i].grad + data[i].uv;
    I.boundary[i] = h * data[i].trace_uv;
    I.gradient[i] = data[i].grad;
    I.v_zdu[i] = data[i].v_du;
    I.h_udv[i] = h * data[i].trace_udv;
  }
  return I;
}

struct Functionals {
  double H, D, B, poh1, poh2;
};

double relative(double lhs, double rhs, double scale) {
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - rhs) / scale;
}

Functionals assemble(const PointData& p, double r, int N, double int_energy, double int_boundary,
                     double int_gradient, double int_vzdu, double int_hudv) {
  Functionals f{};
  const double rN = std::pow(r, N);
  f.H = p.mass;
  f.D = std::pow(r, 1 - N) * (int_energy - int_boundary);
  f.B = rN * p.grad;
  const double flux = rN * p.flux;
  f.poh1 = relative(int_energy, flux + int_boundary,
                    std::abs(int_energy) + std::abs(flux) + std::abs(int_boundary));
  const double t1 = -0.5 * (N - 1) * int_gradient;
  const double t2 = int_vzdu;
  const double t3 = 0.5 * r * f.B;
  const double t4 = int_hudv;
  const double t5 = r * rN * p.radial;
  f.poh2 = relative(t1 + t2 + t3, t4 + t5,
                    std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::abs(t5));
  return f;
}

Functionals functionals_at(const SolutionExpansion& e, double r) {
  const auto& grid = e.grid();
  const auto data = node_data(e);
  const auto I = integrands(e, data);
  const auto w = weights(e.dimension);
  if (auto node = grid.find_node(r)) {
    const auto i = *node;
    return assemble(data[i], grid.r(i), e.dimension,
                    integral_from_zero(grid, I.energy, w.energy)[i],
                    integral_from_zero(grid, I.boundary, w.boundary)[i],
                    integral_from_zero(grid, I.gradient, w.gradient)[i],
                    integral_from_zero(grid, I.v_zdu, w.v_zdu)[i],
                    integral_from_zero(grid, I.h_udv, w.h_udv)[i]);
  }
  return assemble(point_data(e, r), r, e.dimension,
                  integral_from_zero_at(grid, I.energy, r, w.energy),
                  integral_from_zero_at(grid, I.boundary, r, w.boundary),
                  integral_from_zero_at(grid, I.gradient, r, w.gradient),
                  integral_from_zero_at(grid, I.v_zdu, r, w.v_zdu),
                  integral_from_zero_at(grid, I.h_udv, r, w.h_udv));
}

void require_radius(const SolutionExpansion& e, double r) {
  const auto& g = e.grid();
  if (!(r >= g.r(0) * (1 - 1e-12) && r <= g.radius() * (1 + 1e-12)))
    throw DomainError("radius " + std::to_string(r) + " outside the grid range");
}

bool degenerate(double H) { return !std::isfinite(H) || H <= kMassFloor; }

}  // namespace

double mass_H(const SolutionExpansion& e, double r) {
  require_radius(e, r);
  double h = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double u = e.phi[k](r);
    const double v = e.phi_tilde[k](r);
    h += u * u + v * v;
  }
  return h;
}

double energy_D(const SolutionExpansion& e, double r) {
  require_radius(e, r);
  return functionals_at(e, r).D;
}

double frequency_N(const SolutionExpansion& e, double r) {
  require_radius(e, r);
  const auto f = functionals_at(e, r);
  if (degenerate(f.H))
    throw DegenerateMassError("H(r) vanishes at r = " + std::to_string(r) +
                              ": the frequency is undefined for the trivial solution");
  return f.D / f.H;
}

double boundary_energy_B(const SolutionExpansion& e, double r) {
  require_radius(e, r);
  return point_data(e, r).grad * std::pow(r, e.dimension);
}

PohozaevResidual check_pohozaev(const SolutionExpansion& e, double r) {
  require_radius(e, r);
  const auto f = functionals_at(e, r);
  return {f.poh1, f.poh2};
}

FrequencyTrace compute_trace(const SolutionExpansion& e) {
  const auto& grid = e.grid();
  const std::size_t n = grid.size();
  const auto data = node_data(e);
  for (std::size_t i = 0; i < n; ++i)
    if (degenerate(data[i].mass))
      throw DegenerateMassError("H(r) vanishes at r = " + std::to_string(grid.r(i)) +
                                ": the frequency is undefined for the trivial solution");
  const auto I = integrands(e, data);
  const auto w = weights(e.dimension);
  const auto energy = integral_from_zero(grid, I.energy, w.energy);
  const auto boundary = integral_from_zero(grid, I.boundary, w.boundary);
  const auto gradient = integral_from_zero(grid, I.gradient, w.gradient);
  const auto vzdu = integral_from_zero(grid, I.v_zdu, w.v_zdu);
  const auto hudv = integral_from_zero(grid, I.h_udv, w.h_udv);

  FrequencyTrace t;
  t.r.assign(grid.radii().begin(), grid.radii().end());
  t.H.resize(n);
  t.D.resize(n);
  t.N.resize(n);
  t.B.resize(n);
  t.res_pohozaev1.resize(n);
  t.res_pohozaev2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = assemble(data[i], grid.r(i), e.dimension, energy[i], boundary[i], gradient[i],
                            vzdu[i], hudv[i]);
    t.H[i] = f.H;
    t.D[i] = f.D;
    t.N[i] = f.D / f.H;
    t.B[i] = f.B;
    t.res_pohozaev1[i] = f.poh1;
    t.res_pohozaev2[i] = f.poh2;
  }
  check_H_derivative(t);
  return t;
}

namespace {

std::vector<double> hprime_residuals(const FrequencyTrace& trace, double floor) {
  const std::size_t n = trace.r.size();
  if (n < 16) throw EstimationError("H' check needs at least 16 radii");
  const RadialGrid grid(trace.r.back(), static_cast<int>(n), trace.r.front() / trace.r.back());
  const auto dH = log_derivative(grid, trace.H);  // r H'
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = 2.0 * trace.D[i];
    const double scale = std::max(std::abs(target), floor * std::abs(trace.H[i]));
    out[i] = scale > 0.0 ? std::abs(dH[i] - target) / scale : 0.0;
  }
  return out;
}

}  // namespace

double check_H_derivative(FrequencyTrace& trace, double floor) {
  trace.res_Hprime = hprime_residuals(trace, floor);
  return *std::max_element(trace.res_Hprime.begin(), trace.res_Hprime.end());
}

double check_H_derivative(const FrequencyTrace& trace, double floor) {
  const auto res = hprime_residuals(trace, floor);
  return *std::max_element(res.begin(), res.end());
}

std::vector<std::size_t> smallest_decade(const FrequencyTrace& trace) {
  std::vector<std::size_t> out;
  if (trace.r.empty()) return out;
  const double top = 10.0 * trace.r.front() * (1 + 1e-12);
  for (std::size_t i = 0; i < trace.r.size() && trace.r[i] <= top; ++i) out.push_back(i);
  return out;
}

namespace {

struct LinearFit {
  double intercept;
  double slope;
  double sse;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f{my, 0.0, 0.0};
  if (sxx > 0.0) {
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - f.intercept - f.slope * x[i];
    f.sse += d * d;
  }
  return f;
}

}  // namespace

GammaEstimate extract_gamma(const FrequencyTrace& trace) {
  const auto idx = smallest_decade(trace);
  if (idx.size() < 8) throw EstimationError("trace does not resolve the smallest decade");
  const double r_top = trace.r[idx.back()];
  std::vector<double> Nv, logr, logH;
  for (auto i : idx) {
    if (degenerate(trace.H[i])) throw DegenerateMassError("H vanishes on the smallest decade");
    Nv.push_back(trace.N[i]);
    logr.push_back(std::log(trace.r[i]));
    logH.push_back(std::log(trace.H[i]));
  }

  // Variable projection: for fixed delta the model is linear in (gamma, c).
  auto fit_for = [&](double delta) {
    std::vector<double> x(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) x[k] = std::pow(trace.r[idx[k]] / r_top, delta);
    return least_squares(x, Nv);
  };
  double best_delta = 1.0;
  double best_sse = std::numeric_limits<double>::infinity();
  constexpr int kScan = 80;
  const double lo = std::log(0.05), hi = std::log(8.0);
  for (int k = 0; k <= kScan; ++k) {
    const double d = std::exp(lo + (hi - lo) * k / kScan);
    const double sse = fit_for(d).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_delta = d;
    }
  }
  // Golden-section refinement around the best scan point.
  double a = best_delta * std::exp(-(hi - lo) / kScan);
  double b = best_delta * std::exp((hi - lo) / kScan);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (fit_for(c).sse < fit_for(d).sse)
      b = d;
    else
      a = c;
  }
  const double delta = 0.5 * (a + b);
  const auto fit = fit_for(delta);

  GammaEstimate g;
  g.delta = delta;
  // The model's value at r -> 0 is the intercept (x -> 0 for delta > 0).
  g.gamma_fit = fit.intercept;
  g.ell = static_cast<int>(std::lround(g.gamma_fit));
  g.distance = std::abs(g.gamma_fit - g.ell);
  g.slope_gamma = 0.5 * least_squares(logr, logH).slope;
  g.estimator_gap = std::abs(g.gamma_fit - g.slope_gamma);
  if (g.distance > kGammaClassificationTol)
    throw ClassificationError("frequency limit " + std::to_string(g.gamma_fit) +
                              " is not close to an integer: asymptotics under-resolved");
  if (g.estimator_gap > kEstimatorAgreementTol)
    throw ClassificationError("frequency fit " + std::to_string(g.gamma_fit) +
                              " and H-slope estimate " + std::to_string(g.slope_gamma) +
                              " disagree");
  return g;
}

double min_mass(const FrequencyTrace& trace) {
  return *std::min_element(trace.H.begin(), trace.H.end());
}

double min_frequency_small(const FrequencyTrace& trace) {
  double m = std::numeric_limits<double>::infinity();
  for (auto i : smallest_decade(trace)) m = std::min(m, trace.N[i]);
  return m;
}

std::optional<double> quasi_monotonicity_constant(const FrequencyTrace& trace, double slack) {
  for (double C : {0.0, 1.0, 10.0, 100.0}) {
    bool ok = true;
    double prev = std::exp(C * trace.r[0]) * (1.0 + trace.N[0]);
    for (std::size_t i = 1; i < trace.r.size() && ok; ++i) {
      const double cur = std::exp(C * trace.r[i]) * (1.0 + trace.N[i]);
      if (cur < prev - slack * std::max(1.0, std::abs(prev))) ok = false;
      prev = cur;
    }
    if (ok) return C;
  }
  return std::nullopt;
}

double doubling_error(const SolutionExpansion& e, const FrequencyTrace& trace, int ell) {
  const double target = std::pow(2.0, 2 * ell);
  double worst = 0.0;
  for (auto i : smallest_decade(trace)) {
    const double r = trace.r[i];
    if (2.0 * r > e.radius()) break;
    const double ratio = mass_H(e, 2.0 * r) / trace.H[i];
    worst = std::max(worst, std::abs(ratio / target - 1.0));
  }
  return worst;
}

void write_trace_csv(std::ostream& out, const FrequencyTrace& t) {
  out << "r,H,D,N,B,res_Hprime,res_poh1,res_poh2\n";
  char buf[256];
  for (std::size_t i = 0; i < t.r.size(); ++i) {
    const double hp = i < t.res_Hprime.size() ? t.res_Hprime[i] : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.r[i],
                  t.H[i], t.D[i], t.N[i], t.B[i], hp, t.res_pohozaev1[i], t.res_pohozaev2[i]);
    out << buf;
  }
}

}  // namespace freqlab
