#include "freqlab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace freqlab {

namespace {

std::vector<std::size_t> modes_of_degree(const SolutionExpansion& e, int ell) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e.modes[i].degree() == ell) out.push_back(i);
  if (out.empty())
    throw SelectionError("no mode of degree " + std::to_string(ell) + " in the expansion");
  return out;
}

// zeta of mode i, sampled on the grid.
RadialFunction zeta_of(const SolutionExpansion& e, std::size_t i) {
  const int sector = e.modes[i].sector();
  const auto idx = e.sector_indices(sector);
  std::vector<HalfSphereMode> modes;
  std::vector<RadialFunction> phis;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    modes.push_back(e.modes[idx[k]]);
    phis.push_back(e.phi[idx[k]]);
    if (idx[k] == i) pos = k;
  }
  return zeta_functions(modes, phis, e.potential)[pos];
}

// Neville extrapolation to x = 0; returns P_0..P_{n-1} where P_k uses the
// k+1 points closest to 0.
std::vector<double> neville_at_zero(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::vector<double> p = y;
  out[0] = p[0];
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double xa = x[i];
      const double xb = x[i + level];
      p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
    }
    out[level] = p[0];
  }
  return out;
}

}  // namespace

BlowupProfile alpha_coefficients(const SolutionExpansion& e, int ell) {
  const auto idx = modes_of_degree(e, ell);
  const auto& grid = e.grid();
  const double R = grid.radius();
  const int N = e.dimension;
  const double kernel = N + 2.0 * ell - 1.0;
  const double outer = std::pow(R, 1.0 - N - 2.0 * ell) / kernel;

  BlowupProfile p;
  p.ell = ell;
  p.multiplicity = multiplicity(N, ell);
  for (auto i : idx) {
    const auto& phi = e.phi[i];
    const auto& phit = e.phi_tilde[i];
    const auto zeta = zeta_of(e, i);
    const double high_v = integral_from_zero(grid, phit.values(), N + ell).back();
    const double low_v = integral_from_zero(grid, phit.values(), 1.0 - ell).back();
    const double high_z = integral_from_zero(grid, zeta.values(), N + ell).back();
    const double low_z = integral_from_zero(grid, zeta.values(), 1.0 - ell).back();
    const double a = std::pow(R, -ell) * phi[grid.size() - 1] + outer * high_v - low_v / kernel;
    const double ap = std::pow(R, -ell) * phit[grid.size() - 1] - outer * high_z + low_z / kernel;
    p.sectors.push_back(e.modes[i].sector());
    p.alphas.push_back(a);
    p.alpha_primes.push_back(ap);
    p.norm += a * a + ap * ap;
  }
  return p;
}

RescalingLimit rescaling_limit(const SolutionExpansion& e, int ell) {
  const auto idx = modes_of_degree(e, ell);
  const auto& grid = e.grid();
  std::size_t decade = 0;
  while (decade + 1 < grid.size() && grid.r(decade + 1) <= 10.0 * grid.r(0) * (1 + 1e-12)) ++decade;
  if (decade < 6) throw ResolutionError("grid does not resolve a decade near the origin");
  const std::size_t step = decade / 3;
  const std::vector<std::size_t> nodes{0, step, 2 * step, 3 * step};
  std::vector<double> x;
  for (auto n : nodes) x.push_back(grid.r(n));

  auto extrapolate = [&](const RadialFunction& f) {
    std::vector<double> y;
    double scale = 0.0;
    for (auto n : nodes) {
      y.push_back(std::pow(grid.r(n), -ell) * f[n]);
      scale = std::max(scale, std::abs(y.back()));
    }
    const auto P = neville_at_zero(x, y);
    const double last = std::abs(P[3] - P[2]);
    const double previous = std::abs(P[2] - P[1]);
    if (last > 10.0 * previous + 1e-10 * scale + std::numeric_limits<double>::min())
      throw ResolutionError("rescaled coefficients do not settle on the smallest decade");
    return P[3];
  };

  RescalingLimit out;
  for (auto i : idx) {
    out.sectors.push_back(e.modes[i].sector());
    out.phi_limits.push_back(extrapolate(e.phi[i]));
    out.phi_tilde_limits.push_back(extrapolate(e.phi_tilde[i]));
  }
  return out;
}

double agreement_error(const BlowupProfile& profile, const RescalingLimit& limit) {
  if (profile.alphas.size() != limit.phi_limits.size())
    throw ConfigurationError("profile and limit describe different mode sets");
  const double scale = std::sqrt(profile.norm);
  double worst = 0.0;
  for (std::size_t k = 0; k < profile.alphas.size(); ++k) {
    worst = std::max(worst, std::abs(profile.alphas[k] - limit.phi_limits[k]));
    worst = std::max(worst, std::abs(profile.alpha_primes[k] - limit.phi_tilde_limits[k]));
  }
  if (scale == 0.0) return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return worst / scale;
}

const char* to_string(UcClass c) {
  switch (c) {
    case UcClass::nontrivial_finite_order:
      return "nontrivial-finite-order";
    case UcClass::trivial:
      return "trivial";
    case UcClass::violation:
      return "VIOLATION";
  }
  return "?";
}

UcResult uc_probe(const SolutionExpansion& e, int n_max, double floor, double margin) {
  if (n_max < 4) throw ConfigurationError("uc_probe needs n_max >= 4");
  UcResult out;
  out.u_order = std::numeric_limits<double>::infinity();
  for (const auto& f : e.phi) {
    double order = std::numeric_limits<double>::infinity();
    try {
      order = vanishing_order(f, floor);
    } catch (const EstimationError&) {
      // Fewer than four resolved samples: beyond what the grid can order.
    }
    out.u_order = std::min(out.u_order, order);
  }
  if (out.u_order <= n_max + margin) {
    out.classification = UcClass::nontrivial_finite_order;
    out.note = "U vanishes to order " + std::to_string(out.u_order);
    return out;
  }
  if (e.is_trivial(floor)) {
    out.classification = UcClass::trivial;
    out.note = "U and V below the floor";
  } else {
    out.classification = UcClass::violation;
    out.note = "U vanishes beyond order " + std::to_string(n_max) + " while V does not";
  }
  return out;
}

std::string profile_json(const BlowupProfile& profile, double gamma_fit, const UcResult& uc,
                         double agreement_rel_err) {
  nlohmann::ordered_json j;
  j["ell"] = profile.ell;
  j["gamma_fit"] = gamma_fit;
  j["alpha"] = profile.alphas;
  j["alpha_prime"] = profile.alpha_primes;
  j["profile_norm"] = profile.norm;
  j["uc_classification"] = to_string(uc.classification);
  j["agreement_rel_err"] = agreement_rel_err;
  return j.dump(2) + "\n";
}

}  // namespace freqlab
