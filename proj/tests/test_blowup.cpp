#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "freqlab/blowup.hpp"
#include "freqlab/errors.hpp"
#include "freqlab/frequency.hpp"

using namespace freqlab;

namespace {

SolutionExpansion picard(int N, int j, double eps) {
  PicardProblem p;
  p.grid = make_grid(1.0);
  p.dimension = N;
  p.sector = j;
  p.l_max = j + 8;
  p.potential = Potential::constant(eps);
  p.boundary = {{j, {1.0, 0.5}}, {j + 2, {0.3, -0.2}}};
  return picard_solve(p).first;
}

}  // namespace

TEST_CASE("coefficients of homogeneous profiles") {
  const auto g = make_grid(1.3);
  for (int ell = 0; ell <= 5; ++ell) {
    const auto p = alpha_coefficients(manufactured_A(g, 4, ell, 2.5), ell);
    REQUIRE(p.alphas.size() == 1);
    CHECK(p.alphas[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(std::abs(p.alpha_primes[0]) < 1e-14);
    CHECK(p.multiplicity == multiplicity(4, ell));
  }
}

TEST_CASE("coefficients of the V-driven family") {
  for (double R : {1.0, 1.7}) {
    const auto g = make_grid(R);
    const auto p = alpha_coefficients(manufactured_B(g, 4, 1, 1.0, std::nullopt, 1), 1);
    CHECK(p.alpha_primes[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(p.alphas[0]) < 1e-12);
    for (double b : {0.5, -2.0}) {
      const auto q = alpha_coefficients(manufactured_B(g, 4, 1, 1.0, HarmonicAddon{1, b}, 1), 1);
      CHECK(q.alphas[0] == doctest::Approx(b).epsilon(1e-11));
    }
  }
  const auto g = make_grid(1.0);
  const auto b0 = manufactured_B(g, 4, 0, 2.0);
  const auto p0 = alpha_coefficients(b0, 0);
  const auto l0 = rescaling_limit(b0, 0);
  CHECK(l0.phi_tilde_limits[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(l0.phi_limits[0]) < 1e-12);
  CHECK(std::abs(p0.alphas[0]) < 1e-12);
  CHECK(p0.alpha_primes[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rescaling limits") {
  const auto g = make_grid(1.0);
  const auto a = manufactured_A(g, 4, 2, 3.0);
  const auto lim = rescaling_limit(a, 2);
  CHECK(lim.phi_limits[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lim.phi_tilde_limits[0] == 0.0);
  CHECK(agreement_error(alpha_coefficients(a, 2), lim) < 1e-4);
  for (int N : {4, 5})
    for (int j : {0, 1}) {
      const auto e = picard(N, j, 1e-2);
      CHECK(agreement_error(alpha_coefficients(e, j), rescaling_limit(e, j)) < 1e-2);
    }
}

TEST_CASE("missing degree") {
  const auto a = manufactured_A(make_grid(1.0), 4, 2, 1.0);
  CHECK_THROWS_AS(alpha_coefficients(a, 7), SelectionError);
}

TEST_CASE("a jump inside the smallest decade does not settle") {
  const auto g = make_grid(1.0);
  auto e = manufactured_A(g, 4, 0, 1.0);
  std::size_t decade = 0;
  while (g->r(decade + 1) <= 10 * g->r(0) * (1 + 1e-12)) ++decade;
  std::vector<double> v(g->size(), 1.0);
  for (std::size_t i = 2 * decade / 3 + 2; i < g->size(); ++i) v[i] = 2.0;
  e.phi[0] = RadialFunction(g, v);
  CHECK_THROWS_AS(rescaling_limit(e, 0), ResolutionError);
}

TEST_CASE("unique continuation probe") {
  const auto g = make_grid(1.0);
  const auto a = uc_probe(manufactured_A(g, 4, 2, 1.0), 10);
  CHECK(a.classification == UcClass::nontrivial_finite_order);
  CHECK(a.u_order == doctest::Approx(2.0).epsilon(1e-6));
  const auto b = uc_probe(manufactured_B(g, 4, 1, 1.0, std::nullopt, 1), 10);
  CHECK(b.classification == UcClass::nontrivial_finite_order);
  CHECK(b.u_order == doctest::Approx(3.0).epsilon(1e-6));
  const auto z = uc_probe(manufactured_A(g, 4, 0, 0.0), 10);
  CHECK(z.classification == UcClass::trivial);
  CHECK_THROWS_AS(uc_probe(manufactured_A(g, 4, 0, 1.0), 3), ConfigurationError);

  // U identically zero with V nonzero is not a solution; the probe flags it.
  auto bad = manufactured_B(g, 4, 0, 1.0);
  bad.phi[0] = RadialFunction::zero(g);
  CHECK(uc_probe(bad, 10).classification == UcClass::violation);
  CHECK(std::string(to_string(UcClass::violation)) == "VIOLATION");
}

TEST_CASE("scaling equivariance") {
  for (const auto& e : {picard(4, 0, 1e-2), picard(5, 1, 1e-2)}) {
    const int j = e.sectors().front();
    const auto base = alpha_coefficients(e, j);
    const auto cls = uc_probe(e, 10).classification;
    const int ell = extract_gamma(compute_trace(e)).ell;
    for (double c : {0.01, 3.0}) {
      const auto s = e.scaled(c);
      const auto p = alpha_coefficients(s, j);
      for (std::size_t k = 0; k < p.alphas.size(); ++k) {
        CHECK(p.alphas[k] == doctest::Approx(c * base.alphas[k]).epsilon(1e-12));
        CHECK(p.alpha_primes[k] == doctest::Approx(c * base.alpha_primes[k]).epsilon(1e-12));
      }
      CHECK(uc_probe(s, 10).classification == cls);
      CHECK(extract_gamma(compute_trace(s)).ell == ell);
    }
  }
}

TEST_CASE("profile json fields") {
  const auto e = manufactured_A(make_grid(1.0), 4, 1, 1.0);
  const auto p = alpha_coefficients(e, 1);
  const auto j = nlohmann::json::parse(profile_json(p, 1.0, uc_probe(e, 10), 0.0));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  CHECK(keys == std::vector<std::string>{"agreement_rel_err", "alpha", "alpha_prime", "ell", "gamma_fit",
                                         "profile_norm", "uc_classification"});
  CHECK(j["uc_classification"] == "nontrivial-finite-order");
}
