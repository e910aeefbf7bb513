#include <doctest.h>

#include <cmath>
#include <optional>
#include <sstream>

#include "freqlab/errors.hpp"
#include "freqlab/runner.hpp"
#include "freqlab/solver.hpp"

using namespace freqlab;

namespace {

// Modes are matched by (degree, sector); a mode missing on one side counts
// as zero.
double sup_diff(const SolutionExpansion& a, const SolutionExpansion& b) {
  double worst = 0.0;
  auto one_sided = [&](const SolutionExpansion& x, const SolutionExpansion& y) {
    for (std::size_t m = 0; m < x.size(); ++m) {
      std::optional<std::size_t> other;
      try {
        other = y.index_of(x.modes[m].degree(), x.modes[m].sector());
      } catch (const SelectionError&) {
      }
      for (std::size_t i = 0; i < x.grid().size(); ++i) {
        const double p = other ? y.phi[*other][i] : 0.0;
        const double q = other ? y.phi_tilde[*other][i] : 0.0;
        worst = std::max({worst, std::abs(x.phi[m][i] - p), std::abs(x.phi_tilde[m][i] - q)});
      }
    }
  };
  one_sided(a, b);
  one_sided(b, a);
  return worst;
}

double sup_norm(const SolutionExpansion& a) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m)
    s = std::max({s, a.phi[m].sup_norm(), a.phi_tilde[m].sup_norm()});
  return s;
}

PicardProblem problem(int N, int j, double eps, std::map<int, BoundaryDatum> data, double R = 1.0) {
  PicardProblem p;
  p.grid = make_grid(R);
  p.dimension = N;
  p.sector = j;
  p.l_max = j + 8;
  p.potential = eps == 0.0 ? Potential::zero() : Potential::constant(eps);
  p.boundary = std::move(data);
  return p;
}

}  // namespace

TEST_CASE("manufactured_A") {
  const auto g = make_grid(1.0);
  const auto a0 = manufactured_A(g, 4, 0, 1.0);
  for (std::size_t i = 0; i < g->size(); i += 40) {
    CHECK(a0.phi[0][i] == 1.0);
    CHECK(a0.phi_tilde[0][i] == 0.0);
  }
  const auto a2 = manufactured_A(g, 4, 2, 3.0);
  const auto m = a2.index_of(2);
  for (std::size_t i = 0; i < g->size(); i += 40) {
    CHECK(a2.phi[m][i] == doctest::Approx(3 * g->r(i) * g->r(i)).epsilon(1e-15));
    CHECK(a2.phi_tilde[m][i] == 0.0);
  }
  const auto a1 = manufactured_A(g, 5, 1, 1.0);
  CHECK(a1.phi[a1.index_of(1)][123] == doctest::Approx(g->r(123)).epsilon(1e-15));
  CHECK(a1.provenance == Provenance::manufactured_A);
}

TEST_CASE("manufactured_B") {
  const auto g = make_grid(1.0);
  const auto b1 = manufactured_B(g, 4, 1, 1.0, std::nullopt, 1);
  const auto m = b1.index_of(1, 1);
  for (std::size_t i = 0; i < g->size(); i += 40) {
    const double r = g->r(i);
    CHECK(b1.phi_tilde[m][i] == doctest::Approx(r).epsilon(1e-15));
    CHECK(b1.phi[m][i] == doctest::Approx(r * r * r / 14).epsilon(1e-15));
  }
  const auto b0 = manufactured_B(g, 4, 0, 2.0);
  const auto m0 = b0.index_of(0);
  CHECK(b0.phi_tilde[m0][200] == 2.0);
  CHECK(b0.phi[m0][200] == doctest::Approx(std::pow(g->r(200), 2) / 5).epsilon(1e-15));
  const auto with = manufactured_B(g, 4, 0, 2.0, HarmonicAddon{0, 1.0});
  for (std::size_t i = 0; i < g->size(); i += 40) {
    CHECK(with.phi[m0][i] - b0.phi[m0][i] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(with.phi_tilde[m0][i] == b0.phi_tilde[m0][i]);
  }
}

TEST_CASE("manufactured families are exact solutions") {
  const auto g = make_grid(1.0);
  for (int N : {4, 5}) {
    for (int ell = 0; ell <= 5; ++ell) CHECK(max_residual(manufactured_A(g, N, ell, 1.3)) < 1e-10);
    for (int k = 0; k <= 4; ++k) CHECK(max_residual(manufactured_B(g, N, k, 0.7)) < 1e-10);
  }
  CHECK(max_residual(manufactured_B(g, 4, 1, 1.0, HarmonicAddon{0, 1.0})) < 1e-10);
}

TEST_CASE("residual detects a perturbed node") {
  const auto g = make_grid(1.0);
  auto e = manufactured_A(g, 4, 2, 1.0);
  const auto m = e.index_of(2);
  e.phi[m] = e.phi[m].with_value(200, e.phi[m][200] * (1 + 1e-3));
  CHECK(max_residual(e) > 1e-4);
}

TEST_CASE("picard with zero coupling") {
  auto p = problem(4, 0, 0.0, {{2, {1.0, 0.0}}});
  const auto [e, rep] = picard_solve(p);
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  const auto ref = manufactured_A(p.grid, 4, 2, 1.0);
  CHECK(std::abs(e.phi[e.index_of(2)][100] - ref.phi[ref.index_of(2)][100]) < 1e-14);
  CHECK(max_residual(e) < 1e-10);

  const double R = 1.4;
  auto q = problem(4, 1, 0.0, {{1, {std::pow(R, 3) / 14, R}}}, R);
  const auto [b, brep] = picard_solve(q);
  const auto mb = manufactured_B(q.grid, 4, 1, 1.0, std::nullopt, 1);
  CHECK(sup_diff(b, mb) <= 1e-8 * sup_norm(mb));
}

TEST_CASE("picard with small constant coupling") {
  for (int N : {4, 5}) {
    for (int j : {0, 1}) {
      for (double eps : {1e-3, 1e-2}) {
        const std::map<int, BoundaryDatum> data{{j, {1.0, 0.5}}, {j + 2, {0.3, -0.2}}};
        const auto [e, rep] = picard_solve(problem(N, j, eps, data));
        CHECK(rep.converged);
        CHECK(rep.final_delta < 1e-8);
        CHECK(max_residual(e) < 10 * 1e-8);
        for (std::size_t m = 0; m < e.size(); ++m) {
          const int ell = e.modes[m].degree();
          const auto it = data.find(ell);
          const BoundaryDatum d = it == data.end() ? BoundaryDatum{} : it->second;
          CHECK(std::abs(e.phi[m][e.grid().size() - 1] - d.p) <= 1e-12);
          CHECK(std::abs(e.phi_tilde[m][e.grid().size() - 1] - d.q) <= 1e-12);
        }
        for (std::size_t k = 1; k < rep.contraction_estimates.size(); ++k)
          CHECK(rep.contraction_estimates[k] <= rep.contraction_estimates[k - 1] * 1.5);
      }
    }
  }
}

TEST_CASE("picard deviation from the uncoupled solution is O(eps)") {
  const std::map<int, BoundaryDatum> data{{0, {1.0, 0.0}}};
  const auto [base, r0] = picard_solve(problem(4, 0, 0.0, data));
  const auto [e, r1] = picard_solve(problem(4, 0, 1e-2, data));
  CHECK(r1.converged);
  const double d = sup_diff(e, base);
  CHECK(d > 1e-5);
  CHECK(d < 1e-1 * 1.0);
  const auto [e2, r2] = picard_solve(problem(4, 0, 2e-2, data));
  // Linear in eps to leading order.
  CHECK(sup_diff(e2, base) / d == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("picard fixed point") {
  const std::map<int, BoundaryDatum> data{{1, {1.0, 0.5}}, {3, {0.3, -0.2}}};
  auto p = problem(5, 1, 1e-2, data);
  const auto [e, rep] = picard_solve(p);
  const auto again = picard_sweep(e, data);
  CHECK(sup_diff(again, e) < 1e-8);
}

TEST_CASE("superposition in the boundary data") {
  const std::map<int, BoundaryDatum> d1{{0, {1.0, 0.5}}};
  const std::map<int, BoundaryDatum> d2{{2, {0.3, -0.2}}, {4, {0.0, 0.1}}};
  std::map<int, BoundaryDatum> sum = d1;
  for (const auto& [l, d] : d2) sum[l] = d;
  const auto [e1, r1] = picard_solve(problem(4, 0, 1e-2, d1));
  const auto [e2, r2] = picard_solve(problem(4, 0, 1e-2, d2));
  const auto [es, rs] = picard_solve(problem(4, 0, 1e-2, sum));
  double worst = 0.0;
  for (std::size_t m = 0; m < es.size(); ++m)
    for (std::size_t i = 0; i < es.grid().size(); ++i)
      worst = std::max({worst, std::abs(es.phi[m][i] - e1.phi[m][i] - e2.phi[m][i]),
                        std::abs(es.phi_tilde[m][i] - e1.phi_tilde[m][i] - e2.phi_tilde[m][i])});
  CHECK(worst <= 1e-9 * sup_norm(es));
}

TEST_CASE("h = -2a convention") {
  const std::string base =
      "[problem]\nN = 4\nR = 1\nsector_j = 0\nL_max = 8\nfamily = picard\n"
      "[boundary]\np.0 = 1\nq.0 = 0.5\n";
  const auto direct = parse_config(base + "[potential]\nkind = constant\nvalue = 0.01\n");
  const auto from_a = parse_config(base + "[potential]\nkind = constant\nvalue = -0.005\nfrom_a = true\n");
  CHECK(from_a.potential()(0.3) == doctest::Approx(0.01).epsilon(1e-15));
  auto solve = [](const ExperimentConfig& c) {
    PicardProblem p;
    p.grid = make_grid(c.radius, c.grid_points, c.rho_min);
    p.dimension = c.dimension;
    p.sector = c.sector;
    p.l_max = c.l_max;
    p.potential = c.potential();
    p.boundary = c.boundary;
    return picard_solve(p).first;
  };
  CHECK(sup_diff(solve(direct), solve(from_a)) == 0.0);
}

TEST_CASE("nontrivial data give a nontrivial solution, zero data the zero solution") {
  const auto [e, rep] = picard_solve(problem(4, 0, 1e-2, {{2, {0.0, 1e-3}}}));
  CHECK_FALSE(e.is_trivial());
  double largest_decade = 0.0;
  for (std::size_t m = 0; m < e.size(); ++m)
    for (std::size_t i = e.grid().size() - 80; i < e.grid().size(); ++i)
      largest_decade = std::max({largest_decade, std::abs(e.phi[m][i]), std::abs(e.phi_tilde[m][i])});
  CHECK(largest_decade > 1e-14);
  const auto [z, zr] = picard_solve(problem(4, 0, 1e-2, {{0, {0.0, 0.0}}}));
  CHECK(z.is_trivial());
}

TEST_CASE("coupling outside the perturbative range") {
  CHECK(coupling_threshold(4, 0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(picard_solve(problem(4, 0, 2.0, {{0, {1.0, 0.0}}})), DomainError);
}

TEST_CASE("non-convergence reports the iterations") {
  PicardOptions opt;
  opt.max_iter = 1;
  try {
    picard_solve(problem(4, 0, 1e-2, {{0, {1.0, 0.5}}}), opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.report().converged);
    CHECK(e.report().iterations == 1);
  }
}

TEST_CASE("solution csv") {
  const auto e = manufactured_B(make_grid(1.0, 32), 4, 1, 1.0, std::nullopt, 1);
  std::ostringstream out;
  write_solution_csv(out, e);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("r,phi_j1_l1,phit_j1_l1", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 32);
}
