#include <doctest.h>

#include <cmath>

#include "freqlab/frequency.hpp"
#include "oracles/oracles.hpp"

using namespace freqlab;

namespace {

// sup over the oracle nodes with r >= r_lo of the coefficient difference.
double fd_gap(const SolutionExpansion& e, const oracle::FdSolution& fd, double r_lo) {
  double worst = 0.0;
  for (std::size_t m = 0; m < fd.degrees.size(); ++m) {
    const auto k = e.index_of(fd.degrees[m], e.sectors().front());
    for (std::size_t i = 0; i < fd.r.size(); ++i) {
      if (fd.r[i] < r_lo) continue;
      worst = std::max({worst, std::abs(e.phi[k](fd.r[i]) - fd.phi[m][i]),
                        std::abs(e.phi_tilde[k](fd.r[i]) - fd.phi_tilde[m][i])});
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("finite difference oracle reproduces closed forms") {
  // h = 0 with data of manufactured_B(k = 1): phi = r^3/14, phit = r.
  const auto fd = oracle::fd_solve(4, 1, 3, Potential::zero(), {{1, {1.0 / 14, 1.0}}}, 1.0, 1e-7, 2000);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.r.size(); ++i) {
    const double r = fd.r[i];
    worst = std::max({worst, std::abs(fd.phi[0][i] - r * r * r / 14), std::abs(fd.phi_tilde[0][i] - r)});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("picard agrees with the finite difference oracle") {
  for (int N : {4, 5}) {
    for (int j : {0, 1}) {
      const std::map<int, BoundaryDatum> data{{j, {1.0, 0.5}}, {j + 2, {0.3, -0.2}}};
      PicardProblem p;
      p.grid = make_grid(1.0);
      p.dimension = N;
      p.sector = j;
      p.l_max = j + 8;
      p.potential = Potential::constant(1e-2);
      p.boundary = data;
      const auto e = picard_solve(p).first;
      const auto fd = oracle::fd_solve(N, j, j + 8, p.potential, data, 1.0, 1e-7, 4000);
      CHECK(fd_gap(e, fd, 1e-5) < 1e-6);
    }
  }
}

TEST_CASE("picard with a polynomial potential agrees with the oracle") {
  const std::map<int, BoundaryDatum> data{{0, {1.0, 0.0}}, {2, {0.0, 0.4}}};
  PicardProblem p;
  p.grid = make_grid(1.0);
  p.dimension = 4;
  p.sector = 0;
  p.l_max = 8;
  p.potential = Potential::polynomial({0.01, -0.02, 0.03});
  p.boundary = data;
  const auto e = picard_solve(p).first;
  const auto fd = oracle::fd_solve(4, 0, 8, p.potential, data, 1.0, 1e-7, 4000);
  CHECK(fd_gap(e, fd, 1e-5) < 1e-6);
}

TEST_CASE("tensor quadrature oracle reproduces the closed forms") {
  const auto g = make_grid(1.0);
  for (int ell : {0, 1, 2, 3}) {
    const auto e = manufactured_A(g, 5, ell, 1.0);
    for (double r : {0.3, 1.0}) {
      const auto t = oracle::tensor_mass_energy(e, r);
      CHECK(t.H == doctest::Approx(std::pow(r, 2 * ell)).epsilon(1e-10));
      CHECK(std::abs(t.D - ell * std::pow(r, 2 * ell)) < 1e-10 * std::max(1.0, ell * std::pow(r, 2 * ell)));
    }
  }
}
