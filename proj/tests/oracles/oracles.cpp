#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using boost::multiprecision::cpp_rational;

double gegenbauer_exact(int n, int alpha_twice, double x) {
  const cpp_rational alpha(alpha_twice, 2);
  const cpp_rational X(x);
  cpp_rational sum = 0;
  for (int k = 0; 2 * k <= n; ++k) {
    cpp_rational term = (k % 2 == 0) ? 1 : -1;
    for (int i = 0; i < n - k; ++i) term *= alpha + i;
    for (int i = 2; i <= k; ++i) term /= i;
    for (int i = 2; i <= n - 2 * k; ++i) term /= i;
    for (int i = 0; i < n - 2 * k; ++i) term *= 2 * X;
    sum += term;
  }
  return static_cast<double>(sum);
}

namespace {

void monomials(int vars, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == vars - 1) {
    cur.push_back(degree);
    if (degree % 2 == 0) out.push_back(cur);  // even in the last variable
    cur.pop_back();
    return;
  }
  for (int a = 0; a <= degree; ++a) {
    cur.push_back(a);
    monomials(vars, degree - a, cur, out);
    cur.pop_back();
  }
}

}  // namespace

long long harmonic_count(int dimension, int ell) {
  const int vars = dimension + 1;
  std::vector<std::vector<int>> domain, image;
  std::vector<int> cur;
  monomials(vars, ell, cur, domain);
  if (ell >= 2) monomials(vars, ell - 2, cur, image);
  if (image.empty()) return static_cast<long long>(domain.size());
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < image.size(); ++i) index[image[i]] = static_cast<int>(i);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(image.size(), domain.size());
  for (std::size_t c = 0; c < domain.size(); ++c) {
    for (int v = 0; v < vars; ++v) {
      const int a = domain[c][v];
      if (a < 2) continue;
      auto m = domain[c];
      m[v] -= 2;
      lap(index.at(m), c) += a * (a - 1.0);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lap);
  return static_cast<long long>(domain.size()) - lu.rank();
}

std::function<double(double)> sector_profile(int dimension, int ell, int sector) {
  const int K = (ell - sector) / 2;
  Eigen::VectorXd a(K + 1);
  if (K == 0) {
    a(0) = 1.0;
  } else {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K + 1);
    for (int k = 0; k <= K; ++k) {
      const int t = ell - sector - 2 * k;
      if (k < K) m(k, k) += t * (t - 1.0);
      if (k > 0) m(k - 1, k) += 2.0 * k * (2.0 * k + dimension - 2 + 2.0 * sector);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != 1) throw std::runtime_error("sector harmonic kernel is not one-dimensional");
    a = ker.col(0);
  }
  return [a, ell, sector, K](double psi) {
    const double s = std::sin(psi), c = std::cos(psi);
    double sum = 0.0;
    for (int k = 0; k <= K; ++k)
      sum += a(k) * std::pow(s, 2 * k) * std::pow(c, ell - sector - 2 * k);
    return std::pow(s, sector) * sum;
  };
}

double polar_integral(int dimension, const std::function<double(double)>& f) {
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const int panels = 4;
  const double w = M_PI / 2 / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p)
    sum += Rule::integrate(
        [&](double psi) { return f(psi) * std::pow(std::sin(psi), dimension - 1); }, p * w,
        (p + 1) * w);
  return sum;
}

MassEnergy tensor_mass_energy(const freqlab::SolutionExpansion& e, double r) {
  const auto sectors = e.sectors();
  if (sectors.size() != 1) throw std::invalid_argument("tensor oracle handles one sector");
  const int N = e.dimension;
  const int j = sectors.front();
  const std::size_t M = e.size();

  // psi nodes: 4 panels of 30-point Gauss-Legendre.
  using Rule = boost::math::quadrature::gauss<double, 30>;
  std::vector<double> psi, wpsi;
  const int panels = 4;
  const double pw = M_PI / 2 / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * pw;
    for (std::size_t k = 0; k < Rule::abscissa().size(); ++k) {
      const double x = Rule::abscissa()[k];
      const double w = Rule::weights()[k];
      for (double sgn : {-1.0, 1.0}) {
        if (x == 0.0 && sgn < 0) continue;
        psi.push_back(a + pw / 2 * (1 + sgn * x));
        wpsi.push_back(w * pw / 2 * std::pow(std::sin(psi.back()), N - 1));
      }
    }
  }
  std::vector<std::vector<double>> P(M), dP(M);
  for (std::size_t m = 0; m < M; ++m)
    for (double t : psi) {
      P[m].push_back(e.modes[m].profile(t));
      dP[m].push_back(e.modes[m].profile_derivative(t));
    }
  std::vector<double> eq(M);
  for (std::size_t m = 0; m < M; ++m) eq[m] = e.modes[m].profile(M_PI / 2);
  const double tangential = j * (j + N - 2.0);

  MassEnergy out;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    double F = 0.0, G = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      F += e.phi[m](r) * P[m][k];
      G += e.phi_tilde[m](r) * P[m][k];
    }
    out.H += wpsi[k] * (F * F + G * G);
  }

  // Volume and flat-boundary integrals in x = log s, panels of width ~0.2.
  using SRule = boost::math::quadrature::gauss<double, 10>;
  const double x0 = std::log(e.grid().r(0));
  const double x1 = std::log(r);
  const int sp = std::max(1, static_cast<int>(std::ceil((x1 - x0) / 0.2)));
  const double sw = (x1 - x0) / sp;
  double volume = 0.0, flat = 0.0;
  for (int p = 0; p < sp; ++p) {
    const double a = x0 + p * sw;
    for (std::size_t q = 0; q < SRule::abscissa().size(); ++q) {
      for (double sgn : {-1.0, 1.0}) {
        const double xq = SRule::abscissa()[q];
        if (xq == 0.0 && sgn < 0) continue;
        const double x = a + sw / 2 * (1 + sgn * xq);
        const double wx = SRule::weights()[q] * sw / 2;
        const double s = std::exp(x);
        std::vector<double> f(M), fd(M), g(M), gd(M);
        for (std::size_t m = 0; m < M; ++m) {
          f[m] = e.phi[m](s);
          fd[m] = e.phi[m].derivative_at(s);
          g[m] = e.phi_tilde[m](s);
          gd[m] = e.phi_tilde[m].derivative_at(s);
        }
        double inner = 0.0;
        for (std::size_t k = 0; k < psi.size(); ++k) {
          double F = 0, Fs = 0, Fp = 0, G = 0, Gs = 0, Gp = 0;
          for (std::size_t m = 0; m < M; ++m) {
            F += f[m] * P[m][k];
            Fs += fd[m] * P[m][k];
            Fp += f[m] * dP[m][k];
            G += g[m] * P[m][k];
            Gs += gd[m] * P[m][k];
            Gp += g[m] * dP[m][k];
          }
          const double sn = std::sin(psi[k]);
          const double ang = tangential / (s * s * sn * sn);
          inner += wpsi[k] * (Fs * Fs + Fp * Fp / (s * s) + ang * F * F + Gs * Gs +
                              Gp * Gp / (s * s) + ang * G * G + F * G);
        }
        volume += wx * s * std::pow(s, N) * inner;
        if (!e.potential.is_zero()) {
          double u = 0.0, v = 0.0;
          for (std::size_t m = 0; m < M; ++m) {
            u += f[m] * eq[m];
            v += g[m] * eq[m];
          }
          flat += wx * s * e.potential(s) * std::pow(s, N - 1) * u * v;
        }
      }
    }
  }
  out.D = std::pow(r, 1.0 - N) * (volume - flat);
  return out;
}

namespace {

struct FdRaw {
  std::vector<std::vector<double>> phi, phit;
};

FdRaw fd_raw(int N, const std::vector<freqlab::HalfSphereMode>& modes, const freqlab::Potential& h,
             const std::map<int, freqlab::BoundaryDatum>& boundary, double R, double r_min,
             int n) {
  const int M = static_cast<int>(modes.size());
  const int unknowns = 2 * M * (n + 1);
  const double x0 = std::log(r_min), x1 = std::log(R);
  const double dx = (x1 - x0) / n;
  auto col = [&](int i, int m, int comp) { return (i * M + m) * 2 + comp; };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  for (int i = 0; i <= n; ++i) {
    const double r = std::exp(x0 + i * dx);
    const double hr = h(r);
    for (int m = 0; m < M; ++m) {
      const int ell = modes[m].degree();
      const double lam = ell * (N - 1.0 + ell);
      for (int comp = 0; comp < 2; ++comp) {
        const int row = col(i, m, comp);
        if (i == n) {
          trip.emplace_back(row, row, 1.0);
          const auto it = boundary.find(ell);
          if (it != boundary.end()) rhs(row) = comp == 0 ? it->second.p : it->second.q;
          continue;
        }
        if (i == 0) {
          trip.emplace_back(row, col(0, m, comp), -1.5 / dx - ell);
          trip.emplace_back(row, col(1, m, comp), 2.0 / dx);
          trip.emplace_back(row, col(2, m, comp), -0.5 / dx);
          continue;
        }
        trip.emplace_back(row, col(i - 1, m, comp), 1.0 / (dx * dx) - (N - 1.0) / (2 * dx));
        trip.emplace_back(row, col(i, m, comp), -2.0 / (dx * dx) - lam);
        trip.emplace_back(row, col(i + 1, m, comp), 1.0 / (dx * dx) + (N - 1.0) / (2 * dx));
        if (comp == 0) {
          trip.emplace_back(row, col(i, m, 1), -r * r);
        } else if (hr != 0.0) {
          // + r^2 zeta_l = r h e_l sum e_l' phi_l'
          for (int mm = 0; mm < M; ++mm)
            trip.emplace_back(row, col(i, mm, 0),
                              r * hr * modes[m].equator_value() * modes[mm].equator_value());
        }
      }
    }
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("finite difference factorisation failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  FdRaw out;
  out.phi.assign(M, std::vector<double>(n + 1));
  out.phit.assign(M, std::vector<double>(n + 1));
  for (int i = 0; i <= n; ++i)
    for (int m = 0; m < M; ++m) {
      out.phi[m][i] = sol(col(i, m, 0));
      out.phit[m][i] = sol(col(i, m, 1));
    }
  return out;
}

}  // namespace

FdSolution fd_solve(int dimension, int sector, int l_max, const freqlab::Potential& h,
                    const std::map<int, freqlab::BoundaryDatum>& boundary, double radius,
                    double r_min, int intervals) {
  const auto modes = freqlab::build_sector(dimension, sector, l_max);
  const auto coarse = fd_raw(dimension, modes, h, boundary, radius, r_min, intervals);
  const auto fine = fd_raw(dimension, modes, h, boundary, radius, r_min, 2 * intervals);
  FdSolution out;
  const double x0 = std::log(r_min), dx = (std::log(radius) - x0) / intervals;
  for (int i = 0; i <= intervals; ++i) out.r.push_back(std::exp(x0 + i * dx));
  for (std::size_t m = 0; m < modes.size(); ++m) {
    out.degrees.push_back(modes[m].degree());
    std::vector<double> p(intervals + 1), q(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
      p[i] = (4.0 * fine.phi[m][2 * i] - coarse.phi[m][i]) / 3.0;
      q[i] = (4.0 * fine.phit[m][2 * i] - coarse.phit[m][i]) / 3.0;
    }
    out.phi.push_back(std::move(p));
    out.phi_tilde.push_back(std::move(q));
  }
  return out;
}

}  // namespace oracle
