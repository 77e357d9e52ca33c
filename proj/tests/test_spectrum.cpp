#include "bundlesim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "bundlesim/error.hpp"
#include "bundlesim/model.hpp"
#include "doctest.h"

using namespace bundlesim;

namespace {

constexpr double kG = 10.0;

std::vector<double> sorted_eigenvalues(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  std::sort(v.begin(), v.end());
  return v;
}

// Eigenvalues of P_N H P_N from the full Hamiltonian (drive off), shifted by
// +3 delta / 2, restricted to the rows of the manifold matrix.
std::vector<double> projected_spectrum(int excitations, double chi, double delta_a,
                                       double delta, double phi) {
  const SpaceConfig space{excitations + 1, 0};
  SystemParams p;
  p.delta_a = delta_a;
  p.delta_rule = DeltaRule::absolute;
  p.delta_abs = delta;
  p.omega = 0.0;
  p.g_a = kG;
  p.chi = chi;
  p.phi = phi;
  const DenseMatrix h(build_effective_hamiltonian(p, space).matrix());
  const DenseMatrix n(excitation_number(space).matrix());
  std::vector<Index> rows;
  for (Index i = 0; i < space.dimension(); ++i) {
    if (std::lround(n(i, i).real()) == excitations) rows.push_back(i);
  }
  DenseMatrix block(rows.size(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows.size(); ++c) block(r, c) = h(rows[r], rows[c]);
  }
  block += DenseMatrix::Identity(block.rows(), block.cols()) * (1.5 * delta);
  return sorted_eigenvalues(block);
}

double det_manifold(int excitations, double chi, double x, DeltaConvention conv, double phi) {
  const double delta_a = x * kG;
  // At phi = 0 the resonances live in the permutation-symmetric sector.
  if (phi == 0.0 && excitations <= 2) {
    return (collective_reduce(excitations, chi, delta_a, kG, conv) / kG).determinant().real();
  }
  const ManifoldMatrix m =
      build_manifold_matrix(excitations, chi, delta_a, delta_for(conv, delta_a), kG, phi);
  return (m.matrix / kG).determinant().real();
}

// Interpolates det(M_N) as a polynomial in x = Delta_a / g over Chebyshev
// nodes, independently of the closed-form branches.
Polynomial interpolated_det(int excitations, double chi, DeltaConvention conv, double phi) {
  const int degree = phi == 0.0 ? excitations + 1 : 8;
  const int nodes = degree + 1;
  Eigen::MatrixXd v(nodes, nodes);
  Eigen::VectorXd y(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double x = 6.0 * std::cos(std::numbers::pi * (i + 0.5) / nodes);
    for (int k = 0; k < nodes; ++k) v(i, k) = std::pow(x, k);
    y(i) = det_manifold(excitations, chi, x, conv, phi);
  }
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);
  Polynomial p;
  for (int k = 0; k < nodes; ++k) p.coefficients.push_back(std::abs(c(k)) < 1e-9 ? 0.0 : c(k));
  return p;
}

std::vector<double> nonzero(std::vector<double> roots) {
  std::erase_if(roots, [](double r) { return std::abs(r) < 1e-6; });
  return roots;
}

std::vector<double> branch_roots_over_g(int excitations, double chi, DeltaConvention conv) {
  std::vector<double> all;
  for (const auto& b : resonance_branches(excitations, chi, kG, conv)) {
    for (double r : b.roots) all.push_back(r / kG);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-6; }),
            all.end());
  return all;
}

}  // namespace

TEST_CASE("manifold matrix sizes and labels") {
  CHECK(build_manifold_matrix(1, 0, 1, 0.5, kG, 0).matrix.rows() == 4);
  CHECK(build_manifold_matrix(2, 0, 1, 0.5, kG, 0).matrix.rows() == 7);
  const ManifoldMatrix m3 = build_manifold_matrix(3, 0, 1, 0.5, kG, 0);
  CHECK(m3.matrix.rows() == 8);
  CHECK(m3.basis.front().to_string() == "|2,g,g,e>");
  CHECK(m3.basis[3].to_string() == "|1,e,e,g>");
  CHECK(m3.basis[6].to_string() == "|0,e,e,e>");
  CHECK(m3.basis.back().to_string() == "|3,g,g,g>");
  CHECK(build_manifold_matrix(5, 0, 1, 0.5, kG, 0).matrix.rows() == 8);
  CHECK_THROWS_AS(build_manifold_matrix(0, 0, 1, 0.5, kG, 0), Error);
}

TEST_CASE("manifold matrix equals the projected Hamiltonian") {
  for (int n : {1, 2, 3}) {
    for (double phi : {0.0, kTwoPi / 3, 1.3}) {
      for (double chi : {0.0, 4.5, -2.0}) {
        const double delta_a = 13.7, delta = -6.2;
        const ManifoldMatrix m = build_manifold_matrix(n, chi, delta_a, delta, kG, phi);
        CHECK(hermiticity_defect(m.matrix.sparseView()) < 1e-12);
        const auto expected = projected_spectrum(n, chi, delta_a, delta, phi);
        const auto actual = sorted_eigenvalues(m.matrix);
        REQUIRE(expected.size() == actual.size());
        for (std::size_t k = 0; k < actual.size(); ++k) {
          CHECK(actual[k] == doctest::Approx(expected[k]).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("three-excitation matrix at phi = 2pi/3 matches the closed form") {
  const double chi = 3.3, delta_a = 7.9;
  const ManifoldMatrix m = build_manifold_matrix(3, chi, delta_a, delta_a / 2, kG, kTwoPi / 3);
  const Complex w = std::polar(1.0, kTwoPi / 3), wc = std::conj(w);
  const double s2 = std::sqrt(2.0) * kG, s3 = std::sqrt(3.0) * kG, g = kG;
  const double e1 = 2.5 * delta_a + chi, e2 = 2 * delta_a + 2 * chi;
  const double e3 = 1.5 * delta_a + 3 * chi, e4 = 3 * delta_a;
  DenseMatrix ref(8, 8);
  ref << e1, chi, chi, 0, s2 * w, s2, 0, s3 * w,  //
      chi, e1, chi, s2 * w, 0, s2 * wc, 0, s3,    //
      chi, chi, e1, s2, s2 * wc, 0, 0, s3 * wc,   //
      0, s2 * wc, s2, e2, chi, chi, g * wc, 0,    //
      s2 * wc, 0, s2 * w, chi, e2, chi, g, 0,     //
      s2, s2 * w, 0, chi, chi, e2, g * w, 0,      //
      0, 0, 0, g * w, g, g * wc, e3, 0,           //
      s3 * wc, s3, s3 * w, 0, 0, 0, 0, e4;
  CHECK((m.matrix - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("collective reduction spans part of the phi = 0 spectrum") {
  for (int n : {1, 2}) {
    for (auto conv : {DeltaConvention::plus_half, DeltaConvention::minus_half}) {
      const double chi = 2.7, delta_a = -11.0;
      const auto full = sorted_eigenvalues(
          build_manifold_matrix(n, chi, delta_a, delta_for(conv, delta_a), kG, 0.0).matrix);
      for (double e : sorted_eigenvalues(collective_reduce(n, chi, delta_a, kG, conv))) {
        const bool found = std::any_of(full.begin(), full.end(),
                                       [&](double f) { return std::abs(f - e) < 1e-9; });
        CHECK(found);
      }
    }
  }
  CHECK_THROWS_AS(collective_reduce(3, 0, 1, kG), Error);
}

TEST_CASE("branch polynomials") {
  const double g2 = kG * kG, chi = 1.7;
  const auto b1p = resonance_branches(1, chi, kG, DeltaConvention::plus_half);
  REQUIRE(b1p.size() == 1);
  CHECK(b1p[0].polynomial.coefficients == std::vector<double>{-6 * g2, 6 * chi, 1});
  const auto b1m = resonance_branches(1, chi, kG, DeltaConvention::minus_half);
  CHECK(b1m[0].polynomial.coefficients == std::vector<double>{6 * g2, -6 * chi, 1});
  const auto b2p = resonance_branches(2, chi, kG, DeltaConvention::plus_half);
  CHECK(b2p[0].polynomial.coefficients ==
        std::vector<double>{-24 * g2 * chi, 24 * chi * chi - 14 * g2, 18 * chi, 3});
  const auto b3 = resonance_branches(3, chi, kG, DeltaConvention::plus_half);
  REQUIRE(b3.size() == 3);
  CHECK(b3[2].polynomial.degree() == 4);
  CHECK_THROWS_AS(resonance_branches(3, chi, kG, DeltaConvention::minus_half), Error);
  CHECK_THROWS_AS(resonance_branches(4, chi, kG), Error);
}

TEST_CASE("branch roots reproduce the determinant's nonzero roots") {
  struct Case {
    int n;
    DeltaConvention conv;
    double phi;
  };
  const Case cases[] = {{1, DeltaConvention::plus_half, 0.0},
                        {1, DeltaConvention::minus_half, 0.0},
                        {2, DeltaConvention::plus_half, 0.0},
                        {2, DeltaConvention::minus_half, 0.0},
                        {3, DeltaConvention::plus_half, kTwoPi / 3}};
  for (const Case& c : cases) {
    for (double chi_over_g : {0.1, 0.45, 1.0}) {
      const double chi = chi_over_g * kG;
      CAPTURE(c.n);
      CAPTURE(chi_over_g);
      const auto from_det = nonzero(real_roots(interpolated_det(c.n, chi, c.conv, c.phi)));
      const auto from_branches = nonzero(branch_roots_over_g(c.n, chi, c.conv));
      REQUIRE(from_det.size() == from_branches.size());
      for (std::size_t k = 0; k < from_det.size(); ++k) {
        CHECK(from_branches[k] == doctest::Approx(from_det[k]).epsilon(1e-6));
      }
      for (double r : from_branches) {
        const auto full = [&](double x) {
          const ManifoldMatrix m =
              build_manifold_matrix(c.n, chi, x * kG, delta_for(c.conv, x * kG), kG, c.phi);
          return std::abs((m.matrix / kG).determinant());
        };
        CHECK(full(r) < 1e-6 * full(r + 0.01));
      }
    }
  }
}

TEST_CASE("three-excitation determinant factorizes") {
  const double chi = 0.3 * kG;
  const auto branches = resonance_branches(3, chi, kG);
  double ratio0 = 0.0;
  for (double x : {-2.3, -0.7, 0.37, 1.9, 3.1}) {
    const double delta_a = x * kG;
    const ManifoldMatrix m = build_manifold_matrix(3, chi, delta_a, delta_a / 2, kG, kTwoPi / 3);
    double product = 1.0;
    for (const auto& b : branches) product *= b.polynomial(delta_a);
    const double ratio = m.matrix.determinant().real() / product;
    if (ratio0 == 0.0) ratio0 = ratio;
    CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-9));
  }
  CHECK(ratio0 == doctest::Approx(9.0 / 8.0).epsilon(1e-9));
}

TEST_CASE("real roots") {
  CHECK(real_roots({{-6.0, 1.0, 1.0}}) == std::vector<double>{-3.0, 2.0});
  CHECK(real_roots({{1.0, 0.0, 1.0}}).empty());
  CHECK(real_roots({{2.0}}).empty());
  CHECK(real_roots({{4.0, 2.0}}) == std::vector<double>{-2.0});
  // (x - 1)(x - 2)(x - 3)(x + 4)
  const auto r = real_roots({{-24.0, 38.0, -13.0, -2.0, 1.0}});
  REQUIRE(r.size() == 4);
  CHECK(r[0] == doctest::Approx(-4.0));
  CHECK(r[3] == doctest::Approx(3.0));
  // x^2 (x - 5): the exact zero root is deflated.
  const auto z = real_roots({{0.0, 0.0, -5.0, 1.0}});
  REQUIRE(z.size() == 2);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(5.0));
  // Double root merged.
  CHECK(real_roots({{1.0, -2.0, 1.0}}).size() == 1);
}

TEST_CASE("one-photon resonance without exchange") {
  const double chi_grid[] = {0.0};
  const auto rows = resonance_curves(1, chi_grid, kG);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].delta_a_root == doctest::Approx(-std::sqrt(6.0) * kG));
  CHECK(rows[1].delta_a_root == doctest::Approx(std::sqrt(6.0) * kG));
  CHECK(rows[0].branch != rows[1].branch);
}

TEST_CASE("resonance curves keep labels continuous") {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(kG * i / 40.0);
  const auto rows = resonance_curves(2, grid, kG, DeltaConvention::plus_half);
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (const auto& r : rows) curves[r.branch].push_back({r.chi, r.delta_a_root});
  for (const auto& [label, pts] : curves) {
    CHECK(label.rfind("N2.", 0) == 0);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      CHECK(pts[k].first > pts[k - 1].first);
      CHECK(std::abs(pts[k].second - pts[k - 1].second) < 0.2 * kG);
    }
  }
  const double bad[] = {1.0, 1.0};
  CHECK_THROWS_AS(resonance_curves(1, bad, kG), Error);
}

TEST_CASE("resonance figure families") {
  const double grid[] = {0.0, 2.0, 4.0};
  bool n1 = false, n2 = false;
  for (const auto& r : resonance_figure(0.0, grid, kG)) {
    n1 |= r.branch.rfind("N1.", 0) == 0;
    n2 |= r.branch.rfind("N2.", 0) == 0;
  }
  CHECK(n1);
  CHECK(n2);
  for (const auto& r : resonance_figure(kTwoPi / 3, grid, kG)) CHECK(r.branch.rfind("N3.", 0) == 0);
  CHECK_THROWS_AS(resonance_figure(1.0, grid, kG), Error);
}
