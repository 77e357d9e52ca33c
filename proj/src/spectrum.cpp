#include "bundlesim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "bundlesim/error.hpp"
#include "bundlesim/model.hpp"

namespace bundlesim {

namespace {

constexpr double kRealRootTolerance = 1e-9;

// Manifold ordering template: (photon offset from n, atoms excited).
struct Slot {
  int photon_offset;
  std::array<bool, kAtomCount> excited;
};

constexpr std::array<Slot, 8> kManifoldOrder = {{
    {-1, {false, false, true}},
    {-1, {false, true, false}},
    {-1, {true, false, false}},
    {-2, {true, true, false}},
    {-2, {true, false, true}},
    {-2, {false, true, true}},
    {-3, {true, true, true}},
    {0, {false, false, false}},
}};

int count_excited(const std::array<bool, kAtomCount>& e) {
  return int(e[0]) + int(e[1]) + int(e[2]);
}

// <bra| (chi sum_{j,k} s_j^+ s_k^- + cavity coupling) |ket> for two manifold
// states; diagonal handled by the caller.
Complex off_diagonal(const ManifoldLabel& bra, const ManifoldLabel& ket, double chi, double g_a,
                     double phi) {
  const std::array<Complex, kAtomCount> phase = {std::polar(1.0, phi), Complex(1.0),
                                                 std::polar(1.0, -phi)};
  int differing = 0;
  int raised = -1;   // excited in bra, ground in ket
  int lowered = -1;  // ground in bra, excited in ket
  for (int j = 0; j < kAtomCount; ++j) {
    if (bra.excited[std::size_t(j)] == ket.excited[std::size_t(j)]) continue;
    ++differing;
    if (bra.excited[std::size_t(j)]) {
      raised = j;
    } else {
      lowered = j;
    }
  }
  if (bra.photons == ket.photons) {
    // Exchange hop s_raised^+ s_lowered^-.
    return (differing == 2 && raised >= 0 && lowered >= 0) ? Complex(chi) : Complex(0.0);
  }
  if (differing != 1) return 0.0;
  if (bra.photons == ket.photons + 1 && lowered >= 0) {
    // g a^dag e^{i phi_j} s_j^-
    return g_a * std::sqrt(double(bra.photons)) * phase[std::size_t(lowered)];
  }
  if (ket.photons == bra.photons + 1 && raised >= 0) {
    // h.c.: g a e^{-i phi_j} s_j^+
    return g_a * std::sqrt(double(ket.photons)) * std::conj(phase[std::size_t(raised)]);
  }
  return 0.0;
}

Polynomial make_poly(std::initializer_list<double> ascending) {
  return Polynomial{std::vector<double>(ascending)};
}

void check_manifold(int excitations) {
  if (excitations < 1) {
    throw Error(ErrorCode::invalid_argument,
                "manifold excitation number must be >= 1 (got " + std::to_string(excitations) +
                    ")");
  }
}

std::vector<double> merge_close(std::vector<double> roots) {
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (!out.empty() && std::abs(r - out.back()) <= kRealRootTolerance * (1.0 + std::abs(r))) {
      continue;
    }
    out.push_back(r);
  }
  return out;
}

double newton_polish(const Polynomial& p, double x) {
  for (int it = 0; it < 3; ++it) {
    double value = 0.0;
    double slope = 0.0;
    for (auto c = p.coefficients.rbegin(); c != p.coefficients.rend(); ++c) {
      slope = slope * x + value;
      value = value * x + *c;
    }
    if (slope == 0.0) break;
    const double next = x - value / slope;
    if (!std::isfinite(next) || std::abs(p(next)) >= std::abs(value)) break;
    x = next;
  }
  return x;
}

}  // namespace

std::string ManifoldLabel::to_string() const {
  std::string s = "|" + std::to_string(photons);
  for (bool e : excited) s += e ? ",e" : ",g";
  return s + ">";
}

ManifoldMatrix build_manifold_matrix(int excitations, double chi, double delta_a, double delta,
                                     double g_a, double phi) {
  check_manifold(excitations);
  for (double v : {chi, delta_a, delta, g_a, phi}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "parameters must be finite");
  }

  ManifoldMatrix m;
  m.excitations = excitations;
  m.photon_reference = excitations;
  for (const Slot& slot : kManifoldOrder) {
    const int photons = excitations + slot.photon_offset;
    if (photons < 0) continue;
    m.basis.push_back({photons, slot.excited});
  }

  const Index size = Index(m.basis.size());
  m.matrix = DenseMatrix::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    const ManifoldLabel& bra = m.basis[std::size_t(i)];
    const int k = count_excited(bra.excited);
    // n Delta_a + k (delta + chi): atomic energy delta (k - 3/2) shifted by 3 delta / 2.
    m.matrix(i, i) = bra.photons * delta_a + k * (delta + chi);
    for (Index j = 0; j < size; ++j) {
      if (i == j) continue;
      m.matrix(i, j) = off_diagonal(bra, m.basis[std::size_t(j)], chi, g_a, phi);
    }
  }
  return m;
}

double delta_for(DeltaConvention convention, double delta_a) {
  return convention == DeltaConvention::plus_half ? 0.5 * delta_a : -0.5 * delta_a;
}

DenseMatrix collective_reduce(int excitations, double chi, double delta_a, double g_a,
                              DeltaConvention convention) {
  const double delta = delta_for(convention, delta_a);
  if (excitations == 1) {
    DenseMatrix m(2, 2);
    m << delta + 3.0 * chi, std::sqrt(3.0) * g_a,  //
        std::sqrt(3.0) * g_a, delta_a;
    return m;
  }
  if (excitations == 2) {
    DenseMatrix m(3, 3);
    m << delta_a + delta + 3.0 * chi, 2.0 * g_a, std::sqrt(6.0) * g_a,  //
        2.0 * g_a, 2.0 * delta + 4.0 * chi, 0.0,                        //
        std::sqrt(6.0) * g_a, 0.0, 2.0 * delta_a;
    return m;
  }
  throw Error(ErrorCode::invalid_argument, "collective reduction defined for N = 1, 2 only");
}

int Polynomial::degree() const {
  for (int k = int(coefficients.size()) - 1; k >= 0; --k) {
    if (coefficients[std::size_t(k)] != 0.0) return k;
  }
  return -1;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto c = coefficients.rbegin(); c != coefficients.rend(); ++c) acc = acc * x + *c;
  return acc;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (double c : coefficients) m = std::max(m, std::abs(c));
  return m;
}

std::vector<double> real_roots(const Polynomial& p) {
  const int degree = p.degree();
  if (degree < 0) {
    throw Error(ErrorCode::invalid_argument, "identically zero polynomial has no root set");
  }
  // Deflate exact zero roots.
  int low = 0;
  while (p.coefficients[std::size_t(low)] == 0.0) ++low;
  std::vector<double> roots;
  if (low > 0) roots.push_back(0.0);
  std::vector<double> c(p.coefficients.begin() + low, p.coefficients.begin() + degree + 1);
  const int n = degree - low;

  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (n == 2) {
    const double a = c[2], b = c[1], cc = c[0];
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q == 0.0) {
        roots.push_back(0.0);
      } else {
        roots.push_back(q / a);
        roots.push_back(cc / q);
      }
    } else {
      const double re = -b / (2.0 * a);
      const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
      if (im < kRealRootTolerance * (1.0 + std::abs(re))) roots.push_back(re);
    }
  } else if (n > 2) {
    // Companion matrix of the monic polynomial.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[std::size_t(i)] / c[std::size_t(n)];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::numerical_failure, "companion eigenvalue iteration failed");
    }
    for (const auto& z : solver.eigenvalues()) {
      if (std::abs(z.imag()) < kRealRootTolerance * (1.0 + std::abs(z.real()))) {
        roots.push_back(newton_polish(p, z.real()));
      }
    }
  }
  return merge_close(std::move(roots));
}

std::vector<ResonanceBranch> resonance_branches(int excitations, double chi, double g_a,
                                                DeltaConvention convention) {
  const double g2 = g_a * g_a;
  std::vector<ResonanceBranch> out;
  auto add = [&](int id, std::string name, Polynomial poly) {
    ResonanceBranch b;
    b.manifold = excitations;
    b.id = id;
    b.name = std::move(name);
    b.polynomial = std::move(poly);
    b.roots = real_roots(b.polynomial);
    out.push_back(std::move(b));
  };

  const bool plus = convention == DeltaConvention::plus_half;
  switch (excitations) {
    case 1:
      // det M_coll = 0 with delta = +-Delta_a / 2.
      add(0, "collective",
          plus ? make_poly({-6.0 * g2, 6.0 * chi, 1.0}) : make_poly({6.0 * g2, -6.0 * chi, 1.0}));
      break;
    case 2:
      add(0, "cubic",
          plus ? make_poly({-24.0 * g2 * chi, 24.0 * chi * chi - 14.0 * g2, 18.0 * chi, 3.0})
               : make_poly({24.0 * g2 * chi, 2.0 * g2 - 24.0 * chi * chi, 2.0 * chi, 1.0}));
      break;
    case 3:
      if (!plus) {
        throw Error(ErrorCode::invalid_argument,
                    "N=3 branches are defined for delta = +Delta_a/2 only");
      }
      add(0, "quadratic_a", make_poly({-2.0 * g2, 10.0 * chi, 5.0}));
      add(1, "quadratic_b", make_poly({6.0 * chi * chi - 4.0 * g2, 17.0 * chi, 10.0}));
      add(2, "quartic",
          make_poly({12.0 * g2 * g2 - 12.0 * chi * chi * g2, -62.0 * chi * g2,
                     10.0 * chi * chi - 38.0 * g2, 25.0 * chi, 10.0}));
      break;
    default:
      throw Error(ErrorCode::invalid_argument,
                  "resonance branches available for N = 1, 2, 3 (got " +
                      std::to_string(excitations) + ")");
  }
  return out;
}

std::vector<ResonanceRow> resonance_curves(int excitations, std::span<const double> chi_grid,
                                           double g_a, DeltaConvention convention) {
  for (std::size_t i = 1; i < chi_grid.size(); ++i) {
    if (!(chi_grid[i] > chi_grid[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "chi grid must be strictly increasing");
    }
  }

  struct Curve {
    int index;
    double last;
  };
  // One set of live curves per branch polynomial.
  std::vector<std::vector<Curve>> live;
  std::vector<int> next_index;
  std::vector<ResonanceRow> rows;

  for (double chi : chi_grid) {
    const auto branches = resonance_branches(excitations, chi, g_a, convention);
    live.resize(branches.size());
    next_index.resize(branches.size(), 0);
    std::vector<ResonanceRow> step;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const auto& roots = branches[b].roots;
      std::vector<Curve>& curves = live[b];

      // Greedy nearest pairing between live curves and new roots.
      struct Pair {
        double distance;
        std::size_t curve;
        std::size_t root;
      };
      std::vector<Pair> pairs;
      for (std::size_t c = 0; c < curves.size(); ++c) {
        for (std::size_t r = 0; r < roots.size(); ++r) {
          pairs.push_back({std::abs(curves[c].last - roots[r]), c, r});
        }
      }
      std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        if (x.distance != y.distance) return x.distance < y.distance;
        if (x.curve != y.curve) return x.curve < y.curve;
        return x.root < y.root;
      });
      std::vector<int> root_curve(roots.size(), -1);
      std::vector<bool> curve_used(curves.size(), false);
      for (const Pair& p : pairs) {
        if (curve_used[p.curve] || root_curve[p.root] >= 0) continue;
        curve_used[p.curve] = true;
        root_curve[p.root] = curves[p.curve].index;
      }
      std::vector<Curve> updated;
      for (std::size_t r = 0; r < roots.size(); ++r) {
        if (root_curve[r] < 0) root_curve[r] = next_index[b]++;
        updated.push_back({root_curve[r], roots[r]});
        step.push_back({chi,
                        "N" + std::to_string(excitations) + "." + std::to_string(branches[b].id) +
                            "." + std::to_string(root_curve[r]),
                        roots[r]});
      }
      curves = std::move(updated);
    }
    std::stable_sort(step.begin(), step.end(), [](const ResonanceRow& x, const ResonanceRow& y) {
      return x.branch < y.branch;
    });
    rows.insert(rows.end(), step.begin(), step.end());
  }
  return rows;
}

std::vector<ResonanceRow> resonance_figure(double phi, std::span<const double> chi_grid,
                                           double g_a, DeltaConvention convention) {
  constexpr double kPhaseTolerance = 1e-12;
  const double w = wrap_phase(phi);
  if (std::abs(w) < kPhaseTolerance || std::abs(w - kTwoPi) < kPhaseTolerance) {
    auto rows = resonance_curves(1, chi_grid, g_a, convention);
    auto two = resonance_curves(2, chi_grid, g_a, convention);
    rows.insert(rows.end(), two.begin(), two.end());
    std::stable_sort(rows.begin(), rows.end(), [](const ResonanceRow& x, const ResonanceRow& y) {
      return x.chi < y.chi;
    });
    return rows;
  }
  if (std::abs(w - kTwoPi / 3.0) < kPhaseTolerance) {
    return resonance_curves(3, chi_grid, g_a, convention);
  }
  throw Error(ErrorCode::invalid_argument,
              "resonance curves are tabulated for phi = 0 and phi = 2pi/3 only");
}

}  // namespace bundlesim
