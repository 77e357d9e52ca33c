#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "bundlesim/commands.hpp"
#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

constexpr int kRootDraws = 50;
constexpr std::uint64_t kRootSeed = 20240917;

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

// Reference point when the configuration names no detuning: the
// single-photon dip at Delta_a = 2.5 g.
SystemParams reference_params(const Config& c) {
  SystemParams p = c.params;
  if (!c.has("delta_a")) p.delta_a = 2.5 * p.g_a;
  return p;
}

SuiteResult hermiticity(const Config& c) {
  const SpaceConfig space{std::min(c.cutoff, 6), 0};
  const SystemParams p = reference_params(c);
  const Operator h = build_effective_hamiltonian(p, space);
  const double defect = hermiticity_defect(h.matrix());
  // Trace preservation: the row vector vec(I)^T L must vanish.
  const Liouvillian l = build_liouvillian(h, standard_channels(p, space));
  Vector id = vectorize(DenseMatrix::Identity(space.dimension(), space.dimension()));
  const double trace_leak = (l.matrix().adjoint() * id).cwiseAbs().maxCoeff();
  return {"hermiticity", defect < 1e-12 && trace_leak < 1e-10,
          fmt("max|H - H^dag| = %.2e, max|vec(I)^T L| = %.2e", defect, trace_leak)};
}

SuiteResult conservation(const Config& c) {
  const SpaceConfig space{std::min(c.cutoff, 6), 0};
  SystemParams p = reference_params(c);
  p.omega = 0.0;
  const Operator h = build_effective_hamiltonian(p, space);
  const Operator n = excitation_number(space);
  const SparseMatrix comm = (h * n - n * h).matrix();
  double worst = 0.0;
  for (int k = 0; k < comm.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(comm, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  }
  return {"conservation", worst < 1e-12, fmt("max|[H, N]| at omega = 0: %.2e", worst)};
}

// Manifold matrices against P_N H P_N cut from the full Hamiltonian, entry by
// entry, at the configured exchange convention and a nonzero chi.
SuiteResult projection(const Config& c) {
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const SpaceConfig space{n + 1, 0};
    for (double phi : {0.0, kTwoPi / 3, c.params.phi}) {
      for (double chi : {c.params.chi, 0.45 * c.params.g_a}) {
        SystemParams p = reference_params(c);
        p.omega = 0.0;
        p.phi = phi;
        p.chi = chi;
        const DenseMatrix h(build_effective_hamiltonian(p, space).matrix());
        const ManifoldMatrix m = build_manifold_matrix(n, p.chi, p.delta_a, p.delta(), p.g_a, phi);
        std::vector<Index> rows;
        for (const ManifoldLabel& label : m.basis) {
          rows.push_back(encode(space, BasisState{label.photons, 0, label.excited}));
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
          for (std::size_t k = 0; k < rows.size(); ++k) {
            Complex expected = h(rows[r], rows[k]);
            if (r == k) expected += 1.5 * p.delta();
            worst = std::max(worst, std::abs(expected - m.matrix(Index(r), Index(k))));
          }
        }
      }
    }
  }
  return {"projection", worst < 1e-10,
          fmt("max entry difference vs projected H: %.2e (exchange_pairs = ", worst) +
              to_string(c.params.exchange) + ")"};
}

double row_norm_product(const DenseMatrix& m) {
  double s = 1.0;
  for (Index i = 0; i < m.rows(); ++i) s *= m.row(i).norm();
  return s;
}

// Every root of det(A + Delta_a B) from the generalized eigenproblem; the
// matrices are affine in Delta_a when delta tracks Delta_a.
std::vector<double> pencil_roots(const std::function<DenseMatrix(double)>& matrix_at) {
  const DenseMatrix a = matrix_at(0.0);
  const DenseMatrix b = matrix_at(1.0) - a;
  const DenseMatrix m = -b.inverse() * a;
  Eigen::ComplexEigenSolver<DenseMatrix> es(m);
  std::vector<double> roots;
  for (Index i = 0; i < m.rows(); ++i) {
    const Complex z = es.eigenvalues()(i);
    if (std::abs(z.imag()) < 1e-7 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> all_branch_roots(int n, double chi, double g, DeltaConvention conv) {
  std::vector<double> roots;
  for (const auto& b : resonance_branches(n, chi, g, conv)) {
    roots.insert(roots.end(), b.roots.begin(), b.roots.end());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

SuiteResult determinant_roots(const Config&) {
  std::mt19937_64 rng(kRootSeed);
  std::uniform_real_distribution<double> chi_over_g(0.0, 1.0);
  std::uniform_real_distribution<double> coupling(1.0, 20.0);
  double worst_det = 0.0;
  double worst_root = 0.0;
  double worst_ratio = 0.0;
  bool counts_match = true;
  for (int draw = 0; draw < kRootDraws; ++draw) {
    const double g = coupling(rng);
    const double chi = chi_over_g(rng) * g;
    struct Family {
      int n;
      DeltaConvention conv;
      bool symmetric_sector;
    };
    for (const Family f :
         {Family{1, DeltaConvention::plus_half, true}, Family{1, DeltaConvention::minus_half, true},
          Family{2, DeltaConvention::plus_half, true}, Family{2, DeltaConvention::minus_half, true},
          Family{3, DeltaConvention::plus_half, false}}) {
      const auto matrix_at = [&](double delta_a) -> DenseMatrix {
        if (f.symmetric_sector) return collective_reduce(f.n, chi, delta_a, g, f.conv);
        return build_manifold_matrix(f.n, chi, delta_a, delta_for(f.conv, delta_a), g, kTwoPi / 3)
            .matrix;
      };
      const auto branch = all_branch_roots(f.n, chi, g, f.conv);
      const auto oracle = pencil_roots(matrix_at);
      if (branch.size() != oracle.size()) {
        counts_match = false;
        continue;
      }
      for (std::size_t k = 0; k < branch.size(); ++k) {
        worst_root = std::max(worst_root, std::abs(branch[k] - oracle[k]) / g);
        const DenseMatrix m = matrix_at(branch[k]);
        worst_det = std::max(worst_det, std::abs(m.determinant()) / row_norm_product(m));
      }
    }
    // det M_3 = (9/8) prod of the branch polynomials, away from roots.
    const auto branches = resonance_branches(3, chi, g);
    for (double x : {-3.3, 0.41, 2.7}) {
      const double delta_a = x * g;
      double product = 1.0;
      for (const auto& b : branches) product *= b.polynomial(delta_a);
      const Complex det =
          build_manifold_matrix(3, chi, delta_a, delta_a / 2, g, kTwoPi / 3).matrix.determinant();
      worst_ratio = std::max(worst_ratio, std::abs(det / product - 9.0 / 8.0));
    }
  }
  // Without exchange the one-excitation resonances sit at +-sqrt(6) g.
  double sqrt6 = 0.0;
  for (double g : {1.0, 10.0}) {
    const auto r = all_branch_roots(1, 0.0, g, DeltaConvention::plus_half);
    if (r.size() != 2) {
      sqrt6 = INFINITY;
      break;
    }
    sqrt6 = std::max(
        {sqrt6, std::abs(r[0] + std::sqrt(6.0) * g) / g, std::abs(r[1] - std::sqrt(6.0) * g) / g});
  }
  const bool ok =
      counts_match && worst_det < 1e-8 && worst_root < 1e-8 && worst_ratio < 1e-8 && sqrt6 < 1e-10;
  std::string detail = std::to_string(kRootDraws) + " draws: " +
                       fmt("max |det|/scale at roots %.2e, max root offset vs pencil %.2e g",
                           worst_det, worst_root) +
                       fmt(", factorization error %.2e, +-sqrt6 g error %.2e", worst_ratio, sqrt6);
  if (!counts_match) detail += ", root counts differ";
  return {"determinant roots", ok, detail};
}

SuiteResult steady_state_sanity(const Config& c) {
  const SpaceConfig space{std::min(c.cutoff, 8), 0};
  const SteadyState ss = solve_steady_state(reference_params(c), space);
  bool ok = ss.trace_error < 1e-12 && ss.hermiticity_error < 1e-12 &&
            ss.min_eigenvalue > kPositivityTolerance && ss.residual < 1e-6;
  std::string detail =
      fmt("trace error %.2e, hermiticity %.2e", ss.trace_error, ss.hermiticity_error) +
      fmt(", min eigenvalue %.2e, residual %.2e", ss.min_eigenvalue, ss.residual);

  // A driven atom decoupled from the cavity has a closed-form population.
  SystemParams atom;
  atom.g_a = 0.0;
  atom.delta_a = 3.0;
  atom.delta_rule = DeltaRule::absolute;
  atom.delta_abs = 0.7;
  atom.omega = 0.4;
  atom.gamma = 0.3;
  const SpaceConfig small{1, 0};
  const SteadyState free = solve_steady_state(atom, small);
  const double expected =
      atom.omega * atom.omega /
      (atom.delta_abs * atom.delta_abs + atom.gamma * atom.gamma / 4 + 2 * atom.omega * atom.omega);
  const DenseMatrix proj(
      (pauli(small, 1, PauliAxis::plus) * pauli(small, 1, PauliAxis::minus)).matrix());
  const double err = std::abs((proj * free.rho).trace().real() - expected);
  ok = ok && err < 1e-10;
  detail += fmt(", driven-atom population error %.2e", err);
  return {"steady state", ok, detail};
}

SuiteResult regression(const Config& c) {
  const SpaceConfig space{std::min(c.cutoff, 6), 0};
  const SystemParams p = reference_params(c);
  const Liouvillian l =
      build_liouvillian(build_effective_hamiltonian(p, space), standard_channels(p, space));
  const SteadyState ss = steady_state(l);
  if (normal_moment(ss.rho, space, 1) <= kMomentFloor) {
    return {"regression", false, "vacuum steady state, correlations undefined"};
  }
  const auto grid = tau_grid(40.0, 41);
  const CorrelationTrace t = gn2_tau(l, ss.rho, space, 1, grid);
  const double zero = std::abs(t.value.front() - g1n_zero(ss.rho, space, 2)) / t.value.front();
  const double tail = std::abs(t.value.back() - 1.0);
  return {"regression", zero < 1e-10 && tail < 1e-3,
          fmt("g(0) vs moments %.2e (relative), |g(40) - 1| = %.2e", zero, tail)};
}

SuiteResult determinism(const Config& c) {
  SweepSpec s;
  s.axis1 = {SweepAxis::delta_a, -2.0 * c.params.g_a, 3.0 * c.params.g_a, 4};
  s.axis2 = AxisSpec{SweepAxis::chi, 0.0, 0.5 * c.params.g_a, 2};
  s.base = reference_params(c);
  s.cutoff = 4;
  s.workers = 1;
  const std::string one = to_csv(run_sweep(s));
  s.workers = 4;
  const std::string four = to_csv(run_sweep(s));
  return {"determinism", one == four,
          one == four ? "1 and 4 workers give byte-identical CSV" : "CSV differs across workers"};
}

SuiteResult convergence(const Config& c) {
  const std::vector<int> cutoffs{c.cutoff, c.cutoff + 2};
  const ConvergenceReport r = convergence_table(reference_params(c), cutoffs);
  const double change = r.rows.front().change_to_next;
  return {"convergence", std::isfinite(change) && change < kConvergenceTolerance,
          "cutoff " + std::to_string(c.cutoff) + " -> " + std::to_string(c.cutoff + 2) +
              fmt(": max relative change %.2e", change)};
}

}  // namespace

namespace {

struct Suite {
  const char* name;
  SuiteResult (*run)(const Config&);
};

constexpr Suite kSuites[] = {{"hermiticity", hermiticity},
                             {"conservation", conservation},
                             {"projection", projection},
                             {"determinant roots", determinant_roots},
                             {"steady state", steady_state_sanity},
                             {"regression", regression},
                             {"determinism", determinism},
                             {"convergence", convergence}};

SuiteResult run_guarded(const Suite& s, const Config& config) {
  try {
    return s.run(config);
  } catch (const Error& e) {
    return {s.name, false, std::string("error: ") + e.what()};
  }
}

}  // namespace

std::vector<SuiteResult> validation_suites(const Config& config) {
  config.params.validate();
  std::vector<SuiteResult> out;
  for (const Suite& s : kSuites) out.push_back(run_guarded(s, config));
  return out;
}

SuiteResult validation_suite(std::string_view name, const Config& config) {
  config.params.validate();
  for (const Suite& s : kSuites) {
    if (name == s.name) return run_guarded(s, config);
  }
  throw Error(ErrorCode::invalid_argument, "unknown validation suite '" + std::string(name) + "'");
}

}  // namespace bundlesim
