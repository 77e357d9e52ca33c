#include "bundlesim/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <unsupported/Eigen/IterativeSolvers>

#include "bundlesim/correlations.hpp"
#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

using Triplet = Eigen::Triplet<Complex>;

// A steady state whose residual exceeds this is treated as a failed solve.
constexpr double kResidualLimit = 1e-6;

SparseMatrix sparse_identity(Index d) {
  SparseMatrix id(d, d);
  id.setIdentity();
  return id;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

using SparseLu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Exact LU of the diagonal blocks of a partition of the unknowns, used as a
// GMRES preconditioner. Labels must be set before compute().
class BlockJacobi {
 public:
  void set_labels(std::vector<Index> labels) { labels_ = std::move(labels); }

  BlockJacobi& analyzePattern(const SparseMatrix&) { return *this; }
  BlockJacobi& factorize(const SparseMatrix& a) { return compute(a); }

  BlockJacobi& compute(const SparseMatrix& a) {
    const Index blocks = *std::max_element(labels_.begin(), labels_.end()) + 1;
    members_.assign(std::size_t(blocks), {});
    std::vector<Index> local(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto& m = members_[std::size_t(labels_[i])];
      local[i] = Index(m.size());
      m.push_back(Index(i));
    }
    std::vector<std::vector<Triplet>> entries(static_cast<std::size_t>(blocks));
    for (Index c = 0; c < a.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
        const Index b = labels_[std::size_t(c)];
        if (labels_[std::size_t(it.row())] == b) {
          entries[std::size_t(b)].emplace_back(local[std::size_t(it.row())], local[std::size_t(c)],
                                               it.value());
        }
      }
    }
    lus_.clear();
    info_ = Eigen::Success;
    for (Index b = 0; b < blocks; ++b) {
      const Index n = Index(members_[std::size_t(b)].size());
      SparseMatrix block(n, n);
      block.setFromTriplets(entries[std::size_t(b)].begin(), entries[std::size_t(b)].end());
      auto lu = std::make_unique<SparseLu>();
      lu->compute(block);
      if (lu->info() != Eigen::Success) info_ = Eigen::NumericalIssue;
      lus_.push_back(std::move(lu));
    }
    return *this;
  }

  template <class Rhs>
  Vector solve(const Rhs& r) const {
    Vector out(r.size());
    for (std::size_t b = 0; b < members_.size(); ++b) {
      const auto& m = members_[b];
      Vector rb(Index(m.size()));
      for (std::size_t i = 0; i < m.size(); ++i) rb(Index(i)) = r(m[i]);
      const Vector xb = lus_[b]->solve(rb);
      for (std::size_t i = 0; i < m.size(); ++i) out(m[i]) = xb(Index(i));
    }
    return out;
  }

  Eigen::ComputationInfo info() const { return info_; }

 private:
  std::vector<Index> labels_;
  std::vector<std::vector<Index>> members_;
  std::vector<std::unique_ptr<SparseLu>> lus_;
  Eigen::ComputationInfo info_ = Eigen::Success;
};

// GMRES may stop at its iteration cap with a solution that is already far
// more accurate than the residual check needs; keep it if so.
constexpr double kIterativeAcceptance = 1e-10;

template <class Solver>
bool iterate(Solver& gmres, const SparseMatrix& bordered, const Vector& rhs, Vector& x) {
  gmres.set_restart(150);
  gmres.setTolerance(1e-14);
  gmres.setMaxIterations(150);
  gmres.compute(bordered);
  if (gmres.info() != Eigen::Success && gmres.info() != Eigen::NoConvergence) return false;
  x = gmres.solve(rhs);
  return x.allFinite() && inf_norm(bordered * x - rhs) < kIterativeAcceptance;
}

}  // namespace

Liouvillian::Liouvillian(SparseMatrix super, Index hilbert_dimension, bool dissipative)
    : super_(std::move(super)), d_(hilbert_dimension), dissipative_(dissipative) {
  if (super_.rows() != d_ * d_ || super_.cols() != d_ * d_) {
    throw Error(ErrorCode::invalid_argument, "Liouvillian must be d^2 x d^2");
  }
  super_.makeCompressed();
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(std::size_t(a.nonZeros() * b.nonZeros()));
  for (Index ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
      for (Index kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Vector vectorize(const DenseMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

DenseMatrix unvectorize(const Vector& v, Index d) {
  if (v.size() != d * d) throw Error(ErrorCode::invalid_argument, "vector is not d^2 long");
  return Eigen::Map<const DenseMatrix>(v.data(), d, d);
}

Liouvillian build_liouvillian(const Operator& hamiltonian,
                              std::span<const CollapseChannel> channels) {
  const Index d = hamiltonian.dimension();
  const SparseMatrix id = sparse_identity(d);
  const SparseMatrix& h = hamiltonian.matrix();
  const Complex minus_i(0.0, -1.0);

  // -i (I kron H - H^T kron I)
  SparseMatrix super = minus_i * (kron(id, h) - kron(SparseMatrix(h.transpose()), id));
  bool dissipative = false;
  for (const CollapseChannel& ch : channels) {
    if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) {
      throw Error(ErrorCode::invalid_argument,
                  "collapse rate must be finite and >= 0 (" + ch.name + ")");
    }
    if (ch.op.dimension() != d) {
      throw Error(ErrorCode::invalid_argument, "collapse operator dimension mismatch");
    }
    if (ch.rate == 0.0) continue;
    dissipative = true;
    const SparseMatrix& c = ch.op.matrix();
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    // c rho c^dag -> conj(c) kron c; anticommutator -> I kron cdc + cdc^T kron I
    super += Complex(ch.rate) * (kron(SparseMatrix(c.conjugate()), c) -
                                 0.5 * (kron(id, cdc) + kron(SparseMatrix(cdc.transpose()), id)));
  }
  super.prune(Complex(0.0), 1e-16);
  return Liouvillian(std::move(super), d, dissipative);
}

std::vector<CollapseChannel> standard_channels(const SystemParams& params,
                                               const SpaceConfig& space) {
  std::vector<CollapseChannel> out;
  out.push_back({annihilation(space), params.kappa_a, "a"});
  for (int j = 1; j <= kAtomCount; ++j) {
    out.push_back({pauli(space, j, PauliAxis::minus), params.atomic_decay(),
                   "sigma" + std::to_string(j) + "-"});
  }
  return out;
}

namespace {

SparseMatrix bordered_system(const Liouvillian& liouvillian, Index border_index) {
  const Index d = liouvillian.hilbert_dimension();
  if (!liouvillian.dissipative()) {
    throw Error(ErrorCode::invalid_argument, "steady state needs at least one decay channel");
  }
  if (border_index < 0 || border_index >= d) {
    throw Error(ErrorCode::invalid_argument, "border index out of range");
  }
  const Index border_row = border_index * (d + 1);
  const SparseMatrix& l = liouvillian.matrix();
  std::vector<Triplet> t;
  t.reserve(std::size_t(l.nonZeros() + d));
  for (Index k = 0; k < l.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(l, k); it; ++it) {
      if (it.row() != border_row) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index k = 0; k < d; ++k) t.emplace_back(border_row, k * (d + 1), 1.0);
  SparseMatrix bordered(l.rows(), l.cols());
  bordered.setFromTriplets(t.begin(), t.end());
  bordered.makeCompressed();
  return bordered;
}

Vector direct_solve(const SparseMatrix& bordered, const Vector& rhs) {
  SparseLu lu;
  lu.analyzePattern(bordered);
  lu.factorize(bordered);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical_failure, "steady-state factorization failed",
                "SparseLU: " + lu.lastErrorMessage() +
                    " (degenerate steady manifold or missing dissipation)");
  }
  return lu.solve(rhs);
}

SteadyState finish(const Liouvillian& liouvillian, const Vector& x) {
  const Index d = liouvillian.hilbert_dimension();
  if (!x.allFinite()) {
    throw Error(ErrorCode::numerical_failure, "steady-state solve produced non-finite values");
  }
  SteadyState ss;
  DenseMatrix rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) {
    throw Error(ErrorCode::numerical_failure, "steady state has zero trace");
  }
  rho /= tr.real();
  ss.rho = std::move(rho);
  ss.residual = inf_norm(liouvillian.apply(vectorize(ss.rho)));
  ss.trace_error = std::abs(ss.rho.trace() - Complex(1.0));
  ss.hermiticity_error = (ss.rho - ss.rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(ss.rho, Eigen::EigenvaluesOnly);
  ss.min_eigenvalue = eig.eigenvalues().minCoeff();

  if (!(ss.residual < kResidualLimit)) {
    std::ostringstream os;
    os << "residual " << ss.residual << " exceeds " << kResidualLimit
       << "; the bordered system is near-singular";
    throw Error(ErrorCode::numerical_failure, "steady-state residual too large", os.str());
  }
  return ss;
}

}  // namespace

SteadyState steady_state(const Liouvillian& liouvillian, Index border_index,
                         SteadyStateMethod method) {
  const Index d = liouvillian.hilbert_dimension();
  const SparseMatrix bordered = bordered_system(liouvillian, border_index);
  Vector rhs = Vector::Zero(bordered.rows());
  rhs(border_index * (d + 1)) = 1.0;
  Vector x;
  // Below this size the direct factorization is as fast as the iteration.
  constexpr Index kIterativeThreshold = 64;
  bool solved = false;
  if (method == SteadyStateMethod::iterative && d > kIterativeThreshold) {
    // Restarted GMRES on a threshold incomplete LU. Several times cheaper
    // than the full factorization at production cutoffs; a stall falls
    // through to sparse LU.
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<Complex>> gmres;
    gmres.preconditioner().setFillfactor(20);
    gmres.preconditioner().setDroptol(1e-6);
    solved = iterate(gmres, bordered, rhs, x);
  }
  if (!solved) x = direct_solve(bordered, rhs);
  return finish(liouvillian, x);
}

SteadyState steady_state_blocked(const Liouvillian& liouvillian, std::span<const int> labels,
                                 Index border_index) {
  const Index d = liouvillian.hilbert_dimension();
  if (Index(labels.size()) != d) {
    throw Error(ErrorCode::invalid_argument, "one block label per basis state is required");
  }
  const int groups = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0) {
    throw Error(ErrorCode::invalid_argument, "block labels must be >= 0");
  }
  const SparseMatrix bordered = bordered_system(liouvillian, border_index);
  Vector rhs = Vector::Zero(bordered.rows());
  rhs(border_index * (d + 1)) = 1.0;

  // vec(rho) is column-stacked: entry (i, j) sits at j d + i.
  std::vector<Index> block(std::size_t(d * d));
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      block[std::size_t(j * d + i)] =
          Index(labels[std::size_t(i)]) * groups + labels[std::size_t(j)];
    }
  }
  Eigen::GMRES<SparseMatrix, BlockJacobi> gmres;
  gmres.preconditioner().set_labels(std::move(block));
  Vector x;
  if (!iterate(gmres, bordered, rhs, x)) x = direct_solve(bordered, rhs);
  return finish(liouvillian, x);
}

SteadyState solve_steady_state(const SystemParams& params, const SpaceConfig& space) {
  const Operator h = build_effective_hamiltonian(params, space);
  const auto channels = standard_channels(params, space);
  SteadyState ss = steady_state(build_liouvillian(h, channels));
  ss.cutoff = space.cavity_cutoff;
  return ss;
}

std::vector<Vector> propagate(const Liouvillian& liouvillian, const Vector& v0,
                              std::span<const double> tau_grid, const PropagationOptions& options,
                              PropagationStats* stats) {
  if (tau_grid.empty()) throw Error(ErrorCode::invalid_argument, "empty tau grid");
  if (tau_grid.front() != 0.0) throw Error(ErrorCode::invalid_argument, "tau grid must start at 0");
  for (std::size_t i = 1; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > tau_grid[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "tau grid must be strictly ascending");
    }
  }
  if (v0.size() != liouvillian.dimension()) {
    throw Error(ErrorCode::invalid_argument, "initial vector has wrong length");
  }

  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

  std::vector<Vector> out;
  out.reserve(tau_grid.size());
  out.push_back(v0);

  // Row-major storage makes the repeated products gather-only.
  const Eigen::SparseMatrix<Complex, Eigen::RowMajor> l = liouvillian.matrix();
  const Index n = l.rows();
  Vector y = v0;
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), stage(n), y_new(n), err(n);
  k1.noalias() = l * y;
  double t = 0.0;
  double h = options.initial_step;
  PropagationStats local;

  for (std::size_t target = 1; target < tau_grid.size(); ++target) {
    const double t_end = tau_grid[target];
    while (t < t_end) {
      const double remaining = t_end - t;
      const bool clamp = h >= remaining;
      const double step = clamp ? remaining : h;
      if (step < options.min_step && !clamp) {
        throw Error(ErrorCode::numerical_failure, "propagation step underflow",
                    "step " + std::to_string(step) + " at tau = " + std::to_string(t));
      }
      if (local.accepted + local.rejected > options.max_steps) {
        throw Error(ErrorCode::numerical_failure, "propagation exceeded the step budget");
      }

      stage = y + step * (a21 * k1);
      k2.noalias() = l * stage;
      stage = y + step * (a31 * k1 + a32 * k2);
      k3.noalias() = l * stage;
      stage = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      k4.noalias() = l * stage;
      stage = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      k5.noalias() = l * stage;
      stage = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      k6.noalias() = l * stage;
      y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7.noalias() = l * y_new;
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double scale = options.absolute_tolerance +
                           options.relative_tolerance * std::max(inf_norm(y), inf_norm(y_new));
      const double ratio = inf_norm(err) / scale;
      const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);

      if (ratio <= 1.0) {
        t = clamp ? t_end : t + step;
        y.swap(y_new);
        k1.swap(k7);  // first-same-as-last
        ++local.accepted;
        // A clamped step says nothing about the natural step size.
        if (!clamp || factor < 1.0) h = step * factor;
      } else {
        ++local.rejected;
        h = step * factor;
        if (h < options.min_step) {
          throw Error(ErrorCode::numerical_failure, "propagation step underflow",
                      "step " + std::to_string(h) + " at tau = " + std::to_string(t));
        }
      }
    }
    out.push_back(y);
  }
  if (stats) *stats = local;
  return out;
}

std::string ConvergenceReport::table() const {
  std::ostringstream os;
  os.precision(10);
  os << "cutoff  n_s  g2_0  g3_0  max_rel_change_to_next\n";
  for (const auto& r : rows) {
    os << r.cutoff << "  " << r.n_s << "  " << r.g2 << "  " << r.g3 << "  " << r.change_to_next
       << "\n";
  }
  return os.str();
}

namespace {

double relative_change(double a, double b) {
  const bool a_nan = std::isnan(a), b_nan = std::isnan(b);
  if (a_nan || b_nan) return (a_nan && b_nan) ? 0.0 : std::numeric_limits<double>::infinity();
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

ConvergenceReport convergence_table(const SystemParams& params, std::span<const int> cutoffs) {
  if (cutoffs.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "convergence scan needs at least two cutoffs");
  }
  for (std::size_t i = 1; i < cutoffs.size(); ++i) {
    if (cutoffs[i] <= cutoffs[i - 1]) {
      throw Error(ErrorCode::invalid_argument, "cutoff list must be ascending");
    }
  }
  ConvergenceReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int cutoff : cutoffs) {
    const SpaceConfig space{cutoff, 0};
    const SteadyState ss = solve_steady_state(params, space);
    ConvergenceRow row;
    row.cutoff = cutoff;
    row.n_s = normal_moment(ss.rho, space, 1);
    const bool vacuum = row.n_s <= kMomentFloor;
    row.g2 = vacuum ? nan : g1n_zero(ss.rho, space, 2);
    row.g3 = vacuum ? nan : g1n_zero(ss.rho, space, 3);
    row.change_to_next = nan;
    report.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const auto& a = report.rows[i];
    const auto& b = report.rows[i + 1];
    report.rows[i].change_to_next = std::max(
        {relative_change(a.n_s, b.n_s), relative_change(a.g2, b.g2), relative_change(a.g3, b.g3)});
    if (report.chosen_cutoff < 0 && report.rows[i].change_to_next < kConvergenceTolerance) {
      report.chosen_cutoff = a.cutoff;
    }
  }
  return report;
}

ConvergenceReport convergence_scan(const SystemParams& params, std::span<const int> cutoffs) {
  ConvergenceReport report = convergence_table(params, cutoffs);
  if (report.chosen_cutoff < 0) {
    throw Error(ErrorCode::numerical_failure, "no cutoff converged", report.table());
  }
  return report;
}

}  // namespace bundlesim
