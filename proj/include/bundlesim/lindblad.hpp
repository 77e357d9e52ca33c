#pragma once

#include <span>
#include <string>
#include <vector>

#include "bundlesim/hilbert.hpp"
#include "bundlesim/model.hpp"

namespace bundlesim {

struct CollapseChannel {
  Operator op;
  double rate = 0.0;
  std::string name;
};

// Sparse d^2 x d^2 generator acting on column-stacked density matrices:
// vec(X)[i + j*d] = X(i, j), with vec(A X B) = (B^T kron A) vec(X).
class Liouvillian {
 public:
  Liouvillian(SparseMatrix super, Index hilbert_dimension, bool dissipative = true);

  const SparseMatrix& matrix() const { return super_; }
  Index hilbert_dimension() const { return d_; }
  Index dimension() const { return super_.rows(); }
  // True when at least one collapse channel has a positive rate.
  bool dissipative() const { return dissipative_; }

  Vector apply(const Vector& v) const { return super_ * v; }

 private:
  SparseMatrix super_;
  Index d_ = 0;
  bool dissipative_ = true;
};

// L vec(rho) = vec(-i[H, rho] + sum_c r_c (c rho c^dag - 1/2 {c^dag c, rho})).
// Throws Error(invalid_argument) for negative rates or dimension mismatch.
Liouvillian build_liouvillian(const Operator& hamiltonian,
                              std::span<const CollapseChannel> channels);

// (a, kappa_a) followed by (sigma_j^-, gamma + gamma_e) for j = 1..3.
std::vector<CollapseChannel> standard_channels(const SystemParams& params,
                                               const SpaceConfig& space);

// Sparse Kronecker product A kron B.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

Vector vectorize(const DenseMatrix& m);
DenseMatrix unvectorize(const Vector& v, Index d);

struct SteadyState {
  DenseMatrix rho;
  double residual = 0.0;  // ||L vec(rho)||_inf after hermitize + renormalize
  int cutoff = -1;        // cavity cutoff, filled by callers that know it
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
};

inline constexpr double kPositivityTolerance = -1e-8;

enum class SteadyStateMethod {
  iterative,  // preconditioned GMRES, falling back to sparse LU
  direct,     // sparse LU only
};

// Solves L vec(rho) = 0 with Tr(rho) = 1 by replacing the row of the
// diagonal element (border_index, border_index) with the trace functional.
// The result is hermitized, renormalized and checked; a singular
// factorization raises numerical_failure.
SteadyState steady_state(const Liouvillian& liouvillian, Index border_index = 0,
                         SteadyStateMethod method = SteadyStateMethod::iterative);

// Same solve, preconditioned by exact LU of the blocks (labels[i],
// labels[j]) of vec(rho). Labels group basis states, e.g. by the photon
// number of a far-detuned mode; weak coupling between groups keeps GMRES
// short. Falls back to sparse LU.
SteadyState steady_state_blocked(const Liouvillian& liouvillian, std::span<const int> labels,
                                 Index border_index = 0);

// Builds H and the standard channels and solves; fills SteadyState::cutoff.
SteadyState solve_steady_state(const SystemParams& params, const SpaceConfig& space);

struct PropagationOptions {
  double relative_tolerance = 1e-8;
  double absolute_tolerance = 1e-14;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  long max_steps = 50'000'000;
};

struct PropagationStats {
  long accepted = 0;
  long rejected = 0;
};

// v(tau) = exp(L tau) v0 on an ascending grid starting at 0, via adaptive
// Dormand-Prince 5(4) with the step limited to land on every grid point.
std::vector<Vector> propagate(const Liouvillian& liouvillian, const Vector& v0,
                              std::span<const double> tau_grid,
                              const PropagationOptions& options = {},
                              PropagationStats* stats = nullptr);

struct ConvergenceRow {
  int cutoff = 0;
  double n_s = 0.0;
  double g2 = 0.0;  // NaN when undefined (vacuum)
  double g3 = 0.0;
  double change_to_next = 0.0;  // max relative change vs the next cutoff; NaN for the last
};

struct ConvergenceReport {
  int chosen_cutoff = -1;
  std::vector<ConvergenceRow> rows;

  std::string table() const;
};

inline constexpr double kConvergenceTolerance = 1e-6;

// Smallest cutoff whose n_s, g2(0), g3(0) change by < 1e-6 (relative) when
// moving to the next cutoff in the list. Throws numerical_failure carrying the
// table when none converges.
ConvergenceReport convergence_scan(const SystemParams& params, std::span<const int> cutoffs);

// Report without the throw, for validation and diagnostics.
ConvergenceReport convergence_table(const SystemParams& params, std::span<const int> cutoffs);

}  // namespace bundlesim
