#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <complex>
#include <cstdint>

namespace bundlesim {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr int kAtomCount = 3;
inline constexpr int kSpinStates = 1 << kAtomCount;

// Truncated cavity (x optional auxiliary cavity) x three two-level atoms.
//
// Basis ordering: the cavity photon number is the slowest index, then the
// auxiliary photon number (only when aux_cutoff > 0), then atoms 1, 2, 3 with
// atom 3 fastest. Spin state 0 is |g>, 1 is |e>:
//
//   index = ((n * (aux_cutoff + 1)) + m) * 8 + 4*s1 + 2*s2 + s3
struct SpaceConfig {
  int cavity_cutoff = 12;
  int aux_cutoff = 0;  // 0: no auxiliary mode

  Index cavity_levels() const { return cavity_cutoff + 1; }
  Index aux_levels() const { return aux_cutoff + 1; }
  Index dimension() const { return cavity_levels() * aux_levels() * kSpinStates; }
  bool has_aux_mode() const { return aux_cutoff > 0; }

  // Throws Error(invalid_argument) for cutoffs < 1 or negative aux cutoff.
  void validate() const;
};

struct BasisState {
  int photons = 0;
  int aux_photons = 0;
  std::array<bool, kAtomCount> excited{};  // atoms 1..3 at [0..2]

  int atomic_excitations() const;
  friend bool operator==(const BasisState&, const BasisState&) = default;
};

Index encode(const SpaceConfig& space, const BasisState& state);
BasisState decode(const SpaceConfig& space, Index index);

enum class Hermiticity { unknown, asserted };

// Immutable sparse operator on a SpaceConfig. Entries with |z| <= 1e-16 are
// pruned at construction. When constructed with Hermiticity::asserted the
// matrix is checked against its adjoint (max-norm 1e-14) and the constructor
// throws if the check fails.
class Operator {
 public:
  Operator() = default;
  explicit Operator(SparseMatrix matrix, Hermiticity h = Hermiticity::unknown);

  const SparseMatrix& matrix() const { return matrix_; }
  Index dimension() const { return matrix_.rows(); }
  bool hermitian() const { return hermitian_; }

  Operator adjoint() const;

  // Dense copy; only permitted for dimension <= kMaxDenseDimension.
  DenseMatrix to_dense() const;

  static constexpr Index kMaxDenseDimension = 256;

 private:
  SparseMatrix matrix_;
  bool hermitian_ = false;
};

Operator operator+(const Operator& lhs, const Operator& rhs);
Operator operator-(const Operator& lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex scale, const Operator& op);

// Largest |O_ij - conj(O_ji)|.
double hermiticity_defect(const SparseMatrix& m);

// Largest |A_ij - B_ij|.
double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b);

enum class PauliAxis { x, y, z, plus, minus };

Operator identity(const SpaceConfig& space);

// Cavity mode a: <n-1|a|n> = sqrt(n), identity on everything else.
Operator annihilation(const SpaceConfig& space);

// Auxiliary mode b; requires space.aux_cutoff > 0.
Operator aux_annihilation(const SpaceConfig& space);

// Pauli or ladder operator for atom j in {1,2,3}. sigma+ = |e><g|,
// sigma- = |g><e|, sigma_z = |e><e| - |g><g|.
Operator pauli(const SpaceConfig& space, int atom, PauliAxis axis);

// a^dag a + sum_j sigma_j^+ sigma_j^- (the auxiliary mode is not counted).
Operator excitation_number(const SpaceConfig& space);

// a^dag a + b^dag b + sum_j sigma_j^+ sigma_j^-.
Operator total_excitation_number(const SpaceConfig& space);

}  // namespace bundlesim
