#include "bundlesim/hilbert.hpp"

#include <cmath>
#include <vector>

#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

constexpr double kPruneTolerance = 1e-16;
constexpr double kHermitianTolerance = 1e-14;

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix from_triplets(Index d, const std::vector<Triplet>& triplets) {
  SparseMatrix m(d, d);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

int spin_bits(const BasisState& s) {
  return (s.excited[0] ? 4 : 0) | (s.excited[1] ? 2 : 0) | (s.excited[2] ? 1 : 0);
}

void check_atom(int atom) {
  if (atom < 1 || atom > kAtomCount) {
    throw Error(ErrorCode::invalid_argument,
                "atom index must be 1, 2 or 3 (got " + std::to_string(atom) + ")");
  }
}

}  // namespace

void SpaceConfig::validate() const {
  if (cavity_cutoff < 1) {
    throw Error(ErrorCode::invalid_argument, "cavity cutoff must be >= 1");
  }
  if (aux_cutoff < 0) {
    throw Error(ErrorCode::invalid_argument, "auxiliary cutoff must be >= 0");
  }
}

int BasisState::atomic_excitations() const {
  return int(excited[0]) + int(excited[1]) + int(excited[2]);
}

Index encode(const SpaceConfig& space, const BasisState& state) {
  if (state.photons < 0 || state.photons > space.cavity_cutoff || state.aux_photons < 0 ||
      state.aux_photons > space.aux_cutoff) {
    throw Error(ErrorCode::invalid_argument, "basis state outside truncated space");
  }
  return (Index(state.photons) * space.aux_levels() + state.aux_photons) * kSpinStates +
         spin_bits(state);
}

BasisState decode(const SpaceConfig& space, Index index) {
  if (index < 0 || index >= space.dimension()) {
    throw Error(ErrorCode::invalid_argument, "basis index out of range");
  }
  BasisState s;
  const int spins = int(index % kSpinStates);
  const Index modes = index / kSpinStates;
  s.photons = int(modes / space.aux_levels());
  s.aux_photons = int(modes % space.aux_levels());
  s.excited = {(spins & 4) != 0, (spins & 2) != 0, (spins & 1) != 0};
  return s;
}

Operator::Operator(SparseMatrix matrix, Hermiticity h) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorCode::invalid_argument, "operator matrix must be square");
  }
  matrix_.prune([](Index, Index, const Complex& z) { return std::abs(z) > kPruneTolerance; });
  matrix_.makeCompressed();
  if (h == Hermiticity::asserted) {
    const double defect = hermiticity_defect(matrix_);
    if (defect >= kHermitianTolerance) {
      throw Error(ErrorCode::numerical_failure,
                  "operator declared hermitian has defect " + std::to_string(defect));
    }
    hermitian_ = true;
  }
}

Operator Operator::adjoint() const {
  return Operator(SparseMatrix(matrix_.adjoint()),
                  hermitian_ ? Hermiticity::asserted : Hermiticity::unknown);
}

DenseMatrix Operator::to_dense() const {
  if (dimension() > kMaxDenseDimension) {
    throw Error(ErrorCode::invalid_argument,
                "dense conversion limited to dimension <= 256 (got " +
                    std::to_string(dimension()) + ")");
  }
  return DenseMatrix(matrix_);
}

Operator operator+(const Operator& lhs, const Operator& rhs) {
  if (lhs.dimension() != rhs.dimension()) {
    throw Error(ErrorCode::invalid_argument, "operator dimension mismatch");
  }
  return Operator(SparseMatrix(lhs.matrix() + rhs.matrix()));
}

Operator operator-(const Operator& lhs, const Operator& rhs) {
  if (lhs.dimension() != rhs.dimension()) {
    throw Error(ErrorCode::invalid_argument, "operator dimension mismatch");
  }
  return Operator(SparseMatrix(lhs.matrix() - rhs.matrix()));
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  if (lhs.dimension() != rhs.dimension()) {
    throw Error(ErrorCode::invalid_argument, "operator dimension mismatch");
  }
  return Operator(SparseMatrix(lhs.matrix() * rhs.matrix()));
}

Operator operator*(Complex scale, const Operator& op) {
  return Operator(SparseMatrix(scale * op.matrix()));
}

double hermiticity_defect(const SparseMatrix& m) {
  const SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::invalid_argument, "matrix shape mismatch");
  }
  const SparseMatrix diff = a - b;
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

Operator identity(const SpaceConfig& space) {
  space.validate();
  SparseMatrix m(space.dimension(), space.dimension());
  m.setIdentity();
  return Operator(std::move(m), Hermiticity::asserted);
}

Operator annihilation(const SpaceConfig& space) {
  space.validate();
  const Index d = space.dimension();
  std::vector<Triplet> t;
  t.reserve(std::size_t(d));
  for (Index i = 0; i < d; ++i) {
    BasisState s = decode(space, i);
    if (s.photons == 0) continue;
    const double amp = std::sqrt(double(s.photons));
    s.photons -= 1;
    t.emplace_back(encode(space, s), i, amp);
  }
  return Operator(from_triplets(d, t));
}

Operator aux_annihilation(const SpaceConfig& space) {
  space.validate();
  if (!space.has_aux_mode()) {
    throw Error(ErrorCode::invalid_argument, "space has no auxiliary cavity mode");
  }
  const Index d = space.dimension();
  std::vector<Triplet> t;
  t.reserve(std::size_t(d));
  for (Index i = 0; i < d; ++i) {
    BasisState s = decode(space, i);
    if (s.aux_photons == 0) continue;
    const double amp = std::sqrt(double(s.aux_photons));
    s.aux_photons -= 1;
    t.emplace_back(encode(space, s), i, amp);
  }
  return Operator(from_triplets(d, t));
}

Operator pauli(const SpaceConfig& space, int atom, PauliAxis axis) {
  space.validate();
  check_atom(atom);
  const int slot = atom - 1;
  const Index d = space.dimension();
  std::vector<Triplet> t;
  t.reserve(std::size_t(d));
  const Complex i_unit(0.0, 1.0);
  for (Index col = 0; col < d; ++col) {
    const BasisState s = decode(space, col);
    BasisState flipped = s;
    flipped.excited[std::size_t(slot)] = !s.excited[std::size_t(slot)];
    const bool up = s.excited[std::size_t(slot)];
    switch (axis) {
      case PauliAxis::x:
        t.emplace_back(encode(space, flipped), col, 1.0);
        break;
      case PauliAxis::y:
        // sigma_y = -i|e><g| + i|g><e|
        t.emplace_back(encode(space, flipped), col, up ? i_unit : -i_unit);
        break;
      case PauliAxis::z:
        t.emplace_back(col, col, up ? 1.0 : -1.0);
        break;
      case PauliAxis::plus:
        if (!up) t.emplace_back(encode(space, flipped), col, 1.0);
        break;
      case PauliAxis::minus:
        if (up) t.emplace_back(encode(space, flipped), col, 1.0);
        break;
    }
  }
  const bool herm = axis == PauliAxis::x || axis == PauliAxis::y || axis == PauliAxis::z;
  return Operator(from_triplets(d, t), herm ? Hermiticity::asserted : Hermiticity::unknown);
}

namespace {

Operator diagonal_count(const SpaceConfig& space, bool include_aux) {
  space.validate();
  const Index d = space.dimension();
  std::vector<Triplet> t;
  t.reserve(std::size_t(d));
  for (Index i = 0; i < d; ++i) {
    const BasisState s = decode(space, i);
    const int count = s.photons + s.atomic_excitations() + (include_aux ? s.aux_photons : 0);
    t.emplace_back(i, i, double(count));
  }
  return Operator(from_triplets(d, t), Hermiticity::asserted);
}

}  // namespace

Operator excitation_number(const SpaceConfig& space) { return diagonal_count(space, false); }

Operator total_excitation_number(const SpaceConfig& space) { return diagonal_count(space, true); }

}  // namespace bundlesim
