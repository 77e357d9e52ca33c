#include "bundlesim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::invalid_argument, message);
}

// Atomic part shared by both Hamiltonians: detuning and drive, plus the
// cavity-a coupling with its geometric phases.
Operator atom_cavity_terms(const SystemParams& p, const SpaceConfig& space) {
  const Operator a = annihilation(space);
  const Operator a_dag = a.adjoint();
  Operator h = Complex(p.delta_a) * (a_dag * a);

  const double drive_scale = p.drive == DriveConvention::ladder ? p.omega : 0.5 * p.omega;
  const std::array<Complex, kAtomCount> phases = {std::polar(1.0, p.phi), Complex(1.0),
                                                  std::polar(1.0, -p.phi)};
  SparseMatrix lowering_sum(space.dimension(), space.dimension());
  for (int j = 1; j <= kAtomCount; ++j) {
    h = h + Complex(0.5 * p.delta()) * pauli(space, j, PauliAxis::z);
    h = h + Complex(drive_scale) * pauli(space, j, PauliAxis::x);
    lowering_sum += phases[std::size_t(j - 1)] * pauli(space, j, PauliAxis::minus).matrix();
  }
  const Operator coupling = Complex(p.g_a) * (a_dag * Operator(lowering_sum));
  return h + coupling + coupling.adjoint();
}

Operator exchange_term(const SystemParams& p, const SpaceConfig& space) {
  SparseMatrix sum(space.dimension(), space.dimension());
  for (int j = 1; j <= kAtomCount; ++j) {
    for (int k = 1; k <= kAtomCount; ++k) {
      if (j == k && p.exchange == ExchangePairs::distinct) continue;
      sum += (pauli(space, j, PauliAxis::plus) * pauli(space, k, PauliAxis::minus)).matrix();
    }
  }
  return Complex(p.chi) * Operator(std::move(sum));
}

Operator hermitize(const Operator& h) {
  // Exact symmetrization removes last-bit asymmetry from the products above.
  const SparseMatrix m = 0.5 * (h.matrix() + SparseMatrix(h.matrix().adjoint()));
  return Operator(m, Hermiticity::asserted);
}

}  // namespace

double SystemParams::delta() const {
  switch (delta_rule) {
    case DeltaRule::absolute:
      return delta_abs;
    case DeltaRule::ratio:
      return delta_ratio * delta_a;
    case DeltaRule::chi_over_g:
      return g_a == 0.0 ? 0.0 : chi / g_a * delta_a;
  }
  return 0.0;
}

void SystemParams::validate() const {
  const double values[] = {delta_a, delta_ratio, delta_abs, omega, g_a,
                           chi,     phi,         kappa_a,   gamma, gamma_e};
  for (double v : values) require(std::isfinite(v), "parameters must be finite");
  require(kappa_a > 0.0, "kappa_a must be > 0");
  require(gamma >= 0.0, "gamma must be >= 0");
  require(gamma_e >= 0.0, "gamma_e must be >= 0");
  require(omega >= 0.0, "omega must be >= 0");
  require(phi >= 0.0 && phi < kTwoPi, "phi must lie in [0, 2pi)");
  require(delta_rule != DeltaRule::chi_over_g || g_a != 0.0,
          "delta_rule chi_over_g needs g_a != 0");
}

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double AuxCavityParams::dispersive_ratio() const {
  const double scale = std::max(std::abs(g_b), std::abs(kappa_b));
  if (scale == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(delta_b) / scale;
}

EffectiveParams derive_effective_params(const AuxCavityParams& aux) {
  const double denom = aux.delta_b * aux.delta_b + aux.kappa_b * aux.kappa_b;
  if (denom == 0.0) {
    throw Error(ErrorCode::invalid_argument,
                "adiabatic elimination needs delta_b != 0 or kappa_b != 0");
  }
  const double g2 = aux.g_b * aux.g_b;
  return {-g2 * aux.delta_b / denom, aux.kappa_b * g2 / denom};
}

Operator build_effective_hamiltonian(const SystemParams& params, const SpaceConfig& space) {
  params.validate();
  space.validate();
  if (space.has_aux_mode()) {
    throw Error(ErrorCode::invalid_argument,
                "effective Hamiltonian is defined on the single-cavity space");
  }
  return hermitize(atom_cavity_terms(params, space) + exchange_term(params, space));
}

Operator build_full_hamiltonian(const SystemParams& params, const AuxCavityParams& aux,
                                const SpaceConfig& space) {
  params.validate();
  space.validate();
  if (!space.has_aux_mode()) {
    throw Error(ErrorCode::invalid_argument, "full Hamiltonian needs an auxiliary cavity mode");
  }
  require(std::isfinite(aux.g_b) && std::isfinite(aux.delta_b) && std::isfinite(aux.kappa_b),
          "auxiliary cavity parameters must be finite");

  const Operator b = aux_annihilation(space);
  const Operator b_dag = b.adjoint();
  SparseMatrix lowering(space.dimension(), space.dimension());
  for (int j = 1; j <= kAtomCount; ++j) lowering += pauli(space, j, PauliAxis::minus).matrix();
  const Operator coupling = Complex(aux.g_b) * (b_dag * Operator(lowering));

  const Operator h = atom_cavity_terms(params, space) + Complex(aux.delta_b) * (b_dag * b) +
                     coupling + coupling.adjoint();
  return hermitize(h);
}

const char* to_string(DeltaRule rule) {
  switch (rule) {
    case DeltaRule::absolute:
      return "absolute";
    case DeltaRule::ratio:
      return "ratio";
    case DeltaRule::chi_over_g:
      return "chi_over_g";
  }
  return "?";
}

const char* to_string(DriveConvention drive) {
  return drive == DriveConvention::ladder ? "ladder" : "half_sigma_x";
}

const char* to_string(ExchangePairs pairs) {
  return pairs == ExchangePairs::all ? "all" : "distinct";
}

}  // namespace bundlesim
