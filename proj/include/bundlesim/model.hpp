#pragma once

#include <numbers>
#include <string>

#include "bundlesim/hilbert.hpp"

namespace bundlesim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// How the atomic detuning delta is obtained.
enum class DeltaRule {
  absolute,    // delta = delta_abs
  ratio,       // delta = delta_ratio * delta_a
  chi_over_g,  // delta = (chi / g_a) * delta_a
};

// Coherent atomic drive term.
enum class DriveConvention {
  ladder,        // omega * sum_j (sigma_j^+ + sigma_j^-)
  half_sigma_x,  // (omega / 2) * sum_j sigma_j^x
};

// Which ordered pairs the spin-exchange sum chi * sum_{j,k} s_j^+ s_k^- runs over.
enum class ExchangePairs {
  all,       // includes j == k, i.e. chi * J^+ J^-
  distinct,  // j != k only (kept for mutation testing)
};

// Model parameters in units of the cavity decay rate kappa_a.
struct SystemParams {
  double delta_a = 0.0;
  DeltaRule delta_rule = DeltaRule::ratio;
  double delta_ratio = 0.5;
  double delta_abs = 0.0;
  double omega = 0.5;
  double g_a = 10.0;
  double chi = 0.0;
  double phi = 0.0;
  double kappa_a = 1.0;
  double gamma = 0.2;
  double gamma_e = 0.0;
  DriveConvention drive = DriveConvention::ladder;
  ExchangePairs exchange = ExchangePairs::all;

  // Atomic detuning after applying delta_rule.
  double delta() const;

  // Total independent atomic decay rate gamma + gamma_e.
  double atomic_decay() const { return gamma + gamma_e; }

  // Throws Error(invalid_argument) on a violated invariant.
  void validate() const;
};

// Wraps any angle into [0, 2pi).
double wrap_phase(double phi);

struct AuxCavityParams {
  double g_b = 0.0;
  double delta_b = 0.0;
  double kappa_b = 0.0;

  // |delta_b| / max(g_b, kappa_b); infinite when both are zero.
  double dispersive_ratio() const;

  // True when the dispersive ratio is below 10 (elimination is questionable).
  bool dispersive_warning() const { return dispersive_ratio() < 10.0; }
};

struct EffectiveParams {
  double chi = 0.0;
  double gamma_e = 0.0;
};

// chi = -g_b^2 Delta_b / (Delta_b^2 + kappa_b^2),
// gamma_e = kappa_b g_b^2 / (Delta_b^2 + kappa_b^2).
EffectiveParams derive_effective_params(const AuxCavityParams& aux);

// H = Delta_a a^dag a + 1/2 sum_j delta sigma_j^z + drive
//     + chi sum_{j,k} sigma_j^+ sigma_k^-
//     + g_a a^dag (e^{i phi} s_1^- + s_2^- + e^{-i phi} s_3^-) + h.c.
//
// The space must not carry an auxiliary mode.
Operator build_effective_hamiltonian(const SystemParams& params, const SpaceConfig& space);

// Two-mode Hamiltonian: the effective one with chi omitted, plus
// Delta_b b^dag b + g_b b^dag (s_1^- + s_2^- + s_3^-) + h.c.
// params.chi is ignored; the space must carry the auxiliary mode.
Operator build_full_hamiltonian(const SystemParams& params, const AuxCavityParams& aux,
                                const SpaceConfig& space);

const char* to_string(DeltaRule rule);
const char* to_string(DriveConvention drive);
const char* to_string(ExchangePairs pairs);

}  // namespace bundlesim
