#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bundlesim/hilbert.hpp"
#include "bundlesim/lindblad.hpp"
#include "bundlesim/model.hpp"

namespace bundlesim {

// Below this, <(a^dag)^n a^n> is treated as zero and the normalized
// correlation as undefined.
inline constexpr double kMomentFloor = 1e-14;

// <(a^dag)^n a^n> evaluated as Tr[(a^dag)^n a^n rho] with sparse operators.
double normal_moment(const DenseMatrix& rho, const SpaceConfig& space, int n);

// g_1^(n)(0) = <(a^dag)^n a^n> / <a^dag a>^n for n in {2, 3, 4}.
// Throws undefined_correlation when <a^dag a> <= 1e-14.
double g1n_zero(const DenseMatrix& rho, const SpaceConfig& space, int n);

struct CorrelationTrace {
  int order = 1;  // n in g_n^(2)(tau)
  std::vector<double> tau;
  std::vector<double> value;
};

// g_n^(2)(tau) = Tr[(a^dag)^n a^n e^{L tau}(a^n rho (a^dag)^n)] / <(a^dag)^n a^n>^2
// by the quantum regression theorem, n in {1, 2, 3}.
CorrelationTrace gn2_tau(const Liouvillian& liouvillian, const DenseMatrix& rho,
                         const SpaceConfig& space, int n, std::span<const double> tau_grid,
                         const PropagationOptions& options = {});

// Uniform grid [0, tau_max] with `points` entries.
std::vector<double> tau_grid(double tau_max, int points);

struct PhotonDistribution {
  std::vector<double> p;  // p(q), q = 0..cutoff
  // p(q) / (1 - p(0)) for q >= 1; index 0 holds 0. Empty when 1 - p(0) is
  // below kMomentFloor (vacuum).
  std::optional<std::vector<double>> conditional;
};

PhotonDistribution photon_distribution(const DenseMatrix& rho, const SpaceConfig& space);

struct ObservableRecord {
  SystemParams params;
  int cutoff = 0;
  double n_s = 0.0;
  std::optional<double> g2_0;
  std::optional<double> g3_0;
  std::optional<double> g4_0;
  PhotonDistribution distribution;
  std::map<int, CorrelationTrace> traces;  // keyed by bundle order n
  double residual = 0.0;
  double min_eigenvalue = 0.0;
};

// Steady-state observables from a solved state; g's are left empty for the
// vacuum.
ObservableRecord make_record(const SystemParams& params, const SpaceConfig& space,
                             const SteadyState& state);

struct Classification {
  bool single_photon_blockade = false;
  bool two_photon_blockade = false;
  bool three_photon_blockade = false;
  bool two_photon_bundle = false;
  bool three_photon_bundle = false;

  std::vector<std::string> labels() const;  // "1PB", "2PB", "3PB", "2-bundle", "3-bundle"
  friend bool operator==(const Classification&, const Classification&) = default;
};

// Strict comparisons between the zero-delay value and the tau trace.
// "g(0) > g(tau)" is tested against the first grid point tau_1 > 0;
// "g(0) < g(tau)" against the maximum over tau > 0.
bool bunched_at_first_delay(const CorrelationTrace& trace);
bool antibunched_over_grid(const CorrelationTrace& trace);

// Blockade and bundle flags from the literal inequalities:
//   1PB: g1(2)(0) < 1 and g1(2)(0) < g1(2)(tau)
//   nPB: g1(n)(0) > 1 and g1(n+1)(0) < 1             (n = 2, 3)
//   n-bundle: nPB and g1(2)(0) > g1(2)(tau) and gn(2)(0) < gn(2)(tau)
// Needs the zero-delay values and the n=1 trace; the n-trace is needed only
// when nPB holds. Missing inputs raise incomplete_record.
Classification classify(const ObservableRecord& record);

}  // namespace bundlesim
