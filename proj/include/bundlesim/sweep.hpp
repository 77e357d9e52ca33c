#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bundlesim/correlations.hpp"
#include "bundlesim/lindblad.hpp"
#include "bundlesim/model.hpp"

namespace bundlesim {

enum class SweepAxis { delta_a, chi, phi, omega, gamma_e };

const char* to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);  // throws invalid_argument

// Inclusive, uniformly spaced axis. Values are recomputed from the index so
// they never accumulate rounding drift.
struct AxisSpec {
  SweepAxis parameter = SweepAxis::delta_a;
  double min = 0.0;
  double max = 0.0;
  int points = 2;

  double value(int index) const;
  void validate() const;
};

// Sets one axis parameter; phi values are wrapped into [0, 2pi).
void apply_axis(SystemParams& params, SweepAxis axis, double value);

struct SweepSpec {
  AxisSpec axis1;
  std::optional<AxisSpec> axis2;
  SystemParams base;
  // Extra columns after the fixed ones: "p<q>", "ptilde<q>", "residual".
  std::vector<std::string> observables;
  int cutoff = 12;
  bool auto_cutoff = false;  // run the convergence scan at the demanding corner
  std::vector<int> cutoffs{8, 10, 12, 14, 16};
  int workers = 1;

  std::size_t size() const;
  // Parameters of grid point `index` (axis1 slowest).
  SystemParams point(std::size_t index) const;
  // Largest |omega| and smallest |delta_a| over the grid; other swept
  // parameters take their largest-magnitude endpoint.
  SystemParams demanding_corner() const;
  void validate() const;
};

struct SweepRow {
  SystemParams params;
  double n_s = 0.0;
  double g2_0 = 0.0;  // NaN when undefined or failed
  double g3_0 = 0.0;
  double g4_0 = 0.0;
  std::vector<double> extras;
  int status = 0;  // 0 or an ErrorCode value
  std::string error;
};

struct SweepResult {
  int cutoff = 0;
  std::optional<ConvergenceReport> convergence;
  std::vector<std::string> extra_columns;
  std::vector<SweepRow> rows;  // row-major, axis1 slowest
};

// Observables of a single point, the computation every sweep row performs.
ObservableRecord compute_point(const SystemParams& params, int cutoff);

SweepResult run_sweep(const SweepSpec& spec);

// Header `delta_a,chi,phi,delta,omega,n_s,g2_0,g3_0,g4_0,status` plus extras;
// 17 significant digits, "nan" for undefined values, LF line endings.
std::string to_csv(const SweepResult& result);

// Throws Error(io) when the file cannot be written.
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace bundlesim
