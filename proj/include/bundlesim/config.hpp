#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bundlesim/model.hpp"
#include "bundlesim/spectrum.hpp"
#include "bundlesim/sweep.hpp"

namespace bundlesim {

struct TauSpec {
  double tau_max = 10.0;
  int points = 200;
  std::vector<int> orders{1, 2};  // n in g_n^(2)(tau)
};

struct ResonanceSpec {
  int manifold = 0;  // 0: every family relevant at the configured phi
  DeltaConvention convention = DeltaConvention::plus_half;
  double chi_over_g_min = 0.0;
  double chi_over_g_max = 1.0;
  int chi_points = 101;
};

// Run configuration: `key = value` lines with `#` comments. Later
// assignments win, so command-line overrides applied after the file take
// precedence. Unknown keys and malformed values are errors naming the key.
struct Config {
  SystemParams params;
  int cutoff = 12;
  bool auto_cutoff = false;
  std::vector<int> cutoffs{8, 10, 12, 14, 16};

  int aux_cutoff = 3;
  AuxCavityParams aux{0.0, 0.0, 0.0};

  AxisSpec axis1{SweepAxis::delta_a, -40.0, 40.0, 121};
  std::optional<AxisSpec> axis2;
  std::vector<std::string> observables;
  std::string output;
  int workers = 1;

  TauSpec tau;
  ResonanceSpec resonance;
  double unit_khz = 0.0;  // > 0: label and rescale frequencies in kHz on output

  void set(std::string_view key, std::string_view value);
  void load_file(const std::string& path);
  void load_text(std::string_view text, std::string_view origin = "<text>");

  bool has(std::string_view key) const;
  // Throws invalid_argument "missing required key '<key>'".
  void require(std::string_view key) const;

  // Assignments in effect, one per key, in first-assignment order.
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  SweepSpec sweep_spec() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// All recognised keys, for help output.
const std::vector<std::string>& config_keys();

// "0", "pi", "2pi3" (2pi/3), "4pi3" or raw radians.
double parse_phase(std::string_view token);

}  // namespace bundlesim
