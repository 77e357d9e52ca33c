#include "bundlesim/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>

#include "bundlesim/error.hpp"
#include "json.hpp"

namespace bundlesim {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Full-model truncation limits; the two-mode Liouvillian grows as
// ((N_c + 1)(N_b + 1) 8)^2.
constexpr int kFullModelMaxCutoff = 6;
constexpr int kFullModelMaxAux = 3;
constexpr int kFullModelDefaultCutoff = 5;

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json optional_number(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? Json(*x) : Json(nullptr);
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Frequencies are printed in units of kappa_a, or in kHz with the column
// name suffixed when unit_khz is set.
struct Units {
  double khz = 0.0;
  double freq(double x) const { return khz > 0.0 ? x * khz : x; }
  std::string name(const std::string& base) const { return khz > 0.0 ? base + "_khz" : base; }
  std::string label() const {
    return khz > 0.0 ? "kHz (kappa_a = 2pi x " + number(khz) + " kHz)" : "kappa_a";
  }
};

Json params_json(const SystemParams& p, const Units& u) {
  Json j;
  j[u.name("delta_a")] = u.freq(p.delta_a);
  j[u.name("delta")] = u.freq(p.delta());
  j["delta_rule"] = to_string(p.delta_rule);
  if (p.delta_rule == DeltaRule::ratio) j["delta_ratio"] = p.delta_ratio;
  j[u.name("omega")] = u.freq(p.omega);
  j[u.name("g_a")] = u.freq(p.g_a);
  j[u.name("chi")] = u.freq(p.chi);
  j["phi"] = p.phi;
  j[u.name("kappa_a")] = u.freq(p.kappa_a);
  j[u.name("gamma")] = u.freq(p.gamma);
  j[u.name("gamma_e")] = u.freq(p.gamma_e);
  j["drive_convention"] = to_string(p.drive);
  j["exchange_pairs"] = to_string(p.exchange);
  return j;
}

Json entries_json(const Config& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Data file plus `<path>.meta.json`; timestamps live only in the sidecar.
void write_output(CommandOutput& out, const Config& c, const char* command, const std::string& data,
                  Json extra) {
  write_text_file(c.output, data);
  Json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["created_utc"] = utc_timestamp();
  meta["output"] = c.output;
  meta["units"] = Units{c.unit_khz}.label();
  meta["config"] = entries_json(c);
  meta["params"] = params_json(c.params, Units{c.unit_khz});
  for (auto& [k, v] : extra.items()) meta[k] = v;
  const std::string meta_path = c.output + ".meta.json";
  write_text_file(meta_path, meta.dump(2) + "\n");
  out.files = {c.output, meta_path};
}

Json convergence_json(const ConvergenceReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"cutoff", row.cutoff},
                    {"n_s", row.n_s},
                    {"g2_0", finite_or_null(row.g2)},
                    {"g3_0", finite_or_null(row.g3)},
                    {"max_rel_change_to_next", finite_or_null(row.change_to_next)}});
  }
  return {{"chosen_cutoff", r.chosen_cutoff}, {"table", rows}};
}

// Cutoff in effect: fixed, or from the convergence scan when auto_cutoff.
int resolve_cutoff(const Config& c, const SystemParams& p, Json* report) {
  if (!c.auto_cutoff) return c.cutoff;
  const ConvergenceReport r = convergence_scan(p, c.cutoffs);
  if (report) *report = convergence_json(r);
  return r.chosen_cutoff;
}

Json record_json(const ObservableRecord& r, const Units& u) {
  Json j;
  j["params"] = params_json(r.params, u);
  j["cutoff"] = r.cutoff;
  j["n_s"] = r.n_s;
  j["g2_0"] = optional_number(r.g2_0);
  j["g3_0"] = optional_number(r.g3_0);
  j["g4_0"] = optional_number(r.g4_0);
  j["p"] = r.distribution.p;
  j["ptilde"] = r.distribution.conditional ? Json(*r.distribution.conditional) : Json(nullptr);
  j["residual"] = r.residual;
  j["min_eigenvalue"] = r.min_eigenvalue;
  return j;
}

double relative_deviation(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

CommandOutput run_steady(const Config& c) {
  c.require("delta_a");
  c.params.validate();
  const Units u{c.unit_khz};
  Json conv;
  const int cutoff = resolve_cutoff(c, c.params, &conv);
  CommandOutput out;
  out.record = compute_point(c.params, cutoff);
  Json j;
  j["command"] = "steady";
  j["units"] = u.label();
  j["config"] = entries_json(c);
  const Json record = record_json(*out.record, u);
  for (const auto& [k, v] : record.items()) j[k] = v;
  if (!conv.is_null()) j["convergence"] = conv;
  if (!out.record->g2_0)
    out.warnings.push_back("warning: vacuum steady state, correlations undefined");
  out.text = j.dump(2) + "\n";
  return out;
}

CommandOutput run_sweep_command(const Config& c) {
  const SweepSpec spec = c.sweep_spec();
  const SweepResult result = run_sweep(spec);
  std::string csv = to_csv(result);
  const Units u{c.unit_khz};
  if (u.khz > 0.0) {
    // Rescale the frequency columns; the dimensionless ones are untouched.
    SweepResult scaled = result;
    for (auto& row : scaled.rows) {
      row.params.delta_a = u.freq(row.params.delta_a);
      row.params.chi = u.freq(row.params.chi);
      row.params.omega = u.freq(row.params.omega);
      row.params.delta_abs = u.freq(row.params.delta());
      row.params.delta_rule = DeltaRule::absolute;
    }
    csv = to_csv(scaled);
    csv.replace(0, csv.find(",phi,"), "delta_a_khz,chi_khz");
    const auto delta_pos = csv.find(",delta,");
    csv.replace(delta_pos, 7, ",delta_khz,");
    const auto omega_pos = csv.find(",omega,");
    csv.replace(omega_pos, 7, ",omega_khz,");
  }
  CommandOutput out;
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.status != 0 ? 1 : 0;
  if (failed > 0) {
    out.warnings.push_back("warning: " + std::to_string(failed) + " of " +
                           std::to_string(result.rows.size()) + " points carry a nonzero status");
  }
  if (c.output.empty()) {
    out.text = csv;
  } else {
    Json extra;
    extra["cutoff"] = result.cutoff;
    if (result.convergence) extra["convergence"] = convergence_json(*result.convergence);
    extra["rows"] = result.rows.size();
    extra["failed_rows"] = failed;
    write_output(out, c, "sweep", csv, extra);
    out.text = "wrote " + c.output + " (" + std::to_string(result.rows.size()) + " rows, cutoff " +
               std::to_string(result.cutoff) + ")\n";
  }
  return out;
}

CommandOutput run_gtau(const Config& c) {
  c.require("delta_a");
  c.params.validate();
  if (c.tau.points < 2) {
    throw Error(ErrorCode::invalid_argument, "empty tau grid: tau_points must be >= 2");
  }
  const std::vector<double> grid = tau_grid(c.tau.tau_max, c.tau.points);
  Json conv;
  const int cutoff = resolve_cutoff(c, c.params, &conv);
  const SpaceConfig space{cutoff, 0};
  const Liouvillian l = build_liouvillian(build_effective_hamiltonian(c.params, space),
                                          standard_channels(c.params, space));
  const SteadyState ss = steady_state(l);
  ObservableRecord record = make_record(c.params, space, ss);
  for (int n : c.tau.orders) record.traces[n] = gn2_tau(l, ss.rho, space, n, grid);

  std::string csv = "tau";
  for (const auto& [n, _] : record.traces) csv += ",g" + std::to_string(n) + "_tau";
  csv += '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += number(grid[i]);
    for (const auto& [n, t] : record.traces) csv += "," + number(t.value[i]);
    csv += '\n';
  }

  CommandOutput out;
  Json summary;
  summary["cutoff"] = cutoff;
  summary["n_s"] = record.n_s;
  summary["g2_0"] = optional_number(record.g2_0);
  summary["g3_0"] = optional_number(record.g3_0);
  summary["g4_0"] = optional_number(record.g4_0);
  Json bunching;
  for (const auto& [n, t] : record.traces) {
    bunching["g" + std::to_string(n)] = {
        {"zero_delay_above_first_delay", bunched_at_first_delay(t)},
        {"zero_delay_below_later_maximum", antibunched_over_grid(t)}};
  }
  summary["tau_checks"] = bunching;
  std::string labels;
  try {
    const Classification cls = classify(record);
    summary["classification"] = cls.labels();
    for (const auto& l : cls.labels()) labels += (labels.empty() ? "" : " ") + l;
  } catch (const Error& e) {
    summary["classification"] = nullptr;
    labels = std::string("unavailable (") + e.what() + ")";
  }
  if (!conv.is_null()) summary["convergence"] = conv;

  if (c.output.empty()) {
    out.text = csv;
    out.warnings.push_back("classification: " + (labels.empty() ? "none" : labels));
  } else {
    write_output(out, c, "gtau", csv, {{"summary", summary}});
    out.text = summary.dump(2) + "\n";
  }
  out.record = std::move(record);
  return out;
}

CommandOutput run_resonance(const Config& c) {
  const ResonanceSpec& r = c.resonance;
  const AxisSpec axis{SweepAxis::chi, r.chi_over_g_min * c.params.g_a,
                      r.chi_over_g_max * c.params.g_a, r.chi_points};
  axis.validate();
  std::vector<double> grid;
  for (int i = 0; i < axis.points; ++i) grid.push_back(axis.value(i));
  const std::vector<ResonanceRow> rows =
      r.manifold == 0 ? resonance_figure(c.params.phi, grid, c.params.g_a, r.convention)
                      : resonance_curves(r.manifold, grid, c.params.g_a, r.convention);
  const Units u{c.unit_khz};
  std::string csv = u.name("chi") + ",branch," + u.name("delta_a_root") + "\n";
  for (const auto& row : rows) {
    csv +=
        number(u.freq(row.chi)) + "," + row.branch + "," + number(u.freq(row.delta_a_root)) + "\n";
  }
  CommandOutput out;
  if (c.output.empty()) {
    out.text = csv;
  } else {
    write_output(out, c, "resonance", csv,
                 {{"rows", rows.size()},
                  {"manifold", r.manifold},
                  {"delta_convention",
                   r.convention == DeltaConvention::plus_half ? "plus_half" : "minus_half"}});
    out.text = "wrote " + c.output + " (" + std::to_string(rows.size()) + " rows)\n";
  }
  return out;
}

CommandOutput run_validate(const Config& c) {
  CommandOutput out;
  for (const SuiteResult& s : validation_suites(c)) {
    out.text += std::string(s.passed ? "PASS " : "FAIL ") + s.name + ": " + s.detail + "\n";
    out.passed = out.passed && s.passed;
  }
  out.text += out.passed ? "all suites passed\n" : "validation failed\n";
  return out;
}

SteadyState solve_full_model(const SystemParams& params, const AuxCavityParams& aux,
                             const SpaceConfig& space) {
  SystemParams p = params;
  p.gamma_e = 0.0;  // the auxiliary mode is explicit here
  p.validate();
  if (!(aux.kappa_b >= 0.0) || !std::isfinite(aux.kappa_b)) {
    throw Error(ErrorCode::invalid_argument, "kappa_b must be finite and >= 0");
  }
  std::vector<CollapseChannel> channels = standard_channels(p, space);
  channels.push_back({aux_annihilation(space), aux.kappa_b, "b"});
  std::vector<int> aux_photons;
  for (Index i = 0; i < space.dimension(); ++i) aux_photons.push_back(decode(space, i).aux_photons);
  SteadyState ss = steady_state_blocked(
      build_liouvillian(build_full_hamiltonian(p, aux, space), channels), aux_photons);
  ss.cutoff = space.cavity_cutoff;
  return ss;
}

CommandOutput run_fullmodel(const Config& c) {
  c.require("delta_a");
  c.require("delta_b");
  const int cutoff = c.has("cutoff") ? c.cutoff : kFullModelDefaultCutoff;
  if (cutoff > kFullModelMaxCutoff || c.aux_cutoff > kFullModelMaxAux || c.aux_cutoff < 1) {
    throw Error(ErrorCode::invalid_argument,
                "fullmodel needs cutoff <= " + std::to_string(kFullModelMaxCutoff) +
                    " and 1 <= aux_cutoff <= " + std::to_string(kFullModelMaxAux));
  }
  CommandOutput out;
  const AuxCavityParams& aux = c.aux;
  const double ratio = aux.dispersive_ratio();
  if (aux.dispersive_warning()) {
    out.warnings.push_back(
        "warning: dispersive ratio |delta_b|/max(g_b, kappa_b) = " + number(ratio) +
        " < 10; adiabatic elimination is questionable, deviations uncapped");
  }
  const EffectiveParams eff = derive_effective_params(aux);

  const SpaceConfig full_space{cutoff, c.aux_cutoff};
  const SteadyState full = solve_full_model(c.params, aux, full_space);
  const double full_ns = normal_moment(full.rho, full_space, 1);
  const double full_g2 = full_ns > kMomentFloor ? g1n_zero(full.rho, full_space, 2)
                                                : std::numeric_limits<double>::quiet_NaN();

  SystemParams effective = c.params;
  effective.chi = eff.chi;
  effective.gamma_e = eff.gamma_e;
  const ObservableRecord rec = compute_point(effective, cutoff);
  const double eff_g2 = rec.g2_0.value_or(std::numeric_limits<double>::quiet_NaN());

  const Units u{c.unit_khz};
  Json j;
  j["command"] = "fullmodel";
  j["units"] = u.label();
  j["params"] = params_json(c.params, u);
  j["aux"] = {{u.name("g_b"), u.freq(aux.g_b)},
              {u.name("delta_b"), u.freq(aux.delta_b)},
              {u.name("kappa_b"), u.freq(aux.kappa_b)},
              {"aux_cutoff", c.aux_cutoff},
              {"dispersive_ratio", finite_or_null(ratio)},
              {"dispersive_warning", aux.dispersive_warning()}};
  j["effective"] = {{u.name("chi"), u.freq(eff.chi)}, {u.name("gamma_e"), u.freq(eff.gamma_e)}};
  j["cutoff"] = cutoff;
  j["full"] = {{"n_s", full_ns}, {"g2_0", finite_or_null(full_g2)}, {"residual", full.residual}};
  j["reduced"] = {{"n_s", rec.n_s}, {"g2_0", finite_or_null(eff_g2)}, {"residual", rec.residual}};
  j["relative_deviation"] = {{"n_s", relative_deviation(full_ns, rec.n_s)},
                             {"g2_0", finite_or_null(relative_deviation(full_g2, eff_g2))}};
  out.text = j.dump(2) + "\n";
  out.record = rec;
  return out;
}

}  // namespace bundlesim
