#include "bundlesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::invalid_argument, "invalid value '" + std::string(value) + "' for key '" +
                                               std::string(key) + "' (expected " +
                                               std::string(want) + ")");
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(x)) {
    bad_value(key, v, "a finite number");
  }
  return x;
}

int to_int(std::string_view key, std::string_view v) {
  int x = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) bad_value(key, v, "an integer");
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<int> to_int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(to_int(key, item));
  if (out.empty()) bad_value(key, v, "a comma-separated list of integers");
  return out;
}

using Setter = std::function<void(Config&, std::string_view key, std::string_view value)>;

AxisSpec& axis2_of(Config& c) {
  if (!c.axis2) c.axis2 = AxisSpec{SweepAxis::chi, 0.0, 0.0, 2};
  return *c.axis2;
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      // physics
      {"delta_a", [](Config& c, auto k, auto v) { c.params.delta_a = to_double(k, v); }},
      {"delta_rule",
       [](Config& c, auto k, auto v) {
         if (v == "ratio") c.params.delta_rule = DeltaRule::ratio;
         else if (v == "absolute") c.params.delta_rule = DeltaRule::absolute;
         else if (v == "chi_over_g") c.params.delta_rule = DeltaRule::chi_over_g;
         else bad_value(k, v, "ratio, absolute or chi_over_g");
       }},
      {"delta_ratio",
       [](Config& c, auto k, auto v) {
         c.params.delta_ratio = to_double(k, v);
         c.params.delta_rule = DeltaRule::ratio;
       }},
      {"delta",
       [](Config& c, auto k, auto v) {
         c.params.delta_abs = to_double(k, v);
         c.params.delta_rule = DeltaRule::absolute;
       }},
      {"omega", [](Config& c, auto k, auto v) { c.params.omega = to_double(k, v); }},
      {"g_a", [](Config& c, auto k, auto v) { c.params.g_a = to_double(k, v); }},
      {"chi", [](Config& c, auto k, auto v) { c.params.chi = to_double(k, v); }},
      {"phi", [](Config& c, auto, auto v) { c.params.phi = parse_phase(v); }},
      {"kappa_a", [](Config& c, auto k, auto v) { c.params.kappa_a = to_double(k, v); }},
      {"gamma", [](Config& c, auto k, auto v) { c.params.gamma = to_double(k, v); }},
      {"gamma_e", [](Config& c, auto k, auto v) { c.params.gamma_e = to_double(k, v); }},
      {"drive_convention",
       [](Config& c, auto k, auto v) {
         if (v == "ladder") c.params.drive = DriveConvention::ladder;
         else if (v == "half_sigma_x") c.params.drive = DriveConvention::half_sigma_x;
         else bad_value(k, v, "ladder or half_sigma_x");
       }},
      {"exchange_pairs",
       [](Config& c, auto k, auto v) {
         if (v == "all") c.params.exchange = ExchangePairs::all;
         else if (v == "distinct") c.params.exchange = ExchangePairs::distinct;
         else bad_value(k, v, "all or distinct");
       }},
      // truncation
      {"cutoff", [](Config& c, auto k, auto v) { c.cutoff = to_int(k, v); }},
      {"auto_cutoff", [](Config& c, auto k, auto v) { c.auto_cutoff = to_bool(k, v); }},
      {"cutoffs", [](Config& c, auto k, auto v) { c.cutoffs = to_int_list(k, v); }},
      // auxiliary cavity
      {"aux_cutoff", [](Config& c, auto k, auto v) { c.aux_cutoff = to_int(k, v); }},
      {"g_b", [](Config& c, auto k, auto v) { c.aux.g_b = to_double(k, v); }},
      {"delta_b", [](Config& c, auto k, auto v) { c.aux.delta_b = to_double(k, v); }},
      {"kappa_b", [](Config& c, auto k, auto v) { c.aux.kappa_b = to_double(k, v); }},
      // sweep
      {"axis1", [](Config& c, auto, auto v) { c.axis1.parameter = parse_axis(v); }},
      {"axis1_min", [](Config& c, auto k, auto v) { c.axis1.min = to_double(k, v); }},
      {"axis1_max", [](Config& c, auto k, auto v) { c.axis1.max = to_double(k, v); }},
      {"axis1_points", [](Config& c, auto k, auto v) { c.axis1.points = to_int(k, v); }},
      {"axis2",
       [](Config& c, auto, auto v) {
         if (v == "none") c.axis2.reset();
         else axis2_of(c).parameter = parse_axis(v);
       }},
      {"axis2_min", [](Config& c, auto k, auto v) { axis2_of(c).min = to_double(k, v); }},
      {"axis2_max", [](Config& c, auto k, auto v) { axis2_of(c).max = to_double(k, v); }},
      {"axis2_points", [](Config& c, auto k, auto v) { axis2_of(c).points = to_int(k, v); }},
      {"observables", [](Config& c, auto, auto v) { c.observables = split_list(v); }},
      {"output", [](Config& c, auto, auto v) { c.output = std::string(v); }},
      {"workers", [](Config& c, auto k, auto v) { c.workers = to_int(k, v); }},
      // correlations
      {"tau_max", [](Config& c, auto k, auto v) { c.tau.tau_max = to_double(k, v); }},
      {"tau_points", [](Config& c, auto k, auto v) { c.tau.points = to_int(k, v); }},
      {"gtau_orders", [](Config& c, auto k, auto v) { c.tau.orders = to_int_list(k, v); }},
      // resonance curves
      {"manifold", [](Config& c, auto k, auto v) { c.resonance.manifold = to_int(k, v); }},
      {"delta_convention",
       [](Config& c, auto k, auto v) {
         if (v == "plus_half") c.resonance.convention = DeltaConvention::plus_half;
         else if (v == "minus_half") c.resonance.convention = DeltaConvention::minus_half;
         else bad_value(k, v, "plus_half or minus_half");
       }},
      {"chi_over_g_min",
       [](Config& c, auto k, auto v) { c.resonance.chi_over_g_min = to_double(k, v); }},
      {"chi_over_g_max",
       [](Config& c, auto k, auto v) { c.resonance.chi_over_g_max = to_double(k, v); }},
      {"chi_points", [](Config& c, auto k, auto v) { c.resonance.chi_points = to_int(k, v); }},
      // output
      {"unit_khz",
       [](Config& c, auto k, auto v) {
         c.unit_khz = to_double(k, v);
         if (c.unit_khz < 0.0) bad_value(k, v, "a non-negative number");
       }},
  };
  return table;
}

}  // namespace

double parse_phase(std::string_view token) {
  const double pi = std::numbers::pi;
  if (token == "0") return 0.0;
  if (token == "pi") return pi;
  if (token == "2pi3") return 2.0 * pi / 3.0;
  if (token == "4pi3") return 4.0 * pi / 3.0;
  const double x = to_double("phi", token);
  if (!(x >= 0.0 && x < kTwoPi)) bad_value("phi", token, "0, pi, 2pi3, 4pi3 or radians in [0, 2pi)");
  return x;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void Config::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw Error(ErrorCode::invalid_argument, "unknown config key '" + std::string(key) + "'");
  }
  if (value.empty()) {
    throw Error(ErrorCode::invalid_argument, "empty value for key '" + std::string(key) + "'");
  }
  it->second(*this, key, value);
  const auto existing = std::find_if(entries_.begin(), entries_.end(),
                                     [&](const auto& e) { return e.first == key; });
  if (existing != entries_.end()) {
    existing->second = std::string(value);
  } else {
    entries_.emplace_back(std::string(key), std::string(value));
  }
}

void Config::load_text(std::string_view text, std::string_view origin) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::invalid_argument, std::string(origin) + ":" +
                                                   std::to_string(line_no) +
                                                   ": expected 'key = value'");
    }
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(),
                  std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  load_text(buf.str(), path);
}

bool Config::has(std::string_view key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == key; });
}

void Config::require(std::string_view key) const {
  if (!has(key)) {
    throw Error(ErrorCode::invalid_argument, "missing required key '" + std::string(key) + "'");
  }
}

SweepSpec Config::sweep_spec() const {
  SweepSpec s;
  s.axis1 = axis1;
  s.axis2 = axis2;
  s.base = params;
  s.observables = observables;
  s.cutoff = cutoff;
  s.auto_cutoff = auto_cutoff;
  s.cutoffs = cutoffs;
  s.workers = workers;
  return s;
}

}  // namespace bundlesim
