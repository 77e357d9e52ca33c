#include "bundlesim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void format_number(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "nan";
    return;
  }
  if (std::isinf(x)) {
    out += x > 0 ? "inf" : "-inf";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

struct ExtraColumn {
  enum Kind { probability, conditional, residual } kind;
  int q = 0;
};

ExtraColumn parse_extra(const std::string& name, int cutoff) {
  auto number = [&](std::size_t prefix) {
    const std::string digits = name.substr(prefix);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      throw Error(ErrorCode::invalid_argument, "unknown observable '" + name + "'");
    }
    const int q = std::stoi(digits);
    if (q > cutoff) {
      throw Error(ErrorCode::invalid_argument,
                  "observable '" + name + "' exceeds the cavity cutoff " + std::to_string(cutoff));
    }
    return q;
  };
  if (name == "residual") return {ExtraColumn::residual, 0};
  if (name.rfind("ptilde", 0) == 0) {
    const int q = number(6);
    if (q == 0) throw Error(ErrorCode::invalid_argument, "ptilde starts at q = 1");
    return {ExtraColumn::conditional, q};
  }
  if (name.rfind("p", 0) == 0) return {ExtraColumn::probability, number(1)};
  throw Error(ErrorCode::invalid_argument, "unknown observable '" + name + "'");
}

SweepRow evaluate(const SystemParams& params, int cutoff, const std::vector<ExtraColumn>& extras) {
  SweepRow row;
  row.params = params;
  row.n_s = row.g2_0 = row.g3_0 = row.g4_0 = kNaN;
  row.extras.assign(extras.size(), kNaN);
  try {
    const ObservableRecord r = compute_point(params, cutoff);
    row.n_s = r.n_s;
    if (r.g2_0) {
      row.g2_0 = *r.g2_0;
      row.g3_0 = *r.g3_0;
      row.g4_0 = *r.g4_0;
    } else {
      row.status = int(ErrorCode::undefined_correlation);
      row.error = "vacuum: correlations undefined";
    }
    for (std::size_t k = 0; k < extras.size(); ++k) {
      const ExtraColumn& e = extras[k];
      const auto q = std::size_t(e.q);
      switch (e.kind) {
        case ExtraColumn::probability: row.extras[k] = r.distribution.p[q]; break;
        case ExtraColumn::conditional:
          if (r.distribution.conditional) row.extras[k] = (*r.distribution.conditional)[q];
          break;
        case ExtraColumn::residual: row.extras[k] = r.residual; break;
      }
    }
  } catch (const Error& e) {
    row.status = int(e.code());
    row.error = e.what();
  } catch (const std::exception& e) {
    row.status = int(ErrorCode::numerical_failure);
    row.error = e.what();
  }
  return row;
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::delta_a: return "delta_a";
    case SweepAxis::chi: return "chi";
    case SweepAxis::phi: return "phi";
    case SweepAxis::omega: return "omega";
    case SweepAxis::gamma_e: return "gamma_e";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (auto a : {SweepAxis::delta_a, SweepAxis::chi, SweepAxis::phi, SweepAxis::omega,
                 SweepAxis::gamma_e}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorCode::invalid_argument,
              "invalid sweep axis '" + std::string(name) +
                  "' (expected delta_a, chi, phi, omega or gamma_e)");
}

double AxisSpec::value(int index) const {
  if (index == 0) return min;
  if (index == points - 1) return max;
  return min + (max - min) * (double(index) / double(points - 1));
}

void AxisSpec::validate() const {
  if (points < 2) {
    throw Error(ErrorCode::invalid_argument,
                std::string("axis ") + to_string(parameter) + " needs at least 2 points");
  }
  if (!std::isfinite(min) || !std::isfinite(max)) {
    throw Error(ErrorCode::invalid_argument,
                std::string("axis ") + to_string(parameter) + " range must be finite");
  }
}

void apply_axis(SystemParams& params, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::delta_a: params.delta_a = value; break;
    case SweepAxis::chi: params.chi = value; break;
    case SweepAxis::phi: params.phi = wrap_phase(value); break;
    case SweepAxis::omega: params.omega = value; break;
    case SweepAxis::gamma_e: params.gamma_e = value; break;
  }
}

std::size_t SweepSpec::size() const {
  return std::size_t(axis1.points) * std::size_t(axis2 ? axis2->points : 1);
}

SystemParams SweepSpec::point(std::size_t index) const {
  const std::size_t inner = axis2 ? std::size_t(axis2->points) : 1;
  SystemParams p = base;
  apply_axis(p, axis1.parameter, axis1.value(int(index / inner)));
  if (axis2) apply_axis(p, axis2->parameter, axis2->value(int(index % inner)));
  return p;
}

SystemParams SweepSpec::demanding_corner() const {
  SystemParams p = base;
  auto choose = [&](const AxisSpec& axis) {
    double pick;
    if (axis.parameter == SweepAxis::delta_a) {
      // Smallest |value| on the grid, including an interior zero crossing.
      pick = axis.value(0);
      for (int i = 1; i < axis.points; ++i) {
        if (std::abs(axis.value(i)) < std::abs(pick)) pick = axis.value(i);
      }
    } else {
      pick = std::abs(axis.max) >= std::abs(axis.min) ? axis.max : axis.min;
    }
    apply_axis(p, axis.parameter, pick);
  };
  choose(axis1);
  if (axis2) choose(*axis2);
  return p;
}

void SweepSpec::validate() const {
  axis1.validate();
  if (axis2) {
    axis2->validate();
    if (axis2->parameter == axis1.parameter) {
      throw Error(ErrorCode::invalid_argument, "sweep axes must differ");
    }
  }
  if (workers < 1) throw Error(ErrorCode::invalid_argument, "workers must be >= 1");
  SpaceConfig{cutoff, 0}.validate();
  SystemParams probe = base;
  probe.phi = wrap_phase(probe.phi);
  probe.validate();
  for (const auto& name : observables) parse_extra(name, auto_cutoff ? cutoffs.back() : cutoff);
}

ObservableRecord compute_point(const SystemParams& params, int cutoff) {
  params.validate();
  const SpaceConfig space{cutoff, 0};
  return make_record(params, space, solve_steady_state(params, space));
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.cutoff = spec.cutoff;
  if (spec.auto_cutoff) {
    result.convergence = convergence_scan(spec.demanding_corner(), spec.cutoffs);
    result.cutoff = result.convergence->chosen_cutoff;
  }
  std::vector<ExtraColumn> extras;
  for (const auto& name : spec.observables) extras.push_back(parse_extra(name, result.cutoff));
  result.extra_columns = spec.observables;

  const std::size_t total = spec.size();
  result.rows.resize(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      result.rows[i] = evaluate(spec.point(i), result.cutoff, extras);
    }
  };
  const int workers = int(std::min<std::size_t>(std::size_t(spec.workers), total));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

std::string to_csv(const SweepResult& result) {
  std::string out = "delta_a,chi,phi,delta,omega,n_s,g2_0,g3_0,g4_0,status";
  for (const auto& c : result.extra_columns) out += "," + c;
  out += '\n';
  for (const SweepRow& r : result.rows) {
    const double cols[] = {r.params.delta_a, r.params.chi, r.params.phi, r.params.delta(),
                           r.params.omega,   r.n_s,        r.g2_0,       r.g3_0,
                           r.g4_0};
    for (double v : cols) {
      format_number(out, v);
      out += ',';
    }
    out += std::to_string(r.status);
    for (double v : r.extras) {
      out += ',';
      format_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  f.write(contents.data(), std::streamsize(contents.size()));
  f.close();
  if (!f) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

}  // namespace bundlesim
