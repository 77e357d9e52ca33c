#include "bundlesim/correlations.hpp"

#include <algorithm>
#include <cmath>

#include "bundlesim/error.hpp"

namespace bundlesim {

namespace {

SparseMatrix power(const SparseMatrix& a, int n) {
  SparseMatrix out(a.rows(), a.cols());
  out.setIdentity();
  for (int k = 0; k < n; ++k) out = SparseMatrix(out * a);
  return out;
}

// Tr[B X] for sparse B and dense X.
Complex trace_product(const SparseMatrix& b, const DenseMatrix& x) {
  Complex acc(0.0);
  for (Index k = 0; k < b.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) acc += it.value() * x(it.col(), it.row());
  }
  return acc;
}

// Same, with X given column-stacked.
Complex trace_product(const SparseMatrix& b, const Vector& vec_x, Index d) {
  Complex acc(0.0);
  for (Index k = 0; k < b.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
      acc += it.value() * vec_x(it.col() + it.row() * d);
    }
  }
  return acc;
}

void check_rho(const DenseMatrix& rho, const SpaceConfig& space) {
  if (rho.rows() != space.dimension() || rho.cols() != space.dimension()) {
    throw Error(ErrorCode::invalid_argument, "density matrix does not match the space");
  }
}

const char* undefined_message = "correlation undefined: photon moment below 1e-14 (vacuum)";

}  // namespace

double normal_moment(const DenseMatrix& rho, const SpaceConfig& space, int n) {
  check_rho(rho, space);
  if (n < 0) throw Error(ErrorCode::invalid_argument, "moment order must be >= 0");
  const SparseMatrix an = power(annihilation(space).matrix(), n);
  const SparseMatrix b = SparseMatrix(an.adjoint()) * an;
  return trace_product(b, rho).real();
}

double g1n_zero(const DenseMatrix& rho, const SpaceConfig& space, int n) {
  if (n < 2 || n > 4) throw Error(ErrorCode::invalid_argument, "g1n_zero supports n = 2, 3, 4");
  const double n_s = normal_moment(rho, space, 1);
  if (n_s <= kMomentFloor) throw Error(ErrorCode::undefined_correlation, undefined_message);
  return normal_moment(rho, space, n) / std::pow(n_s, n);
}

std::vector<double> tau_grid(double tau_max, int points) {
  if (points < 2 || !(tau_max > 0.0) || !std::isfinite(tau_max)) {
    throw Error(ErrorCode::invalid_argument, "tau grid needs >= 2 points and tau_max > 0");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[std::size_t(i)] = tau_max * i / (points - 1);
  return grid;
}

CorrelationTrace gn2_tau(const Liouvillian& liouvillian, const DenseMatrix& rho,
                         const SpaceConfig& space, int n, std::span<const double> grid,
                         const PropagationOptions& options) {
  check_rho(rho, space);
  if (n < 1 || n > 3) throw Error(ErrorCode::invalid_argument, "gn2_tau supports n = 1, 2, 3");
  if (liouvillian.hilbert_dimension() != space.dimension()) {
    throw Error(ErrorCode::invalid_argument, "Liouvillian does not match the space");
  }
  const Index d = space.dimension();
  const SparseMatrix an = power(annihilation(space).matrix(), n);
  const SparseMatrix an_dag = an.adjoint();
  const SparseMatrix b = an_dag * an;
  const double moment = trace_product(b, rho).real();
  if (moment <= kMomentFloor) throw Error(ErrorCode::undefined_correlation, undefined_message);

  const DenseMatrix seed = an * (rho * an_dag);
  const auto states = propagate(liouvillian, vectorize(seed), grid, options);

  CorrelationTrace trace;
  trace.order = n;
  trace.tau.assign(grid.begin(), grid.end());
  trace.value.reserve(states.size());
  const double norm = moment * moment;
  for (const Vector& v : states) trace.value.push_back(trace_product(b, v, d).real() / norm);
  return trace;
}

PhotonDistribution photon_distribution(const DenseMatrix& rho, const SpaceConfig& space) {
  check_rho(rho, space);
  PhotonDistribution dist;
  dist.p.assign(std::size_t(space.cavity_cutoff + 1), 0.0);
  for (Index i = 0; i < space.dimension(); ++i) {
    dist.p[std::size_t(decode(space, i).photons)] += rho(i, i).real();
  }
  const double occupied = 1.0 - dist.p[0];
  if (occupied > kMomentFloor) {
    std::vector<double> cond(dist.p.size(), 0.0);
    for (std::size_t q = 1; q < dist.p.size(); ++q) cond[q] = dist.p[q] / occupied;
    dist.conditional = std::move(cond);
  }
  return dist;
}

ObservableRecord make_record(const SystemParams& params, const SpaceConfig& space,
                             const SteadyState& state) {
  ObservableRecord r;
  r.params = params;
  r.cutoff = space.cavity_cutoff;
  r.n_s = normal_moment(state.rho, space, 1);
  if (r.n_s > kMomentFloor) {
    r.g2_0 = g1n_zero(state.rho, space, 2);
    r.g3_0 = g1n_zero(state.rho, space, 3);
    r.g4_0 = g1n_zero(state.rho, space, 4);
  }
  r.distribution = photon_distribution(state.rho, space);
  r.residual = state.residual;
  r.min_eigenvalue = state.min_eigenvalue;
  return r;
}

std::vector<std::string> Classification::labels() const {
  std::vector<std::string> out;
  if (single_photon_blockade) out.emplace_back("1PB");
  if (two_photon_blockade) out.emplace_back("2PB");
  if (three_photon_blockade) out.emplace_back("3PB");
  if (two_photon_bundle) out.emplace_back("2-bundle");
  if (three_photon_bundle) out.emplace_back("3-bundle");
  return out;
}

bool bunched_at_first_delay(const CorrelationTrace& trace) {
  if (trace.value.size() < 2) {
    throw Error(ErrorCode::incomplete_record, "trace needs tau = 0 and at least one delay");
  }
  return trace.value[0] > trace.value[1];
}

bool antibunched_over_grid(const CorrelationTrace& trace) {
  if (trace.value.size() < 2) {
    throw Error(ErrorCode::incomplete_record, "trace needs tau = 0 and at least one delay");
  }
  const double later = *std::max_element(trace.value.begin() + 1, trace.value.end());
  return trace.value[0] < later;
}

Classification classify(const ObservableRecord& record) {
  if (!record.g2_0 || !record.g3_0 || !record.g4_0) {
    throw Error(ErrorCode::incomplete_record, "record lacks zero-delay correlations");
  }
  const auto g1_trace = record.traces.find(1);
  if (g1_trace == record.traces.end()) {
    throw Error(ErrorCode::incomplete_record, "record lacks the g_1^(2)(tau) trace");
  }
  const double g2 = *record.g2_0, g3 = *record.g3_0, g4 = *record.g4_0;

  Classification c;
  c.single_photon_blockade = g2 < 1.0 && antibunched_over_grid(g1_trace->second);
  c.two_photon_blockade = g2 > 1.0 && g3 < 1.0;
  c.three_photon_blockade = g3 > 1.0 && g4 < 1.0;

  auto bundle = [&](int n) {
    const auto it = record.traces.find(n);
    if (it == record.traces.end()) {
      throw Error(ErrorCode::incomplete_record,
                  "record lacks the g_" + std::to_string(n) + "^(2)(tau) trace");
    }
    return bunched_at_first_delay(g1_trace->second) && antibunched_over_grid(it->second);
  };
  c.two_photon_bundle = c.two_photon_blockade && bundle(2);
  c.three_photon_bundle = c.three_photon_blockade && bundle(3);
  return c;
}

}  // namespace bundlesim
