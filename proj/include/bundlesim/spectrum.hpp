#pragma once

#include <span>
#include <string>
#include <vector>

#include "bundlesim/hilbert.hpp"

namespace bundlesim {

// Label of one manifold basis state |photons, s1, s2, s3>.
struct ManifoldLabel {
  int photons = 0;
  std::array<bool, kAtomCount> excited{};

  std::string to_string() const;  // e.g. "|1,e,g,e>"
};

// Hamiltonian block of the N-excitation manifold (drive off), shifted by
// +3 delta / 2 so that |0,g,g,g> sits at zero energy.
//
// Rows follow the fixed ordering
//   |n-1,g,g,e>, |n-1,g,e,g>, |n-1,e,g,g>,
//   |n-2,e,e,g>, |n-2,e,g,e>, |n-2,g,e,e>,
//   |n-3,e,e,e>, |n,g,g,g>
// with n = N and states of negative photon number dropped (4x4 for N=1,
// 7x7 for N=2, 8x8 for N>=3).
struct ManifoldMatrix {
  int excitations = 0;
  int photon_reference = 0;
  DenseMatrix matrix;
  std::vector<ManifoldLabel> basis;
};

ManifoldMatrix build_manifold_matrix(int excitations, double chi, double delta_a, double delta,
                                     double g_a, double phi);

// Sign convention delta = +Delta_a/2 or delta = -Delta_a/2 used by the
// phi = 0 analysis.
enum class DeltaConvention { plus_half, minus_half };

double delta_for(DeltaConvention convention, double delta_a);

// phi = 0 permutation-symmetric sector. N=1: basis {|W,0>, |ggg,1>};
// N=2: basis {|W_1>, |W_2>, |G_2>}.
DenseMatrix collective_reduce(int excitations, double chi, double delta_a, double g_a,
                              DeltaConvention convention = DeltaConvention::plus_half);

// Polynomial coefficients in ascending powers: c[0] + c[1] x + ...
struct Polynomial {
  std::vector<double> coefficients;

  int degree() const;
  double operator()(double x) const;
  double max_abs_coefficient() const;
};

// Real roots, ascending, duplicates merged. Closed form up to degree 2,
// companion-matrix eigenvalues above. A root counts as real when
// |Im| < 1e-9 (1 + |Re|).
std::vector<double> real_roots(const Polynomial& p);

struct ResonanceBranch {
  int manifold = 0;
  int id = 0;
  std::string name;
  Polynomial polynomial;  // in Delta_a, for the given chi and g_a
  std::vector<double> roots;
};

// Zero-energy resonance conditions det(M_N) = 0 as closed-form branch
// polynomials. N=1,2 use phi = 0 with the given delta convention; N=3 uses
// phi = 2pi/3 and delta = +Delta_a/2 (the convention argument must be
// plus_half).
std::vector<ResonanceBranch> resonance_branches(
    int excitations, double chi, double g_a,
    DeltaConvention convention = DeltaConvention::plus_half);

struct ResonanceRow {
  double chi = 0.0;
  std::string branch;
  double delta_a_root = 0.0;
};

// Resonance curves over a monotone chi grid. Curves keep their labels across
// the grid by nearest-root continuation; a curve ends where its polynomial
// loses real roots and a new label starts when roots appear. Labels read
// "N<manifold>.<branch id>.<curve index>".
std::vector<ResonanceRow> resonance_curves(int excitations, std::span<const double> chi_grid,
                                           double g_a,
                                           DeltaConvention convention = DeltaConvention::plus_half);

// Every manifold family relevant at a given phase: phi = 0 gives N=1 and N=2,
// phi = 2pi/3 gives N=3.
std::vector<ResonanceRow> resonance_figure(double phi, std::span<const double> chi_grid, double g_a,
                                           DeltaConvention convention = DeltaConvention::plus_half);

}  // namespace bundlesim
