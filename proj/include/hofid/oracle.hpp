#pragma once

#include <Eigen/Dense>

#include <functional>

#include "hofid/eigensolver.hpp"
#include "hofid/fidelity.hpp"
#include "hofid/spin_basis.hpp"

// Exact-eigenbasis (sum-over-states) values of chi2, chi3 and d^3E/dlambda^3.
// These are the reference values the fidelity engine is validated against.

namespace hofid {

/// Largest chain for routine oracle runs (Sz = 0 dim 924).
inline constexpr int kOracleSites = 12;
/// Opt-in ceiling (dim 3432).
inline constexpr int kOracleSitesExtended = 14;

/// V_mn = <psi_m|H_I|psi_n> over all eigenpairs of one sector.
struct DrivingMatrixElements {
  double lambda = 0.0;
  Eigen::MatrixXd elements;
};

DrivingMatrixElements driving_elements(const SpectralData& spectrum, const SectorBasis& basis);

/// sum_{n != 0} |V_n0|^2 / (E_0 - E_n)^2
double chi2_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies);

/// sum_{m,n != 0} 2 V_0m V_mn V_n0 / [(E_0 - E_m)(E_0 - E_n)^2]
///   - sum_{n != 0} 2 V_00 |V_n0|^2 / (E_0 - E_n)^3
double chi3_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies);

/// sum_{m,n != 0} 6 V_0n V_nm V_m0 / [(E_0 - E_m)(E_0 - E_n)]
///   - sum_{n != 0} 6 V_00 |V_n0|^2 / (E_0 - E_n)^2
double d3E_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies);

/// [E(l+2h) - 2E(l+h) + 2E(l-h) - E(l-2h)] / (2h^3)
double third_difference(const std::function<double(double)>& energy, double lambda, double h);

/// Third difference of converged ground-state energies; throws on an
/// unconverged stencil point.
double d3E_finite_difference(const SolveFn& solve, double lambda, double h);

/// Full dense solve of H(lambda) plus its driving elements.
struct ExactPoint {
  SpectralData spectrum;
  DrivingMatrixElements elements;
  double chi2 = 0.0;
  double chi3 = 0.0;
  double d3E = 0.0;
};

ExactPoint exact_point(const SectorBasis& basis, double lambda, bool allow_extended = false);

/// Ground state taken from the dense solver, for feeding the fidelity engine
/// with eigenvectors that carry no iterative error.
SolveFn dense_solver(const SectorBasis& basis);

}  // namespace hofid
