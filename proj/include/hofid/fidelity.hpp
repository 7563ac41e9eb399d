#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hofid/eigensolver.hpp"
#include "hofid/hamiltonian.hpp"
#include "hofid/spin_basis.hpp"

namespace hofid {

/// Ground state at a given lambda. Implementations may cache.
using SolveFn = std::function<GroundStateSolution(double lambda)>;

/// F = |<v1|v2>|. Both vectors are expected to be normalized.
double overlap_fidelity(std::span<const double> v1, std::span<const double> v2);

/// 1 - F^2 for the normalized directions of v1 and v2, evaluated as the squared
/// norm of the part of v2 orthogonal to v1. Accurate to relative precision even
/// when F is within 1e-8 of one.
double infidelity(std::span<const double> v1, std::span<const double> v2);

enum class Method { stencil, derivative };

const char* to_string(Method method);

/// Thrown when a point cannot be analysed (unconverged or near-degenerate
/// ground state, or an undefined gauge inside the stencil).
class RefusedPoint : public std::runtime_error {
 public:
  RefusedPoint(const std::string& reason, std::string flag)
      : std::runtime_error(reason), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

/// Expansion coefficients of F^2(lambda, lambda + d) = 1 - sum_l d^l chi_l at one lambda.
struct ExpansionPoint {
  double lambda = 0.0;
  /// Step the reported coefficients were extracted at.
  double h = 0.0;
  /// Base step requested by the caller.
  double base_h = 0.0;
  /// Stencil offset (in units of lambda) -> F, for the reported step.
  std::map<double, double> f_values;
  double chi2 = 0.0;
  double chi3 = 0.0;
  double chi4_nuisance = std::numeric_limits<double>::quiet_NaN();
  /// Coefficient of d^1; vanishes analytically.
  double linear_coeff = 0.0;
  double fit_residual = 0.0;
  Method method = Method::stencil;
  double energy = 0.0;
  double gap_at_lambda = 0.0;
  /// F(lambda, lambda + base_h).
  double f_plus_h = 1.0;
  /// Derivative route only: 2<psi|dpsi> and <dpsi|dpsi> + <psi|d2psi>.
  double norm_identity_1 = std::numeric_limits<double>::quiet_NaN();
  double norm_identity_2 = std::numeric_limits<double>::quiet_NaN();
  /// Step halvings performed before the two finest levels agreed.
  int halvings = 0;
  bool step_converged = true;
  std::vector<std::string> warnings;
};

struct StepControl {
  double h = 1e-3;
  /// Compare against h/2 (and h/4 if needed); otherwise use h alone.
  bool richardson = true;
  int max_halvings = 2;
  double chi2_agreement = 5e-3;
  double chi3_agreement = 2e-2;
};

/// Fit of 1 - F^2 on offsets {-2h, -h, +h, +2h} against d, d^2, d^3, d^4.
ExpansionPoint chi_from_stencil(const SolveFn& solve, double lambda, const StepControl& control = {});

/// chi2 = <dpsi|P|dpsi>, chi3 = <dpsi|P|d2psi> from gauge-fixed central differences.
ExpansionPoint chi_from_derivatives(const SolveFn& solve, double lambda, const StepControl& control = {});

/// Single-level kernels used by the step control above; exposed for tests.
ExpansionPoint stencil_at_step(const SolveFn& solve, double lambda, double step);
ExpansionPoint derivatives_at_step(const SolveFn& solve, double lambda, double step);

/// Memoizing Lanczos driver for one chain length.
///
/// The first request near a new lambda (farther than anchor_radius from the
/// current anchor) is solved from the seeded random vector with two
/// eigenpairs and becomes the anchor. Nearby requests solve for the ground
/// pair only, starting from the polynomial interpolation of up to three
/// cached neighbours.
class ChainGroundStates {
 public:
  ChainGroundStates(int sites, LanczosOptions options, bool warm_start = true, double anchor_radius = 0.05);

  const SectorBasis& basis() const noexcept { return *basis_; }
  const GroundStateSolution& at(double lambda);
  SolveFn solver();
  /// Drops cached solutions (the basis is kept).
  void clear();
  int solves() const noexcept { return solves_; }

 private:
  Vector interpolated_guess(double lambda) const;

  std::shared_ptr<const SectorBasis> basis_;
  LanczosOptions options_;
  bool warm_start_;
  double anchor_radius_;
  std::map<double, GroundStateSolution> cache_;
  const GroundStateSolution* anchor_ = nullptr;
  int solves_ = 0;
};

enum class MethodSelection { stencil, derivative, both };

struct SweepOptions {
  std::vector<int> sizes;
  double lambda_min = 0.0;
  double lambda_max = 0.5;
  double lambda_step = 0.01;
  StepControl step;
  MethodSelection method = MethodSelection::stencil;
  LanczosOptions solver;
  bool warm_start = true;
  /// Relative chi2 / chi3 mismatch tolerated between routes when method == both.
  double both_chi2_agreement = 1e-2;
  double both_chi3_agreement = 2e-2;
};

struct SweepRow {
  int sites = 0;
  double lambda = 0.0;
  double energy = 0.0;
  double gap = 0.0;
  double f_plus_h = 0.0;
  double chi2 = 0.0;
  double chi3 = 0.0;
  double chi3_abs = 0.0;
  double fit_residual = 0.0;
  std::string flag = "ok";
  double seconds = 0.0;
  int solves = 0;
};

/// lambda_min + i * step for i = 0..n-1; empty when lambda_max < lambda_min.
std::vector<double> lambda_grid(double lambda_min, double lambda_max, double step);

void validate_sweep(const SweepOptions& options);

using SweepProgress = std::function<void(const SweepRow&)>;

/// One row per (L, lambda) in ascending order. Per-point failures are flagged
/// in the row and never abort the sweep.
std::vector<SweepRow> sweep(const SweepOptions& options, const SweepProgress& progress = {});

}  // namespace hofid
