#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "hofid/hamiltonian.hpp"
#include "hofid/parallel.hpp"

namespace hofid {

struct LanczosOptions {
  /// Residual norm ||H v - E0 v|| required for the ground pair.
  double tolerance = 1e-12;
  /// Residual norm required for the second pair when nev == 2.
  double excited_tolerance = 1e-8;
  /// Budget in matrix-vector products.
  int max_iter = 4000;
  std::uint64_t seed = 1;
  /// Krylov basis size before a thick restart.
  int max_basis = 120;
  /// 1: ground pair only; 2: ground pair plus a converged E1.
  int nev = 2;
  /// Keep the first-excited Ritz vector in the solution (nev == 2 only).
  bool keep_excited_vector = false;
  /// Optional starting vector; mixed with 1% seeded noise when nev == 2.
  std::optional<Vector> warm_start;
};

struct GroundStateSolution {
  double lambda = 0.0;
  double energy = 0.0;
  /// Lowest Ritz value above E0. Only an upper bound when nev == 1.
  double second_energy = 0.0;
  Vector vector;
  Vector excited_vector;
  /// Measured ||H v - E0 v|| with one extra matvec after convergence.
  double residual_norm = 0.0;
  double excited_residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when E1 - E0 < 1e-10 |E0|; downstream fidelity analysis refuses these.
  bool near_degenerate = false;
  std::uint64_t seed = 1;
  bool warm_started = false;

  double gap() const noexcept { return second_energy - energy; }
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, GroundStateSolution best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const GroundStateSolution& best() const noexcept { return best_; }

 private:
  GroundStateSolution best_;
};

/// Lowest eigenpair(s) of a real symmetric operator.
///
/// Thick-restart Lanczos with full reorthogonalization (classical Gram-Schmidt
/// applied twice against the whole Krylov basis). Converged on the residual
/// norm of the Ritz vector, and the returned residual is re-measured with a
/// fresh matvec. Deterministic for a fixed seed.
GroundStateSolution ground_state(const LinearOperator& apply, std::size_t dim,
                                 const LanczosOptions& options = {});

/// Convenience overload for H(lambda) on the given basis.
GroundStateSolution ground_state(const ChainSpec& spec, const SectorBasis& basis,
                                 const LanczosOptions& options = {});

struct SpectralData {
  double lambda = 0.0;
  Eigen::VectorXd energies;      // ascending
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
};

/// Full spectrum of a dense symmetric matrix (dim <= kDenseDimLimit).
SpectralData full_spectrum(const Eigen::MatrixXd& matrix, double lambda = 0.0);

/// Fixes the overall sign of a real eigenvector.
///
/// With a reference, returns +-v so that <reference|v> > 0; throws
/// std::domain_error if |<reference|v>| <= 1e-12. Without one, makes the
/// largest-magnitude amplitude positive (lowest index wins ties).
Vector gauge_fix(std::span<const double> v, std::optional<std::span<const double>> reference = std::nullopt);

}  // namespace hofid
