#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hofid/parallel.hpp"
#include "hofid/spin_basis.hpp"

namespace hofid {

enum class Boundary { periodic };

/// H(lambda) = sum_j ( s_j . s_{j+1} + lambda s_j . s_{j+2} ), sites mod L.
///
/// The sum runs literally over j = 0..L-1 for both couplings, so at L = 4 each
/// next-nearest pair (0,2), (1,3) is visited twice.
struct ChainSpec {
  int sites = 0;
  double lambda = 0.0;
  Boundary boundary = Boundary::periodic;

  void validate() const;
};

/// Two-site exchange term s_a . s_b with a fixed coupling.
struct Bond {
  Mask flip;  // bits a and b set
  double coupling;
};

std::vector<Bond> chain_bonds(int sites, double nn_coupling, double nnn_coupling);

/// out = (nn * H_0 + nnn * H_I) v, evaluated row by row (each output entry is
/// gathered from its connected states in a fixed order).
void apply_couplings(const SectorBasis& basis, double nn_coupling, double nnn_coupling,
                     std::span<const double> v, std::span<double> out);

Vector apply_hamiltonian(const ChainSpec& spec, const SectorBasis& basis, std::span<const double> v);

/// H_I = sum_j s_j . s_{j+2}, the operator multiplying lambda.
Vector apply_driving(const ChainSpec& spec, const SectorBasis& basis, std::span<const double> v);

inline constexpr std::size_t kDenseDimLimit = 4000;

/// Dense sector matrix for nn * H_0 + nnn * H_I; dim must not exceed kDenseDimLimit.
Eigen::MatrixXd dense_couplings(const SectorBasis& basis, double nn_coupling, double nnn_coupling);
Eigen::MatrixXd dense_hamiltonian(const ChainSpec& spec, const SectorBasis& basis);
Eigen::MatrixXd dense_driving(const SectorBasis& basis);

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Matrix-free H(lambda) bound to a basis that must outlive the operator.
LinearOperator hamiltonian_operator(const ChainSpec& spec, const SectorBasis& basis);

}  // namespace hofid
