#include "hofid/hamiltonian.hpp"

#include <array>
#include <bit>
#include <stdexcept>
#include <string>

namespace hofid {

namespace {

void check_basis(const ChainSpec& spec, const SectorBasis& basis) {
  spec.validate();
  if (basis.sites() != spec.sites) {
    throw std::invalid_argument("basis has L=" + std::to_string(basis.sites()) +
                                " but chain has L=" + std::to_string(spec.sites));
  }
}

void check_vector(const SectorBasis& basis, std::size_t length) {
  if (length != basis.dim()) {
    throw std::invalid_argument("state vector length " + std::to_string(length) +
                                " does not match basis dimension " + std::to_string(basis.dim()));
  }
}

}  // namespace

void ChainSpec::validate() const {
  if (sites < 4 || sites > kMaxSites || sites % 2 != 0) {
    throw std::invalid_argument("chain length must be even and in [4, " +
                                std::to_string(kMaxSites) + "], got " + std::to_string(sites));
  }
  if (boundary != Boundary::periodic) throw std::invalid_argument("only periodic chains are supported");
}

std::vector<Bond> chain_bonds(int sites, double nn_coupling, double nnn_coupling) {
  std::vector<Bond> bonds;
  bonds.reserve(2 * static_cast<std::size_t>(sites));
  auto add = [&](int range, double coupling) {
    if (coupling == 0.0) return;
    for (int j = 0; j < sites; ++j) {
      const int k = (j + range) % sites;
      bonds.push_back({(Mask{1} << j) | (Mask{1} << k), coupling});
    }
  };
  add(1, nn_coupling);
  add(2, nnn_coupling);
  return bonds;
}

void apply_couplings(const SectorBasis& basis, double nn_coupling, double nnn_coupling,
                     std::span<const double> v, std::span<double> out) {
  check_vector(basis, v.size());
  check_vector(basis, out.size());
  const int L = basis.sites();
  const Mask full = (Mask{1} << L) - 1;
  const auto states = basis.states();
  const auto n = static_cast<std::ptrdiff_t>(states.size());

  // flips[r-1][j] exchanges sites j and j+r (mod L).
  std::array<std::array<Mask, kMaxSites>, 2> flips{};
  for (int r = 1; r <= 2; ++r) {
    for (int j = 0; j < L; ++j) flips[r - 1][j] = (Mask{1} << j) | (Mask{1} << ((j + r) % L));
  }
  const std::array<double, 2> couplings{nn_coupling, nnn_coupling};

#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Mask s = states[i];
    double diag = 0.0;
    double off = 0.0;
    for (int r = 1; r <= 2; ++r) {
      const double coupling = couplings[r - 1];
      if (coupling == 0.0) continue;
      // Bit j set: sites j and j+r are antiparallel.
      const Mask rotated = ((s >> r) | (s << (L - r))) & full;
      Mask anti = s ^ rotated;
      diag += 0.25 * coupling * static_cast<double>(L - 2 * std::popcount(anti));
      double gathered = 0.0;
      while (anti != 0) {
        const int j = std::countr_zero(anti);
        anti &= anti - 1;
        gathered += v[basis.rank_unchecked(s ^ flips[r - 1][j])];
      }
      off += 0.5 * coupling * gathered;
    }
    out[i] = diag * v[i] + off;
  }
}

Vector apply_hamiltonian(const ChainSpec& spec, const SectorBasis& basis, std::span<const double> v) {
  check_basis(spec, basis);
  Vector out(basis.dim());
  apply_couplings(basis, 1.0, spec.lambda, v, out);
  return out;
}

Vector apply_driving(const ChainSpec& spec, const SectorBasis& basis, std::span<const double> v) {
  check_basis(spec, basis);
  Vector out(basis.dim());
  apply_couplings(basis, 0.0, 1.0, v, out);
  return out;
}

Eigen::MatrixXd dense_couplings(const SectorBasis& basis, double nn_coupling, double nnn_coupling) {
  if (basis.dim() > kDenseDimLimit) {
    throw std::invalid_argument("dense matrix requested for dim " + std::to_string(basis.dim()) +
                                " (limit " + std::to_string(kDenseDimLimit) + ")");
  }
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const auto bonds = chain_bonds(basis.sites(), nn_coupling, nnn_coupling);
  const auto states = basis.states();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Mask s = states[i];
    for (const Bond& bond : bonds) {
      const Mask bits = s & bond.flip;
      if (bits == 0 || bits == bond.flip) {
        h(i, i) += 0.25 * bond.coupling;
      } else {
        h(i, i) -= 0.25 * bond.coupling;
        h(i, static_cast<Eigen::Index>(basis.rank_unchecked(s ^ bond.flip))) += 0.5 * bond.coupling;
      }
    }
  }
  return h;
}

Eigen::MatrixXd dense_hamiltonian(const ChainSpec& spec, const SectorBasis& basis) {
  check_basis(spec, basis);
  return dense_couplings(basis, 1.0, spec.lambda);
}

Eigen::MatrixXd dense_driving(const SectorBasis& basis) { return dense_couplings(basis, 0.0, 1.0); }

LinearOperator hamiltonian_operator(const ChainSpec& spec, const SectorBasis& basis) {
  check_basis(spec, basis);
  const double lambda = spec.lambda;
  const SectorBasis* b = &basis;
  return [b, lambda](std::span<const double> in, std::span<double> out) {
    apply_couplings(*b, 1.0, lambda, in, out);
  };
}

}  // namespace hofid
