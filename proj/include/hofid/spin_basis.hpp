#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hofid {

/// Bit j of a mask is the z-projection of site j: 1 = up, 0 = down.
using Mask = std::uint32_t;

inline constexpr int kMaxSites = 30;

/// Fixed-magnetization basis of an L-site spin-1/2 chain.
///
/// States are stored explicitly in ascending order. Ranking uses a
/// two-table (Lin) decomposition of the mask into a high and a low half,
/// so rank() is two lookups and an add, and unrank() is a plain index.
class SectorBasis {
 public:
  SectorBasis(int sites, int n_up);

  int sites() const noexcept { return sites_; }
  int n_up() const noexcept { return n_up_; }
  std::size_t dim() const noexcept { return states_.size(); }
  std::span<const Mask> states() const noexcept { return states_; }

  /// Checked: throws std::invalid_argument for masks outside the sector.
  std::size_t rank(Mask mask) const;
  /// Checked: throws std::out_of_range for index >= dim().
  Mask unrank(std::size_t index) const;

  bool contains(Mask mask) const noexcept;

  /// Hot-path rank for masks already known to lie in the sector.
  std::size_t rank_unchecked(Mask mask) const noexcept {
    return lo_index_[mask & lo_mask_] + hi_offset_[mask >> lo_bits_];
  }

 private:
  int sites_;
  int n_up_;
  int lo_bits_;
  Mask lo_mask_;
  std::vector<Mask> states_;
  std::vector<std::uint32_t> lo_index_;
  std::vector<std::uint32_t> hi_offset_;
};

/// binomial(n, k) in 64-bit arithmetic; exact for n <= 62.
std::uint64_t binomial(int n, int k);

/// Sz = 0 sector of an even-length chain.
inline SectorBasis zero_magnetization_basis(int sites) { return SectorBasis(sites, sites / 2); }

}  // namespace hofid
