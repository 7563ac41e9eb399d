#include "hofid/spin_basis.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace hofid {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

SectorBasis::SectorBasis(int sites, int n_up) : sites_(sites), n_up_(n_up) {
  if (sites < 4 || sites > kMaxSites) {
    throw std::invalid_argument("chain length must lie in [4, " + std::to_string(kMaxSites) +
                                "], got " + std::to_string(sites));
  }
  if (sites % 2 != 0) {
    throw std::invalid_argument("chain length must be even, got " + std::to_string(sites));
  }
  if (n_up < 0 || n_up > sites) {
    throw std::invalid_argument("n_up must lie in [0, L], got " + std::to_string(n_up));
  }

  lo_bits_ = sites / 2;
  lo_mask_ = (Mask{1} << lo_bits_) - 1;
  const int hi_bits = sites - lo_bits_;

  states_.reserve(binomial(sites, n_up));
  if (n_up == 0) {
    states_.push_back(0);
  } else {
    // Gosper's hack: next larger integer with the same popcount.
    const std::uint64_t limit = std::uint64_t{1} << sites;
    std::uint64_t x = (std::uint64_t{1} << n_up) - 1;
    while (x < limit) {
      states_.push_back(static_cast<Mask>(x));
      const std::uint64_t c = x & (~x + 1);
      const std::uint64_t r = x + c;
      x = (((r ^ x) >> 2) / c) | r;
    }
  }

  lo_index_.assign(std::size_t{1} << lo_bits_, 0);
  std::vector<std::uint32_t> seen(lo_bits_ + 1, 0);
  for (Mask lo = 0; lo <= lo_mask_; ++lo) {
    lo_index_[lo] = seen[std::popcount(lo)]++;
  }

  hi_offset_.assign(std::size_t{1} << hi_bits, 0);
  std::uint32_t offset = 0;
  for (std::size_t hi = 0; hi < hi_offset_.size(); ++hi) {
    hi_offset_[hi] = offset;
    const int need = n_up - std::popcount(static_cast<Mask>(hi));
    if (need >= 0 && need <= lo_bits_) offset += static_cast<std::uint32_t>(binomial(lo_bits_, need));
  }
}

bool SectorBasis::contains(Mask mask) const noexcept {
  if (sites_ < 32 && (mask >> sites_) != 0) return false;
  return std::popcount(mask) == n_up_;
}

std::size_t SectorBasis::rank(Mask mask) const {
  if (!contains(mask)) {
    throw std::invalid_argument("mask " + std::to_string(mask) + " is not in the L=" +
                                std::to_string(sites_) + ", n_up=" + std::to_string(n_up_) +
                                " sector");
  }
  return rank_unchecked(mask);
}

Mask SectorBasis::unrank(std::size_t index) const {
  if (index >= states_.size()) {
    throw std::out_of_range("basis index " + std::to_string(index) + " out of range (dim " +
                            std::to_string(states_.size()) + ")");
  }
  return states_[index];
}

}  // namespace hofid
