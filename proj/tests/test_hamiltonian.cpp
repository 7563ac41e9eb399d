#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "hofid/eigensolver.hpp"
#include "hofid/hamiltonian.hpp"
#include "hofid/parallel.hpp"
#include "reference_model.hpp"

using namespace hofid;

namespace {

Vector random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

Vector unit(std::size_t n, std::size_t i) {
  Vector v(n, 0.0);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("Neel state at L=4, lambda=0") {
  const auto basis = zero_magnetization_basis(4);
  const ChainSpec spec{4, 0.0};
  const auto out = apply_hamiltonian(spec, basis, unit(6, basis.rank(0b0101)));
  CHECK(out[basis.rank(0b0101)] == -1.0);
  for (Mask m : {0b0011u, 0b0110u, 0b1001u, 0b1100u}) CHECK(out[basis.rank(m)] == 0.5);
  CHECK(out[basis.rank(0b1010)] == 0.0);
}

TEST_CASE("L=4 dense spectrum") {
  const auto basis = zero_magnetization_basis(4);
  const auto spectrum = full_spectrum(dense_hamiltonian({4, 0.0}, basis));
  CHECK(spectrum.energies(0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(spectrum.energies(5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(spectrum.energies(1) - spectrum.energies(0) > 0.5);
}

TEST_CASE("L=4 next-nearest bonds are counted twice, as the literal sum reads") {
  const auto basis = zero_magnetization_basis(4);
  const auto hi = dense_driving(basis);
  const auto ref = reference::hamiltonian(reference::sector(4, 2), 0.0, 1.0);
  CHECK((hi - ref).cwiseAbs().maxCoeff() == 0.0);
  // 0101: both diagonal pairs are parallel, each visited twice: 4 * (+1/4).
  CHECK(hi(basis.rank(0b0101), basis.rank(0b0101)) == 1.0);
  CHECK(hi(basis.rank(0b0011), basis.rank(0b0011)) == -1.0);
  CHECK(hi(basis.rank(0b1001), basis.rank(0b0011)) == 1.0);
}

TEST_CASE("dense builder matches the brute-force reference") {
  for (int L : {4, 6, 8, 10}) {
    for (double lambda : {0.0, 0.3, 0.5}) {
      const auto basis = zero_magnetization_basis(L);
      const auto dense = dense_hamiltonian({L, lambda}, basis);
      const auto ref = reference::hamiltonian(reference::sector(L, L / 2), 1.0, lambda);
      CHECK((dense - ref).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("dense matrix agrees with the matvec on all unit vectors, L=10") {
  const auto basis = zero_magnetization_basis(10);
  const ChainSpec spec{10, 0.37};
  const auto dense = dense_hamiltonian(spec, basis);
  double worst = 0.0;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto col = apply_hamiltonian(spec, basis, unit(basis.dim(), i));
    for (std::size_t r = 0; r < basis.dim(); ++r) {
      worst = std::max(worst, std::abs(col[r] - dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i))));
    }
  }
  CHECK(worst <= 1e-14);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linearity in lambda, L=10") {
  const auto basis = zero_magnetization_basis(10);
  const auto v = random_vector(basis.dim(), 3);
  const double lambda = 0.2411;
  const auto full = apply_hamiltonian({10, lambda}, basis, v);
  auto split = apply_hamiltonian({10, 0.0}, basis, v);
  axpy(lambda, apply_driving({10, lambda}, basis, v), split);
  CHECK(max_abs_diff(full, split) <= 1e-13 * max_abs(full));
}

TEST_CASE("Hermiticity for random vectors up to L=16") {
  for (int L : {8, 12, 16}) {
    const auto basis = zero_magnetization_basis(L);
    const ChainSpec spec{L, 0.3};
    const auto u = random_vector(basis.dim(), 11);
    const auto v = random_vector(basis.dim(), 12);
    const double a = dot(u, apply_hamiltonian(spec, basis, v));
    const double b = dot(apply_hamiltonian(spec, basis, u), v);
    CHECK(std::abs(a - b) <= 1e-13 * std::abs(a));
  }
}

TEST_CASE("total Sz is conserved: every generated mask lies in the sector") {
  const int L = 10;
  const auto basis = zero_magnetization_basis(L);
  for (const auto& bond : chain_bonds(L, 1.0, 0.5)) {
    for (Mask m : basis.states()) {
      if (std::popcount(m & bond.flip) == 1) CHECK(basis.contains(m ^ bond.flip));
    }
  }
  // Same statement through the operator: the reference, which only knows the
  // sector, reproduces the full matvec.
  const auto v = random_vector(basis.dim(), 5);
  const auto out = apply_hamiltonian({L, 0.5}, basis, v);
  const auto ref = reference::hamiltonian(reference::sector(L, L / 2), 1.0, 0.5);
  const Eigen::VectorXd expected = ref * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  CHECK(max_abs_diff(out, Vector(expected.data(), expected.data() + expected.size())) < 1e-13);
}

TEST_CASE("translation invariance: rotating the site labels leaves the spectrum unchanged") {
  for (int L : {8, 12}) {
    const auto basis = zero_magnetization_basis(L);
    const ChainSpec spec{L, 0.2};
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    // Permutation matrix of a one-site rotation, applied as P^T H P.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
    const Mask full = (Mask{1} << L) - 1;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
      const Mask m = basis.unrank(i);
      const Mask r = ((m << 1) | (m >> (L - 1))) & full;
      P(static_cast<Eigen::Index>(basis.rank(r)), static_cast<Eigen::Index>(i)) = 1.0;
    }
    const auto H = dense_hamiltonian(spec, basis);
    CHECK((P.transpose() * H * P - H).cwiseAbs().maxCoeff() < 1e-14);
    const auto e0 = full_spectrum(H).energies(0);
    const auto e1 = full_spectrum(P.transpose() * H * P).energies(0);
    CHECK(std::abs(e0 - e1) < 1e-12);
  }
}

TEST_CASE("deterministic matvec across worker counts") {
  const auto basis = zero_magnetization_basis(16);
  const auto v = random_vector(basis.dim(), 9);
  const int saved = worker_count();
  set_worker_count(1);
  const auto a = apply_hamiltonian({16, 0.3}, basis, v);
  set_worker_count(4);
  const auto b = apply_hamiltonian({16, 0.3}, basis, v);
  set_worker_count(saved);
  CHECK(a == b);
}

TEST_CASE("input validation") {
  const auto basis = zero_magnetization_basis(8);
  CHECK_THROWS_AS(apply_hamiltonian({8, 0.1}, basis, Vector(10)), std::invalid_argument);
  CHECK_THROWS_AS(apply_hamiltonian({10, 0.1}, basis, Vector(basis.dim())), std::invalid_argument);
  CHECK_THROWS_AS((ChainSpec{7, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(dense_hamiltonian({16, 0.1}, zero_magnetization_basis(16)), std::invalid_argument);
}
