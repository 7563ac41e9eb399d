#include "hofid/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hofid {

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kReductionChunk - 1) / kReductionChunk; }

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("vector length mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

}  // namespace

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be positive");
#ifdef _OPENMP
  omp_set_num_threads(workers);
#endif
}

int default_worker_count() {
  if (const char* env = std::getenv("HOFID_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0) return static_cast<int>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_length(a.size(), b.size());
  const std::size_t n = a.size();
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static) if (chunks > 4)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(n, begin + kReductionChunk);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_length(x.size(), y.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

double normalize(std::span<double> x) {
  const double nrm = norm(x);
  if (nrm == 0.0) throw std::domain_error("cannot normalize a zero vector");
  scale(1.0 / nrm, x);
  return nrm;
}

void project(const std::vector<Vector>& basis, std::size_t count, std::span<const double> w,
             std::span<double> h) {
  if (count == 0) return;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < count; ++i) check_same_length(basis[i].size(), n);
  const std::size_t chunks = chunk_count(n);
  std::vector<double> partial(chunks * count, 0.0);
#pragma omp parallel for schedule(static) if (chunks > 4)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(n, begin + kReductionChunk);
    double* out = partial.data() + static_cast<std::size_t>(c) * count;
    for (std::size_t k = 0; k < count; ++k) {
      const double* v = basis[k].data();
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += v[i] * w[i];
      out[k] = s;
    }
  }
  for (std::size_t k = 0; k < count; ++k) h[k] = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const double* in = partial.data() + c * count;
    for (std::size_t k = 0; k < count; ++k) h[k] += in[k];
  }
}

void subtract_combination(const std::vector<Vector>& basis, std::size_t count,
                          std::span<const double> h, std::span<double> w) {
  const std::size_t n = w.size();
  const std::size_t chunks = chunk_count(n);
#pragma omp parallel for schedule(static) if (chunks > 4)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(n, begin + kReductionChunk);
    for (std::size_t k = 0; k < count; ++k) {
      const double coeff = h[k];
      const double* v = basis[k].data();
      for (std::size_t i = begin; i < end; ++i) w[i] -= coeff * v[i];
    }
  }
}

void combine(const std::vector<Vector>& basis, std::span<const double> coeffs, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = out.size();
  const std::size_t chunks = chunk_count(n);
  const std::size_t count = coeffs.size();
#pragma omp parallel for schedule(static) if (chunks > 4)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(n, begin + kReductionChunk);
    for (std::size_t k = 0; k < count; ++k) {
      const double coeff = coeffs[k];
      const double* v = basis[k].data();
      for (std::size_t i = begin; i < end; ++i) out[i] += coeff * v[i];
    }
  }
}

}  // namespace hofid
