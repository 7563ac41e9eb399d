#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Dense vector kernels shared by the matvec and the eigensolver.
//
// Reductions are split into fixed-size chunks whose partial sums are combined
// serially in chunk order, so results are bit-identical for any worker count.

namespace hofid {

using Vector = std::vector<double>;

inline constexpr std::size_t kReductionChunk = 8192;

/// Worker count used by the OpenMP kernels. Defaults to the runtime's choice.
int worker_count();
void set_worker_count(int workers);
/// Reads HOFID_WORKERS, falling back to the hardware concurrency.
int default_worker_count();

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
/// Normalizes in place and returns the norm before scaling.
double normalize(std::span<double> x);

/// h[i] = <basis[i], w> for i < count, with deterministic chunked reduction.
void project(const std::vector<Vector>& basis, std::size_t count, std::span<const double> w,
             std::span<double> h);
/// w -= sum_i h[i] * basis[i]
void subtract_combination(const std::vector<Vector>& basis, std::size_t count,
                          std::span<const double> h, std::span<double> w);
/// out = sum_i coeffs[i] * basis[i]
void combine(const std::vector<Vector>& basis, std::span<const double> coeffs, std::span<double> out);

}  // namespace hofid
