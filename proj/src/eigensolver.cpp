#include "hofid/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hofid {

namespace {

// Uniform in [-1, 1) built from raw engine output so the sequence does not
// depend on the standard library's distribution implementation.
Vector random_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector v(dim);
  for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return v;
}

void orthogonalize(const std::vector<Vector>& basis, std::span<double> w, std::span<double> h,
                   std::span<double> scratch) {
  const std::size_t m = basis.size();
  project(basis, m, w, h);
  subtract_combination(basis, m, h, w);
  project(basis, m, w, scratch);
  subtract_combination(basis, m, scratch, w);
  for (std::size_t i = 0; i < m; ++i) h[i] += scratch[i];
}

// One classical Gram-Schmidt pass against the whole basis, repeated once if
// the norm dropped below 1/sqrt(2) of its input (Daniel-Gragg-Kaufman-Stewart).
// Returns the final norm of w; h accumulates the removed coefficients.
double reorthogonalize(const std::vector<Vector>& basis, std::span<double> w, std::span<double> h,
                       std::span<double> scratch, double norm_in) {
  const std::size_t m = basis.size();
  project(basis, m, w, scratch);
  subtract_combination(basis, m, scratch, w);
  for (std::size_t i = 0; i < m; ++i) h[i] += scratch[i];
  double norm_out = norm(w);
  if (norm_out < 0.7071 * norm_in) {
    project(basis, m, w, scratch);
    subtract_combination(basis, m, scratch, w);
    for (std::size_t i = 0; i < m; ++i) h[i] += scratch[i];
    norm_out = norm(w);
  }
  return norm_out;
}

double residual(const LinearOperator& apply, std::span<const double> v, double theta, Vector& work) {
  apply(v, work);
  axpy(-theta, v, work);
  return norm(work);
}

// Thick-restart Lanczos for the lowest nev Ritz pairs of one Krylov space.
GroundStateSolution krylov_solve(const LinearOperator& apply, std::size_t dim, const LanczosOptions& options) {
  const auto nev = static_cast<std::size_t>(options.nev);
  const std::size_t max_basis =
      std::min<std::size_t>(dim, std::max<std::size_t>(static_cast<std::size_t>(options.max_basis), 6));

  GroundStateSolution out;
  out.seed = options.seed;

  Vector start;
  if (options.warm_start) {
    if (options.warm_start->size() != dim) {
      throw std::invalid_argument("warm start length does not match operator dimension");
    }
    start = *options.warm_start;
    if (nev == 2) {
      // A pure eigenvector would hide the first excited state from the Krylov space.
      Vector noise = random_vector(dim, options.seed);
      normalize(noise);
      axpy(0.01 * norm(start), noise, start);
    }
    out.warm_started = true;
  } else {
    start = random_vector(dim, options.seed);
  }
  normalize(start);

  std::vector<Vector> krylov;
  krylov.reserve(max_basis + 1);
  krylov.push_back(std::move(start));

  Eigen::MatrixXd projected = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(max_basis),
                                                    static_cast<Eigen::Index>(max_basis));
  Vector w(dim);
  Vector work(dim);
  Vector h(max_basis + 1);
  Vector scratch(max_basis + 1);

  int matvecs = 0;
  double target = options.tolerance;
  std::uint64_t refill_seed = options.seed;
  double operator_scale = 1.0;
  // First basis index of the current unbroken Lanczos run.
  std::size_t chain_start = 0;

  for (;;) {
    const std::size_t j = krylov.size() - 1;
    const std::size_t m = j + 1;
    apply(krylov[j], w);
    ++matvecs;

    // Three-term recurrence inside the current tridiagonal run, then full
    // reorthogonalization against the whole basis.
    std::fill(h.begin(), h.end(), 0.0);
    h[j] = dot(krylov[j], w);
    axpy(-h[j], krylov[j], w);
    if (j > chain_start) {
      h[j - 1] = projected(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1));
      axpy(-h[j - 1], krylov[j - 1], w);
    }
    double beta = reorthogonalize(krylov, w, h, scratch, norm(w));
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      projected(ii, jj) = h[i];
      projected(jj, ii) = h[i];
    }
    operator_scale = std::max({operator_scale, std::abs(h[j]), beta});

    const bool breakdown = beta < 1e-13 * operator_scale || m == dim;
    const bool budget_spent = matvecs >= options.max_iter;
    const bool check = breakdown || budget_spent || m == max_basis || m == dim || (m >= nev + 2 && matvecs % 2 == 0);

    if (check && m >= 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
          projected.topLeftCorner(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
      const Eigen::VectorXd& theta = eig.eigenvalues();
      const Eigen::MatrixXd& s = eig.eigenvectors();
      const auto last = static_cast<Eigen::Index>(m - 1);
      const double res0 = breakdown ? 0.0 : beta * std::abs(s(last, 0));
      const double res1 = (m >= 2 && !breakdown) ? beta * std::abs(s(last, 1)) : 0.0;
      const bool estimates_ok =
          m >= nev && res0 <= target && (nev == 1 || res1 <= options.excited_tolerance);

      if (estimates_ok || budget_spent) {
        out.energy = theta(0);
        out.second_energy = m >= 2 ? theta(1) : std::numeric_limits<double>::infinity();
        out.vector.assign(dim, 0.0);
        std::vector<double> coeffs(s.col(0).data(), s.col(0).data() + m);
        combine(krylov, coeffs, out.vector);
        normalize(out.vector);
        out.residual_norm = residual(apply, out.vector, out.energy, work);
        ++matvecs;
        out.excited_residual_norm = res1;
        if (nev == 2 && options.keep_excited_vector && m >= 2) {
          out.excited_vector.assign(dim, 0.0);
          std::vector<double> c1(s.col(1).data(), s.col(1).data() + m);
          combine(krylov, c1, out.excited_vector);
          normalize(out.excited_vector);
          out.excited_residual_norm = residual(apply, out.excited_vector, out.second_energy, work);
          ++matvecs;
        }
        out.iterations = matvecs;
        out.near_degenerate = nev == 2 && (out.second_energy - out.energy) < 1e-10 * std::abs(out.energy);

        if (estimates_ok && out.residual_norm <= options.tolerance) {
          out.converged = true;
          out.vector = gauge_fix(out.vector);
          return out;
        }
        if (budget_spent || matvecs >= options.max_iter) {
          out.converged = false;
          throw ConvergenceError("Lanczos did not reach residual " + std::to_string(options.tolerance) +
                                     " within " + std::to_string(options.max_iter) +
                                     " matvecs (best residual " + std::to_string(out.residual_norm) + ")",
                                 out);
        }
        // Ritz estimate passed but the measured residual did not: ask for more.
        target = std::max(0.1 * target, 1e-3 * options.tolerance);
      }

      if (m == max_basis) {
        const std::size_t keep = std::min(m - 1, std::max<std::size_t>(nev + 1, m / 2));
        std::vector<Vector> kept(keep, Vector(dim));
        for (std::size_t i = 0; i < keep; ++i) {
          std::vector<double> coeffs(s.col(static_cast<Eigen::Index>(i)).data(),
                                     s.col(static_cast<Eigen::Index>(i)).data() + m);
          combine(krylov, coeffs, kept[i]);
        }
        krylov = std::move(kept);
        krylov.reserve(max_basis + 1);
        projected.setZero();
        for (std::size_t i = 0; i < keep; ++i) {
          projected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = theta(static_cast<Eigen::Index>(i));
        }
        if (breakdown) {
          w = random_vector(dim, ++refill_seed);
          orthogonalize(krylov, w, h, scratch);
          normalize(w);
        } else {
          scale(1.0 / beta, w);
        }
        chain_start = krylov.size();
        krylov.push_back(w);
        continue;
      }
    }

    if (breakdown) {
      if (m == dim) {
        throw ConvergenceError("Krylov space exhausted without convergence", out);
      }
      // Invariant subspace: continue with a fresh direction orthogonal to it.
      Vector fresh = random_vector(dim, ++refill_seed);
      orthogonalize(krylov, fresh, h, scratch);
      normalize(fresh);
      chain_start = krylov.size();
      krylov.push_back(std::move(fresh));
      continue;
    }

    scale(1.0 / beta, w);
    const auto mm = static_cast<Eigen::Index>(m);
    projected(mm, mm - 1) = beta;
    projected(mm - 1, mm) = beta;
    krylov.push_back(w);
  }
}

}  // namespace

GroundStateSolution ground_state(const LinearOperator& apply, std::size_t dim,
                                 const LanczosOptions& options) {
  if (dim < 2) throw std::invalid_argument("ground_state needs dim >= 2");
  if (options.nev != 1 && options.nev != 2) throw std::invalid_argument("nev must be 1 or 2");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  LanczosOptions first = options;
  first.keep_excited_vector = options.nev == 2;
  GroundStateSolution out = krylov_solve(apply, dim, first);
  if (options.nev == 1) return out;

  // A single Krylov space holds one direction per degenerate eigenspace, so
  // E1 is confirmed by a second run on the complement of the ground vector,
  // where the ground direction is shifted above the excited estimate.
  const Vector v0 = out.vector;
  const double shift = std::abs(out.energy) + std::abs(out.second_energy) + 1.0;
  const LinearOperator deflated = [&](std::span<const double> x, std::span<double> y) {
    Vector px(x.begin(), x.end());
    const double c = dot(v0, px);
    axpy(-c, v0, px);
    apply(px, y);
    axpy(-dot(v0, y), v0, y);
    axpy(c * shift, v0, y);
  };
  LanczosOptions second = options;
  second.nev = 1;
  second.tolerance = options.excited_tolerance;
  second.max_iter = std::max(1, options.max_iter - out.iterations);
  Vector start = out.excited_vector.size() == dim ? out.excited_vector : random_vector(dim, options.seed + 1);
  Vector noise = random_vector(dim, options.seed + 1);
  normalize(noise);
  axpy(1e-6, noise, start);
  axpy(-dot(v0, start), v0, start);
  second.warm_start = std::move(start);

  GroundStateSolution excited;
  try {
    excited = krylov_solve(deflated, dim, second);
  } catch (const ConvergenceError& e) {
    out.converged = false;
    out.iterations += e.best().iterations;
    throw ConvergenceError(std::string("first excited state: ") + e.what(), out);
  }
  out.iterations += excited.iterations;
  out.second_energy = excited.energy;
  out.excited_residual_norm = excited.residual_norm;
  out.excited_vector = options.keep_excited_vector ? std::move(excited.vector) : Vector{};
  out.near_degenerate = (out.second_energy - out.energy) < 1e-10 * std::abs(out.energy);
  return out;
}

GroundStateSolution ground_state(const ChainSpec& spec, const SectorBasis& basis,
                                 const LanczosOptions& options) {
  auto op = hamiltonian_operator(spec, basis);
  auto solution = ground_state(op, basis.dim(), options);
  solution.lambda = spec.lambda;
  return solution;
}

SpectralData full_spectrum(const Eigen::MatrixXd& matrix, double lambda) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("full_spectrum needs a square matrix");
  if (static_cast<std::size_t>(matrix.rows()) > kDenseDimLimit) {
    throw std::invalid_argument("full_spectrum dimension " + std::to_string(matrix.rows()) +
                                " exceeds limit " + std::to_string(kDenseDimLimit));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  if (eig.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  return SpectralData{lambda, eig.eigenvalues(), eig.eigenvectors()};
}

Vector gauge_fix(std::span<const double> v, std::optional<std::span<const double>> reference) {
  Vector out(v.begin(), v.end());
  if (reference) {
    const double overlap = dot(*reference, v);
    if (std::abs(overlap) <= 1e-12) {
      throw std::domain_error("gauge undefined: overlap with reference is " + std::to_string(overlap));
    }
    if (overlap < 0.0) scale(-1.0, out);
    return out;
  }
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = std::abs(out[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (!out.empty() && out[best] < 0.0) scale(-1.0, out);
  return out;
}

}  // namespace hofid
