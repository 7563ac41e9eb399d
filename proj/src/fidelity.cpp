#include "hofid/fidelity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

namespace hofid {

namespace {

constexpr int kOffsets[] = {-2, -1, 1, 2};

void require_usable(const GroundStateSolution& s, double lambda) {
  if (!s.converged) {
    throw RefusedPoint("ground state at lambda=" + std::to_string(lambda) + " did not converge",
                       "not_converged");
  }
  if (s.near_degenerate) {
    throw RefusedPoint("near-degenerate ground state at lambda=" + std::to_string(lambda),
                       "near_degenerate");
  }
}

bool agrees(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

using LevelFn = ExpansionPoint (*)(const SolveFn&, double, double);

ExpansionPoint controlled(LevelFn level, const SolveFn& solve, double lambda, const StepControl& control) {
  if (!(control.h > 0.0)) throw std::invalid_argument("step h must be positive");
  ExpansionPoint coarse = level(solve, lambda, control.h);
  const double f_plus_h = coarse.f_plus_h;
  if (!control.richardson) {
    coarse.base_h = control.h;
    return coarse;
  }
  double step = control.h;
  for (int halving = 1; halving <= control.max_halvings; ++halving) {
    step *= 0.5;
    ExpansionPoint fine = level(solve, lambda, step);
    const double floor = 1e-6 * std::max(1.0, std::abs(fine.chi2));
    const bool ok = agrees(coarse.chi2, fine.chi2, control.chi2_agreement, 1e-10) &&
                    agrees(coarse.chi3, fine.chi3, control.chi3_agreement, floor);
    fine.halvings = halving;
    fine.base_h = control.h;
    fine.f_plus_h = f_plus_h;
    fine.warnings.insert(fine.warnings.begin(), coarse.warnings.begin(), coarse.warnings.end());
    if (ok) return fine;
    if (halving == control.max_halvings) {
      fine.step_converged = false;
      fine.warnings.push_back("step refinement did not converge");
      return fine;
    }
    coarse = std::move(fine);
  }
  return coarse;
}

}  // namespace

double overlap_fidelity(std::span<const double> v1, std::span<const double> v2) {
  return std::min(1.0, std::abs(dot(v1, v2)));
}

double infidelity(std::span<const double> v1, std::span<const double> v2) {
  const double n1 = dot(v1, v1);
  const double n2 = dot(v2, v2);
  const double c = dot(v1, v2) / n1;
  Vector r(v2.begin(), v2.end());
  axpy(-c, v1, r);
  // One more projection pass removes the rounding left along v1.
  const double c2 = dot(v1, r) / n1;
  axpy(-c2, v1, r);
  return dot(r, r) / n2;
}

const char* to_string(Method method) { return method == Method::stencil ? "stencil" : "derivative"; }

ExpansionPoint stencil_at_step(const SolveFn& solve, double lambda, double step) {
  const GroundStateSolution center = solve(lambda);
  require_usable(center, lambda);

  ExpansionPoint point;
  point.lambda = lambda;
  point.h = step;
  point.base_h = step;
  point.method = Method::stencil;
  point.energy = center.energy;
  point.gap_at_lambda = center.gap();

  // Unknowns are c_l = chi_l * step^l so the design matrix holds integers k^l.
  Eigen::Matrix4d design;
  Eigen::Vector4d rhs;
  double max_infidelity = 0.0;
  for (int row = 0; row < 4; ++row) {
    const int k = kOffsets[row];
    const double at = lambda + k * step;
    const GroundStateSolution other = solve(at);
    if (!other.converged) {
      throw RefusedPoint("stencil solve at lambda=" + std::to_string(at) + " did not converge",
                         "not_converged");
    }
    const double y = infidelity(center.vector, other.vector);
    max_infidelity = std::max(max_infidelity, y);
    point.f_values[k * step] = std::sqrt(std::max(0.0, 1.0 - y));
    if (k == 1) point.f_plus_h = overlap_fidelity(center.vector, other.vector);
    for (int l = 1; l <= 4; ++l) design(row, l - 1) = std::pow(static_cast<double>(k), l);
    rhs(row) = y;
  }

  const Eigen::Vector4d c = design.colPivHouseholderQr().solve(rhs);
  point.linear_coeff = c(0) / step;
  point.chi2 = c(1) / (step * step);
  point.chi3 = c(2) / (step * step * step);
  point.chi4_nuisance = c(3) / (step * step * step * step);
  point.fit_residual = (design * c - rhs).cwiseAbs().maxCoeff();

  if (point.fit_residual > 1e-3 * max_infidelity) point.warnings.push_back("fit residual above 1e-3 of 1-F^2");
  if (std::abs(point.linear_coeff) > 1e-6 * std::max(1.0, point.chi2)) {
    point.warnings.push_back("linear coefficient not negligible");
  }
  return point;
}

ExpansionPoint derivatives_at_step(const SolveFn& solve, double lambda, double step) {
  const GroundStateSolution center = solve(lambda);
  require_usable(center, lambda);
  std::array<Vector, 4> shifted;
  for (std::size_t k = 0; k < shifted.size(); ++k) {
    const GroundStateSolution s = solve(lambda + kOffsets[k] * step);
    if (!s.converged) {
      throw RefusedPoint("stencil solve near lambda=" + std::to_string(lambda) + " did not converge",
                         "not_converged");
    }
    try {
      shifted[k] = gauge_fix(s.vector, std::span<const double>(center.vector));
    } catch (const std::domain_error& e) {
      throw RefusedPoint(std::string("level crossing inside stencil: ") + e.what(), "gauge_undefined");
    }
  }
  const Vector& down2 = shifted[0];
  const Vector& down = shifted[1];
  const Vector& up = shifted[2];
  const Vector& up2 = shifted[3];

  // Fourth-order central differences.
  const std::size_t n = center.vector.size();
  const double inv_12h = 1.0 / (12.0 * step);
  const double inv_12h2 = 1.0 / (12.0 * step * step);
  Vector first(n);
  Vector second(n);
  for (std::size_t i = 0; i < n; ++i) {
    first[i] = (8.0 * (up[i] - down[i]) - (up2[i] - down2[i])) * inv_12h;
    second[i] = (16.0 * (up[i] + down[i]) - (up2[i] + down2[i]) - 30.0 * center.vector[i]) * inv_12h2;
  }

  const double psi_first = dot(center.vector, first);
  const double psi_second = dot(center.vector, second);
  Vector projected = first;
  axpy(-psi_first, center.vector, projected);

  ExpansionPoint point;
  point.lambda = lambda;
  point.h = step;
  point.base_h = step;
  point.method = Method::derivative;
  point.energy = center.energy;
  point.gap_at_lambda = center.gap();
  point.chi2 = dot(projected, projected);
  point.chi3 = dot(projected, second);
  point.linear_coeff = -2.0 * psi_first;
  point.norm_identity_1 = 2.0 * psi_first;
  point.norm_identity_2 = dot(first, first) + psi_second;
  point.f_plus_h = overlap_fidelity(center.vector, up);
  point.f_values[-2.0 * step] = overlap_fidelity(center.vector, down2);
  point.f_values[-step] = overlap_fidelity(center.vector, down);
  point.f_values[step] = point.f_plus_h;
  point.f_values[2.0 * step] = overlap_fidelity(center.vector, up2);
  return point;
}

ExpansionPoint chi_from_stencil(const SolveFn& solve, double lambda, const StepControl& control) {
  return controlled(&stencil_at_step, solve, lambda, control);
}

ExpansionPoint chi_from_derivatives(const SolveFn& solve, double lambda, const StepControl& control) {
  return controlled(&derivatives_at_step, solve, lambda, control);
}

ChainGroundStates::ChainGroundStates(int sites, LanczosOptions options, bool warm_start, double anchor_radius)
    : basis_(std::make_shared<SectorBasis>(zero_magnetization_basis(sites))),
      options_(std::move(options)),
      warm_start_(warm_start),
      anchor_radius_(anchor_radius) {}

const GroundStateSolution& ChainGroundStates::at(double lambda) {
  if (auto it = cache_.find(lambda); it != cache_.end()) return it->second;

  LanczosOptions opts = options_;
  const bool near_anchor = warm_start_ && anchor_ != nullptr &&
                           std::abs(anchor_->lambda - lambda) <= anchor_radius_;
  if (near_anchor) {
    opts.warm_start = interpolated_guess(lambda);
    opts.nev = 1;
  } else {
    opts.warm_start.reset();
  }

  GroundStateSolution solution;
  ++solves_;
  try {
    solution = ground_state(ChainSpec{basis_->sites(), lambda}, *basis_, opts);
  } catch (const ConvergenceError& e) {
    solution = e.best();
    solution.converged = false;
  }
  solution.lambda = lambda;
  auto [it, inserted] = cache_.emplace(lambda, std::move(solution));
  if (!near_anchor && it->second.converged) anchor_ = &it->second;
  return it->second;
}

Vector ChainGroundStates::interpolated_guess(double lambda) const {
  // Up to three converged neighbours of the anchor, nearest to lambda first.
  std::vector<const GroundStateSolution*> nodes;
  for (const auto& [at, solution] : cache_) {
    if (solution.converged && std::abs(at - anchor_->lambda) <= anchor_radius_) nodes.push_back(&solution);
  }
  std::stable_sort(nodes.begin(), nodes.end(), [lambda](const auto* a, const auto* b) {
    return std::abs(a->lambda - lambda) < std::abs(b->lambda - lambda);
  });
  if (nodes.size() > 3) nodes.resize(3);

  Vector guess(anchor_->vector.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double weight = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k != i) weight *= (lambda - nodes[k]->lambda) / (nodes[i]->lambda - nodes[k]->lambda);
    }
    const double sign = dot(nodes[i]->vector, anchor_->vector) < 0.0 ? -1.0 : 1.0;
    axpy(sign * weight, nodes[i]->vector, guess);
  }
  return guess;
}

SolveFn ChainGroundStates::solver() {
  return [this](double lambda) { return at(lambda); };
}

void ChainGroundStates::clear() {
  cache_.clear();
  anchor_ = nullptr;
}

std::vector<double> lambda_grid(double lambda_min, double lambda_max, double step) {
  std::vector<double> grid;
  if (lambda_max < lambda_min) return grid;
  if (!(step > 0.0)) throw std::invalid_argument("lambda step must be positive");
  const auto count = static_cast<long>(std::floor((lambda_max - lambda_min) / step + 1e-9)) + 1;
  grid.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) grid.push_back(lambda_min + static_cast<double>(i) * step);
  return grid;
}

void validate_sweep(const SweepOptions& options) {
  for (int L : options.sizes) {
    if (L % 2 != 0 || L < 4 || L > kMaxSites) {
      throw std::invalid_argument("chain length must be even and in [4, 30], got " + std::to_string(L));
    }
  }
  if (!(options.step.h > 0.0)) throw std::invalid_argument("delta must be positive");
  if (options.lambda_max < options.lambda_min) return;
  if (options.lambda_min < 0.0 || options.lambda_max > 0.6) {
    throw std::invalid_argument("lambda grid must lie within [0, 0.6]");
  }
  if (!(options.lambda_step > 0.0)) throw std::invalid_argument("lambda step must be positive");
  if (options.lambda_max > options.lambda_min && options.lambda_step < 4.0 * options.step.h) {
    throw std::invalid_argument("lambda step must be at least 4 * delta");
  }
}

std::vector<SweepRow> sweep(const SweepOptions& options, const SweepProgress& progress) {
  validate_sweep(options);
  const auto grid = lambda_grid(options.lambda_min, options.lambda_max, options.lambda_step);
  std::vector<int> sizes = options.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<SweepRow> rows;
  if (grid.empty()) return rows;
  rows.reserve(sizes.size() * grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int L : sizes) {
    ChainGroundStates states(L, options.solver, options.warm_start);
    for (double lambda : grid) {
      const auto t0 = std::chrono::steady_clock::now();
      const int solves_before = states.solves();
      // Each grid point is self-contained: stencils of neighbours are not reused.
      states.clear();

      SweepRow row;
      row.sites = L;
      row.lambda = lambda;
      const GroundStateSolution& center = states.at(lambda);
      row.energy = center.energy;
      row.gap = center.gap();
      try {
        const SolveFn solve = states.solver();
        ExpansionPoint point = options.method == MethodSelection::derivative
                                   ? chi_from_derivatives(solve, lambda, options.step)
                                   : chi_from_stencil(solve, lambda, options.step);
        row.f_plus_h = point.f_plus_h;
        row.chi2 = point.chi2;
        row.chi3 = point.chi3;
        row.chi3_abs = std::abs(point.chi3);
        row.fit_residual = point.fit_residual;
        if (!point.step_converged) {
          row.flag = "step_unconverged";
        } else if (!point.warnings.empty()) {
          row.flag = "fit_warning";
        }
        if (options.method == MethodSelection::both) {
          const ExpansionPoint other = chi_from_derivatives(solve, lambda, options.step);
          const double floor = 1e-6 * std::max(1.0, std::abs(point.chi2));
          if (!agrees(point.chi2, other.chi2, options.both_chi2_agreement, 1e-10) ||
              !agrees(point.chi3, other.chi3, options.both_chi3_agreement, floor)) {
            row.flag = "method_mismatch";
          }
        }
      } catch (const RefusedPoint& refused) {
        row.f_plus_h = nan;
        row.chi2 = nan;
        row.chi3 = nan;
        row.chi3_abs = nan;
        row.fit_residual = nan;
        row.flag = refused.flag();
      }
      row.solves = states.solves() - solves_before;
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (progress) progress(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace hofid
