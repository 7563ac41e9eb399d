#include "hofid/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hofid {

namespace {

void require_nondegenerate(const Eigen::VectorXd& energies) {
  if (energies.size() < 2) throw std::invalid_argument("spectrum needs at least two levels");
  if (energies(1) - energies(0) <= 1e-10 * std::abs(energies(0))) {
    throw std::domain_error("degenerate ground state: E1 - E0 = " + std::to_string(energies(1) - energies(0)));
  }
}

void check_sizes(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies) {
  if (elems.elements.rows() != energies.size() || elems.elements.cols() != energies.size()) {
    throw std::invalid_argument("matrix elements and spectrum sizes differ");
  }
}

}  // namespace

DrivingMatrixElements driving_elements(const SpectralData& spectrum, const SectorBasis& basis) {
  const Eigen::Index n = spectrum.eigenvectors.rows();
  if (static_cast<std::size_t>(n) != basis.dim()) {
    throw std::invalid_argument("spectrum does not belong to this basis");
  }
  Eigen::MatrixXd applied(n, spectrum.eigenvectors.cols());
  for (Eigen::Index col = 0; col < spectrum.eigenvectors.cols(); ++col) {
    std::span<const double> in(spectrum.eigenvectors.col(col).data(), static_cast<std::size_t>(n));
    std::span<double> out(applied.col(col).data(), static_cast<std::size_t>(n));
    apply_couplings(basis, 0.0, 1.0, in, out);
  }
  return {spectrum.lambda, spectrum.eigenvectors.transpose() * applied};
}

double chi2_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies) {
  check_sizes(elems, energies);
  require_nondegenerate(energies);
  const Eigen::MatrixXd& v = elems.elements;
  double sum = 0.0;
  for (Eigen::Index n = 1; n < energies.size(); ++n) {
    const double d = energies(0) - energies(n);
    sum += v(n, 0) * v(n, 0) / (d * d);
  }
  return sum;
}

double chi3_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies) {
  check_sizes(elems, energies);
  require_nondegenerate(energies);
  const Eigen::MatrixXd& v = elems.elements;
  const Eigen::Index dim = energies.size();
  double paired = 0.0;
  double diagonal = 0.0;
  for (Eigen::Index m = 1; m < dim; ++m) {
    const double dm = energies(0) - energies(m);
    double inner = 0.0;
    for (Eigen::Index n = 1; n < dim; ++n) {
      const double dn = energies(0) - energies(n);
      inner += v(m, n) * v(n, 0) / (dn * dn);
    }
    paired += 2.0 * v(0, m) * inner / dm;
  }
  for (Eigen::Index n = 1; n < dim; ++n) {
    const double dn = energies(0) - energies(n);
    diagonal += 2.0 * v(0, 0) * v(n, 0) * v(n, 0) / (dn * dn * dn);
  }
  return paired - diagonal;
}

double d3E_perturbative(const DrivingMatrixElements& elems, const Eigen::VectorXd& energies) {
  check_sizes(elems, energies);
  require_nondegenerate(energies);
  const Eigen::MatrixXd& v = elems.elements;
  const Eigen::Index dim = energies.size();
  double paired = 0.0;
  double diagonal = 0.0;
  for (Eigen::Index n = 1; n < dim; ++n) {
    const double dn = energies(0) - energies(n);
    double inner = 0.0;
    for (Eigen::Index m = 1; m < dim; ++m) {
      inner += v(n, m) * v(m, 0) / (energies(0) - energies(m));
    }
    paired += 6.0 * v(0, n) * inner / dn;
    diagonal += 6.0 * v(0, 0) * v(n, 0) * v(n, 0) / (dn * dn);
  }
  return paired - diagonal;
}

double third_difference(const std::function<double(double)>& energy, double lambda, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  const double e_p2 = energy(lambda + 2.0 * h);
  const double e_p1 = energy(lambda + h);
  const double e_m1 = energy(lambda - h);
  const double e_m2 = energy(lambda - 2.0 * h);
  return (e_p2 - 2.0 * e_p1 + 2.0 * e_m1 - e_m2) / (2.0 * h * h * h);
}

double d3E_finite_difference(const SolveFn& solve, double lambda, double h) {
  return third_difference(
      [&solve](double at) {
        const GroundStateSolution s = solve(at);
        if (!s.converged) {
          throw std::runtime_error("energy stencil point lambda=" + std::to_string(at) + " did not converge");
        }
        return s.energy;
      },
      lambda, h);
}

ExactPoint exact_point(const SectorBasis& basis, double lambda, bool allow_extended) {
  const int ceiling = allow_extended ? kOracleSitesExtended : kOracleSites;
  if (basis.sites() > ceiling) {
    throw std::invalid_argument("oracle limited to L <= " + std::to_string(ceiling) + ", got L=" +
                                std::to_string(basis.sites()));
  }
  ExactPoint point;
  point.spectrum = full_spectrum(dense_hamiltonian(ChainSpec{basis.sites(), lambda}, basis), lambda);
  point.elements = driving_elements(point.spectrum, basis);
  point.chi2 = chi2_perturbative(point.elements, point.spectrum.energies);
  point.chi3 = chi3_perturbative(point.elements, point.spectrum.energies);
  point.d3E = d3E_perturbative(point.elements, point.spectrum.energies);
  return point;
}

SolveFn dense_solver(const SectorBasis& basis) {
  return [&basis](double lambda) {
    const ChainSpec spec{basis.sites(), lambda};
    const SpectralData spectrum = full_spectrum(dense_hamiltonian(spec, basis), lambda);
    GroundStateSolution s;
    s.lambda = lambda;
    s.energy = spectrum.energies(0);
    s.second_energy = spectrum.energies(1);
    const Eigen::VectorXd ground = spectrum.eigenvectors.col(0);
    s.vector = gauge_fix(std::span<const double>(ground.data(), static_cast<std::size_t>(ground.size())));
    Vector hv = apply_hamiltonian(spec, basis, s.vector);
    axpy(-s.energy, s.vector, hv);
    s.residual_norm = norm(hv);
    s.converged = true;
    s.near_degenerate = s.gap() < 1e-10 * std::abs(s.energy);
    return s;
  };
}

}  // namespace hofid
