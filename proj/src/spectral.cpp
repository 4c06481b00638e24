#include "sshxxz/spectral.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace sshxxz {

SpectralDecomposition diagonalize(const HermitianOperator& h) {
  if (!h.basis) throw std::invalid_argument("operator without basis");
  const auto dim = static_cast<Eigen::Index>(h.basis->dimension());
  if (h.matrix.rows() != dim || h.matrix.cols() != dim)
    throw std::invalid_argument("operator shape does not match its basis");
  const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  if (h.hermiticity_residual() > 1e-12 * scale)
    throw std::invalid_argument("operator is not Hermitian");

  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h.matrix);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");

  SpectralDecomposition out{h.basis, solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index k = 0; k < dim; ++k) {
    auto col = out.eigenvectors.col(k);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      // Strict comparison with a small margin keeps the first of near-equal entries.
      if (std::abs(col(i)) > best + 1e-12) {
        best = std::abs(col(i));
        arg = i;
      }
    }
    if (col(arg) < 0.0) col = -col;
  }
  return out;
}

std::array<double, 4> n4_exact_eigenvalues(double eta, double delta) {
  const double nu_p = 1.0 + eta;
  const double nu_m = 1.0 - eta;
  const double d_minus = std::sqrt(4.0 * nu_m * nu_m + (delta - 1.0) * (delta - 1.0) * nu_p * nu_p);
  const double d_plus = std::sqrt(4.0 * nu_m * nu_m + (delta + 1.0) * (delta + 1.0) * nu_p * nu_p);
  return {-(d_minus + nu_p) / 4.0, -(d_plus - nu_p) / 4.0, (d_minus - nu_p) / 4.0,
          (d_plus + nu_p) / 4.0};
}

double n4_exact_p1(double eta, double delta, double t) {
  if (std::abs(eta) >= 1.0) return 0.0;
  const double nu_p = 1.0 + eta;
  const double nu_m = 1.0 - eta;
  const auto lambda = n4_exact_eigenvalues(eta, delta);
  std::complex<double> sum{0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    const double shifted = 4.0 * lambda[i] + nu_p * delta;
    const double weight = 1.0 / (4.0 * nu_m * nu_m + shifted * shifted);
    const double sign = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^i with i = 1..4
    sum += sign * weight * std::polar(1.0, -lambda[i] * t);
  }
  return 4.0 * std::pow(nu_m, 4) * std::norm(sum);
}

LocalizationReport edge_localization(const SpectralDecomposition& spec, Pattern edge_state) {
  const std::size_t row = spec.basis->require_index(edge_state);
  const std::size_t dim = spec.dimension();
  if (dim < 2) throw std::invalid_argument("localization needs at least two eigenstates");
  const RealVector proj = spec.eigenvectors.row(static_cast<Eigen::Index>(row)).array().square();

  std::size_t first = 0;
  for (std::size_t k = 1; k < dim; ++k)
    if (proj(k) > proj(first) + 1e-12) first = k;
  std::size_t second = (first == 0) ? 1 : 0;
  for (std::size_t k = 0; k < dim; ++k)
    if (k != first && proj(k) > proj(second) + 1e-12) second = k;

  LocalizationReport out;
  out.chi = std::min(1.0, proj(first) + proj(second));
  out.k1 = std::min(first, second);
  out.k2 = std::max(first, second);
  out.splitting = spec.eigenvalues(out.k2) - spec.eigenvalues(out.k1);
  return out;
}

}  // namespace sshxxz
