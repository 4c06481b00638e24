#pragma once

#include <array>
#include <cstddef>

#include "sshxxz/chain_model.hpp"

namespace sshxxz {

/// Eigenpairs of a real symmetric operator, eigenvalues ascending. Each
/// eigenvector is normalized with its largest-magnitude component positive
/// (first such component on ties), so amplitude phases are reproducible.
struct SpectralDecomposition {
  BasisPtr basis;
  RealVector eigenvalues;
  RealMatrix eigenvectors;  // column k pairs with eigenvalues[k]

  std::size_t dimension() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Throws std::invalid_argument for a non-Hermitian input.
SpectralDecomposition diagonalize(const HermitianOperator& h);

/// Closed-form one-excitation eigenvalues of the four-site chain, ascending.
std::array<double, 4> n4_exact_eigenvalues(double eta, double delta);

/// Closed-form |<4|exp(-iHt)|1>|^2 for the four-site chain. Returns 0 for
/// |eta| = 1, where one of the bond families vanishes.
double n4_exact_p1(double eta, double delta, double t);

struct LocalizationReport {
  double chi = 0.0;
  std::size_t k1 = 0;  // k1 < k2, eigenvalue order
  std::size_t k2 = 0;
  double splitting = 0.0;  // E_k2 - E_k1 >= 0
};

/// Two largest squared overlaps of a basis state with the eigenvectors.
/// Ties within 1e-12 go to the lower eigenvalue index.
LocalizationReport edge_localization(const SpectralDecomposition& spec, Pattern edge_state);

}  // namespace sshxxz
