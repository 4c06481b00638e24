#pragma once

// Dimerized XXZ (SSH-XXZ) spin-1/2 chain: couplings, excitation-sector bases
// and the dense operators acting on them.
//
// Conventions
//   * Sites are numbered 1..N in the physics; storage is 0-based, so site s
//     lives at bit (s - 1) of a basis pattern.
//   * A set bit is an excitation, i.e. a spin with sigma^z = -1. The empty
//     pattern is the fully polarized state with sigma^z = +1 everywhere.
//   * Energies are in units of J, times in units of 1/J (hbar = 1).

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sshxxz {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Pattern = std::uint32_t;

struct ChainParams {
  int n_sites = 2;
  double j = 1.0;
  double eta = 0.0;    // dimerization, |eta| <= 1
  double delta = 0.0;  // sigma^z sigma^z anisotropy
  double k_dip = 0.0;  // dipolar K/a^3 in units of J; the dipole axis is fixed to y
  double b_z = 0.0;    // g mu_B B_z in units of J

  /// Throws std::invalid_argument when a field is outside its domain.
  void validate() const;
};

struct DipolarPair {
  int site_a = 0;  // 0-based, site_a < site_b
  int site_b = 0;
  double strength = 0.0;  // K / |b - a|^3
};

/// Static multiplicative noise on the couplings: J_i -> J_i (1 + d_j xi_i),
/// K_ab -> K_ab (1 + d_k xi_ab). Every xi lies in [-1, 1].
struct DisorderRealization {
  double d_j = 0.0;
  double d_k = 0.0;
  std::vector<double> xi_j;  // one per bond, N - 1 entries
  std::vector<double> xi_k;  // one per dipolar pair, in build_couplings pair order
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

struct CouplingSet {
  std::vector<double> bonds;  // bonds[i] couples sites i+1 and i+2
  std::vector<DipolarPair> dipolar_pairs;
};

/// Ordered computational basis of a fixed-excitation sector or of the full
/// 2^N space. States are sorted by their integer pattern value.
class SubspaceBasis {
public:
  static SubspaceBasis sector(int n_sites, int excitations);
  static SubspaceBasis full(int n_sites);

  int n_sites() const { return n_sites_; }
  bool is_full() const { return !excitations_.has_value(); }
  /// Excitation count of the sector; empty for the full space.
  std::optional<int> excitations() const { return excitations_; }
  std::size_t dimension() const { return states_.size(); }
  std::span<const Pattern> states() const { return states_; }
  Pattern state(std::size_t ordinal) const { return states_[ordinal]; }
  std::optional<std::size_t> index_of(Pattern p) const;
  /// Index of a state that must be present; throws std::out_of_range otherwise.
  std::size_t require_index(Pattern p) const;

  bool operator==(const SubspaceBasis& other) const {
    return n_sites_ == other.n_sites_ && excitations_ == other.excitations_;
  }

private:
  SubspaceBasis(int n_sites, std::optional<int> excitations, std::vector<Pattern> states);

  int n_sites_ = 0;
  std::optional<int> excitations_;
  std::vector<Pattern> states_;
};

using BasisPtr = std::shared_ptr<const SubspaceBasis>;

BasisPtr make_sector(int n_sites, int excitations);
BasisPtr make_full(int n_sites);

/// Pattern with excitations on the given 1-based sites.
Pattern pattern_of_sites(std::initializer_list<int> sites);

/// Dense Hermitian operator on a basis. Every operator of this model is real
/// in the computational basis (the dipole axis is y, and sigma^y sigma^y is
/// real), so the entries are stored as a real symmetric matrix.
struct HermitianOperator {
  BasisPtr basis;
  RealMatrix matrix;

  HermitianOperator operator+(const HermitianOperator& rhs) const;
  double hermiticity_residual() const;
};

CouplingSet build_couplings(const ChainParams& params,
                            const DisorderRealization* disorder = nullptr);

/// -(1/4) sum_i J_i [sx sx + sy sy + Delta sz sz] on nearest neighbours.
HermitianOperator build_xxz_hamiltonian(const ChainParams& params,
                                        const CouplingSet& couplings, BasisPtr basis);

/// (1/4) sum_{a<b} K_ab [sigma_a . sigma_b - 3 sy_a sy_b]. Full space only.
HermitianOperator build_dipolar_hamiltonian(const ChainParams& params,
                                            const CouplingSet& couplings, BasisPtr basis);

/// (b_z / 2) sum_j sz_j.
HermitianOperator build_zeeman(const ChainParams& params, BasisPtr basis);

/// XXZ + Zeeman, plus the dipolar term when k_dip > 0 (requires a full basis).
HermitianOperator build_hamiltonian(const ChainParams& params, const CouplingSet& couplings,
                                    BasisPtr basis);

/// sum_j sz_j as a diagonal operator.
HermitianOperator total_magnetization(BasisPtr basis);

/// Frobenius norm of [a, b].
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

}  // namespace sshxxz
