#include "sshxxz/chain_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sshxxz {

namespace {

constexpr int kMaxSites = 24;

inline int sz(Pattern p, int site0) { return ((p >> site0) & 1u) ? -1 : 1; }

void check_basis(const BasisPtr& basis, const ChainParams& params) {
  if (!basis) throw std::invalid_argument("null basis");
  if (basis->n_sites() != params.n_sites)
    throw std::invalid_argument("basis has " + std::to_string(basis->n_sites()) +
                                " sites, chain has " + std::to_string(params.n_sites));
}

}  // namespace

void ChainParams::validate() const {
  if (n_sites < 2 || n_sites > kMaxSites)
    throw std::invalid_argument("n_sites must lie in [2, " + std::to_string(kMaxSites) + "]");
  if (!std::isfinite(eta) || std::abs(eta) > 1.0)
    throw std::invalid_argument("eta must lie in [-1, 1]");
  if (!std::isfinite(j) || !std::isfinite(delta) || !std::isfinite(b_z))
    throw std::invalid_argument("non-finite chain parameter");
  if (!std::isfinite(k_dip) || k_dip < 0.0) throw std::invalid_argument("k_dip must be >= 0");
}

SubspaceBasis::SubspaceBasis(int n_sites, std::optional<int> excitations,
                             std::vector<Pattern> states)
    : n_sites_(n_sites), excitations_(excitations), states_(std::move(states)) {}

SubspaceBasis SubspaceBasis::sector(int n_sites, int excitations) {
  if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("bad site count");
  if (excitations < 0 || excitations > n_sites)
    throw std::invalid_argument("excitation count outside [0, N]");
  std::vector<Pattern> states;
  const Pattern end = Pattern{1} << n_sites;
  for (Pattern p = 0; p < end; ++p)
    if (std::popcount(p) == excitations) states.push_back(p);
  return SubspaceBasis(n_sites, excitations, std::move(states));
}

SubspaceBasis SubspaceBasis::full(int n_sites) {
  if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("bad site count");
  std::vector<Pattern> states(std::size_t{1} << n_sites);
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = static_cast<Pattern>(i);
  return SubspaceBasis(n_sites, std::nullopt, std::move(states));
}

std::optional<std::size_t> SubspaceBasis::index_of(Pattern p) const {
  if (is_full()) {
    if (p < states_.size()) return p;
    return std::nullopt;
  }
  auto it = std::lower_bound(states_.begin(), states_.end(), p);
  if (it == states_.end() || *it != p) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t SubspaceBasis::require_index(Pattern p) const {
  auto idx = index_of(p);
  if (!idx) throw std::out_of_range("basis state " + std::to_string(p) + " not in basis");
  return *idx;
}

BasisPtr make_sector(int n_sites, int excitations) {
  return std::make_shared<const SubspaceBasis>(SubspaceBasis::sector(n_sites, excitations));
}

BasisPtr make_full(int n_sites) {
  return std::make_shared<const SubspaceBasis>(SubspaceBasis::full(n_sites));
}

Pattern pattern_of_sites(std::initializer_list<int> sites) {
  Pattern p = 0;
  for (int s : sites) {
    if (s < 1 || s > kMaxSites) throw std::invalid_argument("site index out of range");
    p |= Pattern{1} << (s - 1);
  }
  return p;
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& rhs) const {
  if (!basis || !rhs.basis || !(*basis == *rhs.basis))
    throw std::invalid_argument("operator basis mismatch");
  return {basis, matrix + rhs.matrix};
}

double HermitianOperator::hermiticity_residual() const {
  if (matrix.size() == 0) return 0.0;
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

CouplingSet build_couplings(const ChainParams& params, const DisorderRealization* disorder) {
  params.validate();
  const int n = params.n_sites;
  CouplingSet out;
  out.bonds.resize(n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    out.bonds[i - 1] = params.j * (1.0 + sign * params.eta);
  }
  if (params.k_dip > 0.0) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double r = b - a;
        out.dipolar_pairs.push_back({a, b, params.j * params.k_dip / (r * r * r)});
      }
  }
  if (disorder) {
    if (disorder->xi_j.size() != out.bonds.size())
      throw std::invalid_argument("disorder has " + std::to_string(disorder->xi_j.size()) +
                                  " exchange noises, chain has " +
                                  std::to_string(out.bonds.size()) + " bonds");
    for (std::size_t i = 0; i < out.bonds.size(); ++i)
      out.bonds[i] *= 1.0 + disorder->d_j * disorder->xi_j[i];
    if (!out.dipolar_pairs.empty()) {
      if (disorder->xi_k.size() != out.dipolar_pairs.size())
        throw std::invalid_argument("disorder dipolar noise count does not match pair count");
      for (std::size_t i = 0; i < out.dipolar_pairs.size(); ++i)
        out.dipolar_pairs[i].strength *= 1.0 + disorder->d_k * disorder->xi_k[i];
    }
  }
  return out;
}

HermitianOperator build_xxz_hamiltonian(const ChainParams& params, const CouplingSet& couplings,
                                        BasisPtr basis) {
  check_basis(basis, params);
  const int n = params.n_sites;
  if (couplings.bonds.size() != static_cast<std::size_t>(n - 1))
    throw std::invalid_argument("coupling set does not match chain length");
  const std::size_t dim = basis->dimension();
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const Pattern p = basis->state(col);
    double diag = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      const double jb = couplings.bonds[i];
      const int s1 = sz(p, i), s2 = sz(p, i + 1);
      diag += -0.25 * jb * params.delta * s1 * s2;
      if (s1 != s2) {
        // sx sx + sy sy = 2 (s+ s- + s- s+) swaps an antiparallel pair.
        const Pattern q = p ^ (Pattern{3} << i);
        h(basis->require_index(q), col) += -0.5 * jb;
      }
    }
    h(col, col) += diag;
  }
  return {std::move(basis), std::move(h)};
}

HermitianOperator build_dipolar_hamiltonian(const ChainParams& params,
                                            const CouplingSet& couplings, BasisPtr basis) {
  check_basis(basis, params);
  if (!basis->is_full())
    throw std::invalid_argument("dipolar term breaks magnetization; it needs the full space");
  const std::size_t dim = basis->dimension();
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for (const auto& pair : couplings.dipolar_pairs) {
    const double c = 0.25 * pair.strength;
    const Pattern flip = (Pattern{1} << pair.site_a) | (Pattern{1} << pair.site_b);
    for (std::size_t col = 0; col < dim; ++col) {
      const Pattern p = basis->state(col);
      const int prod = sz(p, pair.site_a) * sz(p, pair.site_b);
      // sigma.sigma - 3 sy sy = sx sx - 2 sy sy + sz sz. On |s_a s_b>, sx sx flips
      // both with amplitude 1 and sy sy flips both with amplitude -s_a s_b.
      h(col, col) += c * prod;
      h(basis->require_index(p ^ flip), col) += c * (1.0 + 2.0 * prod);
    }
  }
  return {std::move(basis), std::move(h)};
}

HermitianOperator build_zeeman(const ChainParams& params, BasisPtr basis) {
  check_basis(basis, params);
  const std::size_t dim = basis->dimension();
  RealMatrix h = RealMatrix::Zero(dim, dim);
  if (params.b_z != 0.0) {
    for (std::size_t i = 0; i < dim; ++i) {
      const int m = params.n_sites - 2 * std::popcount(basis->state(i));
      h(i, i) = 0.5 * params.b_z * m;
    }
  }
  return {std::move(basis), std::move(h)};
}

HermitianOperator build_hamiltonian(const ChainParams& params, const CouplingSet& couplings,
                                    BasisPtr basis) {
  auto h = build_xxz_hamiltonian(params, couplings, basis);
  if (params.b_z != 0.0) h.matrix += build_zeeman(params, basis).matrix;
  if (params.k_dip > 0.0) h.matrix += build_dipolar_hamiltonian(params, couplings, basis).matrix;
  return h;
}

HermitianOperator total_magnetization(BasisPtr basis) {
  const std::size_t dim = basis->dimension();
  RealMatrix m = RealMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    m(i, i) = basis->n_sites() - 2 * std::popcount(basis->state(i));
  return {std::move(basis), std::move(m)};
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  if (!a.basis || !b.basis || !(*a.basis == *b.basis))
    throw std::invalid_argument("operator basis mismatch");
  return (a.matrix * b.matrix - b.matrix * a.matrix).norm();
}

}  // namespace sshxxz
