#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sshxxz/propagation.hpp"
#include "sshxxz/spectral.hpp"

using namespace sshxxz;

namespace {

SpectralDecomposition sector_spectrum(const ChainParams& p, int k) {
  return diagonalize(build_hamiltonian(p, build_couplings(p), make_sector(p.n_sites, k)));
}

}  // namespace

TEST_CASE("uniform four-site XX spectrum") {
  ChainParams p;
  p.n_sites = 4;
  const auto spec = sector_spectrum(p, 1);
  // Open tight-binding chain with hopping -1/2: lambda_k = -cos(k pi / 5).
  for (int k = 1; k <= 4; ++k)
    CHECK(spec.eigenvalues(k - 1) == doctest::Approx(-std::cos(k * std::numbers::pi / 5)).epsilon(1e-14));
  const auto closed = n4_exact_eigenvalues(0.0, 0.0);
  CHECK(closed[0] == doctest::Approx(-0.809016994375));
  CHECK(closed[1] == doctest::Approx(-0.309016994375));
  CHECK(closed[2] == doctest::Approx(0.309016994375));
  CHECK(closed[3] == doctest::Approx(0.809016994375));
}

TEST_CASE("closed-form four-site eigenvalues agree with diagonalization") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ue(-0.99, 0.99), ud(-2.0, 2.0);
  ChainParams p;
  p.n_sites = 4;
  for (int i = 0; i < 500; ++i) {
    p.eta = ue(rng);
    p.delta = ud(rng);
    const auto spec = sector_spectrum(p, 1);
    const auto closed = n4_exact_eigenvalues(p.eta, p.delta);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(spec.eigenvalues(k) - closed[k]) < 1e-12);
  }
}

TEST_CASE("closed-form four-site transfer probability") {
  CHECK(n4_exact_p1(0.3, 0.5, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(n4_exact_p1(1.0, 0.5, 3.0) == 0.0);
  CHECK(n4_exact_p1(-1.0, 0.5, 3.0) == 0.0);
  ChainParams p;
  p.n_sites = 4;
  const TransferEngine engine(p);
  for (int i = 0; i < 200; ++i) {
    const double t = 0.25 * i;
    CHECK(std::abs(n4_exact_p1(0.0, 0.0, t) - std::norm(engine.f_1N(t))) < 1e-10);
  }
}

TEST_CASE("bipartite spectrum at Delta = 0 comes in +- pairs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ue(-0.95, 0.95);
  for (int n : {4, 5, 8, 9}) {
    ChainParams p;
    p.n_sites = n;
    p.eta = ue(rng);
    const auto spec = sector_spectrum(p, 1);
    for (int k = 0; k < n; ++k)
      CHECK(spec.eigenvalues(k) == doctest::Approx(-spec.eigenvalues(n - 1 - k)).epsilon(1e-12));
  }
}

TEST_CASE("eigenpairs reconstruct the operator and follow the phase convention") {
  ChainParams p;
  p.n_sites = 7;
  p.eta = 0.35;
  p.delta = -0.6;
  const auto h = build_hamiltonian(p, build_couplings(p), make_sector(7, 3));
  const auto spec = diagonalize(h);
  const RealMatrix& v = spec.eigenvectors;
  CHECK((v * spec.eigenvalues.asDiagonal() * v.transpose() - h.matrix).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((v.transpose() * v - RealMatrix::Identity(v.rows(), v.cols())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::is_sorted(spec.eigenvalues.begin(), spec.eigenvalues.end()));
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index arg;
    v.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(v(arg, k) > 0.0);
  }
}

TEST_CASE("non-symmetric input is rejected") {
  HermitianOperator h{make_sector(3, 1), RealMatrix::Zero(3, 3)};
  h.matrix(0, 1) = 1.0;
  CHECK_THROWS_AS(diagonalize(h), std::invalid_argument);
  HermitianOperator wrong{make_sector(3, 1), RealMatrix::Zero(2, 2)};
  CHECK_THROWS_AS(diagonalize(wrong), std::invalid_argument);
}

TEST_CASE("edge localization") {
  ChainParams p;
  p.n_sites = 2;
  auto loc = edge_localization(sector_spectrum(p, 1), pattern_of_sites({1}));
  CHECK(loc.chi == doctest::Approx(1.0));
  CHECK(loc.k1 == 0);
  CHECK(loc.k2 == 1);
  CHECK(loc.splitting == doctest::Approx(1.0));

  p.n_sites = 8;
  p.eta = 0.9;
  CHECK(edge_localization(sector_spectrum(p, 1), pattern_of_sites({1})).chi > 0.8);
  p.delta = 1.0;
  CHECK(edge_localization(sector_spectrum(p, 1), pattern_of_sites({1})).chi < 0.8);

  // Two excitations on the first two sites.
  p.delta = 0.0;
  p.eta = -0.9;
  const auto l2 = edge_localization(sector_spectrum(p, 2), pattern_of_sites({1, 2}));
  CHECK(l2.chi > 0.0);
  CHECK(l2.chi <= 1.0);
  CHECK(l2.k1 < l2.k2);

  CHECK_THROWS_AS(edge_localization(sector_spectrum(p, 1), pattern_of_sites({1, 2})),
                  std::out_of_range);
}

TEST_CASE("edge splitting shrinks with dimerization") {
  ChainParams p;
  p.n_sites = 8;
  double previous = 1e9;
  for (double eta : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    p.eta = eta;
    const double eps = std::abs(edge_localization(sector_spectrum(p, 1), pattern_of_sites({1})).splitting);
    CHECK(eps < previous);
    previous = eps;
  }
}
