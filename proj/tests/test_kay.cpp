#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sshxxz/kay.hpp"
#include "sshxxz/propagation.hpp"
#include "sshxxz/spectral.hpp"

using namespace sshxxz;

TEST_CASE("Kay residual and gaps") {
  std::vector<double> eig{-1.0, 0.0, 3.0};
  const auto gaps = spectral_gaps(eig);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0] == 1.0);
  CHECK(gaps[1] == 3.0);
  std::vector<int> q{1, 3};
  CHECK(kay_residual(gaps, q, std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<int> bad{1};
  CHECK_THROWS_AS(kay_residual(gaps, bad, 1.0), std::invalid_argument);
}

TEST_CASE("best fit of an exactly commensurate spectrum") {
  // Gaps 1, 3, 1 fit q = (1, 3, 1) at T = pi, and also (3, 9, 3) at 3 pi.
  std::vector<double> eig{-2.5, -1.5, 1.5, 2.5};
  const auto fit = best_kay_fit(eig, 37);
  REQUIRE(fit.valid);
  CHECK(fit.residual < 1e-12);
  CHECK(std::fmod(fit.arrival_time / std::numbers::pi + 1e-9, 1.0) < 1e-6);
  for (int q : fit.q) CHECK(q % 2 == 1);
}

TEST_CASE("degenerate spectra are rejected with a diagnostic") {
  std::vector<double> eig{-1.0, 0.5, 0.5, 1.0};
  const auto fit = best_kay_fit(eig, 37);
  CHECK_FALSE(fit.valid);
  CHECK_FALSE(fit.diagnostic.empty());
  std::vector<double> single{0.0};
  CHECK_FALSE(best_kay_fit(single, 37).valid);
}

TEST_CASE("two-site chain transfers perfectly at pi") {
  ChainParams p;
  p.n_sites = 2;
  const auto spec = diagonalize(build_xxz_hamiltonian(p, build_couplings(p), make_sector(2, 1)));
  const auto fit = best_kay_fit({spec.eigenvalues.data(), 2}, 37, 1.0);
  REQUIRE(fit.valid);
  CHECK(fit.residual < 1e-12);
  CHECK(fit.q == std::vector<int>{1});
  CHECK(fit.arrival_time == doctest::Approx(std::numbers::pi));
}

TEST_CASE("exact four-site solutions on a small search") {
  KayExactOptions opt;
  opt.q_max = 7;
  opt.seed_grid = 120;
  const auto sols = kay_exact_n4(opt);
  REQUIRE_FALSE(sols.empty());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    CHECK(std::abs(s.eta) < 1.0);
    CHECK(s.delta >= -2.0);
    CHECK(s.delta <= 2.0);
    CHECK(s.residual < 1e-9);
    for (int q : s.q) CHECK(q % 2 == 1);
    const auto gaps = spectral_gaps(n4_exact_eigenvalues(s.eta, s.delta));
    CHECK(kay_residual(gaps, s.q, s.arrival_time) < 1e-9);
    CHECK(n4_exact_p1(s.eta, s.delta, s.arrival_time) > 0.9999);
    if (i > 0) {
      const auto& prev = sols[i - 1];
      CHECK((prev.q < s.q || (prev.q == s.q && prev.eta <= s.eta)));
    }
  }
  opt.q_max = 0;
  CHECK_THROWS_AS(kay_exact_n4(opt), std::invalid_argument);
}

TEST_CASE("relaxed search layout") {
  ChainParams p;
  p.n_sites = 4;
  std::vector<double> etas{-0.5, 0.0, 0.5};
  std::vector<double> deltas{-1.0, 0.0};
  const auto cells = kay_relaxed(p, etas, deltas, 1e-2, 37);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].eta == -0.5);
  CHECK(cells[0].delta == -1.0);
  CHECK(cells[1].delta == 0.0);
  CHECK(cells[2].eta == 0.0);
  for (const auto& c : cells) {
    if (!c.fit.valid) continue;
    CHECK(c.flagged == (c.fit.residual <= 1e-2));
    CHECK(c.fit.arrival_time >= 1.0);
  }
  CHECK_THROWS_AS(kay_relaxed(p, etas, deltas, 0.0, 37), std::invalid_argument);
  CHECK_THROWS_AS(kay_relaxed(p, etas, deltas, 1e-3, 8), std::invalid_argument);
}

TEST_CASE("relaxed fit agrees with the exact solutions") {
  KayExactOptions opt;
  opt.q_max = 5;
  opt.seed_grid = 100;
  const auto sols = kay_exact_n4(opt);
  REQUIRE_FALSE(sols.empty());
  const auto& s = sols.front();
  ChainParams p;
  p.n_sites = 4;
  std::vector<double> etas{s.eta}, deltas{s.delta};
  const auto cells = kay_relaxed(p, etas, deltas, 1e-6, 5);
  REQUIRE(cells.front().fit.valid);
  CHECK(cells.front().fit.residual < 1e-6);
  CHECK(cells.front().flagged);
}
