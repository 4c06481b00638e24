#include <doctest.h>

#include <cmath>
#include <random>

#include "sshxxz/disorder.hpp"

using namespace sshxxz;

namespace {

ChainParams chain8(double eta, double delta) {
  ChainParams p;
  p.n_sites = 8;
  p.eta = eta;
  p.delta = delta;
  return p;
}

}  // namespace

TEST_CASE("realizations are bounded and deterministic") {
  std::mt19937_64 a(42), b(42);
  const auto ra = sample_realization(a, 8, 0.1, 0.05, 28);
  const auto rb = sample_realization(b, 8, 0.1, 0.05, 28);
  CHECK(ra.xi_j == rb.xi_j);
  CHECK(ra.xi_k == rb.xi_k);
  CHECK(ra.xi_j.size() == 7);
  CHECK(ra.xi_k.size() == 28);
  for (double x : ra.xi_j) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  std::mt19937_64 c(1);
  CHECK_THROWS_AS(sample_realization(c, 8, -0.1, 0.0), std::invalid_argument);

  const auto p = chain8(0.3, 0.0);
  const auto clean = build_couplings(p);
  const auto r = realization_at(p, 0.1, 0.0, 7, 3);
  CHECK(r.index == 3);
  CHECK(r.seed == 7);
  const auto noisy = build_couplings(p, &r);
  for (std::size_t i = 0; i < clean.bonds.size(); ++i)
    CHECK(std::abs(noisy.bonds[i] / clean.bonds[i] - 1.0) <= 0.1 + 1e-15);
  const auto r0 = realization_at(p, 0.0, 0.0, 7, 3);
  CHECK(build_couplings(p, &r0).bonds == clean.bonds);
}

TEST_CASE("realization seeds differ by index and by master seed") {
  CHECK(realization_seed(1, 0) != realization_seed(1, 1));
  CHECK(realization_seed(1, 0) != realization_seed(2, 0));
  CHECK(realization_seed(5, 9) == realization_seed(5, 9));
}

TEST_CASE("zero disorder reproduces the clean metric exactly") {
  const auto p = chain8(-0.4, 0.5);
  const double t = 37.0;
  const double clean = TransferEngine(p).metric(Metric::P1, t);
  for (int m_r : {1, 7, 30}) {
    const auto s = averaged_transfer(p, Metric::P1, t, 0.0, 0.0, m_r, 99);
    CHECK(s.mean == clean);
    CHECK(s.std_error == 0.0);
    CHECK(s.m_r == m_r);
  }
}

TEST_CASE("averages are reproducible and independent of worker count") {
  const auto p = chain8(-0.5, 0.0);
  const auto a = averaged_transfer(p, Metric::P1, 20.0, 0.05, 0.0, 40, 1234, 1);
  const auto b = averaged_transfer(p, Metric::P1, 20.0, 0.05, 0.0, 40, 1234, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.values == b.values);
  const auto c = averaged_transfer(p, Metric::P1, 20.0, 0.05, 0.0, 40, 1235, 1);
  CHECK(a.mean != c.mean);
  CHECK(a.mean >= 0.0);
  CHECK(a.mean <= 1.0);
}

TEST_CASE("clean limit continuity") {
  const auto p = chain8(-0.6, 0.0);
  const double t = clean_arrival_time(p, Metric::P1, TimeGrid::window(0.0, 200.0, 0.05));
  const double clean = TransferEngine(p).metric(Metric::P1, t);
  const auto s = averaged_transfer(p, Metric::P1, t, 1e-6, 0.0, 20, 5);
  CHECK(std::abs(s.mean - clean) < 1e-3);
}

TEST_CASE("standard error shrinks like 1/sqrt(m_r)") {
  const auto p = chain8(-0.6, 0.0);
  const double t = clean_arrival_time(p, Metric::P1, TimeGrid::window(0.0, 200.0, 0.05));
  const auto s100 = averaged_transfer(p, Metric::P1, t, 0.1, 0.0, 100, 17);
  const auto s400 = averaged_transfer(p, Metric::P1, t, 0.1, 0.0, 400, 17);
  CHECK(s400.std_error / s100.std_error == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("dipolar disorder draws one noise per pair") {
  auto p = chain8(0.2, 0.0);
  p.k_dip = 0.1;
  const auto r = realization_at(p, 0.05, 0.05, 3, 0);
  CHECK(r.xi_k.size() == 28);
  CHECK_NOTHROW(build_couplings(p, &r));
}

TEST_CASE("invalid arguments") {
  const auto p = chain8(0.2, 0.0);
  CHECK_THROWS_AS(averaged_transfer(p, Metric::P1, 10.0, 0.1, 0.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(averaged_transfer(p, Metric::P1, -1.0, 0.1, 0.0, 5, 1), std::invalid_argument);
}
