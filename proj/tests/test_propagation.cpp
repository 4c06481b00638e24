#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pauli_oracle.hpp"
#include "sshxxz/propagation.hpp"

using namespace sshxxz;

namespace {

ChainParams chain(int n, double eta, double delta, double b_z = 0.0, double k_dip = 0.0) {
  ChainParams p;
  p.n_sites = n;
  p.eta = eta;
  p.delta = delta;
  p.b_z = b_z;
  p.k_dip = k_dip;
  return p;
}

// exp(-i H t) by eigendecomposition of the Kronecker-product Hamiltonian.
oracle::CMatrix oracle_propagator(const ChainParams& p, double t) {
  const auto c = build_couplings(p);
  const auto h = oracle::hamiltonian({p.n_sites, c.bonds, p.delta, p.b_z, p.k_dip});
  Eigen::SelfAdjointEigenSolver<oracle::CMatrix> es(h);
  Eigen::VectorXcd ph(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("time grids") {
  const auto g = TimeGrid::window(0.0, 10.0, 0.5);
  CHECK(g.count == 21);
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(TimeGrid::window(0.0, 2000.0, 0.05).count == 40001);
  CHECK_THROWS_AS(TimeGrid::window(1.0, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::window(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("phase recurrence matches direct phases") {
  RealVector eig(3);
  eig << -1.3, 0.2, 2.9;
  const auto g = TimeGrid::window(0.0, 500.0, 0.05);
  PhaseStepper s(eig, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.count; ++i) {
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, std::abs(s.phases()(k) - std::polar(1.0, -eig(k) * g.at(i))));
    s.advance();
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("propagation is unitary and exact at t = 0") {
  const auto p = chain(6, 0.3, -0.7);
  const auto basis = make_sector(6, 2);
  const auto spec = diagonalize(build_hamiltonian(p, build_couplings(p), basis));
  ComplexVector psi = basis_state(*basis, pattern_of_sites({1, 2}));
  CHECK(propagate(spec, psi, 0.0) == psi);
  std::vector<double> times;
  for (int i = 0; i < 50; ++i) times.push_back(7.3 * i);
  for (const auto& s : propagate(spec, psi, times)) CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  ComplexVector wrong = ComplexVector::Zero(3);
  CHECK_THROWS_AS(propagate(spec, wrong, 1.0), std::invalid_argument);
}

TEST_CASE("amplitudes match brute-force evolution in the full space") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const auto p = chain(5, 0.9 * u(rng), 2.0 * u(rng), 2.0 * u(rng), trial % 2 ? 0.2 : 0.0);
    const TransferEngine engine(p);
    for (double t : {0.0, 0.7, 3.1, 17.0}) {
      const auto U = oracle_propagator(p, t);
      const auto a = engine.amplitudes(t);
      auto el = [&](std::initializer_list<int> to, std::initializer_list<int> from) {
        return U(pattern_of_sites(to), pattern_of_sites(from));
      };
      CHECK(std::abs(a.f_1N - el({5}, {1})) < 1e-10);
      CHECK(std::abs(a.f_2Nm1 - el({4}, {2})) < 1e-10);
      CHECK(std::abs(a.f_1Nm1 - el({4}, {1})) < 1e-10);
      CHECK(std::abs(a.f_2N - el({5}, {2})) < 1e-10);
      CHECK(std::abs(a.f_12 - el({4, 5}, {1, 2})) < 1e-10);
    }
  }
}

TEST_CASE("two-site transfer is sin^2(t/2)") {
  const TransferEngine engine(chain(2, 0.0, 0.0));
  for (double t : {0.0, 0.5, 1.0, std::numbers::pi, 5.0})
    CHECK(engine.metric(Metric::P1, t) == doctest::Approx(std::pow(std::sin(t / 2), 2)));
  const auto g = TimeGrid::window(0.0, 10.0, 0.05);
  const auto best = max_in_window(g, engine.series(Metric::P1, g),
                                  [&](double t) { return engine.metric(Metric::P1, t); });
  CHECK(best.t == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  CHECK(best.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(engine.metric(Metric::F2, 1.0), std::invalid_argument);
}

TEST_CASE("fidelity identities") {
  CHECK(fidelity_f1(Complex(1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(fidelity_f1(Complex(0.0, 0.0)) == doctest::Approx(0.5));
  CHECK(fidelity_f1(Complex(0.0, 1.0), GammaMode::Bare) == doctest::Approx(0.5 + 1.0 / 6));
  CHECK(fidelity_f1(Complex(0.0, 1.0), GammaMode::Optimal) == doctest::Approx(1.0));

  AmplitudeSet one{1.0, 1.0, 1.0, 0.0, 0.0, 1.0};
  CHECK(fidelity_f2(one) == doctest::Approx(1.0));
  AmplitudeSet zero{};
  CHECK(fidelity_f2(zero) == doctest::Approx(0.25));
  CHECK(fidelity_f12(one) == doctest::Approx(1.0 / 3.0));
  AmplitudeSet swap{1.0, 0.0, 0.0, 1.0, 1.0, 0.0};
  CHECK(fidelity_f12(swap) == doctest::Approx(1.0));
}

TEST_CASE("interference decomposition reproduces F2") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    AmplitudeSet a;
    a.f_1N = {0.6 * u(rng), 0.6 * u(rng)};
    a.f_2Nm1 = {0.6 * u(rng), 0.6 * u(rng)};
    a.f_12 = {0.6 * u(rng), 0.6 * u(rng)};
    const int n = 4 + i % 6;
    const double gamma = 4.0 * u(rng);
    const double direct = fidelity_f2(a, gamma, n);
    const double split = 0.25 + (std::norm(a.f_1N) + std::norm(a.f_2Nm1) + std::norm(a.f_12)) / 20.0 +
                         dressed_interference(a, gamma, n) / 10.0;
    CHECK(direct == doctest::Approx(split).epsilon(1e-12));
  }
}

TEST_CASE("field dressing equals evolution under the Zeeman term") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const int n = 4 + i % 5;
    auto p = chain(n, 0.9 * u(rng), 2.0 * u(rng));
    const TransferEngine bare(p);
    p.b_z = 3.0 * u(rng);
    const TransferEngine field(p);
    const double t = 50.0 * std::abs(u(rng));
    const double gamma = zeeman_gamma(p.b_z, t, n);
    const double via_gamma = fidelity_f2(bare.amplitudes(t), gamma, n);
    const double direct = fidelity_f2(field.amplitudes(t), 0.0, n);
    CHECK(std::abs(via_gamma - direct) < 1e-8);
  }
}

TEST_CASE("transfer moduli are symmetric in Delta without the dipolar term") {
  for (double eta : {-0.6, 0.0, 0.4}) {
    for (double delta : {0.3, 1.0, 1.7}) {
      const TransferEngine plus(chain(6, eta, delta));
      const TransferEngine minus(chain(6, eta, -delta));
      for (double t = 0.0; t < 200.0; t += 3.7) {
        CHECK(std::abs(std::abs(plus.f_1N(t)) - std::abs(minus.f_1N(t))) < 1e-10);
        CHECK(std::abs(std::abs(plus.amplitudes(t).f_12) - std::abs(minus.amplitudes(t).f_12)) < 1e-10);
      }
    }
  }
}

TEST_CASE("window maximum") {
  const auto g = TimeGrid::window(0.0, 4.0, 1.0);
  std::vector<double> v{0.0, 2.0, 2.0, 1.0, 0.0};
  const auto m = max_in_window(g, v, {});
  CHECK(m.t == 1.0);
  CHECK(m.value == 2.0);
  std::vector<double> empty;
  CHECK_THROWS_AS(max_in_window(TimeGrid{}, empty, {}), std::invalid_argument);
  const auto peak = golden_maximize([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0);
  CHECK(peak.t == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("b_z optimization is at least as good as no field") {
  const auto p = chain(6, -0.4, 0.8);
  const auto g = TimeGrid::window(0.0, 60.0, 0.1);
  const auto opt = optimize_bz(p, g, 360);
  CHECK(opt.f2 >= opt.f2_no_field - 1e-14);
  // Re-evaluating with the reported field reproduces the optimum.
  auto q = p;
  q.b_z = opt.b_z;
  CHECK(TransferEngine(q).metric(Metric::F2, opt.t) == doctest::Approx(opt.f2).epsilon(1e-9));
  CHECK(opt.gamma == doctest::Approx(zeeman_gamma(opt.b_z, opt.t, 6)).epsilon(1e-12));
  CHECK_THROWS_AS(optimize_bz(chain(3, 0.0, 0.0), g), std::invalid_argument);
}

TEST_CASE("leakage vanishes when magnetization is conserved") {
  const auto g = TimeGrid::window(0.0, 50.0, 0.1);
  CHECK(leakage(chain(5, 0.3, 0.5), 1, g).max_leakage < 1e-12);
  CHECK(leakage(chain(5, 0.3, 0.5, 0.0, 0.1), 1, g).max_leakage > 1e-3);
  CHECK_THROWS_AS(leakage(chain(5, 0.3, 0.5), 0, g), std::invalid_argument);
}

TEST_CASE("metric names round-trip") {
  for (Metric m : {Metric::P1, Metric::P2, Metric::F1, Metric::F12, Metric::F2})
    CHECK(parse_metric(metric_name(m)) == m);
  CHECK(parse_metric("F12") == Metric::F12);
  CHECK_THROWS_AS(parse_metric("p3"), std::invalid_argument);
}
