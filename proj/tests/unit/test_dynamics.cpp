#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "kuraduel/dynamics.hpp"
#include "kuraduel/errors.hpp"

using namespace kuraduel;
using kuraduel::testing::single_pair;
using kuraduel::testing::tree_vs_random;

namespace {

// Direct transcription of the vector field, one sin() per term.
Vector naive_rhs(const ModelConfig& c, const PhaseState& s) {
  const auto n = static_cast<Eigen::Index>(c.n_blue());
  const auto m = static_cast<Eigen::Index>(c.n_red());
  Vector v(n + m);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = c.omega(i);
    for (Eigen::Index j = 0; j < n; ++j) acc += c.sigma_b * c.blue.adjacency()(i, j) * std::sin(s.beta(j) - s.beta(i));
    for (Eigen::Index j = 0; j < m; ++j)
      acc += c.zeta_br * c.cross.a_br()(i, j) * std::sin(s.rho(j) + c.phi - s.beta(i));
    v(i) = acc;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    double acc = c.nu(i);
    for (Eigen::Index j = 0; j < m; ++j) acc += c.sigma_r * c.red.adjacency()(i, j) * std::sin(s.rho(j) - s.rho(i));
    for (Eigen::Index j = 0; j < n; ++j)
      acc += c.zeta_rb * c.cross.a_rb()(i, j) * std::sin(s.beta(j) + c.psi - s.rho(i));
    v(n + i) = acc;
  }
  return v;
}

} // namespace

TEST_CASE("rhs examples") {
  ModelConfig cfg = tree_vs_random(3, 4, 0.3, -0.2);
  cfg.sigma_b = cfg.sigma_r = cfg.zeta_br = cfg.zeta_rb = 0.0;
  const PhaseState s = PhaseState::random(21, 21, 17);
  Vector expected(42);
  expected << cfg.omega, cfg.nu;
  CHECK((rhs(cfg, s) - expected).cwiseAbs().maxCoeff() == 0.0);

  const ModelConfig pair = single_pair(1.0, 1.0, 0.3, -0.1);
  const Vector v = rhs(pair, PhaseState::zeros(1, 1));
  CHECK(v(0) == doctest::Approx(0.3));
  CHECK(v(1) == doctest::Approx(-0.1));

  const ModelConfig frustrated = single_pair(2.0, 1.0, 0.25, 0.0, pi / 2);
  CHECK(rhs(frustrated, PhaseState::zeros(1, 1))(0) == doctest::Approx(2.25));
}

TEST_CASE("rhs matches direct summation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelConfig cfg = tree_vs_random(seed + 1, seed + 2, 0.7 * static_cast<double>(seed) - 3.0, 0.4);
    cfg.zeta_rb = 0.9;
    const PhaseState s = PhaseState::random(21, 21, seed + 100);
    CHECK((rhs(cfg, s) - naive_rhs(cfg, s)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rhs is invariant under a common phase shift") {
  const ModelConfig cfg = tree_vs_random(2, 3, 0.8 * pi, 0.1);
  PhaseState s = PhaseState::random(21, 21, 1);
  const Vector v0 = rhs(cfg, s);
  s.beta.array() += 1.234;
  s.rho.array() += 1.234;
  CHECK((rhs(cfg, s) - v0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dimension validation") {
  ModelConfig cfg = tree_vs_random();
  cfg.omega = Vector::Zero(3);
  CHECK_THROWS_AS(cfg.validate(), DimensionError);
  CHECK_THROWS_AS(rhs(cfg, PhaseState::zeros(21, 21)), DimensionError);
}

TEST_CASE("frustrations are wrapped") {
  const ModelConfig c = tree_vs_random().with_frustrations(3 * pi / 2, -pi);
  CHECK(c.phi == doctest::Approx(-pi / 2));
  CHECK(c.psi == doctest::Approx(pi));
}

TEST_CASE("uncoupled flow is integrated exactly") {
  ModelConfig cfg = tree_vs_random();
  cfg.sigma_b = cfg.sigma_r = cfg.zeta_br = cfg.zeta_rb = 0.0;
  const PhaseState s0 = PhaseState::random(21, 21, 8);
  const Trajectory tr = integrate(cfg, s0, 50.0, 0.01, 100);
  const double t = tr.times.back();
  CHECK(t == doctest::Approx(50.0));
  CHECK((tr.final_state.beta - (s0.beta + cfg.omega * t)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((tr.final_state.rho - (s0.rho + cfg.nu * t)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(tr.samples() == 51);
  CHECK(tr.rhs_evaluations == 4 * 5000);
  for (std::size_t k = 1; k < tr.samples(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);

  const ConvergenceProbe probe = order_of_convergence_probe(cfg, s0, 10.0);
  CHECK(probe.exact);
}

TEST_CASE("two-oscillator phase difference follows the closed form") {
  const ModelConfig cfg = single_pair(1.0, 1.0, 0.4, 0.4);
  PhaseState s0 = PhaseState::zeros(1, 1);
  s0.beta(0) = 2.5;
  const Trajectory tr = integrate(cfg, s0, 5.0, 0.001, 50);
  // d(delta)/dt = -2 sin(delta)  =>  tan(delta/2) = tan(delta0/2) exp(-2t)
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    const double delta = tr.phases(static_cast<Eigen::Index>(k), 0) - tr.phases(static_cast<Eigen::Index>(k), 1);
    const double exact = 2.0 * std::atan(std::tan(1.25) * std::exp(-2.0 * tr.times[k]));
    worst = std::max(worst, std::abs(delta - exact));
  }
  CHECK(worst < 1e-6);

  const ConvergenceProbe probe = order_of_convergence_probe(cfg, s0, 5.0, 0.1);
  CHECK(!probe.exact);
  CHECK(probe.order == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("order of convergence on the tree-vs-random system") {
  const ModelConfig cfg = tree_vs_random(11, 5, 0.2 * pi);
  const ConvergenceProbe probe = order_of_convergence_probe(cfg, PhaseState::zeros(21, 21), 10.0, 0.02);
  CHECK(!probe.exact);
  CHECK(probe.order >= 3.5);
  CHECK(probe.order <= 4.5);
}

TEST_CASE("phase sum is conserved in the symmetric unfrustrated case") {
  const ModelConfig cfg = tree_vs_random(4, 6);
  const PhaseState s0 = PhaseState::random(21, 21, 9);
  const Trajectory tr = integrate(cfg, s0, 20.0, 0.01, 200);
  const double rate = cfg.omega.sum() + cfg.nu.sum();
  const double sum0 = s0.beta.sum() + s0.rho.sum();
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    const double sum = tr.phases.row(static_cast<Eigen::Index>(k)).sum();
    CHECK(std::abs(sum - sum0 - rate * tr.times[k]) < 1e-9);
  }
}

TEST_CASE("populations decouple without cross coupling") {
  ModelConfig a = tree_vs_random(5, 5, 0.5, 0.5);
  a.zeta_br = a.zeta_rb = 0.0;
  ModelConfig b = a;
  b.nu.array() += 0.3;
  const PhaseState s0 = PhaseState::random(21, 21, 2);
  const Trajectory ta = integrate(a, s0, 10.0, 0.01, 100);
  const Trajectory tb = integrate(b, s0, 10.0, 0.01, 100);
  for (std::size_t k = 0; k < ta.samples(); ++k) CHECK(ta.beta(k) == tb.beta(k));
}

TEST_CASE("integration is deterministic") {
  const ModelConfig cfg = tree_vs_random(7, 7, 0.9 * pi);
  const PhaseState s0 = PhaseState::random(21, 21, 4);
  const Trajectory a = integrate(cfg, s0, 5.0, 0.01, 7);
  const Trajectory b = integrate(cfg, s0, 5.0, 0.01, 7);
  CHECK(a.phases == b.phases);
  CHECK(a.times == b.times);
}

TEST_CASE("divergence is reported with its time") {
  ModelConfig cfg = single_pair(1.0, 1.0, 0.0, 0.0);
  cfg.omega(0) = 1e308;
  PhaseState s0 = PhaseState::zeros(1, 1);
  s0.beta(0) = 1e308;
  try {
    integrate(cfg, s0, 10.0, 1.0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() <= 10.0);
  }
}

TEST_CASE("bad step arguments") {
  const ModelConfig cfg = single_pair(1.0, 1.0, 0.0, 0.0);
  CHECK_THROWS_AS(integrate(cfg, PhaseState::zeros(1, 1), 1.0, 0.0), DimensionError);
  CHECK_THROWS_AS(integrate(cfg, PhaseState::zeros(1, 1), -1.0, 0.1), DimensionError);
}

TEST_CASE("trajectory csv layout") {
  const ModelConfig cfg = single_pair(1.0, 1.0, 0.1, 0.2);
  const Trajectory tr = integrate(cfg, PhaseState::zeros(1, 1), 0.2, 0.1);
  const std::string csv = trajectory_csv(tr, {"config_sha256=abc"});
  CHECK(csv.rfind("# config_sha256=abc\nt,beta_0,rho_0\n0,0,0\n", 0) == 0);
}
