// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "../unit/oracles.hpp"
#include "kuraduel/errors.hpp"
#include "kuraduel/expcli.hpp"
#include "kuraduel/fixedpoint.hpp"
#include "kuraduel/linearized.hpp"
#include "kuraduel/measures.hpp"
#include "kuraduel/random.hpp"

using namespace kuraduel;
using kuraduel::testing::char_poly;
using kuraduel::testing::multiset_distance;
using kuraduel::testing::poly_roots;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [violated]");
  }
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << x;
  return o.str();
}

const std::filesystem::path source_dir = KURADUEL_SOURCE_DIR;

struct Instance {
  ExperimentConfig cfg;
  ModelConfig model;
};

const Instance& canonical() {
  static const Instance inst = [] {
    Instance i;
    const auto file = source_dir / "data" / "canonical_instance.cfg";
    i.cfg = load_config(file);
    i.model = build_model(i.cfg, file.parent_path());
    return i;
  }();
  return inst;
}

ModelConfig canonical_model(double phi, double psi = 0.0) { return canonical().model.with_frustrations(phi, psi); }

Trajectory run(const ModelConfig& m, double t_end = 2000.0, double dt = 0.01) {
  return integrate(m, PhaseState::zeros(m.n_blue(), m.n_red()), t_end, dt, 100);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Independent steady-angle oracle: S cos a - C sin a = R cos(a + g) with
/// (cos g, sin g) = (S, C) / R, and the attracting root has sin(a + g) > 0.
std::optional<double> stable_angle_oracle(double c, double s, double delta) {
  const double r = std::hypot(c, s);
  if (r < std::abs(delta)) return std::nullopt;
  return wrap_angle(std::acos(-delta / r) - std::atan2(c, s));
}

std::pair<double, double> oracle_coeffs(const ModelConfig& m) {
  const double dbr = m.cross.a_br().sum(), drb = m.cross.a_rb().sum();
  const double n = static_cast<double>(m.n_blue()), mm = static_cast<double>(m.n_red());
  return {dbr * m.zeta_br * std::cos(m.phi) / n + drb * m.zeta_rb * std::cos(m.psi) / mm,
          dbr * m.zeta_br * std::sin(m.phi) / n - drb * m.zeta_rb * std::sin(m.psi) / mm};
}

/// Zero crossings of f on a grid, each refined by bisection to `tol`.
std::vector<double> zero_crossings(const std::function<double(double)>& f, double lo, double hi, std::size_t count,
                                   double tol = 1e-7) {
  std::vector<double> out;
  const auto grid = linear_grid(lo, hi, count);
  double prev = f(grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = f(grid[k]);
    if ((prev < 0) != (cur < 0)) {
      double a = grid[k - 1], b = grid[k];
      const bool a_neg = prev < 0;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        ((f(mid) < 0) == a_neg ? a : b) = mid;
      }
      out.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  return out;
}

double lambda1_real(const Matrix& m) { return lowest_nonzero_mode(eigs(m, EigOptions{false, true}), 1).lambda.real(); }

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig m = canonical().model.with_cross_coupling(0.0);
  const Trajectory tr = integrate(m, PhaseState::random(m.n_blue(), m.n_red(), 17), 100.0, 0.01, 10);
  const CentroidSeries c = centroids(tr);
  double st = 0, sa = 0, stt = 0, sta = 0;
  const double n = static_cast<double>(c.times.size());
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    st += c.times[k];
    sa += c.alpha[k];
    stt += c.times[k] * c.times[k];
    sta += c.times[k] * c.alpha[k];
  }
  const double slope = (n * sta - st * sa) / (n * stt - st * st);
  const double delta = m.mean_omega() - m.mean_nu();
  const double secs = seconds_since(t0);
  o.require(std::abs(slope - delta) <= 1e-6, "|slope - delta| = " + fmt(std::abs(slope - delta), 3));
  o.require(secs < 5.0, "runtime " + fmt(secs, 3) + " s");
}

void ac2(Outcome& o) {
  const ModelConfig m = canonical_model(0.0, 0.0);
  o.require(m.cross.is_symmetric() && m.zeta_br == m.zeta_rb, "symmetric cross coupling");
  const PhaseState s0 = PhaseState::random(m.n_blue(), m.n_red(), 23);
  const Trajectory tr = integrate(m, s0, 100.0, 0.01, 10);
  const double rate = m.omega.sum() + m.nu.sum();
  const double sum0 = s0.beta.sum() + s0.rho.sum();
  double worst = 0.0;
  for (std::size_t k = 1; k < tr.samples(); ++k) {
    const double sum = tr.phases.row(static_cast<Eigen::Index>(k)).sum();
    worst = std::max(worst, std::abs((sum - sum0) / tr.times[k] - rate));
  }
  o.require(worst <= 1e-8, "max |drift rate - (sum omega + sum nu)| = " + fmt(worst, 3));
}

void ac3(Outcome& o) {
  const ModelConfig m = canonical_model(0.2 * pi);
  const ConvergenceProbe p = order_of_convergence_probe(m, PhaseState::zeros(21, 21), 10.0, 0.02);
  const double ratio = std::pow(2.0, p.order);
  o.require(!p.exact, "non-trivial error");
  o.require(std::abs(p.order - 4.0) <= 0.5, "Richardson order " + fmt(p.order) + " (error ratio " + fmt(ratio) + ")");
}

void ac4(Outcome& o) {
  for (double f : {0.2, 0.3, 0.8, 0.86}) {
    const ModelConfig m = canonical_model(f * pi);
    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory tr = run(m);
    const double secs = seconds_since(t0);
    const CentroidSeries c = centroids(tr);
    const LockReport lock = detect_lock(c.times, c.alpha);
    const auto st = alpha_steady(two_cluster_coeffs(m)).attracting();
    const double err = st ? std::abs(wrap_angle(lock.plateau - st->alpha)) : INFINITY;
    o.require(lock.locked && err <= 0.02 && secs < 60.0,
              "phi=" + fmt(f) + "pi: |alpha_num - alpha_an| = " + fmt(err, 3) + " (" + fmt(secs, 3) + " s)");
  }
}

void ac5(Outcome& o) {
  const ModelConfig base = canonical().model;
  const double phi_star = critical_phi(base, 0.0, 0.5 * pi, pi);
  std::optional<double> loss;
  bool prev_locked = false;
  for (int k = 85; k <= 100; ++k) {
    const double phi = 0.01 * pi * k;
    const CentroidSeries c = centroids(run(base.with_frustrations(phi, 0.0)));
    const bool locked = detect_lock(c.times, c.alpha).locked;
    if (prev_locked && !locked) {
      loss = phi - 0.005 * pi;
      break;
    }
    prev_locked = locked;
  }
  o.require(loss.has_value(), "numeric lock loss found");
  if (loss)
    o.require(std::abs(*loss - phi_star) <= 0.02 * pi,
              "phi* = " + fmt(phi_star / pi) + "pi, lock loss = " + fmt(*loss / pi) + "pi");
  const double delta = base.mean_omega() - base.mean_nu();
  o.require(std::abs(delta + 0.05) <= 0.005, "delta = " + fmt(delta));
  o.require(phi_star >= 0.93 * pi && phi_star <= 0.96 * pi, "phi* in [0.93pi, 0.96pi]");
}

void ac6(Outcome& o) {
  const ModelConfig base = canonical().model;
  const double delta = base.mean_omega() - base.mean_nu();
  const PhiOptimum opt = optimize_phi(base, 0.0, linear_grid(0.0, 0.99 * pi, 991));
  double best_phi = 0.0, best = -INFINITY;
  for (double phi : linear_grid(0.0, 0.99 * pi, 9901)) {
    const auto [c, s] = oracle_coeffs(base.with_frustrations(phi, 0.0));
    if (const auto a = stable_angle_oracle(c, s, delta); a && *a > best) {
      best = *a;
      best_phi = phi;
    }
  }
  o.require(std::abs(opt.phi - best_phi) <= 0.02 * pi,
            "phi_opt = " + fmt(opt.phi / pi) + "pi vs dense oracle " + fmt(best_phi / pi) + "pi");
  const double c0 = 16.0 * 0.4 / 21.0;
  const double closed = 2.0 * std::acos(std::sqrt(std::abs(delta) / (2.0 * c0)));
  o.require(std::abs(opt.phi - closed) <= 0.02 * pi, "closed form " + fmt(closed / pi) + "pi");

  ModelConfig shifted = base.with_frustrations(0.82 * pi, 0.0);
  shifted.nu.array() += delta + 0.048;
  const auto k = two_cluster_coeffs(shifted);
  const auto st = alpha_steady(k).attracting();
  const double sin_a = st ? std::sin(st->alpha) : NAN;
  const auto [c, s] = oracle_coeffs(shifted);
  const double sin_oracle = std::sin(stable_angle_oracle(c, s, -0.048).value_or(NAN));
  o.require(std::abs(k.delta + 0.048) < 1e-12 && std::abs(sin_a - 0.842) <= 0.002 &&
                std::abs(sin_a - sin_oracle) <= 1e-12,
            "sin alpha(0.82pi, delta=-0.048) = " + fmt(sin_a));
}

void ac7(Outcome& o) {
  // psi = -phi keeps both cross weights equal for every alpha, so the operator stays symmetric.
  for (double f : {0.2, 0.5, 0.8}) {
    const double phi = f * pi;
    const ModelConfig m = canonical_model(phi, -phi);
    // One full turn whose ends avoid both boundaries phi +- pi/2.
    const double lo = phi - pi + 0.123;
    const auto zeros =
        zero_crossings([&](double a) { return lambda1_real(build_super_laplacian(m, a).m); }, lo, lo + 2 * pi, 181);
    double worst = zeros.size() == 2 ? 0.0 : INFINITY;
    for (double z : zeros) {
      const double d = std::min(std::abs(wrap_angle(z - phi - pi / 2)), std::abs(wrap_angle(z - phi + pi / 2)));
      worst = std::max(worst, d);
    }
    o.require(build_super_laplacian(m, 0.3).symmetric_flag && worst <= 0.01,
              "phi=" + fmt(f) + "pi: " + std::to_string(zeros.size()) + " crossings, max offset " + fmt(worst, 3));
  }
  const ModelConfig m = canonical_model(0.2 * pi);
  const SteadyState st = alpha_steady(two_cluster_coeffs(m));
  const auto stable = st.attracting(), unstable = st.repelling();
  o.require(stable && unstable, "both steady roots real");
  if (stable && unstable) {
    const double ls = lambda1_real(build_super_laplacian(m, stable->alpha).m);
    const double lu = lambda1_real(build_super_laplacian(m, unstable->alpha).m);
    o.require(ls >= -1e-9, "lambda1(stable) = " + fmt(ls));
    o.require(lu < 0.0, "lambda1(unstable) = " + fmt(lu));
  }
}

void ac8(Outcome& o) {
  const ModelConfig m = canonical_model(0.2 * pi);
  const auto st = alpha_steady(two_cluster_coeffs(m)).attracting();
  o.require(st.has_value(), "stable root");
  if (!st) return;
  const Mode mode = lowest_nonzero_mode(eigs(build_super_laplacian(m, st->alpha).m), 1);
  const StepProfile p = eigenvector_step_profile(mode.vector, m.n_blue());
  o.require(p.population_step, "population step: gap " + fmt(p.gap) + ", variances " + fmt(p.blue_variance, 2) + "/" +
                                   fmt(p.red_variance, 2));
}

void ac9(Outcome& o) {
  const ModelConfig base = canonical_model(pi / 4, pi / 4);
  const RedPartition part = partition_red(base.red, base.cross);
  const double zc = critical_zeta(base, part, 0.5, 8.0);

  struct Point {
    LockReport br1, r1r2;
  };
  auto simulate = [&](double z) {
    const CentroidSeries c = centroids(run(base.with_cross_coupling(z)), &part);
    return Point{detect_lock(c.times, c.alpha_br1), detect_lock(c.times, c.alpha_r1r2)};
  };

  // (a) alpha_BR1 agreement below 0.9 zeta_crit
  double worst = 0.0;
  for (double z = 0.5; z <= 0.9 * zc; z += 0.5) {
    const Point p = simulate(z);
    const auto an = analyze_three_cluster(base.with_cross_coupling(z), part).stable();
    const double err = an && p.br1.locked ? std::abs(wrap_angle(p.br1.plateau - an->alpha)) : INFINITY;
    worst = std::max(worst, err);
  }
  o.require(worst <= 0.05, "(a) max |alpha_BR1 num - an| = " + fmt(worst, 3));

  // (b) analytic onset versus numeric lock loss of alpha_R1R2
  std::optional<double> loss;
  double prev = 0.0;
  bool prev_locked = false;
  for (double z = 0.5; z <= 8.0 + 1e-9; z += 0.5) {
    const bool locked = simulate(z).r1r2.locked;
    if (prev_locked && !locked) {
      double a = prev, b = z;
      while (b - a > 0.02) {
        const double mid = 0.5 * (a + b);
        (simulate(mid).r1r2.locked ? a : b) = mid;
      }
      loss = 0.5 * (a + b);
      break;
    }
    prev = z;
    prev_locked = locked;
  }
  o.require(loss && std::abs(*loss - zc) <= 0.2,
            "(b) zeta_crit = " + fmt(zc) + ", numeric lock loss = " + (loss ? fmt(*loss) : std::string("none")));

  // (c) lambda1 of the three-cluster operator vanishes at alpha_R1R2 = +-pi/2
  const ModelConfig m = base.with_cross_coupling(1.0);
  const auto an = analyze_three_cluster(m, part).stable();
  o.require(an.has_value(), "(c) stable three-cluster state at zeta=1");
  if (!an) return;
  const auto zeros = zero_crossings(
      [&](double b) { return lambda1_real(build_frag_super_laplacian(m, part, an->alpha, b).m); }, -pi + 1e-3, pi - 1e-3, 181);
  double off = zeros.size() == 2 ? 0.0 : INFINITY;
  for (double z : zeros) off = std::max(off, std::abs(std::abs(z) - pi / 2));
  o.require(off <= 0.01, "(c) " + std::to_string(zeros.size()) + " crossings, max offset from pi/2 " + fmt(off, 3));
}

void ac10(Outcome& o) {
  auto rng = substream(7, 3);
  auto random_matrix = [&](Eigen::Index n) {
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = 2.0 * unit_uniform(rng) - 1.0;
    return a;
  };
  double worst_res = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Matrix a = random_matrix(10);
    const Spectrum s = eigs(a);
    for (Eigen::Index k = 0; k < 10; ++k) {
      const ComplexVector v = s.eigenvectors.col(k);
      const double r = (a.cast<Complex>() * v - s.eigenvalues[static_cast<std::size_t>(k)] * v).norm() / v.norm();
      worst_res = std::max(worst_res, r / s.norm);
    }
  }
  o.require(worst_res <= 1e-8, "max residual / |A| = " + fmt(worst_res, 3));
  double worst_poly = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Matrix a = random_matrix(4);
    worst_poly = std::max(worst_poly, multiset_distance(eigs(a).eigenvalues, poly_roots(char_poly(a))));
  }
  o.require(worst_poly <= 1e-6, "max distance to characteristic-polynomial roots = " + fmt(worst_poly, 3));
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria = {
      {"free-system decoupling", ac1},       {"phase-sum conservation", ac2},
      {"integrator order", ac3},             {"two-cluster analytic vs numeric", ac4},
      {"critical frustration", ac5},         {"optimal frustration", ac6},
      {"spectral stability coherence", ac7}, {"eigenvector step structure", ac8},
      {"fragmentation", ac9},                {"eigensolver oracle", ac10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::printf("AC%zu %s %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
