#include <algorithm>
#include <cmath>

#include "kuraduel/eigs.hpp"
#include "kuraduel/errors.hpp"
#include "kuraduel/fixedpoint.hpp"
#include "kuraduel/linearized.hpp"

namespace kuraduel {

namespace {

constexpr double residual_tol = 1e-10;

double total(const Matrix& a) { return a.sum(); }

// Lowest nonzero eigenvalue of the super-Laplacian and whether it passes the stability test.
std::pair<Complex, bool> spectral_check(const Matrix& m) {
  const Spectrum s = eigs(m, EigOptions{false, true});
  const Mode mode = lowest_nonzero_mode(s, 1);
  return {mode.lambda, mode.lambda.real() >= -1e-9 * s.norm};
}

} // namespace

TwoClusterCoefficients two_cluster_coeffs(const ModelConfig& cfg) {
  const double n = static_cast<double>(cfg.n_blue());
  const double m = static_cast<double>(cfg.n_red());
  const double blue = total(cfg.cross.a_br()) * cfg.zeta_br / n;
  const double red = total(cfg.cross.a_rb()) * cfg.zeta_rb / m;
  TwoClusterCoefficients k;
  k.c = blue * std::cos(cfg.phi) + red * std::cos(cfg.psi);
  k.s = blue * std::sin(cfg.phi) - red * std::sin(cfg.psi);
  k.delta = cfg.mean_omega() - cfg.mean_nu();
  k.k = k.c * k.c + k.s * k.s - k.delta * k.delta;
  return k;
}

double centroid_rate(const TwoClusterCoefficients& k, double alpha) {
  return k.delta + k.s * std::cos(alpha) - k.c * std::sin(alpha);
}

std::optional<SteadyAngle> SteadyState::attracting() const {
  for (const auto& a : angles)
    if (a.attracting()) return a;
  return std::nullopt;
}

std::optional<SteadyAngle> SteadyState::repelling() const {
  for (const auto& a : angles)
    if (!a.attracting()) return a;
  return std::nullopt;
}

SteadyState alpha_steady(const TwoClusterCoefficients& coeffs) {
  const double r2 = coeffs.c * coeffs.c + coeffs.s * coeffs.s;
  if (r2 == 0.0) throw NoInteractionError("C = S = 0: the centroid angle is not determined");
  SteadyState out;
  out.coeffs = coeffs;
  out.real = coeffs.k >= 0.0;
  const double root = std::sqrt(std::abs(coeffs.k));
  for (int b = 0; b < 2; ++b) {
    const double sign = b == 0 ? 1.0 : -1.0;
    out.sin_roots[static_cast<std::size_t>(b)] =
        out.real ? Complex((coeffs.delta * coeffs.c + sign * coeffs.s * root) / r2, 0.0)
                 : Complex(coeffs.delta * coeffs.c, sign * coeffs.s * root) / r2;
  }
  if (!out.real) return out;

  for (const Complex& root_sin : out.sin_roots) {
    double s = root_sin.real();
    if (std::abs(s) > 1.0) {
      if (std::abs(s) - 1.0 > 1e-12) continue;
      s = std::copysign(1.0, s);
    }
    const double principal = std::asin(s);
    for (double candidate : {principal, pi - principal}) {
      const double alpha = wrap_angle(candidate);
      const double residual = std::abs(centroid_rate(coeffs, alpha));
      if (residual > residual_tol) continue;
      const bool duplicate = std::any_of(out.angles.begin(), out.angles.end(), [&](const SteadyAngle& a) {
        return std::abs(wrap_angle(a.alpha - alpha)) < 1e-9;
      });
      if (duplicate) continue;
      SteadyAngle a;
      a.alpha = alpha;
      a.residual = residual;
      a.slope = -coeffs.s * std::sin(alpha) - coeffs.c * std::cos(alpha);
      // the slope equals -(+/-) sqrt(K), which identifies the branch
      a.branch = a.slope <= 0.0 ? 1 : -1;
      out.angles.push_back(a);
    }
  }
  std::sort(out.angles.begin(), out.angles.end(),
            [](const SteadyAngle& x, const SteadyAngle& y) { return x.branch > y.branch; });
  return out;
}

AlphaOfT::AlphaOfT(const TwoClusterCoefficients& coeffs, double alpha0)
    : k_(coeffs), regime_(Regime::plateau), alpha0_(wrap_angle(alpha0)), a_(coeffs.delta - coeffs.s),
      root_(std::sqrt(std::abs(coeffs.k))), shift_(0.0) {
  const double scale = std::abs(coeffs.c) + std::abs(coeffs.s) + std::abs(coeffs.delta);
  if (std::abs(a_) <= 1e-12 * scale || scale == 0.0)
    throw NumericalError("delta - S vanishes: the closed form degenerates, integrate the scalar equation instead");
  const double ch = std::cos(alpha0_ / 2);
  const double sh = std::sin(alpha0_ / 2);
  const double r2 = coeffs.c * coeffs.c + coeffs.s * coeffs.s + coeffs.delta * coeffs.delta;

  if (std::abs(coeffs.k) <= 1e-12 * r2) {
    regime_ = Regime::critical;
    p0_ = a_ * sh - coeffs.c * ch;
    r0_ = a_ * ch;
    return;
  }
  if (coeffs.k < 0.0) {
    regime_ = Regime::periodic;
    shift_ = std::atan2(a_ * sh - coeffs.c * ch, root_ * ch);
    return;
  }
  const double num = coeffs.c * ch - a_ * sh;
  const double den = root_ * ch;
  if (std::abs(std::abs(num) - std::abs(den)) <= 1e-15 * (std::abs(num) + std::abs(den))) {
    regime_ = Regime::fixed;
  } else if (std::abs(num) < std::abs(den)) {
    shift_ = std::atanh(num / den);
  } else {
    coth_ = true;
    shift_ = std::atanh(den / num);
  }
}

double AlphaOfT::operator()(double t) const {
  const double c = k_.c;
  switch (regime_) {
  case Regime::fixed:
    return alpha0_;
  case Regime::critical: {
    const double r = r0_ - a_ * t * p0_ / 2;
    return wrap_angle(2.0 * std::atan2(c * r + a_ * p0_, a_ * r));
  }
  case Regime::periodic: {
    const double th = root_ * t / 2 + shift_;
    return wrap_angle(2.0 * std::atan2(c * std::cos(th) + root_ * std::sin(th), a_ * std::cos(th)));
  }
  case Regime::plateau:
    break;
  }
  const double th = std::tanh(root_ * t / 2 + shift_);
  if (coth_) return wrap_angle(2.0 * std::atan2(c * th - root_, a_ * th));
  return wrap_angle(2.0 * std::atan2(c - root_ * th, a_));
}

std::optional<double> AlphaOfT::period() const {
  if (regime_ != Regime::periodic) return std::nullopt;
  return 2.0 * pi / root_;
}

std::optional<double> AlphaOfT::limit() const {
  switch (regime_) {
  case Regime::periodic:
    return std::nullopt;
  case Regime::fixed:
    return alpha0_;
  case Regime::critical:
    return wrap_angle(2.0 * std::atan2(k_.c, a_));
  case Regime::plateau:
    break;
  }
  return wrap_angle(2.0 * std::atan2(k_.c - root_, a_));
}

AlphaOfT alpha_of_t(const TwoClusterCoefficients& coeffs, double alpha0) { return AlphaOfT(coeffs, alpha0); }

ScalarSeries alpha_ode_oracle(const TwoClusterCoefficients& coeffs, double alpha0, double t_end, double dt,
                              int sample_every) {
  if (!(dt > 0.0) || !(t_end > 0.0) || sample_every < 1) throw DimensionError("alpha_ode_oracle: bad step arguments");
  const long steps = std::max(1L, std::lround(t_end / dt));
  ScalarSeries out;
  out.times.reserve(static_cast<std::size_t>(steps / sample_every + 2));
  out.values.reserve(out.times.capacity());
  double x = alpha0;
  out.times.push_back(0.0);
  out.values.push_back(x);
  auto f = [&](double a) { return centroid_rate(coeffs, a); };
  for (long k = 1; k <= steps; ++k) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * dt * k1);
    const double k3 = f(x + 0.5 * dt * k2);
    const double k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (k % sample_every == 0) {
      out.times.push_back(static_cast<double>(k) * dt);
      out.values.push_back(x);
    }
  }
  return out;
}

std::pair<bool, bool> taylor_stability_two(const ModelConfig& cfg, double alpha) {
  return {std::cos(cfg.phi - alpha) >= 0.0, std::cos(cfg.psi + alpha) >= 0.0};
}

std::optional<Candidate> FixedPointReport::stable() const {
  for (const auto& c : candidates)
    if (c.stable()) return c;
  return std::nullopt;
}

bool FixedPointReport::disagreement() const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [](const Candidate& c) { return c.scalar_stable != c.spectral_stable; });
}

FixedPointReport analyze_two_cluster(const ModelConfig& cfg) {
  const SteadyState st = alpha_steady(two_cluster_coeffs(cfg));
  FixedPointReport out;
  out.ansatz = Ansatz::two_cluster;
  out.discriminant = st.coeffs.k;
  out.real = st.real;
  out.sin_roots = st.sin_roots;
  for (const auto& angle : st.angles) {
    Candidate c;
    c.branch = angle.branch;
    c.alpha = angle.alpha;
    c.residual = angle.residual;
    c.scalar_stable = angle.attracting();
    const auto [lambda, ok] = spectral_check(build_super_laplacian(cfg, angle.alpha).m);
    c.lambda1 = lambda;
    c.spectral_stable = ok;
    const auto [blue, red] = taylor_stability_two(cfg, angle.alpha);
    c.taylor = {blue, red};
    out.candidates.push_back(c);
    out.exists[angle.branch > 0 ? 0 : 1] = true;
  }
  return out;
}

double critical_phi(const ModelConfig& cfg, double psi, double lo, double hi, double tol) {
  auto k_of = [&](double phi) { return two_cluster_coeffs(cfg.with_frustrations(phi, psi)).k; };
  double flo = k_of(lo);
  double fhi = k_of(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw BracketError("K does not change sign on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = k_of(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) g[0] = lo;
  for (std::size_t i = 0; i < count && count > 1; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

PhiOptimum optimize_phi(const ModelConfig& cfg, double psi, const std::vector<double>& grid) {
  PhiOptimum out;
  std::optional<std::size_t> best;
  for (double phi : grid) {
    const ModelConfig c = cfg.with_frustrations(phi, psi);
    PhiScanRow row;
    row.phi = phi;
    const TwoClusterCoefficients coeffs = two_cluster_coeffs(c);
    row.k = coeffs.k;
    if (coeffs.c != 0.0 || coeffs.s != 0.0) {
      const FixedPointReport rep = analyze_two_cluster(c);
      if (const auto s = rep.stable()) {
        row.alpha_stable = s->alpha;
        row.lambda1_at_stable = s->lambda1.real();
      }
      for (const auto& cand : rep.candidates)
        if (!cand.scalar_stable) {
          row.alpha_unstable = cand.alpha;
          break;
        }
    }
    out.scan.push_back(row);
    if (row.alpha_stable && (!best || *row.alpha_stable > *out.scan[*best].alpha_stable)) best = out.scan.size() - 1;
  }
  if (!best) throw InfeasibleError("no stable real steady angle on the phi grid");
  out.phi = out.scan[*best].phi;
  out.alpha = *out.scan[*best].alpha_stable;
  bool lower_before = false, lower_after = false;
  for (std::size_t i = 0; i < out.scan.size(); ++i) {
    if (!out.scan[i].alpha_stable || i == *best) continue;
    if (*out.scan[i].alpha_stable < out.alpha) (i < *best ? lower_before : lower_after) = true;
  }
  out.turning_point = lower_before && lower_after;
  return out;
}

} // namespace kuraduel
