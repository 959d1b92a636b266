#include <algorithm>
#include <cmath>

#include "kuraduel/eigs.hpp"
#include "kuraduel/errors.hpp"
#include "kuraduel/fixedpoint.hpp"
#include "kuraduel/linearized.hpp"

namespace kuraduel {

namespace {

double subset_mean(const Vector& v, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += v(i);
  return s / static_cast<double>(idx.size());
}

void require_partition(const ModelConfig& cfg, const RedPartition& p) {
  if (p.r1.empty() || p.r2.empty()) throw DegeneratePartitionError("three-cluster analysis needs nonempty R1 and R2");
  if (p.r1.size() + p.r2.size() != cfg.n_red()) throw DimensionError("partition does not cover the Red network");
}

} // namespace

ThreeClusterCoefficients three_cluster_coeffs(const ModelConfig& cfg, const RedPartition& p) {
  require_partition(cfg, p);
  if (p.d_br2 != 0 || p.d_r2b != 0) throw DimensionError("R2 must carry no cross links");
  const double link = cfg.sigma_r * p.d_r1r2;
  if (link == 0.0) throw NumericalError("sigma_r * d(R1,R2) = 0: the R1-R2 balance is undefined");

  const double n = static_cast<double>(cfg.n_blue());
  const double m = static_cast<double>(cfg.n_red());
  const double m1 = static_cast<double>(p.m1());
  const double m2 = static_cast<double>(p.m2());
  const double omega = cfg.mean_omega();
  const double nu1 = subset_mean(cfg.nu, p.r1);
  const double nu2 = subset_mean(cfg.nu, p.r2);
  const double blue = cfg.zeta_br * p.d_br1 / n;  // Red acting on Blue, per Blue node
  const double red = cfg.zeta_rb * p.d_r1b;       // Blue acting on R1, summed
  const double cp = std::cos(cfg.phi), sp = std::sin(cfg.phi);
  const double cs = std::cos(cfg.psi), ss = std::sin(cfg.psi);

  ThreeClusterCoefficients k;
  k.chi1 = omega - nu2 + (m1 / m2) * (omega - nu1);
  k.chi2 = m1 * (nu1 - omega) / link;
  k.c1 = m * blue * cp / m2 + red * cs / m2;
  k.s1 = m * blue * sp / m2 - red * ss / m2;
  k.c2 = (m1 * blue * cp + red * cs) / link;
  k.s2 = (m1 * blue * sp - red * ss) / link;
  k.j = k.c1 * k.c1 + k.s1 * k.s1 - k.chi1 * k.chi1;
  return k;
}

FragAngles frag_angles(const ThreeClusterCoefficients& k) {
  const double r2 = k.c1 * k.c1 + k.s1 * k.s1;
  if (r2 == 0.0) throw NoInteractionError("C1 = S1 = 0: alpha_BR1 is not determined");
  FragAngles out;
  out.coeffs = k;
  const bool real = k.j >= 0.0;
  const double root = std::sqrt(std::abs(k.j));
  for (int b = 0; b < 2; ++b) {
    const double sign = b == 0 ? 1.0 : -1.0;
    FragBranch& br = out.branches[static_cast<std::size_t>(b)];
    br.sign = b == 0 ? 1 : -1;
    br.real = real;
    const Complex w = real ? Complex(sign * root, 0.0) : Complex(0.0, sign * root);
    const Complex sin_a = (k.chi1 * k.c1 + k.s1 * w) / r2;
    const Complex cos_a = (-k.chi1 * k.s1 + k.c1 * w) / r2;
    br.sin_a_br1 = sin_a;
    br.sin_a_r1r2 = k.chi2 + k.c2 * sin_a - k.s2 * cos_a;
    if (!real) continue;
    br.a_br1 = std::atan2(sin_a.real(), cos_a.real());
    const double sb = br.sin_a_r1r2.real();
    br.exists = std::abs(sb) <= 1.0;
    if (br.exists) br.a_r1r2 = std::asin(sb);
  }
  return out;
}

std::array<double, 2> ReducedFragSystem::rate(double a, double b) const {
  const double ra = omega_bar - nu1_bar - k_br1 * std::sin(a - phi) - k_r1b * std::sin(a + psi) + k_12 * std::sin(b) -
                    k_br2 * std::sin(a + b - phi);
  const double rb = nu1_bar - nu2_bar - k_r2b * std::sin(a + b + psi) + k_r1b * std::sin(a + psi) -
                    (k_12 + k_21) * std::sin(b);
  return {ra, rb};
}

std::array<double, 4> ReducedFragSystem::jacobian(double a, double b) const {
  const double cab = std::cos(a + b - phi);
  const double cabp = std::cos(a + b + psi);
  return {-k_br1 * std::cos(a - phi) - k_r1b * std::cos(a + psi) - k_br2 * cab,
          k_12 * std::cos(b) - k_br2 * cab,
          -k_r2b * cabp + k_r1b * std::cos(a + psi),
          -k_r2b * cabp - (k_12 + k_21) * std::cos(b)};
}

bool ReducedFragSystem::attracting(double a, double b) const {
  const auto j = jacobian(a, b);
  const double trace = j[0] + j[3];
  const double det = j[0] * j[3] - j[1] * j[2];
  return trace < 0.0 && det > 0.0;
}

ReducedFragSystem reduced_frag_system(const ModelConfig& cfg, const RedPartition& p) {
  require_partition(cfg, p);
  const double n = static_cast<double>(cfg.n_blue());
  const double m1 = static_cast<double>(p.m1());
  const double m2 = static_cast<double>(p.m2());
  ReducedFragSystem s;
  s.omega_bar = cfg.mean_omega();
  s.nu1_bar = subset_mean(cfg.nu, p.r1);
  s.nu2_bar = subset_mean(cfg.nu, p.r2);
  s.k_br1 = cfg.zeta_br * p.d_br1 / n;
  s.k_br2 = cfg.zeta_br * p.d_br2 / n;
  s.k_r1b = cfg.zeta_rb * p.d_r1b / m1;
  s.k_r2b = cfg.zeta_rb * p.d_r2b / m2;
  s.k_12 = cfg.sigma_r * p.d_r1r2 / m1;
  s.k_21 = cfg.sigma_r * p.d_r1r2 / m2;
  s.phi = cfg.phi;
  s.psi = cfg.psi;
  return s;
}

FragSeries frag_centroid_ode_oracle(const ModelConfig& cfg, const RedPartition& partition, double a_br1_0,
                                    double a_r1r2_0, double t_end, double dt, int sample_every) {
  if (!(dt > 0.0) || !(t_end > 0.0) || sample_every < 1)
    throw DimensionError("frag_centroid_ode_oracle: bad step arguments");
  const ReducedFragSystem sys = reduced_frag_system(cfg, partition);
  const long steps = std::max(1L, std::lround(t_end / dt));
  FragSeries out;
  double a = a_br1_0, b = a_r1r2_0;
  out.times.push_back(0.0);
  out.a_br1.push_back(a);
  out.a_r1r2.push_back(b);
  for (long k = 1; k <= steps; ++k) {
    const auto k1 = sys.rate(a, b);
    const auto k2 = sys.rate(a + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1]);
    const auto k3 = sys.rate(a + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1]);
    const auto k4 = sys.rate(a + dt * k3[0], b + dt * k3[1]);
    a += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    b += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (k % sample_every == 0) {
      out.times.push_back(static_cast<double>(k) * dt);
      out.a_br1.push_back(a);
      out.a_r1r2.push_back(b);
    }
  }
  return out;
}

std::array<bool, 3> taylor_stability_three(const ModelConfig& cfg, const RedPartition& p, double a_br1,
                                           double a_r1r2) {
  const double cb = std::cos(a_r1r2);
  return {std::cos(cfg.phi - a_br1) >= 0.0, cb >= 0.0,
          cfg.zeta_rb * p.d_r1b * std::cos(cfg.psi + a_br1 + a_r1r2) >= -cfg.sigma_r * p.d_r1r2 * cb};
}

FixedPointReport analyze_three_cluster(const ModelConfig& cfg, const RedPartition& p) {
  const FragAngles fa = frag_angles(three_cluster_coeffs(cfg, p));
  const ReducedFragSystem sys = reduced_frag_system(cfg, p);
  FixedPointReport out;
  out.ansatz = Ansatz::three_cluster;
  out.discriminant = fa.coeffs.j;
  out.real = fa.coeffs.j >= 0.0;
  for (std::size_t b = 0; b < 2; ++b) {
    const FragBranch& br = fa.branches[b];
    out.sin_roots[b] = br.sin_a_br1;
    out.sin_r1r2[b] = br.sin_a_r1r2;
    out.exists[b] = br.exists;
    if (!br.exists) continue;
    const double a1 = *br.a_br1;
    for (double a12 : {*br.a_r1r2, wrap_angle(pi - *br.a_r1r2)}) {
      const auto r = sys.rate(a1, a12);
      const double residual = std::max(std::abs(r[0]), std::abs(r[1]));
      if (residual > 1e-10) continue;
      const bool duplicate = std::any_of(out.candidates.begin(), out.candidates.end(), [&](const Candidate& c) {
        return std::abs(wrap_angle(c.alpha - a1)) < 1e-9 && std::abs(wrap_angle(*c.alpha_r1r2 - a12)) < 1e-9;
      });
      if (duplicate) continue;
      Candidate c;
      c.branch = br.sign;
      c.alpha = a1;
      c.alpha_r1r2 = a12;
      c.residual = residual;
      c.scalar_stable = sys.attracting(a1, a12);
      const Spectrum s = eigs(build_frag_super_laplacian(cfg, p, a1, a12).m, EigOptions{false, true});
      c.lambda1 = lowest_nonzero_mode(s, 1).lambda;
      c.spectral_stable = c.lambda1.real() >= -1e-9 * s.norm;
      const auto t = taylor_stability_three(cfg, p, a1, a12);
      c.taylor = {t[0], t[1], t[2]};
      out.candidates.push_back(c);
    }
  }
  return out;
}

double fragmentation_margin(const ModelConfig& cfg, const RedPartition& p, double zeta) {
  const FragAngles fa = frag_angles(three_cluster_coeffs(cfg.with_cross_coupling(zeta), p));
  const FragBranch& plus = fa.branches[0];
  if (!plus.real) return 1.0;
  return std::abs(plus.sin_a_r1r2.real()) - 1.0;
}

double critical_zeta(const ModelConfig& cfg, const RedPartition& p, double lo, double hi, double tol) {
  double flo = fragmentation_margin(cfg, p, lo);
  const double fhi = fragmentation_margin(cfg, p, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw BracketError("|sin alpha_R1R2| - 1 does not change sign on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fragmentation_margin(cfg, p, mid);
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

} // namespace kuraduel
