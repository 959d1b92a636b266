#pragma once

#include <array>
#include <optional>
#include <vector>

#include "kuraduel/dynamics.hpp"
#include "kuraduel/graph.hpp"
#include "kuraduel/types.hpp"

namespace kuraduel {

// ---------------------------------------------------------------------------
// Two-cluster ansatz: alpha' = delta + S cos(alpha) - C sin(alpha)

struct TwoClusterCoefficients {
  double c = 0.0;
  double s = 0.0;
  double delta = 0.0;  // mean(omega) - mean(nu)
  double k = 0.0;      // c^2 + s^2 - delta^2
};

TwoClusterCoefficients two_cluster_coeffs(const ModelConfig& cfg);

/// alpha' of the centroid-angle equation.
double centroid_rate(const TwoClusterCoefficients& k, double alpha);
/// Same as centroid_rate; zero at a steady angle.
inline double steady_residual(const TwoClusterCoefficients& k, double alpha) { return centroid_rate(k, alpha); }

struct SteadyAngle {
  double alpha = 0.0;  // wrapped into (-pi, pi]
  int branch = 0;      // +1 or -1: sign in front of sqrt(K)
  double residual = 0.0;
  double slope = 0.0;  // d(alpha')/d(alpha); negative means attracting
  bool attracting() const { return slope < 0.0; }
};

struct SteadyState {
  TwoClusterCoefficients coeffs;
  bool real = false;                 // K >= 0
  std::array<Complex, 2> sin_roots;  // {+ root, - root}
  std::vector<SteadyAngle> angles;   // residual-validated, deduplicated
  /// Attracting angle, if any real one exists.
  std::optional<SteadyAngle> attracting() const;
  std::optional<SteadyAngle> repelling() const;
};

/// Both roots for sin(alpha); each real root in [-1, 1] contributes the arcsin
/// candidates a and pi - a, kept only if the steady residual is <= 1e-10.
/// Throws NoInteractionError when C = S = 0.
SteadyState alpha_steady(const TwoClusterCoefficients& coeffs);

/// Closed-form alpha(t) through the substitution u = tan(alpha/2).
class AlphaOfT {
public:
  enum class Regime { plateau, periodic, critical, fixed };

  AlphaOfT(const TwoClusterCoefficients& coeffs, double alpha0);

  /// Wrapped into (-pi, pi].
  double operator()(double t) const;
  Regime regime() const noexcept { return regime_; }
  /// 2 pi / sqrt(-K) when K < 0.
  std::optional<double> period() const;
  /// Large-time limit when K >= 0.
  std::optional<double> limit() const;

private:
  TwoClusterCoefficients k_;
  Regime regime_;
  double alpha0_;
  double a_;      // delta - S
  double root_;   // sqrt(|K|)
  double shift_;  // integration constant
  bool coth_ = false;
  double p0_ = 0.0, r0_ = 0.0;  // critical-regime initial data
};

/// Throws NumericalError when delta - S vanishes (the substitution degenerates;
/// use alpha_ode_oracle instead).
AlphaOfT alpha_of_t(const TwoClusterCoefficients& coeffs, double alpha0);

struct ScalarSeries {
  std::vector<double> times;
  std::vector<double> values;  // unwrapped
};

/// RK4 on the scalar centroid equation.
ScalarSeries alpha_ode_oracle(const TwoClusterCoefficients& coeffs, double alpha0, double t_end, double dt = 1e-3,
                              int sample_every = 1);

/// (cos(phi - alpha) >= 0, cos(psi + alpha) >= 0).
std::pair<bool, bool> taylor_stability_two(const ModelConfig& cfg, double alpha);

enum class Ansatz { two_cluster, three_cluster };

struct Candidate {
  int branch = 0;
  double alpha = 0.0;                 // alpha, or alpha_BR1 for three clusters
  std::optional<double> alpha_r1r2;   // three clusters only
  double residual = 0.0;
  bool scalar_stable = false;         // derivative test / reduced Jacobian test
  Complex lambda1;                    // lowest nonzero eigenvalue of the linearisation
  bool spectral_stable = false;       // Re lambda1 >= -1e-9 |L|
  std::vector<bool> taylor;           // the positivity inequalities
  bool stable() const { return scalar_stable && spectral_stable; }
};

struct FixedPointReport {
  Ansatz ansatz = Ansatz::two_cluster;
  double discriminant = 0.0;          // K or J
  bool real = false;
  std::array<Complex, 2> sin_roots;   // {+, -} roots for sin(alpha) or sin(alpha_BR1)
  std::array<Complex, 2> sin_r1r2;    // three clusters: paired sin(alpha_R1R2)
  std::array<bool, 2> exists{false, false};  // real and |sin| <= 1 for every angle of the branch
  std::vector<Candidate> candidates;
  /// Scalar and spectrally stable candidate, if exactly one branch qualifies first.
  std::optional<Candidate> stable() const;
  /// True when the scalar and spectral tests disagree on some candidate.
  bool disagreement() const;
};

FixedPointReport analyze_two_cluster(const ModelConfig& cfg);

/// Root of K(phi) = 0 with psi held fixed, by bisection to |dphi| <= tol.
/// Throws BracketError when K has the same strict sign at both ends.
double critical_phi(const ModelConfig& cfg, double psi, double lo, double hi, double tol = 1e-6);

struct PhiScanRow {
  double phi = 0.0;
  std::optional<double> alpha_stable;
  std::optional<double> alpha_unstable;
  double k = 0.0;
  std::optional<double> lambda1_at_stable;
};

struct PhiOptimum {
  double phi = 0.0;
  double alpha = 0.0;
  std::vector<PhiScanRow> scan;
  /// alpha increases up to the optimum and decreases after it (within the feasible part of the grid).
  bool turning_point = false;
};

/// Scans phi over `grid` (psi fixed) and maximises the stable steady angle.
/// Throws InfeasibleError when no grid point has a stable real solution.
PhiOptimum optimize_phi(const ModelConfig& cfg, double psi, const std::vector<double>& grid);

/// Uniform grid of `count` points on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

// ---------------------------------------------------------------------------
// Three-cluster ansatz (Blue, cross-linked Red part R1, unlinked Red part R2)

struct ThreeClusterCoefficients {
  double chi1 = 0.0, chi2 = 0.0;
  double c1 = 0.0, s1 = 0.0;
  double c2 = 0.0, s2 = 0.0;
  double j = 0.0;  // c1^2 + s1^2 - chi1^2
};

/// Throws DegeneratePartitionError for an empty side, NumericalError when
/// sigma_r * d(R1,R2) = 0 and DimensionError when R2 carries cross links.
ThreeClusterCoefficients three_cluster_coeffs(const ModelConfig& cfg, const RedPartition& partition);

struct FragBranch {
  int sign = 0;
  Complex sin_a_br1;
  Complex sin_a_r1r2;
  bool real = false;     // J >= 0
  bool exists = false;   // real and |sin a_r1r2| <= 1
  std::optional<double> a_br1;    // angle paired with the root, wrapped
  std::optional<double> a_r1r2;   // principal arcsin (cos >= 0)
};

struct FragAngles {
  ThreeClusterCoefficients coeffs;
  std::array<FragBranch, 2> branches;  // {+, -}
};

/// Throws NoInteractionError when C1 = S1 = 0.
FragAngles frag_angles(const ThreeClusterCoefficients& coeffs);

/// Reduced two-angle centroid system (a = alpha_BR1, b = alpha_R1R2).
struct ReducedFragSystem {
  double omega_bar = 0.0, nu1_bar = 0.0, nu2_bar = 0.0;
  double k_br1 = 0.0;  // zeta_br d(B,R1) / N
  double k_br2 = 0.0;  // zeta_br d(B,R2) / N
  double k_r1b = 0.0;  // zeta_rb d(R1,B) / M1
  double k_r2b = 0.0;  // zeta_rb d(R2,B) / M2
  double k_12 = 0.0;   // sigma_r d(R1,R2) / M1
  double k_21 = 0.0;   // sigma_r d(R1,R2) / M2
  double phi = 0.0, psi = 0.0;

  std::array<double, 2> rate(double a, double b) const;
  /// Row-major d(rate)/d(a, b).
  std::array<double, 4> jacobian(double a, double b) const;
  /// Both Jacobian eigenvalues have negative real part.
  bool attracting(double a, double b) const;
};

ReducedFragSystem reduced_frag_system(const ModelConfig& cfg, const RedPartition& partition);

struct FragSeries {
  std::vector<double> times;
  std::vector<double> a_br1;    // unwrapped
  std::vector<double> a_r1r2;   // unwrapped
};

FragSeries frag_centroid_ode_oracle(const ModelConfig& cfg, const RedPartition& partition, double a_br1_0,
                                    double a_r1r2_0, double t_end, double dt = 1e-3, int sample_every = 1);

/// (cos(phi - a) >= 0, cos(b) >= 0,
///  zeta_rb d(R1,B) cos(psi + a + b) >= -sigma_r d(R1,R2) cos(b)).
std::array<bool, 3> taylor_stability_three(const ModelConfig& cfg, const RedPartition& partition, double a_br1,
                                           double a_r1r2);

FixedPointReport analyze_three_cluster(const ModelConfig& cfg, const RedPartition& partition);

/// Cross coupling zeta = zeta_br = zeta_rb at which the + branch of sin(alpha_R1R2)
/// leaves [-1, 1] (or J turns negative), by bisection to tol.
/// Throws BracketError when the end points do not straddle the onset.
double critical_zeta(const ModelConfig& cfg, const RedPartition& partition, double lo, double hi,
                     double tol = 1e-6);

/// |sin alpha_R1R2| - 1 on the + branch at coupling zeta (+1 when J < 0).
double fragmentation_margin(const ModelConfig& cfg, const RedPartition& partition, double zeta);

} // namespace kuraduel
