#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kuraduel/graph.hpp"
#include "kuraduel/types.hpp"

namespace kuraduel {

/// Parameters of the two-population frustrated Kuramoto model.
struct ModelConfig {
  Graph blue;
  Graph red;
  CrossNetwork cross;
  double sigma_b = 0.0;  // intra-Blue coupling
  double sigma_r = 0.0;  // intra-Red coupling
  double zeta_br = 0.0;  // Red acting on Blue
  double zeta_rb = 0.0;  // Blue acting on Red
  double phi = 0.0;      // Blue frustration, in (-pi, pi]
  double psi = 0.0;      // Red frustration, in (-pi, pi]
  Vector omega;          // Blue natural frequencies, length N
  Vector nu;             // Red natural frequencies, length M

  std::size_t n_blue() const noexcept { return blue.size(); }
  std::size_t n_red() const noexcept { return red.size(); }
  std::size_t dimension() const noexcept { return blue.size() + red.size(); }

  double mean_omega() const { return omega.size() ? omega.mean() : 0.0; }
  double mean_nu() const { return nu.size() ? nu.mean() : 0.0; }

  /// Throws DimensionError / NumericalError when the invariants do not hold.
  void validate() const;
  /// Copy with both frustrations wrapped into (-pi, pi].
  ModelConfig with_frustrations(double phi_new, double psi_new) const;
  ModelConfig with_cross_coupling(double zeta) const;
};

/// Frequencies drawn uniformly on [low, high) from a seeded substream
/// (stream 0 for Blue, stream 1 for Red).
std::pair<Vector, Vector> draw_uniform_frequencies(std::size_t n_blue, std::size_t n_red, std::uint64_t seed,
                                                    double low = 0.0, double high = 1.0);

/// Unwrapped phases of both populations at time t.
struct PhaseState {
  Vector beta;
  Vector rho;
  double t = 0.0;

  static PhaseState zeros(std::size_t n_blue, std::size_t n_red);
  /// Uniform on (-pi, pi] under a seed.
  static PhaseState random(std::size_t n_blue, std::size_t n_red, std::uint64_t seed);
  Vector packed() const;
};

/// Vector field of the model with adjacency lists and per-call sine/cosine
/// tables, so each coupling term costs a multiply-add instead of a sin().
class BlueRedField {
public:
  explicit BlueRedField(const ModelConfig& cfg);

  std::size_t dimension() const noexcept { return n_blue_ + n_red_; }
  /// x = (beta, rho) packed; writes the phase velocities into dxdt.
  void operator()(std::span<const double> x, std::span<double> dxdt, double t = 0.0) const;

private:
  struct Link {
    int target;
    double weight;
  };
  std::size_t n_blue_ = 0;
  std::size_t n_red_ = 0;
  double sigma_b_, sigma_r_, zeta_br_, zeta_rb_;
  double sin_phi_, cos_phi_, sin_psi_, cos_psi_;
  std::vector<double> omega_, nu_;
  std::vector<std::vector<int>> blue_nb_, red_nb_;
  std::vector<std::vector<int>> br_, rb_;  // Blue i -> Red j links, Red i -> Blue j links
  mutable std::vector<double> sin_, cos_;
};

/// Phase velocities (beta_dot, rho_dot) packed, length N + M.
Vector rhs(const ModelConfig& cfg, const PhaseState& s);

struct Trajectory {
  std::vector<double> times;     // uniform grid t0 + k * sample_every * dt
  Matrix phases;                 // one row per sample, columns beta_0.. then rho_0..
  std::size_t n_blue = 0;
  std::size_t n_red = 0;
  double dt = 0.0;
  int sample_every = 1;
  std::string method = "rk4";
  std::uint64_t rhs_evaluations = 0;
  PhaseState final_state;

  std::size_t samples() const noexcept { return times.size(); }
  auto beta(std::size_t k) const { return phases.row(static_cast<Eigen::Index>(k)).head(static_cast<Eigen::Index>(n_blue)); }
  auto rho(std::size_t k) const { return phases.row(static_cast<Eigen::Index>(k)).tail(static_cast<Eigen::Index>(n_red)); }
};

/// Fixed-step RK4 from s0 to t_end. The step count is round((t_end - t0) / dt);
/// every sample_every-th step (and the initial state) is stored.
/// Throws DivergenceError at the first non-finite state.
Trajectory integrate(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt, int sample_every = 1);

/// Final state only; same stepping as integrate().
PhaseState advance(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt);

/// Empirical order from runs at dt, dt/2, dt/4: log2 of the ratio of
/// successive final-state differences. `exact` is set when the coarse
/// difference is already at rounding level (linear flows).
struct ConvergenceProbe {
  bool exact = false;
  double order = 0.0;
  double error_coarse = 0.0;
  double error_fine = 0.0;
};
ConvergenceProbe order_of_convergence_probe(const ModelConfig& cfg, const PhaseState& s0, double t_end,
                                            double dt = 0.02);

/// CSV with header `t,beta_0..,rho_0..`; `comment` lines are emitted first with a '#' prefix.
std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& comments = {});

} // namespace kuraduel
