#include "kuraduel/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kuraduel/errors.hpp"
#include "kuraduel/format.hpp"
#include "kuraduel/random.hpp"
#include "kuraduel/rk4.hpp"

namespace kuraduel {

namespace {

bool in_half_open_circle(double a) { return a > -pi && a <= pi; }

} // namespace

void ModelConfig::validate() const {
  const auto n = static_cast<Eigen::Index>(blue.size());
  const auto m = static_cast<Eigen::Index>(red.size());
  if (omega.size() != n) throw DimensionError("omega has " + std::to_string(omega.size()) + " entries, Blue has " + std::to_string(n));
  if (nu.size() != m) throw DimensionError("nu has " + std::to_string(nu.size()) + " entries, Red has " + std::to_string(m));
  if (cross.a_br().rows() != n || cross.a_br().cols() != m)
    throw DimensionError("cross network is " + std::to_string(cross.a_br().rows()) + "x" +
                         std::to_string(cross.a_br().cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(m));
  for (double c : {sigma_b, sigma_r, zeta_br, zeta_rb})
    if (!std::isfinite(c)) throw NumericalError("coupling constants must be finite");
  if (!omega.allFinite() || !nu.allFinite()) throw NumericalError("natural frequencies must be finite");
  if (!in_half_open_circle(phi) || !in_half_open_circle(psi))
    throw DimensionError("frustrations must lie in (-pi, pi]");
}

ModelConfig ModelConfig::with_frustrations(double phi_new, double psi_new) const {
  ModelConfig out = *this;
  out.phi = wrap_angle(phi_new);
  out.psi = wrap_angle(psi_new);
  return out;
}

ModelConfig ModelConfig::with_cross_coupling(double zeta) const {
  ModelConfig out = *this;
  out.zeta_br = zeta;
  out.zeta_rb = zeta;
  return out;
}

std::pair<Vector, Vector> draw_uniform_frequencies(std::size_t n_blue, std::size_t n_red, std::uint64_t seed,
                                                    double low, double high) {
  auto draw = [&](std::size_t n, std::uint64_t stream) {
    auto rng = substream(seed, stream);
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = low + (high - low) * unit_uniform(rng);
    return v;
  };
  return {draw(n_blue, 0), draw(n_red, 1)};
}

PhaseState PhaseState::zeros(std::size_t n_blue, std::size_t n_red) {
  return {Vector::Zero(static_cast<Eigen::Index>(n_blue)), Vector::Zero(static_cast<Eigen::Index>(n_red)), 0.0};
}

PhaseState PhaseState::random(std::size_t n_blue, std::size_t n_red, std::uint64_t seed) {
  auto rng = substream(seed, 2);
  PhaseState s = zeros(n_blue, n_red);
  // 1 - u lies in (0, 1], so the phase lies in (-pi, pi].
  for (Eigen::Index i = 0; i < s.beta.size(); ++i) s.beta(i) = pi - 2.0 * pi * unit_uniform(rng);
  for (Eigen::Index i = 0; i < s.rho.size(); ++i) s.rho(i) = pi - 2.0 * pi * unit_uniform(rng);
  return s;
}

Vector PhaseState::packed() const {
  Vector x(beta.size() + rho.size());
  x << beta, rho;
  return x;
}

BlueRedField::BlueRedField(const ModelConfig& cfg)
    : n_blue_(cfg.n_blue()), n_red_(cfg.n_red()), sigma_b_(cfg.sigma_b), sigma_r_(cfg.sigma_r),
      zeta_br_(cfg.zeta_br), zeta_rb_(cfg.zeta_rb), sin_phi_(std::sin(cfg.phi)), cos_phi_(std::cos(cfg.phi)),
      sin_psi_(std::sin(cfg.psi)), cos_psi_(std::cos(cfg.psi)), omega_(cfg.omega.data(), cfg.omega.data() + cfg.omega.size()),
      nu_(cfg.nu.data(), cfg.nu.data() + cfg.nu.size()), blue_nb_(n_blue_), red_nb_(n_red_), br_(n_blue_),
      rb_(n_red_), sin_(n_blue_ + n_red_), cos_(n_blue_ + n_red_) {
  cfg.validate();
  for (std::size_t i = 0; i < n_blue_; ++i) blue_nb_[i] = cfg.blue.neighbours(static_cast<int>(i));
  for (std::size_t i = 0; i < n_red_; ++i) red_nb_[i] = cfg.red.neighbours(static_cast<int>(i));
  const Matrix& a_br = cfg.cross.a_br();
  const Matrix& a_rb = cfg.cross.a_rb();
  for (Eigen::Index i = 0; i < a_br.rows(); ++i)
    for (Eigen::Index j = 0; j < a_br.cols(); ++j)
      if (a_br(i, j) != 0.0) br_[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
  for (Eigen::Index i = 0; i < a_rb.rows(); ++i)
    for (Eigen::Index j = 0; j < a_rb.cols(); ++j)
      if (a_rb(i, j) != 0.0) rb_[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
}

void BlueRedField::operator()(std::span<const double> x, std::span<double> dxdt, double) const {
  const std::size_t dim = n_blue_ + n_red_;
  for (std::size_t k = 0; k < dim; ++k) {
    sin_[k] = std::sin(x[k]);
    cos_[k] = std::cos(x[k]);
  }
  const double* sb = sin_.data();
  const double* cb = cos_.data();
  const double* sr = sin_.data() + n_blue_;
  const double* cr = cos_.data() + n_blue_;

  // sin(theta_j - theta_i) = s_j c_i - c_j s_i; the frustrated terms first rotate
  // the partner phase by phi (or psi).
  for (std::size_t i = 0; i < n_blue_; ++i) {
    double s_in = 0.0, c_in = 0.0;
    for (int j : blue_nb_[i]) {
      s_in += sb[j];
      c_in += cb[j];
    }
    double s_x = 0.0, c_x = 0.0;
    for (int j : br_[i]) {
      s_x += sr[j] * cos_phi_ + cr[j] * sin_phi_;
      c_x += cr[j] * cos_phi_ - sr[j] * sin_phi_;
    }
    dxdt[i] = omega_[i] + sigma_b_ * (s_in * cb[i] - c_in * sb[i]) + zeta_br_ * (s_x * cb[i] - c_x * sb[i]);
  }
  for (std::size_t i = 0; i < n_red_; ++i) {
    double s_in = 0.0, c_in = 0.0;
    for (int j : red_nb_[i]) {
      s_in += sr[j];
      c_in += cr[j];
    }
    double s_x = 0.0, c_x = 0.0;
    for (int j : rb_[i]) {
      s_x += sb[j] * cos_psi_ + cb[j] * sin_psi_;
      c_x += cb[j] * cos_psi_ - sb[j] * sin_psi_;
    }
    dxdt[n_blue_ + i] = nu_[i] + sigma_r_ * (s_in * cr[i] - c_in * sr[i]) + zeta_rb_ * (s_x * cr[i] - c_x * sr[i]);
  }
}

Vector rhs(const ModelConfig& cfg, const PhaseState& s) {
  BlueRedField field(cfg);
  if (s.beta.size() != static_cast<Eigen::Index>(cfg.n_blue()) || s.rho.size() != static_cast<Eigen::Index>(cfg.n_red()))
    throw DimensionError("phase state does not match the model dimensions");
  const Vector x = s.packed();
  Vector v(x.size());
  field(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(v.data(), static_cast<std::size_t>(v.size())), s.t);
  return v;
}

namespace {

long step_count(double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw DimensionError("step size must be positive");
  if (!(t_end > t0)) throw DimensionError("end time must exceed the initial time");
  const double steps = (t_end - t0) / dt;
  const long n = std::lround(steps);
  return n < 1 ? 1 : n;
}

template <class Observer>
PhaseState run_rk4(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt, Observer&& observe) {
  BlueRedField field(cfg);
  if (s0.beta.size() != static_cast<Eigen::Index>(cfg.n_blue()) || s0.rho.size() != static_cast<Eigen::Index>(cfg.n_red()))
    throw DimensionError("initial state does not match the model dimensions");
  const long n_steps = step_count(s0.t, t_end, dt);
  Vector x = s0.packed();
  std::span<double> xs(x.data(), static_cast<std::size_t>(x.size()));
  Rk4Stepper stepper(xs.size());
  observe(0L, s0.t, x);
  for (long k = 0; k < n_steps; ++k) {
    const double t = s0.t + static_cast<double>(k) * dt;
    stepper.step(field, xs, t, dt);
    if (!x.allFinite()) throw DivergenceError(t + dt);
    observe(k + 1, s0.t + static_cast<double>(k + 1) * dt, x);
  }
  PhaseState out;
  out.beta = x.head(s0.beta.size());
  out.rho = x.tail(s0.rho.size());
  out.t = s0.t + static_cast<double>(n_steps) * dt;
  return out;
}

} // namespace

Trajectory integrate(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt, int sample_every) {
  if (sample_every < 1) throw DimensionError("sample_every must be at least 1");
  const long n_steps = step_count(s0.t, t_end, dt);
  const long n_samples = n_steps / sample_every + 1;
  Trajectory traj;
  traj.n_blue = cfg.n_blue();
  traj.n_red = cfg.n_red();
  traj.dt = dt;
  traj.sample_every = sample_every;
  traj.times.reserve(static_cast<std::size_t>(n_samples));
  traj.phases.resize(n_samples, static_cast<Eigen::Index>(cfg.dimension()));
  Eigen::Index row = 0;
  traj.final_state = run_rk4(cfg, s0, t_end, dt, [&](long k, double t, const Vector& x) {
    if (k % sample_every != 0) return;
    traj.times.push_back(t);
    traj.phases.row(row++) = x.transpose();
  });
  traj.rhs_evaluations = static_cast<std::uint64_t>(n_steps) * Rk4Stepper::evaluations_per_step;
  return traj;
}

PhaseState advance(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt) {
  return run_rk4(cfg, s0, t_end, dt, [](long, double, const Vector&) {});
}

ConvergenceProbe order_of_convergence_probe(const ModelConfig& cfg, const PhaseState& s0, double t_end, double dt) {
  const Vector x1 = advance(cfg, s0, t_end, dt).packed();
  const Vector x2 = advance(cfg, s0, t_end, dt / 2).packed();
  const Vector x4 = advance(cfg, s0, t_end, dt / 4).packed();
  ConvergenceProbe probe;
  probe.error_coarse = (x1 - x2).lpNorm<Eigen::Infinity>();
  probe.error_fine = (x2 - x4).lpNorm<Eigen::Infinity>();
  // Worst-case rounding accumulated over the finest run sets the floor below
  // which the coarse difference carries no truncation signal.
  const double scale = 1.0 + x4.lpNorm<Eigen::Infinity>();
  const double steps = 4.0 * std::max(1.0, std::round((t_end - s0.t) / dt));
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * scale * steps;
  if (probe.error_coarse <= floor || probe.error_fine == 0.0) {
    probe.exact = true;
    return probe;
  }
  probe.order = std::log2(probe.error_coarse / probe.error_fine);
  return probe;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << '\n';
  out << 't';
  for (std::size_t i = 0; i < traj.n_blue; ++i) out << ",beta_" << i;
  for (std::size_t i = 0; i < traj.n_red; ++i) out << ",rho_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    out << format_double(traj.times[k]);
    for (Eigen::Index c = 0; c < traj.phases.cols(); ++c)
      out << ',' << format_double(traj.phases(static_cast<Eigen::Index>(k), c));
    out << '\n';
  }
  return out.str();
}

} // namespace kuraduel
