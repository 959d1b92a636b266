#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kuraduel {

/// Classical fixed-step fourth-order Runge-Kutta. `System` is callable as
/// system(std::span<const double> x, std::span<double> dxdt, double t).
class Rk4Stepper {
public:
  explicit Rk4Stepper(std::size_t n) : n_(n), tmp_(n), k1_(n), k2_(n), k3_(n), k4_(n) {}

  template <class System>
  void step(System&& system, std::span<double> x, double t, double dt) {
    const double half = dt / 2;
    const double third = dt / 3;
    const double sixth = dt / 6;

    system(std::span<const double>(x.data(), n_), std::span<double>(k1_), t);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + half * k1_[i];

    system(std::span<const double>(tmp_), std::span<double>(k2_), t + half);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + half * k2_[i];

    system(std::span<const double>(tmp_), std::span<double>(k3_), t + half);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + dt * k3_[i];

    system(std::span<const double>(tmp_), std::span<double>(k4_), t + dt);
    for (std::size_t i = 0; i < n_; ++i) x[i] += sixth * k1_[i] + third * k2_[i] + third * k3_[i] + sixth * k4_[i];
  }

  static constexpr int evaluations_per_step = 4;

private:
  std::size_t n_;
  std::vector<double> tmp_, k1_, k2_, k3_, k4_;
};

} // namespace kuraduel
