#pragma once

#include <cstdint>

#include "kuraduel/dynamics.hpp"
#include "kuraduel/graph.hpp"

namespace kuraduel::testing {

/// Hierarchy-vs-random setup: Blue is the 21-node 4-ary tree, Red a connected
/// G(21, 0.4), leaves matched one-to-one, uniform [0,1) frequencies.
inline ModelConfig tree_vs_random(std::uint64_t graph_seed = 11, std::uint64_t freq_seed = 5, double phi = 0.0,
                                  double psi = 0.0) {
  ModelConfig cfg;
  cfg.blue = complete_kary_tree(4, 2);
  cfg.red = erdos_renyi(21, 0.4, graph_seed, true);
  cfg.cross = leaf_matching_cross(cfg.blue, cfg.red, true);
  cfg.sigma_b = 8.0;
  cfg.sigma_r = 0.5;
  cfg.zeta_br = 0.4;
  cfg.zeta_rb = 0.4;
  cfg.phi = wrap_angle(phi);
  cfg.psi = wrap_angle(psi);
  auto [omega, nu] = draw_uniform_frequencies(21, 21, freq_seed);
  cfg.omega = omega;
  cfg.nu = nu;
  return cfg;
}

/// The committed canonical instance (Red graph seed 1, frequency seed 5428).
inline ModelConfig canonical(double phi = 0.0, double psi = 0.0) { return tree_vs_random(1, 5428, phi, psi); }

/// One Blue and one Red node joined by a mutual cross link.
inline ModelConfig single_pair(double zeta_br, double zeta_rb, double omega, double nu, double phi = 0.0,
                               double psi = 0.0) {
  ModelConfig cfg;
  cfg.blue = Graph(1, {});
  cfg.red = Graph(1, {});
  Matrix a = Matrix::Ones(1, 1);
  cfg.cross = CrossNetwork::symmetric(a);
  cfg.zeta_br = zeta_br;
  cfg.zeta_rb = zeta_rb;
  cfg.phi = phi;
  cfg.psi = psi;
  cfg.omega = Vector::Constant(1, omega);
  cfg.nu = Vector::Constant(1, nu);
  return cfg;
}

/// Path graph 0-1-...-(n-1).
inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  return Graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return Graph(n, e);
}

} // namespace kuraduel::testing
