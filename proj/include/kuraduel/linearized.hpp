#pragma once

#include <optional>
#include <vector>

#include "kuraduel/dynamics.hpp"
#include "kuraduel/eigs.hpp"
#include "kuraduel/graph.hpp"
#include "kuraduel/types.hpp"

namespace kuraduel {

/// Linearisation of the two-cluster ansatz at centroid angle alpha.
struct SuperLaplacian {
  Matrix m;
  double alpha = 0.0;
  /// Equal cross weights and mutually transposed cross blocks.
  bool symmetric_flag = false;
  double blue_weight = 0.0;  // zeta_br cos(phi - alpha)
  double red_weight = 0.0;   // zeta_rb cos(psi + alpha)
};

SuperLaplacian build_super_laplacian(const ModelConfig& cfg, double alpha);

/// (omega + zeta_br sin(phi - alpha) d_br, nu + zeta_rb sin(psi + alpha) d_rb).
Vector build_drift(const ModelConfig& cfg, double alpha);

/// Free operator blockdiag(sigma_b L_B, sigma_r L_R).
Matrix build_free_laplacian(const ModelConfig& cfg);

/// Linearisation of the three-cluster ansatz. Rows and columns are ordered
/// Blue, then partition.r1, then partition.r2.
struct FragSuperLaplacian {
  Matrix m;
  double alpha_br1 = 0.0;
  double alpha_r1r2 = 0.0;
  double alpha_br2 = 0.0;
  Vector v1, v2, v3;       // diagonals of the potential blocks
  std::vector<int> order;  // red node at each red row (r1 then r2)
};

FragSuperLaplacian build_frag_super_laplacian(const ModelConfig& cfg, const RedPartition& partition, double a_br1,
                                              double a_r1r2);
/// Same assembly with alpha_br2 supplied independently instead of a_br1 + a_r1r2.
FragSuperLaplacian build_frag_super_laplacian(const ModelConfig& cfg, const RedPartition& partition, double a_br1,
                                              double a_r1r2, double a_br2);
/// Drift of the three-cluster ansatz in the same (B, R1, R2) ordering.
Vector build_frag_drift(const ModelConfig& cfg, const RedPartition& partition, double a_br1, double a_r1r2);

struct Mode {
  Complex lambda;
  ComplexVector vector;  // empty when the spectrum has no vectors
  std::size_t index = 0; // position in the sorted spectrum
};

/// Smallest-real-part eigenvalue after dropping the `zero_modes` eigenvalues
/// closest to the origin, each of which must satisfy |lambda| < zero_tol.
/// Fewer small eigenvalues than `zero_modes` drops only those found.
/// zero_tol defaults to 1e-9 |m|_inf. Throws DegenerateSpectrumError when nothing is left.
Mode lowest_nonzero_mode(const Spectrum& s, std::size_t zero_modes = 1, std::optional<double> zero_tol = {});

struct StepProfile {
  double blue_mean = 0.0;
  double red_mean = 0.0;
  double blue_variance = 0.0;
  double red_variance = 0.0;
  double gap = 0.0;  // |blue_mean - red_mean|
  bool population_step = false;
};

/// Rotates the vector so its largest entry is real, then compares the Blue
/// block (first n_blue entries) with the Red block.
StepProfile eigenvector_step_profile(const ComplexVector& v, std::size_t n_blue);
StepProfile eigenvector_step_profile(const Vector& v, std::size_t n_blue);

struct ModeRatio {
  std::size_t index = 0;  // position in the free spectrum (Blue modes, then Red modes)
  Population population = Population::blue;
  double lambda = 0.0;    // free eigenvalue
  double projection = 0.0;
  double ratio = 0.0;     // |projection / lambda|
};

struct SmallnessReport {
  std::vector<ModeRatio> modes;
  std::vector<std::size_t> excluded;  // zero free eigenvalues
  double max_ratio() const;
};

/// |f_r / lambda_r| over the modes of the free operator, with
/// f_r = Omega . e_r. Omega is (omega, nu) unless `alpha` is given, in which
/// case the interacting drift at alpha is projected instead.
SmallnessReport smallness_criterion(const ModelConfig& cfg, std::optional<double> alpha = {});

} // namespace kuraduel
