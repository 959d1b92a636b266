#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kuraduel/errors.hpp"
#include "kuraduel/linearized.hpp"

namespace kuraduel {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t n) { return static_cast<Index>(n); }

Vector row_sums(const Matrix& a) { return a.rowwise().sum(); }

// Columns (or rows) of `a` selected by `keep`.
Matrix take_cols(const Matrix& a, const std::vector<int>& keep) {
  Matrix out(a.rows(), idx(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(idx(k)) = a.col(keep[k]);
  return out;
}

Matrix take_rows(const Matrix& a, const std::vector<int>& keep) {
  Matrix out(idx(keep.size()), a.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) out.row(idx(k)) = a.row(keep[k]);
  return out;
}

Matrix take(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  return take_cols(take_rows(a, rows), cols);
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

void check_partition(const ModelConfig& cfg, const RedPartition& p) {
  if (p.r1.empty() || p.r2.empty()) throw DegeneratePartitionError("three-cluster operator needs nonempty R1 and R2");
  if (p.r1.size() + p.r2.size() != cfg.n_red()) throw DimensionError("partition does not cover the Red network");
}

} // namespace

SuperLaplacian build_super_laplacian(const ModelConfig& cfg, double alpha) {
  const Index n = idx(cfg.n_blue());
  const Index m = idx(cfg.n_red());
  const Matrix& a_br = cfg.cross.a_br();
  const Matrix& a_rb = cfg.cross.a_rb();

  SuperLaplacian out;
  out.alpha = alpha;
  out.blue_weight = cfg.zeta_br * std::cos(cfg.phi - alpha);
  out.red_weight = cfg.zeta_rb * std::cos(cfg.psi + alpha);
  const double wb = out.blue_weight;
  const double wr = out.red_weight;

  out.m = Matrix::Zero(n + m, n + m);
  out.m.topLeftCorner(n, n) = cfg.sigma_b * laplacian(cfg.blue);
  out.m.topLeftCorner(n, n).diagonal() += wb * row_sums(a_br);
  out.m.topRightCorner(n, m) = -wb * a_br;
  out.m.bottomLeftCorner(m, n) = -wr * a_rb;
  out.m.bottomRightCorner(m, m) = cfg.sigma_r * laplacian(cfg.red);
  out.m.bottomRightCorner(m, m).diagonal() += wr * row_sums(a_rb);

  out.symmetric_flag = nearly_equal(wb, wr) && cfg.cross.is_symmetric();
  return out;
}

Vector build_drift(const ModelConfig& cfg, double alpha) {
  const Index n = idx(cfg.n_blue());
  const Index m = idx(cfg.n_red());
  Vector v(n + m);
  v.head(n) = cfg.omega + cfg.zeta_br * std::sin(cfg.phi - alpha) * row_sums(cfg.cross.a_br());
  v.tail(m) = cfg.nu + cfg.zeta_rb * std::sin(cfg.psi + alpha) * row_sums(cfg.cross.a_rb());
  return v;
}

Matrix build_free_laplacian(const ModelConfig& cfg) {
  const Index n = idx(cfg.n_blue());
  const Index m = idx(cfg.n_red());
  Matrix out = Matrix::Zero(n + m, n + m);
  out.topLeftCorner(n, n) = cfg.sigma_b * laplacian(cfg.blue);
  out.bottomRightCorner(m, m) = cfg.sigma_r * laplacian(cfg.red);
  return out;
}

FragSuperLaplacian build_frag_super_laplacian(const ModelConfig& cfg, const RedPartition& partition, double a_br1,
                                              double a_r1r2) {
  return build_frag_super_laplacian(cfg, partition, a_br1, a_r1r2, a_br1 + a_r1r2);
}

FragSuperLaplacian build_frag_super_laplacian(const ModelConfig& cfg, const RedPartition& p, double a_br1,
                                              double a_r1r2, double a_br2) {
  check_partition(cfg, p);
  const Index n = idx(cfg.n_blue());
  const Index m1 = idx(p.m1());
  const Index m2 = idx(p.m2());
  std::vector<int> blue(cfg.n_blue());
  std::iota(blue.begin(), blue.end(), 0);

  const Matrix a_br1m = take_cols(cfg.cross.a_br(), p.r1);
  const Matrix a_br2m = take_cols(cfg.cross.a_br(), p.r2);
  const Matrix a_r1b = take_rows(cfg.cross.a_rb(), p.r1);
  const Matrix a_r2b = take_rows(cfg.cross.a_rb(), p.r2);
  const Matrix& a_red = cfg.red.adjacency();
  const Matrix a_r1r2m = take(a_red, p.r1, p.r2);
  const Matrix a_r2r1m = take(a_red, p.r2, p.r1);
  const Matrix l_r1 = laplacian(cfg.red.induced(p.r1));
  const Matrix l_r2 = laplacian(cfg.red.induced(p.r2));

  const double w_b1 = cfg.zeta_br * std::cos(cfg.phi - a_br1);
  const double w_b2 = cfg.zeta_br * std::cos(cfg.phi - a_br2);
  const double w_1b = cfg.zeta_rb * std::cos(cfg.psi + a_br1);
  const double w_2b = cfg.zeta_rb * std::cos(cfg.psi + a_br2);
  const double w_12 = cfg.sigma_r * std::cos(a_r1r2);

  FragSuperLaplacian out;
  out.alpha_br1 = a_br1;
  out.alpha_r1r2 = a_r1r2;
  out.alpha_br2 = a_br2;
  out.order = p.r1;
  out.order.insert(out.order.end(), p.r2.begin(), p.r2.end());
  out.v1 = w_b1 * row_sums(a_br1m) + w_b2 * row_sums(a_br2m);
  out.v2 = w_1b * row_sums(a_r1b) + w_12 * row_sums(a_r1r2m);
  out.v3 = w_2b * row_sums(a_r2b) + w_12 * row_sums(a_r2r1m);

  Matrix& x = out.m;
  x = Matrix::Zero(n + m1 + m2, n + m1 + m2);
  const Index o1 = n;
  const Index o2 = n + m1;

  x.block(0, 0, n, n) = cfg.sigma_b * laplacian(cfg.blue);
  x.block(0, 0, n, n).diagonal() += out.v1;
  x.block(0, o1, n, m1) = -w_b1 * a_br1m;
  x.block(0, o2, n, m2) = -w_b2 * a_br2m;

  x.block(o1, 0, m1, n) = -w_1b * a_r1b;
  x.block(o1, o1, m1, m1) = cfg.sigma_r * l_r1;
  x.block(o1, o1, m1, m1).diagonal() += out.v2;
  x.block(o1, o2, m1, m2) = -w_12 * a_r1r2m;

  x.block(o2, 0, m2, n) = -w_2b * a_r2b;
  x.block(o2, o1, m2, m1) = -w_12 * a_r2r1m;
  x.block(o2, o2, m2, m2) = cfg.sigma_r * l_r2;
  x.block(o2, o2, m2, m2).diagonal() += out.v3;
  return out;
}

Vector build_frag_drift(const ModelConfig& cfg, const RedPartition& p, double a_br1, double a_r1r2) {
  check_partition(cfg, p);
  const double a_br2 = a_br1 + a_r1r2;
  const Index n = idx(cfg.n_blue());
  const Index m1 = idx(p.m1());
  const Index m2 = idx(p.m2());
  const Matrix& a_red = cfg.red.adjacency();

  Vector v(n + m1 + m2);
  v.head(n) = cfg.omega +
              cfg.zeta_br * (std::sin(cfg.phi - a_br1) * row_sums(take_cols(cfg.cross.a_br(), p.r1)) +
                             std::sin(cfg.phi - a_br2) * row_sums(take_cols(cfg.cross.a_br(), p.r2)));
  const Vector d_r1b = row_sums(take_rows(cfg.cross.a_rb(), p.r1));
  const Vector d_r2b = row_sums(take_rows(cfg.cross.a_rb(), p.r2));
  const Vector d_r1r2 = row_sums(take(a_red, p.r1, p.r2));
  const Vector d_r2r1 = row_sums(take(a_red, p.r2, p.r1));
  for (Index k = 0; k < m1; ++k)
    v(n + k) = cfg.nu(p.r1[static_cast<std::size_t>(k)]) + cfg.zeta_rb * std::sin(cfg.psi + a_br1) * d_r1b(k) -
               cfg.sigma_r * std::sin(a_r1r2) * d_r1r2(k);
  for (Index k = 0; k < m2; ++k)
    v(n + m1 + k) = cfg.nu(p.r2[static_cast<std::size_t>(k)]) + cfg.zeta_rb * std::sin(cfg.psi + a_br2) * d_r2b(k) +
                    cfg.sigma_r * std::sin(a_r1r2) * d_r2r1(k);
  return v;
}

Mode lowest_nonzero_mode(const Spectrum& s, std::size_t zero_modes, std::optional<double> zero_tol) {
  double tol = zero_tol.value_or(1e-9 * s.norm);
  if (!zero_tol && tol == 0.0) tol = std::numeric_limits<double>::min();
  std::vector<std::size_t> by_modulus(s.size());
  std::iota(by_modulus.begin(), by_modulus.end(), std::size_t{0});
  std::stable_sort(by_modulus.begin(), by_modulus.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(s.eigenvalues[a]) < std::abs(s.eigenvalues[b]);
  });
  std::vector<char> dropped(s.size(), 0);
  for (std::size_t k = 0; k < std::min(zero_modes, by_modulus.size()); ++k) {
    if (!(std::abs(s.eigenvalues[by_modulus[k]]) < tol)) break;
    dropped[by_modulus[k]] = 1;
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (dropped[k]) continue;
    Mode mode;
    mode.lambda = s.eigenvalues[k];
    mode.index = k;
    if (s.has_vectors()) mode.vector = s.eigenvectors.col(idx(k));
    return mode;
  }
  throw DegenerateSpectrumError("no eigenvalue left after removing zero modes");
}

StepProfile eigenvector_step_profile(const ComplexVector& v, std::size_t n_blue) {
  Index imax = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
  Vector re(v.size());
  if (v.size() > 0 && std::abs(v(imax)) > 0.0) {
    const Complex rot = std::conj(v(imax)) / std::abs(v(imax));
    re = (v * rot).real();
  } else {
    re = v.real();
  }
  return eigenvector_step_profile(re, n_blue);
}

StepProfile eigenvector_step_profile(const Vector& v, std::size_t n_blue) {
  const Index n = std::min(idx(n_blue), v.size());
  const Index m = v.size() - n;
  StepProfile out;
  auto stats = [](const auto& block, double& mean, double& var) {
    if (block.size() == 0) return;
    mean = block.mean();
    var = (block.array() - mean).square().mean();
  };
  stats(v.head(n), out.blue_mean, out.blue_variance);
  stats(v.tail(m), out.red_mean, out.red_variance);
  out.gap = std::abs(out.blue_mean - out.red_mean);
  const double spread = std::sqrt(std::max(out.blue_variance, out.red_variance));
  out.population_step = n > 0 && m > 0 && out.gap > 5.0 * spread;
  return out;
}

double SmallnessReport::max_ratio() const {
  double r = 0.0;
  for (const auto& mode : modes) r = std::max(r, mode.ratio);
  return r;
}

SmallnessReport smallness_criterion(const ModelConfig& cfg, std::optional<double> alpha) {
  const Vector omega = alpha ? build_drift(cfg, *alpha) : [&] {
    Vector v(idx(cfg.dimension()));
    v << cfg.omega, cfg.nu;
    return v;
  }();
  const Index n = idx(cfg.n_blue());
  const Index m = idx(cfg.n_red());

  SmallnessReport out;
  std::size_t index = 0;
  auto sector = [&](const Graph& g, double sigma, const Vector& f, Population pop) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma * laplacian(g));
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (Index r = 0; r < es.eigenvalues().size(); ++r, ++index) {
      const double lambda = es.eigenvalues()(r);
      if (std::abs(lambda) <= 1e-9 * scale) {
        out.excluded.push_back(index);
        continue;
      }
      const double proj = f.dot(es.eigenvectors().col(r));
      out.modes.push_back({index, pop, lambda, proj, std::abs(proj / lambda)});
    }
  };
  sector(cfg.blue, cfg.sigma_b, omega.head(n), Population::blue);
  sector(cfg.red, cfg.sigma_r, omega.tail(m), Population::red);
  return out;
}

} // namespace kuraduel
