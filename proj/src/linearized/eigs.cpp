#include "kuraduel/eigs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "kuraduel/errors.hpp"

namespace kuraduel {

namespace detail {

void balance(Matrix& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

Matrix hessenberg(Matrix a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index len = n - k - 1;
    Vector v = a.col(k).tail(len);
    const double xnorm = v.norm();
    if (xnorm == 0.0) continue;
    const double alpha = v(0) >= 0 ? -xnorm : xnorm;
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H <- P H P with P = I - 2 v v^T acting on rows/cols k+1..n-1
    auto rows = a.bottomRows(len);
    Eigen::RowVectorXd w = v.transpose() * rows;
    rows.noalias() -= 2.0 * v * w;
    auto cols = a.rightCols(len);
    Vector u = cols * v;
    cols.noalias() -= 2.0 * u * v.transpose();
    a(k + 1, k) = alpha;
    a.col(k).tail(len - 1).setZero();
  }
  return a;
}

std::vector<Complex> hessenberg_qr(Matrix a) {
  const int n = static_cast<int>(a.rows());
  std::vector<Complex> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  const double eps = std::numeric_limits<double>::epsilon();

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  const long cap = 30L * n;
  long total = 0;
  int nn = n - 1;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, x = 0, y = 0, z = 0, ww = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        w[static_cast<std::size_t>(nn)] = Complex(x + t, 0.0);
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        ww = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + ww;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            double lo = x + z;
            double hi = x + z;
            if (z != 0.0) hi = x - ww / z;
            w[static_cast<std::size_t>(nn - 1)] = Complex(lo, 0.0);
            w[static_cast<std::size_t>(nn)] = Complex(hi, 0.0);
          } else {
            w[static_cast<std::size_t>(nn)] = Complex(x + p, -z);
            w[static_cast<std::size_t>(nn - 1)] = Complex(x + p, z);
          }
          nn -= 2;
        } else {
          if (++total > cap) throw NumericalError("eigs: QR iteration did not converge");
          if (its > 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k + 1 != nn) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k + 1 != nn) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return w;
}

} // namespace detail

namespace {

bool spectral_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Deterministic, non-degenerate start vector for inverse iteration.
ComplexVector start_vector(Eigen::Index n, std::size_t k) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::sin(1.0 + 0.7548776662 * static_cast<double>(i + 1) * static_cast<double>(k + 3));
    const double b = std::cos(0.5698402910 * static_cast<double>(i + 2) + static_cast<double>(k));
    v(i) = Complex(1.0 + 0.5 * a, 0.25 * b);
  }
  return v.normalized();
}

// Largest-modulus component made real and positive.
void fix_phase(ComplexVector& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(imax)) / std::abs(v(imax));
}

struct InverseIteration {
  ComplexVector v;
  double residual;
};

InverseIteration inverse_iteration(const ComplexMatrix& a, Complex lambda, double scale, std::size_t k,
                                   const std::vector<ComplexVector>& against) {
  const Eigen::Index n = a.rows();
  // A tiny shift keeps the factorisation regular when lambda is exact.
  const double shift = 1e-10 * scale;
  ComplexMatrix b = a;
  b.diagonal().array() -= lambda + Complex(shift, 0.5 * shift);
  Eigen::PartialPivLU<ComplexMatrix> lu(b);
  ComplexVector v = start_vector(n, k);
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 6; ++it) {
    ComplexVector next = lu.solve(v);
    for (const auto& u : against) next -= u * u.dot(next);
    const double nn = next.norm();
    if (!std::isfinite(nn) || nn == 0.0) break;
    v = next / nn;
    res = (a * v - lambda * v).norm();
    if (res <= 1e-13 * scale) break;
  }
  return {v, res};
}

} // namespace

Spectrum eigs(const Matrix& m, const EigOptions& options) {
  if (m.rows() != m.cols()) throw DimensionError("eigs: matrix is not square");
  if (!m.allFinite()) throw NumericalError("eigs: matrix has non-finite entries");
  Spectrum out;
  const Eigen::Index n = m.rows();
  out.norm = n ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  if (n == 0) return out;

  Matrix work = m;
  if (options.balance) detail::balance(work);
  out.eigenvalues = detail::hessenberg_qr(detail::hessenberg(std::move(work)));
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), spectral_less);
  if (!options.compute_vectors) return out;

  const double scale = std::max(out.norm, std::numeric_limits<double>::min());
  const ComplexMatrix a = m.cast<Complex>();
  out.eigenvectors.resize(n, n);
  const double cluster_tol = 1e-8 * scale;
  double worst = 0.0;
  for (std::size_t k = 0; k < out.eigenvalues.size(); ++k) {
    const Complex lambda = out.eigenvalues[k];
    std::vector<ComplexVector> cluster;
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(out.eigenvalues[j] - lambda) <= cluster_tol)
        cluster.push_back(out.eigenvectors.col(static_cast<Eigen::Index>(j)));
    InverseIteration best = inverse_iteration(a, lambda, scale, k, cluster);
    if (!cluster.empty()) {
      // A defective eigenvalue has no independent partner; fall back to the plain iterate.
      InverseIteration plain = inverse_iteration(a, lambda, scale, k, {});
      if (!(best.residual <= 1e-10 * scale) && plain.residual < best.residual) best = plain;
    }
    fix_phase(best.v);
    out.eigenvectors.col(static_cast<Eigen::Index>(k)) = best.v;
    worst = std::max(worst, (a * best.v - lambda * best.v).norm());
  }
  out.residual = worst;
  return out;
}

std::vector<Complex> eigenvalues(const Matrix& m) { return eigs(m, EigOptions{false, true}).eigenvalues; }

std::vector<GershgorinDisc> gershgorin_discs(const Matrix& m) {
  std::vector<GershgorinDisc> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double radius = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
    out.push_back({m(i, i), radius});
  }
  return out;
}

} // namespace kuraduel
