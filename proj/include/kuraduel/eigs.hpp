#pragma once

#include <vector>

#include "kuraduel/types.hpp"

namespace kuraduel {

/// Full spectrum of a real square matrix.
struct Spectrum {
  /// Ascending real part, ties broken by ascending imaginary part.
  std::vector<Complex> eigenvalues;
  /// Unit right eigenvectors as columns, matching `eigenvalues`; empty when
  /// only eigenvalues were requested.
  ComplexMatrix eigenvectors;
  /// max_k |A v_k - lambda_k v_k| (0 when no vectors were computed).
  double residual = 0.0;
  /// Infinity norm of the input.
  double norm = 0.0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  bool has_vectors() const noexcept { return eigenvectors.cols() > 0; }
};

struct EigOptions {
  bool compute_vectors = true;
  bool balance = true;
};

/// Balancing, Householder reduction to Hessenberg form, Francis double-shift
/// QR for the eigenvalues, inverse iteration for the eigenvectors.
/// Throws NumericalError when QR needs more than 30 n sweeps or the input is not finite.
Spectrum eigs(const Matrix& m, const EigOptions& options = {});

/// Eigenvalues only, in the same order eigs() would return them.
std::vector<Complex> eigenvalues(const Matrix& m);

namespace detail {
/// In-place scaling by powers of two that equalises row and column norms.
void balance(Matrix& a);
/// Upper Hessenberg matrix similar to `a`.
Matrix hessenberg(Matrix a);
/// Eigenvalues of an upper Hessenberg matrix (unordered).
std::vector<Complex> hessenberg_qr(Matrix h);
} // namespace detail

struct GershgorinDisc {
  double center;
  double radius;
};
/// Row discs; a diagnostic only (the leftmost point bounds, but does not locate, the spectrum).
std::vector<GershgorinDisc> gershgorin_discs(const Matrix& m);

} // namespace kuraduel
