#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsync/block_matrix.hpp"
#include "gsync/stiefel.hpp"

namespace gsync {

/// <Lhat, Y Y^*> (real part; the imaginary part vanishes for Hermitian Lhat).
template <typename S>
double objective(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y);

/// f(Y + D) - f(Y) = 2 Re<Lhat Y, D> + <Lhat D, D>, given LY = Lhat Y. Exact for
/// the quadratic objective and accurate to the size of D rather than of f.
template <typename S>
double objective_change(const BlockSymmetricMatrix<S>& lhat, const Mat<S>& ly, const Mat<S>& d);

/// Riemannian gradient 2 P_T(Lhat Y) = 2 S(Y) Y.
template <typename S>
TangentVector<S> gradient(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y);

/// Riemannian Hessian of the objective at a fixed point Y:
/// V -> 2 P_T(S(Y) V) with S(Y) = Lhat - SBD(Lhat Y Y^*).
template <typename S>
class HessianOperator {
 public:
  HessianOperator(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y);
  /// Same, reusing a precomputed Lhat Y.
  HessianOperator(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y, const Mat<S>& ly);

  Mat<S> apply(const Mat<S>& v) const;
  /// 2 <S(Y) V, V>
  double quadratic(const Mat<S>& v) const;
  /// S(Y) V without the projection or the factor 2.
  Mat<S> s_apply(const Mat<S>& v) const;

  const StiefelPoint<S>& point() const { return y_; }
  /// Diagonal blocks of SBD(Lhat Y Y^*).
  const std::vector<Mat<S>>& sbd_blocks() const { return sbd_; }

 private:
  const BlockSymmetricMatrix<S>& lhat_;
  StiefelPoint<S> y_;
  std::vector<Mat<S>> sbd_;
};

template <typename S>
TangentVector<S> hess_vec(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                          const TangentVector<S>& v);
template <typename S>
double hess_quadratic(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                      const TangentVector<S>& v);

struct HessEigOptions {
  /// Residual tolerance, relative to ||Lhat||_op.
  double tol = 1e-6;
  /// Dense tangent-basis eigendecomposition up to this tangent dimension.
  Index dense_limit = 500;
  std::uint64_t seed = 0x4e55;
  /// ||Lhat||_op if known (<= 0: computed).
  double lhat_norm = -1.0;
};

template <typename S>
struct HessEig {
  double value = 0.0;
  TangentVector<S> vector;
  double residual = 0.0;
  long iterations = 0;
  bool dense = true;
};

/// Smallest eigenvalue of the Hessian restricted to T_Y.
template <typename S>
HessEig<S> min_hessian_eig(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                           const HessEigOptions& opt = {});

/// Orthonormal basis of T_{Y_i} for one r x p block, in the realified sense.
template <typename S>
std::vector<Mat<S>> tangent_block_basis(const Mat<S>& yi);

struct SolveOptions {
  long max_iters = 100000;
  /// Stationarity threshold, scaled by max(1, ||Lhat||) sqrt(rn).
  double grad_tol = 1e-10;
  /// Negative-curvature threshold, scaled by ||Lhat||.
  double hess_tol = 1e-8;
  /// First trial step (<= 0: 1 / ||Lhat||).
  double initial_step = -1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  /// Escape step (<= 0: min(1, 1 / ||Lhat||)).
  double escape_step = -1.0;
  HessEigOptions hess;
  bool record_trace = false;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SolveStatus { soc_point, max_iters, numerical_failure };
std::string to_string(SolveStatus s);

template <typename S>
struct SolveReport {
  StiefelPoint<S> y;
  double objective = 0.0;
  double grad_norm = 0.0;
  double min_hess_eig = 0.0;
  long iterations = 0;
  long escapes = 0;
  SolveStatus status = SolveStatus::max_iters;
  double lhat_norm = 0.0;
  double grad_tol_abs = 0.0;
  double hess_tol_abs = 0.0;
  /// Objective after every accepted step (record_trace only).
  std::vector<double> trace;
  std::string message;
};

/// Armijo-backtracking Riemannian gradient descent (Barzilai-Borwein trial
/// steps) with negative-curvature escape at approximate first-order points.
template <typename S>
SolveReport<S> solve(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& init,
                     const SolveOptions& opt = {});

enum class InitKind { random, spectral, given };
InitKind parse_init_kind(const std::string& s);

/// r eigenvectors of Lhat with smallest eigenvalues, rounded blockwise to
/// St(r, r) by polar projection and zero-padded to r x p.
template <typename S>
StiefelPoint<S> spectral_init(const BlockSymmetricMatrix<S>& lhat, Index p,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace gsync
