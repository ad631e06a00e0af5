#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsync/block_matrix.hpp"
#include "gsync/solver.hpp"
#include "gsync/stiefel.hpp"

namespace gsync {

/// S(Y) = Lhat - SBD(Lhat Y Y^*). Shares Lhat's off-diagonal blocks.
template <typename S>
BlockSymmetricMatrix<S> s_matrix(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y);

enum class Verdict { certified_global, soc_not_certified, not_critical };
std::string to_string(Verdict v);

struct CertifyOptions {
  /// First-order tolerance on ||S(Y) Y||_F, scaled by max(1, ||Lhat||) sqrt(rn).
  double first_order_tol = 1e-8;
  /// S(Y) counts as PSD when its smallest eigenvalue is >= -psd_slack ||Lhat||.
  double psd_slack = 1e-6;
  /// Singular values >= rank_scale sqrt(n) count toward the rank.
  double rank_scale = 1e-3;
  Index dense_limit = 2000;
  HessEigOptions hess;
  double lhat_norm = -1.0;
};

struct CertificateReport {
  double first_order_residual = 0.0;
  double first_order_tol_abs = 0.0;
  double min_tangent_hess_eig = 0.0;
  double s_min_eig = 0.0;
  Index numerical_rank = 0;
  double rank_tolerance = 0.0;
  Index p = 0;
  double lhat_norm = 0.0;
  double psd_slack_abs = 0.0;
  Verdict verdict = Verdict::not_critical;
};

/// Eigensolver failure during certification; carries what was computed.
class CertificationError : public NumericalError {
 public:
  CertificationError(const NumericalError& cause, CertificateReport partial)
      : NumericalError(cause.what(), cause.iterations(), cause.best_estimate()),
        partial_(partial) {}
  const CertificateReport& partial() const { return partial_; }

 private:
  CertificateReport partial_;
};

template <typename S>
CertificateReport certify(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                          const CertifyOptions& opt = {});

/// Singular values of the stacked rn x p matrix, descending.
template <typename S>
Eigen::VectorXd singular_values(const Mat<S>& y);

/// Number of singular values >= tol_scale sqrt(n).
template <typename S>
Index numerical_rank(const Mat<S>& y, Index r, double tol_scale = 1e-3);

struct Correlation {
  double raw = 0.0;
  double normalized = 0.0;
};

/// <Z Z^*, Y Y^*> = ||Z^* Y||_F^2 and its ratio to n^2 r.
template <typename S>
Correlation correlation(const Mat<S>& z, const Mat<S>& y);

template <typename S>
struct ResidualDecomposition {
  Mat<S> R;  // r x p
  Mat<S> W;  // rn x p, Z^* W = 0
};

/// Y = Z R + W with R = Z^* Y / n.
template <typename S>
ResidualDecomposition<S> residual_decomposition(const Mat<S>& z, const Mat<S>& y);

/// Closed-form landscape bounds. Fields depending on C_p are empty when
/// p <= r + 2.
struct TheoryBounds {
  Index p = 0, r = 0, n = 0;
  double lambda2 = 0.0;
  double delta_opnorm = 0.0;
  std::optional<double> c_p;
  std::optional<double> rank_bound;
  std::optional<bool> benign_condition_holds;
  std::optional<double> corr_lower_bound;
  bool large_p_condition_holds = false;
  double large_p_corr_lower = 0.0;
};

TheoryBounds theory_bounds(Index p, Index r, Index n, double lambda2, double delta_opnorm);

}  // namespace gsync
