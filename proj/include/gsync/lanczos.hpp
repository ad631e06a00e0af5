#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gsync/types.hpp"

namespace gsync {

enum class Spectrum { smallest, largest };

struct LanczosOptions {
  int max_basis = 160;
  int max_restarts = 60;
  int check_every = 8;
  /// Absolute tolerance on ||A x - theta x||.
  double tol = 1e-10;
};

template <typename S>
struct EigPair {
  double value = 0.0;
  Vec<S> vector;
  double residual = 0.0;
  long iterations = 0;
};

/// Extremal eigenpair of an operator that is self-adjoint for the real inner
/// product Re<x, y>. Complex vectors are treated as elements of the realified
/// space, so real-linear (not complex-linear) operators are fine.
///
/// `constrain`, when set, is an orthogonal projector onto an invariant subspace
/// of the operator; the Krylov basis is kept inside it.
///
/// Full reorthogonalization with explicit restarts from the current Ritz
/// vector. Throws NumericalError carrying the best Ritz value on failure.
template <typename S>
EigPair<S> lanczos_extremal(const std::function<Vec<S>(const Vec<S>&)>& op,
                            Vec<S> start, Spectrum which,
                            const LanczosOptions& opt = {},
                            const std::function<void(Vec<S>&)>& constrain = {}) {
  const Index dim = start.size();
  if (constrain) constrain(start);
  double nrm = start.norm();
  if (!(nrm > 0.0)) throw NumericalError("lanczos: zero start vector");
  start /= nrm;

  const int max_basis = static_cast<int>(std::min<Index>(opt.max_basis, 2 * dim));
  long iterations = 0;
  double best = std::numeric_limits<double>::quiet_NaN();

  auto orthogonalize = [&](Vec<S>& w, const std::vector<Vec<S>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) w -= real_inner(v, w) * v;
  };

  Vec<S> x = start;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<Vec<S>> basis{x};
    std::vector<double> alpha;
    std::vector<double> beta;
    bool exhausted = false;

    for (int j = 0; j < max_basis; ++j) {
      Vec<S> w = op(basis[j]);
      ++iterations;
      alpha.push_back(real_inner(basis[j], w));
      if (constrain) constrain(w);
      orthogonalize(w, basis);
      const double b = w.norm();
      const int m = j + 1;

      const bool last = (m == max_basis);
      exhausted = b <= 1e-13 * std::max(1.0, std::abs(alpha.back()));
      if (exhausted || last || m % opt.check_every == 0) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
          T(k, k) = alpha[k];
          if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const int pick = which == Spectrum::smallest ? 0 : m - 1;
        const double theta = es.eigenvalues()(pick);
        const Eigen::VectorXd s = es.eigenvectors().col(pick);
        best = theta;
        const double est = exhausted ? 0.0 : b * std::abs(s(m - 1));
        if (est <= opt.tol || exhausted || last) {
          Vec<S> ritz = Vec<S>::Zero(dim);
          for (int k = 0; k < m; ++k) ritz += s(k) * basis[k];
          ritz /= ritz.norm();
          Vec<S> r = op(ritz);
          ++iterations;
          const double rq = real_inner(ritz, r);
          r -= rq * ritz;
          const double res = r.norm();
          if (res <= opt.tol) return {rq, ritz, res, iterations};
          x = ritz;
          best = rq;
          break;
        }
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
  }
  throw NumericalError("lanczos: no convergence", iterations, best);
}

}  // namespace gsync
