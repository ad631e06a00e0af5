#include "gsync/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "gsync/kernels.hpp"
#include "gsync/lanczos.hpp"

namespace gsync {

namespace {

template <typename S>
std::vector<Mat<S>> hermitian_parts(std::vector<Mat<S>> blocks) {
  for (auto& b : blocks) b = ((b + b.adjoint()) * 0.5).eval();
  return blocks;
}

// Realified coordinates of an r x p block.
template <typename S>
Eigen::VectorXd realify(const Mat<S>& m) {
  if constexpr (is_complex<S>::value) {
    Eigen::VectorXd v(2 * m.size());
    for (Index k = 0; k < m.size(); ++k) {
      v(2 * k) = m.data()[k].real();
      v(2 * k + 1) = m.data()[k].imag();
    }
    return v;
  } else {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  }
}

template <typename S>
Mat<S> unrealify(const Eigen::VectorXd& v, Index rows, Index cols) {
  Mat<S> m(rows, cols);
  if constexpr (is_complex<S>::value) {
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = S(v(2 * k), v(2 * k + 1));
  } else {
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = v(k);
  }
  return m;
}

// Change of the Lagrangian <Lhat, Y Y^*> - sum_i tr(Lam_i (Y_i Y_i^* - I)) with
// Lam = SBD(Lhat Y Y^*) frozen at Y, for a move Y -> Y + D:
//   2 Re<S(Y) Y, D> + <Lhat D, D> - sum_i tr(Lam_i D_i D_i^*).
// On feasible points it equals f(Y + D) - f(Y), but the normal part of Lhat Y
// never meets the rounding in D, so it stays accurate near stationarity.
template <typename S>
double lagrangian_change(const Mat<S>& half_grad, const std::vector<Mat<S>>& lam, const Mat<S>& ld,
                         const Mat<S>& d, Index r) {
  double out = 2.0 * real_inner(half_grad, d) + real_inner(ld, d);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const auto di = d.middleRows(Index(i) * r, r);
    out -= real_inner(Mat<S>(lam[i] * di), Mat<S>(di));
  }
  return out;
}

}  // namespace

template <typename S>
double objective(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y) {
  return real_inner(lhat.apply(y.matrix()), y.matrix());
}

template <typename S>
double objective_change(const BlockSymmetricMatrix<S>& lhat, const Mat<S>& ly, const Mat<S>& d) {
  return 2.0 * real_inner(ly, d) + real_inner(lhat.apply(d), d);
}

template <typename S>
TangentVector<S> gradient(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y) {
  Mat<S> g = kernels::project_tangent(y.matrix(), lhat.apply(y.matrix()), y.r());
  g *= 2.0;
  return TangentVector<S>(std::move(g), y.r());
}

template <typename S>
HessianOperator<S>::HessianOperator(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y)
    : HessianOperator(lhat, y, lhat.apply(y.matrix())) {}

template <typename S>
HessianOperator<S>::HessianOperator(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                                    const Mat<S>& ly)
    : lhat_(lhat), y_(y), sbd_(hermitian_parts(kernels::diag_products(ly, y.matrix(), y.r()))) {}

template <typename S>
Mat<S> HessianOperator<S>::s_apply(const Mat<S>& v) const {
  Mat<S> out = lhat_.apply(v);
  const Index r = y_.r();
  const Index n = y_.n();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out.middleRows(i * r, r) -= sbd_[i] * v.middleRows(i * r, r);
  return out;
}

template <typename S>
Mat<S> HessianOperator<S>::apply(const Mat<S>& v) const {
  Mat<S> out = kernels::project_tangent(y_.matrix(), s_apply(v), y_.r());
  out *= 2.0;
  return out;
}

template <typename S>
double HessianOperator<S>::quadratic(const Mat<S>& v) const {
  return 2.0 * real_inner(s_apply(v), v);
}

template <typename S>
TangentVector<S> hess_vec(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                          const TangentVector<S>& v) {
  return TangentVector<S>(HessianOperator<S>(lhat, y).apply(v.matrix()), y.r());
}

template <typename S>
double hess_quadratic(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                      const TangentVector<S>& v) {
  return HessianOperator<S>(lhat, y).quadratic(v.matrix());
}

template <typename S>
std::vector<Mat<S>> tangent_block_basis(const Mat<S>& yi) {
  const Index r = yi.rows();
  const Index p = yi.cols();
  constexpr Index parts = is_complex<S>::value ? 2 : 1;
  const Index m = parts * r * p;
  Eigen::MatrixXd proj(m, m);
  for (Index k = 0; k < m; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(k) = 1.0;
    const Mat<S> w = unrealify<S>(e, r, p);
    proj.col(k) = realify<S>(kernels::project_tangent_serial<S>(yi, w, r));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((proj + proj.transpose()) * 0.5);
  std::vector<Mat<S>> basis;
  for (Index k = 0; k < m; ++k)
    if (es.eigenvalues()(k) > 0.5) basis.push_back(unrealify<S>(es.eigenvectors().col(k), r, p));
  return basis;
}

template <typename S>
HessEig<S> min_hessian_eig(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                           const HessEigOptions& opt) {
  const Index n = y.n();
  const Index r = y.r();
  const Index p = y.p();
  const Index d = tangent_dimension(n, r, p, field_of<S>);
  const double lnorm = opt.lhat_norm >= 0.0 ? opt.lhat_norm : operator_norm(lhat);
  const double tol_abs = opt.tol * std::max(lnorm, std::numeric_limits<double>::min());
  const HessianOperator<S> hess(lhat, y);

  HessEig<S> out;
  if (d == 0) {
    out.vector = TangentVector<S>(Mat<S>::Zero(n * r, p), r);
    return out;
  }

  if (d <= opt.dense_limit) {
    std::vector<Index> owner;
    std::vector<Mat<S>> local;
    for (Index i = 0; i < n; ++i)
      for (auto& b : tangent_block_basis<S>(y.block(i))) {
        owner.push_back(i);
        local.push_back(std::move(b));
      }
    const Index dim = static_cast<Index>(local.size());
    Eigen::MatrixXd h(dim, dim);
    Mat<S> v = Mat<S>::Zero(n * r, p);
    for (Index b = 0; b < dim; ++b) {
      v.middleRows(owner[b] * r, r) = local[b];
      const Mat<S> hv = hess.apply(v);
      v.middleRows(owner[b] * r, r).setZero();
      for (Index a = 0; a < dim; ++a) h(a, b) = real_inner(local[a], hv.middleRows(owner[a] * r, r));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((h + h.transpose()) * 0.5);
    if (es.info() != Eigen::Success) throw NumericalError("dense Hessian eigensolve failed");
    const Eigen::VectorXd c = es.eigenvectors().col(0);
    Mat<S> vec = Mat<S>::Zero(n * r, p);
    for (Index a = 0; a < dim; ++a) vec.middleRows(owner[a] * r, r) += c(a) * local[a];
    out.value = es.eigenvalues()(0);
    out.residual = (hess.apply(vec) - out.value * vec).norm();
    out.iterations = dim;
    out.dense = true;
    out.vector = TangentVector<S>(std::move(vec), r);
    return out;
  }

  const Index rows = n * r;
  auto as_mat = [&](const Vec<S>& x) { return Mat<S>(Eigen::Map<const Mat<S>>(x.data(), rows, p)); };
  auto as_vec = [&](const Mat<S>& m) { return Vec<S>(Eigen::Map<const Vec<S>>(m.data(), m.size())); };
  std::function<Vec<S>(const Vec<S>&)> op = [&](const Vec<S>& x) { return as_vec(hess.apply(as_mat(x))); };
  std::function<void(Vec<S>&)> constrain = [&](Vec<S>& x) {
    x = as_vec(kernels::project_tangent(y.matrix(), as_mat(x), r));
  };
  Rng rng(opt.seed);
  LanczosOptions lo;
  lo.tol = tol_abs;
  lo.max_basis = 200;
  lo.max_restarts = 200;
  const auto ep = lanczos_extremal<S>(op, as_vec(gaussian_matrix<S>(rows, p, rng)),
                                      Spectrum::smallest, lo, constrain);
  out.value = ep.value;
  out.residual = ep.residual;
  out.iterations = ep.iterations;
  out.dense = false;
  out.vector = TangentVector<S>(as_mat(ep.vector), r);
  return out;
}

void SolveOptions::validate() const {
  if (max_iters < 0) throw ParameterError("max_iters must be >= 0");
  if (!(grad_tol > 0.0) || !(hess_tol > 0.0) || !(hess.tol > 0.0))
    throw ParameterError("tolerances must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ParameterError("backtrack factor must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ParameterError("Armijo constant must lie in (0, 1)");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::soc_point: return "soc_point";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

InitKind parse_init_kind(const std::string& s) {
  if (s == "random") return InitKind::random;
  if (s == "spectral") return InitKind::spectral;
  if (s == "given") return InitKind::given;
  throw ParameterError("unknown init kind '" + s + "'");
}

template <typename S>
SolveReport<S> solve(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& init,
                     const SolveOptions& opt) {
  opt.validate();
  const Index r = init.r();
  if (init.n() != lhat.n() || r != lhat.r()) throw ParameterError("initial point does not match Lhat");
  if (init.feasibility_error() > 1e-8) throw ParameterError("initial point is not feasible");

  SolveReport<S> rep;
  rep.lhat_norm = operator_norm(lhat);
  const double lnorm = rep.lhat_norm;
  rep.grad_tol_abs = opt.grad_tol * std::max(1.0, lnorm) * std::sqrt(double(r * lhat.n()));
  rep.hess_tol_abs = opt.hess_tol * lnorm;
  const double t_init = opt.initial_step > 0.0 ? opt.initial_step : 1.0 / std::max(lnorm, 1e-300);
  const double t_escape = opt.escape_step > 0.0 ? opt.escape_step : std::min(1.0, 1.0 / std::max(lnorm, 1e-300));
  HessEigOptions hopt = opt.hess;
  hopt.lhat_norm = lnorm;

  StiefelPoint<S> y = init;
  Mat<S> ly = lhat.apply(y.matrix());
  double f = real_inner(ly, y.matrix());
  if (opt.record_trace) rep.trace.push_back(f);

  Mat<S> g_prev;
  Mat<S> y_prev;
  double step = t_init;
  long since_refresh = 0;

  auto finish = [&](SolveStatus st, double gnorm, double heig) {
    rep.y = y;
    rep.objective = objective(lhat, y);
    rep.grad_norm = gnorm;
    rep.min_hess_eig = heig;
    rep.status = st;
    return rep;
  };

  double gnorm = 0.0;
  double last_heig = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    const std::vector<Mat<S>> lam = hermitian_parts(kernels::diag_products(ly, y.matrix(), r));
    Mat<S> g = kernels::project_tangent(y.matrix(), ly, r);
    const Mat<S> half_grad = g;
    g *= 2.0;
    gnorm = g.norm();

    if (gnorm <= rep.grad_tol_abs) {
      hopt.seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(rep.iterations)});
      HessEig<S> he;
      try {
        he = min_hessian_eig(lhat, y, hopt);
      } catch (const NumericalError& e) {
        rep.message = e.what();
        return finish(SolveStatus::numerical_failure, gnorm, e.best_estimate());
      }
      last_heig = he.value;
      if (he.value >= -rep.hess_tol_abs) return finish(SolveStatus::soc_point, gnorm, he.value);
      if (rep.iterations >= opt.max_iters) break;

      // Negative curvature: step along the eigenvector, signed to descend.
      TangentVector<S> dir = he.vector;
      Mat<S> v = dir.matrix() / dir.norm();
      if (real_inner(g, v) > 0.0) v = -v;
      const TangentVector<S> tv(v, r);
      double t = t_escape;
      bool accepted = false;
      for (int k = 0; k < 60 && !accepted; ++k, t *= opt.backtrack) {
        StiefelPoint<S> yn;
        try {
          yn = retract(y, tv, t);
        } catch (const NumericalError&) {
          continue;
        }
        const Mat<S> dy = yn.matrix() - y.matrix();
        const Mat<S> ld = lhat.apply(dy);
        const double df = lagrangian_change(half_grad, lam, ld, dy, r);
        if (df <= -0.25 * t * t * std::abs(he.value)) {
          y = std::move(yn);
          ly += ld;
          f += df;
          accepted = true;
        }
      }
      if (!accepted) {
        rep.message = "negative-curvature escape failed to decrease the objective";
        return finish(SolveStatus::numerical_failure, gnorm, he.value);
      }
      ++rep.escapes;
      ++rep.iterations;
      if (opt.record_trace) rep.trace.push_back(f);
      g_prev.resize(0, 0);
      step = t_init;
      continue;
    }

    if (rep.iterations >= opt.max_iters) break;

    // Barzilai-Borwein trial step from the previous accepted move.
    if (g_prev.size() > 0) {
      const Mat<S> s = y.matrix() - y_prev;
      const double sy = real_inner(s, Mat<S>(g - g_prev));
      const double ss = s.squaredNorm();
      step = (sy > 0.0) ? std::clamp(ss / sy, 1e-4 * t_init, 1e4 * t_init) : t_init;
    }

    const TangentVector<S> dir(-g, r);
    double t = step;
    bool accepted = false;
    for (int k = 0; k < 80; ++k, t *= opt.backtrack) {
      StiefelPoint<S> yn;
      try {
        yn = retract(y, dir, t);
      } catch (const NumericalError&) {
        continue;
      }
      const Mat<S> dy = yn.matrix() - y.matrix();
      const Mat<S> ld = lhat.apply(dy);
      const double df = lagrangian_change(half_grad, lam, ld, dy, r);
      if (df <= -opt.armijo * t * gnorm * gnorm) {
        y_prev = y.matrix();
        g_prev = std::move(g);
        y = std::move(yn);
        if (++since_refresh >= 64) {
          ly = lhat.apply(y.matrix());
          since_refresh = 0;
        } else {
          ly += ld;
        }
        f += df;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.message = "line search failed to find a decrease";
      return finish(SolveStatus::numerical_failure, gnorm, last_heig);
    }
    ++rep.iterations;
    if (opt.record_trace) rep.trace.push_back(f);
  }
  rep.message = "iteration budget exhausted";
  return finish(SolveStatus::max_iters, gnorm, last_heig);
}

template <typename S>
StiefelPoint<S> spectral_init(const BlockSymmetricMatrix<S>& lhat, Index p,
                              std::vector<std::string>* warnings) {
  const Index n = lhat.n();
  const Index r = lhat.r();
  if (p < r) throw ParameterError("spectral_init needs p >= r");
  Mat<S> v(n * r, r);
  if (lhat.dim() <= 2000) {
    Eigen::SelfAdjointEigenSolver<Mat<S>> es(lhat.to_dense());
    if (es.info() != Eigen::Success) throw NumericalError("spectral init eigensolve failed");
    v = es.eigenvectors().leftCols(r);
  } else {
    // Smallest r eigenvectors one at a time, deflating the ones found.
    std::vector<Vec<S>> found;
    std::function<Vec<S>(const Vec<S>&)> op = [&](const Vec<S>& x) -> Vec<S> {
      return lhat.apply(Mat<S>(x));
    };
    std::function<void(Vec<S>&)> deflate = [&](Vec<S>& x) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : found) x -= u.dot(x) * u;
    };
    Rng rng(0x5bec);
    LanczosOptions lo;
    lo.tol = 1e-9 * std::max(1.0, operator_norm(lhat));
    lo.max_restarts = 400;
    for (Index k = 0; k < r; ++k) {
      auto ep = lanczos_extremal<S>(op, gaussian_matrix<S>(n * r, 1, rng), Spectrum::smallest, lo, deflate);
      // Complex-linear operator: keep the found vectors orthonormal in the
      // complex inner product so the deflation is exact.
      Vec<S> u = ep.vector;
      deflate(u);
      u.normalize();
      found.push_back(u);
      v.col(k) = u;
    }
  }
  Mat<S> y = Mat<S>::Zero(n * r, p);
  std::size_t fallback = 0;
  for (Index i = 0; i < n; ++i) {
    Mat<S> blk;
    if (kernels::polar_block<S>(v.middleRows(i * r, r), blk, 1e-10)) {
      y.block(i * r, 0, r, r) = blk;
    } else {
      y.block(i * r, 0, r, r).setIdentity();
      ++fallback;
    }
  }
  if (fallback > 0 && warnings)
    warnings->push_back("spectral init: " + std::to_string(fallback) +
                        " singular block(s) replaced by identity");
  return StiefelPoint<S>(std::move(y), r);
}

#define GSYNC_INSTANTIATE(S)                                                                    \
  template double objective<S>(const BlockSymmetricMatrix<S>&, const StiefelPoint<S>&);         \
  template double objective_change<S>(const BlockSymmetricMatrix<S>&, const Mat<S>&,            \
                                      const Mat<S>&);                                           \
  template TangentVector<S> gradient<S>(const BlockSymmetricMatrix<S>&, const StiefelPoint<S>&); \
  template class HessianOperator<S>;                                                            \
  template TangentVector<S> hess_vec<S>(const BlockSymmetricMatrix<S>&, const StiefelPoint<S>&, \
                                        const TangentVector<S>&);                               \
  template double hess_quadratic<S>(const BlockSymmetricMatrix<S>&, const StiefelPoint<S>&,     \
                                    const TangentVector<S>&);                                   \
  template std::vector<Mat<S>> tangent_block_basis<S>(const Mat<S>&);                           \
  template HessEig<S> min_hessian_eig<S>(const BlockSymmetricMatrix<S>&,                        \
                                         const StiefelPoint<S>&, const HessEigOptions&);        \
  template SolveReport<S> solve<S>(const BlockSymmetricMatrix<S>&, const StiefelPoint<S>&,      \
                                   const SolveOptions&);                                        \
  template StiefelPoint<S> spectral_init<S>(const BlockSymmetricMatrix<S>&, Index,              \
                                            std::vector<std::string>*);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync
