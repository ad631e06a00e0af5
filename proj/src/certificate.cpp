#include "gsync/certificate.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "gsync/kernels.hpp"

namespace gsync {

template <typename S>
BlockSymmetricMatrix<S> s_matrix(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y) {
  const Mat<S> ly = lhat.apply(y.matrix());
  auto prods = kernels::diag_products(ly, y.matrix(), y.r());
  std::vector<Mat<S>> diag(lhat.diagonal());
  for (std::size_t i = 0; i < diag.size(); ++i)
    diag[i] -= (prods[i] + prods[i].adjoint()) * 0.5;
  return lhat.with_diagonal(std::move(diag));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified_global: return "certified_global";
    case Verdict::soc_not_certified: return "soc_not_certified";
    case Verdict::not_critical: return "not_critical";
  }
  return "?";
}

template <typename S>
Eigen::VectorXd singular_values(const Mat<S>& y) {
  Eigen::BDCSVD<Mat<S>> svd(y);
  return svd.singularValues();
}

template <typename S>
Index numerical_rank(const Mat<S>& y, Index r, double tol_scale) {
  const double n = double(y.rows() / r);
  const Eigen::VectorXd sv = singular_values(y);
  return static_cast<Index>((sv.array() >= tol_scale * std::sqrt(n)).count());
}

template <typename S>
CertificateReport certify(const BlockSymmetricMatrix<S>& lhat, const StiefelPoint<S>& y,
                          const CertifyOptions& opt) {
  CertificateReport rep;
  const Index n = y.n();
  const Index r = y.r();
  rep.p = y.p();
  rep.lhat_norm = opt.lhat_norm >= 0.0 ? opt.lhat_norm : operator_norm(lhat);
  rep.first_order_tol_abs =
      opt.first_order_tol * std::max(1.0, rep.lhat_norm) * std::sqrt(double(r * n));
  rep.psd_slack_abs = opt.psd_slack * rep.lhat_norm;
  rep.rank_tolerance = opt.rank_scale * std::sqrt(double(n));

  const auto smat = s_matrix(lhat, y);
  rep.first_order_residual = smat.apply(y.matrix()).norm();
  rep.numerical_rank = numerical_rank(y.matrix(), r, opt.rank_scale);
  try {
    HessEigOptions ho = opt.hess;
    ho.lhat_norm = rep.lhat_norm;
    rep.min_tangent_hess_eig = min_hessian_eig(lhat, y, ho).value;
    rep.s_min_eig = min_eigenvalue(smat, opt.dense_limit, 1e-9 * std::max(1.0, rep.lhat_norm));
  } catch (const NumericalError& e) {
    throw CertificationError(e, rep);
  }

  if (rep.first_order_residual > rep.first_order_tol_abs)
    rep.verdict = Verdict::not_critical;
  else if (rep.numerical_rank < rep.p && rep.s_min_eig >= -rep.psd_slack_abs)
    rep.verdict = Verdict::certified_global;
  else
    rep.verdict = Verdict::soc_not_certified;
  return rep;
}

template <typename S>
Correlation correlation(const Mat<S>& z, const Mat<S>& y) {
  const Index r = z.cols();
  const double n = double(z.rows() / r);
  Correlation c;
  c.raw = (z.adjoint() * y).squaredNorm();
  c.normalized = c.raw / (n * n * double(r));
  return c;
}

template <typename S>
ResidualDecomposition<S> residual_decomposition(const Mat<S>& z, const Mat<S>& y) {
  const Index r = z.cols();
  const double n = double(z.rows() / r);
  ResidualDecomposition<S> d;
  d.R = z.adjoint() * y / n;
  d.W = y - z * d.R;
  return d;
}

TheoryBounds theory_bounds(Index p, Index r, Index n, double lambda2, double delta_opnorm) {
  if (n < 1 || r < 1) throw ParameterError("theory_bounds needs n, r >= 1");
  if (!(lambda2 > 0.0)) throw ParameterError("theory_bounds needs lambda2 > 0 (connected graph)");
  if (!(delta_opnorm >= 0.0)) throw ParameterError("noise norm must be >= 0");
  TheoryBounds b;
  b.p = p;
  b.r = r;
  b.n = n;
  b.lambda2 = lambda2;
  b.delta_opnorm = delta_opnorm;
  const double rn = double(r * n);
  const double ratio = delta_opnorm / lambda2;
  const double full = double(n) * double(n) * double(r);
  if (p > r + 2) {
    const double cp = 2.0 * double(p + r - 2) / double(p - r - 2);
    b.c_p = cp;
    b.rank_bound = double(r) + 5.0 * cp * cp * ratio * ratio * rn;
    b.benign_condition_holds = delta_opnorm < lambda2 / (std::sqrt(5.0) * cp * std::sqrt(rn));
    b.corr_lower_bound = (1.0 - cp * cp * ratio * ratio) * full;
  }
  b.large_p_condition_holds = delta_opnorm < lambda2 / (2.0 * std::sqrt(5.0) * std::sqrt(rn));
  b.large_p_corr_lower = (1.0 - 4.0 * ratio * ratio) * full;
  return b;
}

#define GSYNC_INSTANTIATE(S)                                                                  \
  template BlockSymmetricMatrix<S> s_matrix<S>(const BlockSymmetricMatrix<S>&,                \
                                               const StiefelPoint<S>&);                       \
  template Eigen::VectorXd singular_values<S>(const Mat<S>&);                                 \
  template Index numerical_rank<S>(const Mat<S>&, Index, double);                             \
  template CertificateReport certify<S>(const BlockSymmetricMatrix<S>&,                       \
                                        const StiefelPoint<S>&, const CertifyOptions&);       \
  template Correlation correlation<S>(const Mat<S>&, const Mat<S>&);                          \
  template ResidualDecomposition<S> residual_decomposition<S>(const Mat<S>&, const Mat<S>&);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync
