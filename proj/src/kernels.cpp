#include "gsync/kernels.hpp"

#include <atomic>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace gsync::kernels {

namespace {

template <typename S>
void apply_row(const BlockSymmetricMatrix<S>& a, const Mat<S>& x, Mat<S>& out, Index i) {
  const Index r = a.r();
  auto oi = out.middleRows(i * r, r);
  oi.noalias() = a.diagonal()[i] * x.middleRows(i * r, r);
  const auto& upper = a.upper();
  for (const auto& e : a.row(i)) {
    const Mat<S>& b = upper[e.k].block;
    if (e.adjoint)
      oi.noalias() += b.adjoint() * x.middleRows(e.col * r, r);
    else
      oi.noalias() += b * x.middleRows(e.col * r, r);
  }
}

template <typename S>
void project_block(const Mat<S>& y, const Mat<S>& w, Mat<S>& out, Index i, Index r) {
  const auto yi = y.middleRows(i * r, r);
  const auto wi = w.middleRows(i * r, r);
  Mat<S> m = wi * yi.adjoint();
  const Mat<S> herm = (m + m.adjoint()) * 0.5;
  out.middleRows(i * r, r).noalias() = wi - herm * yi;
}

}  // namespace

template <typename S>
bool polar_block(const Mat<S>& m, Mat<S>& out, double min_sv) {
  const Index r = m.rows();
  if (r == 1) {
    const double nrm = m.norm();
    if (!(nrm > min_sv)) return false;
    out = m / nrm;
    return true;
  }
  const Mat<S> g = m * m.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat<S>> es(g);
  if (es.info() != Eigen::Success) return false;
  const auto& ev = es.eigenvalues();
  const double lmax = ev(r - 1);
  if (!(lmax > 0.0) || !(ev(0) > min_sv * min_sv * lmax)) return false;
  const Eigen::VectorXd inv_sqrt = ev.array().rsqrt();
  const Mat<S>& q = es.eigenvectors();
  out = q * inv_sqrt.asDiagonal() * (q.adjoint() * m);
  return true;
}

template <typename S>
void block_apply_serial(const BlockSymmetricMatrix<S>& a, const Mat<S>& x, Mat<S>& out) {
  out.resize(a.dim(), x.cols());
  for (Index i = 0; i < a.n(); ++i) apply_row(a, x, out, i);
}

template <typename S>
void block_apply(const BlockSymmetricMatrix<S>& a, const Mat<S>& x, Mat<S>& out) {
  out.resize(a.dim(), x.cols());
  const Index n = a.n();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) apply_row(a, x, out, i);
}

template <typename S>
std::vector<Mat<S>> diag_products_serial(const Mat<S>& a, const Mat<S>& b, Index r) {
  const Index n = a.rows() / r;
  std::vector<Mat<S>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    out[i] = a.middleRows(i * r, r) * b.middleRows(i * r, r).adjoint();
  return out;
}

template <typename S>
std::vector<Mat<S>> diag_products(const Mat<S>& a, const Mat<S>& b, Index r) {
  const Index n = a.rows() / r;
  std::vector<Mat<S>> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    out[i] = a.middleRows(i * r, r) * b.middleRows(i * r, r).adjoint();
  return out;
}

template <typename S>
Mat<S> project_tangent_serial(const Mat<S>& y, const Mat<S>& w, Index r) {
  Mat<S> out(w.rows(), w.cols());
  for (Index i = 0; i < y.rows() / r; ++i) project_block(y, w, out, i, r);
  return out;
}

template <typename S>
Mat<S> project_tangent(const Mat<S>& y, const Mat<S>& w, Index r) {
  Mat<S> out(w.rows(), w.cols());
  const Index n = y.rows() / r;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) project_block(y, w, out, i, r);
  return out;
}

template <typename S>
Mat<S> blockwise_polar_serial(const Mat<S>& m, Index r, double min_sv) {
  Mat<S> out(m.rows(), m.cols());
  Mat<S> blk;
  for (Index i = 0; i < m.rows() / r; ++i) {
    if (!polar_block<S>(m.middleRows(i * r, r), blk, min_sv))
      throw NumericalError("polar factor undefined: block " + std::to_string(i) +
                           " is rank deficient");
    out.middleRows(i * r, r) = blk;
  }
  return out;
}

template <typename S>
Mat<S> blockwise_polar(const Mat<S>& m, Index r, double min_sv) {
  Mat<S> out(m.rows(), m.cols());
  const Index n = m.rows() / r;
  std::atomic<Index> bad{-1};
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    Mat<S> blk;
    if (polar_block<S>(m.middleRows(i * r, r), blk, min_sv))
      out.middleRows(i * r, r) = blk;
    else
      bad.store(i);
  }
  if (bad.load() >= 0)
    throw NumericalError("polar factor undefined: block " + std::to_string(bad.load()) +
                         " is rank deficient");
  return out;
}

#define GSYNC_INSTANTIATE(S)                                                               \
  template bool polar_block<S>(const Mat<S>&, Mat<S>&, double);                            \
  template void block_apply_serial<S>(const BlockSymmetricMatrix<S>&, const Mat<S>&,       \
                                      Mat<S>&);                                            \
  template void block_apply<S>(const BlockSymmetricMatrix<S>&, const Mat<S>&, Mat<S>&);    \
  template std::vector<Mat<S>> diag_products_serial<S>(const Mat<S>&, const Mat<S>&,       \
                                                       Index);                             \
  template std::vector<Mat<S>> diag_products<S>(const Mat<S>&, const Mat<S>&, Index);      \
  template Mat<S> project_tangent_serial<S>(const Mat<S>&, const Mat<S>&, Index);          \
  template Mat<S> project_tangent<S>(const Mat<S>&, const Mat<S>&, Index);                 \
  template Mat<S> blockwise_polar_serial<S>(const Mat<S>&, Index, double);                 \
  template Mat<S> blockwise_polar<S>(const Mat<S>&, Index, double);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync::kernels
