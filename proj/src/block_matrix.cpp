#include "gsync/block_matrix.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "gsync/kernels.hpp"
#include "gsync/lanczos.hpp"
#include "gsync/rng.hpp"

namespace gsync {

template <typename S>
BlockSymmetricMatrix<S>::BlockSymmetricMatrix(Index n, Index r)
    : BlockSymmetricMatrix(n, r, std::vector<Mat<S>>(static_cast<std::size_t>(n), Mat<S>::Zero(r, r)),
                           {}) {}

template <typename S>
BlockSymmetricMatrix<S>::BlockSymmetricMatrix(Index n, Index r, std::vector<Mat<S>> diagonal,
                                              std::vector<UpperBlock> upper)
    : n_(n), r_(r), diag_(std::move(diagonal)) {
  if (n < 1 || r < 1) throw ParameterError("block matrix needs n, r >= 1");
  if (static_cast<Index>(diag_.size()) != n) throw ParameterError("diagonal block count != n");
  for (auto& d : diag_) {
    if (d.rows() != r || d.cols() != r) throw ParameterError("diagonal block has wrong shape");
    d = (d + d.adjoint()).eval() * 0.5;
  }
  std::vector<std::vector<RowEntry>> rows(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const auto& u = upper[k];
    if (!(0 <= u.i && u.i < u.j && u.j < n)) throw ParameterError("upper block needs i < j < n");
    if (u.block.rows() != r || u.block.cols() != r)
      throw ParameterError("off-diagonal block has wrong shape");
    rows[u.i].push_back({u.j, k, false});
    rows[u.j].push_back({u.i, k, true});
  }
  for (auto& row : rows)
    std::sort(row.begin(), row.end(), [](const RowEntry& a, const RowEntry& b) {
      return a.col < b.col;
    });
  upper_ = std::make_shared<const std::vector<UpperBlock>>(std::move(upper));
  rows_ = std::make_shared<const std::vector<std::vector<RowEntry>>>(std::move(rows));
}

template <typename S>
Mat<S> BlockSymmetricMatrix<S>::block(Index i, Index j) const {
  if (i == j) return diag_[i];
  for (const auto& e : (*rows_)[i])
    if (e.col == j) return e.adjoint ? Mat<S>((*upper_)[e.k].block.adjoint()) : (*upper_)[e.k].block;
  return Mat<S>::Zero(r_, r_);
}

template <typename S>
BlockSymmetricMatrix<S> BlockSymmetricMatrix<S>::with_diagonal(std::vector<Mat<S>> diagonal) const {
  BlockSymmetricMatrix out = *this;
  if (static_cast<Index>(diagonal.size()) != n_) throw ParameterError("diagonal block count != n");
  for (auto& d : diagonal) d = (d + d.adjoint()).eval() * 0.5;
  out.diag_ = std::move(diagonal);
  return out;
}

template <typename S>
Mat<S> BlockSymmetricMatrix<S>::apply(const Mat<S>& x) const {
  Mat<S> out;
  kernels::block_apply(*this, x, out);
  return out;
}

template <typename S>
Mat<S> BlockSymmetricMatrix<S>::to_dense() const {
  Mat<S> d = Mat<S>::Zero(dim(), dim());
  for (Index i = 0; i < n_; ++i) d.block(i * r_, i * r_, r_, r_) = diag_[i];
  for (const auto& u : *upper_) {
    d.block(u.i * r_, u.j * r_, r_, r_) = u.block;
    d.block(u.j * r_, u.i * r_, r_, r_) = u.block.adjoint();
  }
  return d;
}

template <typename S>
double operator_norm(const BlockSymmetricMatrix<S>& a, double rel_tol, std::uint64_t seed) {
  bool any = false;
  for (const auto& d : a.diagonal()) any = any || d.squaredNorm() > 0.0;
  for (const auto& u : a.upper()) any = any || u.block.squaredNorm() > 0.0;
  if (!any) return 0.0;

  // Crude upper bound (max block-row sum of Frobenius norms) sets the scale.
  double bound = 0.0;
  for (Index i = 0; i < a.n(); ++i) {
    double s = a.diagonal()[i].norm();
    for (const auto& e : a.row(i)) s += a.upper()[e.k].block.norm();
    bound = std::max(bound, s);
  }
  std::function<Vec<S>(const Vec<S>&)> op = [&](const Vec<S>& x) -> Vec<S> {
    Mat<S> out;
    kernels::block_apply(a, Mat<S>(x), out);
    return out;
  };
  Rng rng(seed);
  LanczosOptions opt;
  opt.tol = rel_tol * bound;
  opt.max_restarts = 400;
  const auto hi = lanczos_extremal<S>(op, gaussian_matrix<S>(a.dim(), 1, rng), Spectrum::largest, opt);
  const auto lo = lanczos_extremal<S>(op, gaussian_matrix<S>(a.dim(), 1, rng), Spectrum::smallest, opt);
  return std::max(std::abs(hi.value), std::abs(lo.value));
}

template <typename S>
double min_eigenvalue(const BlockSymmetricMatrix<S>& a, Index dense_limit, double abs_tol) {
  if (a.dim() <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Mat<S>> es(a.to_dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
    return es.eigenvalues()(0);
  }
  std::function<Vec<S>(const Vec<S>&)> op = [&](const Vec<S>& x) -> Vec<S> {
    Mat<S> out;
    kernels::block_apply(a, Mat<S>(x), out);
    return out;
  };
  Rng rng(0x3141);
  LanczosOptions opt;
  opt.tol = abs_tol;
  opt.max_restarts = 400;
  return lanczos_extremal<S>(op, gaussian_matrix<S>(a.dim(), 1, rng), Spectrum::smallest, opt).value;
}

template class BlockSymmetricMatrix<double>;
template class BlockSymmetricMatrix<cdouble>;
template double operator_norm<double>(const BlockSymmetricMatrix<double>&, double, std::uint64_t);
template double operator_norm<cdouble>(const BlockSymmetricMatrix<cdouble>&, double, std::uint64_t);
template double min_eigenvalue<double>(const BlockSymmetricMatrix<double>&, Index, double);
template double min_eigenvalue<cdouble>(const BlockSymmetricMatrix<cdouble>&, Index, double);

}  // namespace gsync
