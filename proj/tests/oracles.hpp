#pragma once

// Dense reference implementations used only by the tests. Everything here is
// written directly from the definitions, without the library's block kernels.

#include <Eigen/Dense>

#include "gsync/graph.hpp"
#include "gsync/instance.hpp"
#include "gsync/stiefel.hpp"

namespace oracle {

using gsync::Index;
using gsync::Mat;

inline Eigen::MatrixXd laplacian(const gsync::Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const auto& e : g.edges()) a(e.i, e.j) = a(e.j, e.i) = e.w;
  Eigen::MatrixXd l = -a;
  for (Index i = 0; i < g.n(); ++i) l(i, i) = a.row(i).sum();
  return l;
}

inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
}

template <typename S>
Eigen::VectorXd eigenvalues(const Mat<S>& m) {
  return Eigen::SelfAdjointEigenSolver<Mat<S>>(m).eigenvalues();
}

/// Block-diagonal matrix of Hermitian parts of the diagonal blocks.
template <typename S>
Mat<S> sbd(const Mat<S>& m, Index r) {
  Mat<S> out = Mat<S>::Zero(m.rows(), m.cols());
  for (Index i = 0; i < m.rows() / r; ++i) {
    const Mat<S> b = m.block(i * r, i * r, r, r);
    out.block(i * r, i * r, r, r) = (b + b.adjoint()) / 2.0;
  }
  return out;
}

/// Connection Laplacian assembled densely from measurements.
template <typename S>
Mat<S> connection_laplacian(const gsync::Measurements<S>& m) {
  const Index n = m.graph.n(), r = m.r;
  Mat<S> l = Mat<S>::Zero(n * r, n * r);
  for (std::size_t k = 0; k < m.graph.edges().size(); ++k) {
    const auto& e = m.graph.edges()[k];
    l.block(e.i * r, e.j * r, r, r) = -m.blocks[k];
    l.block(e.j * r, e.i * r, r, r) = -m.blocks[k].adjoint();
    l.block(e.i * r, e.i * r, r, r) += e.w * Mat<S>::Identity(r, r);
    l.block(e.j * r, e.j * r, r, r) += e.w * Mat<S>::Identity(r, r);
  }
  return l;
}

/// Realified dense matrix of a real-linear map on rn x p panels.
template <typename S, typename F>
Eigen::MatrixXd realified(F op, Index rows, Index cols) {
  constexpr int c = gsync::is_complex<S>::value ? 2 : 1;
  const Index dim = rows * cols * c;
  Eigen::MatrixXd out(dim, dim);
  auto flat = [&](const Mat<S>& m) {
    Eigen::VectorXd v(dim);
    for (Index k = 0; k < m.size(); ++k) {
      if constexpr (c == 2) {
        v(2 * k) = m.data()[k].real();
        v(2 * k + 1) = m.data()[k].imag();
      } else {
        v(k) = m.data()[k];
      }
    }
    return v;
  };
  for (Index k = 0; k < dim; ++k) {
    Mat<S> e = Mat<S>::Zero(rows, cols);
    if constexpr (c == 2)
      e.data()[k / 2] = (k % 2 == 0) ? S(1.0, 0.0) : S(0.0, 1.0);
    else
      e.data()[k] = 1.0;
    out.col(k) = flat(op(e));
  }
  return out;
}

}  // namespace oracle
