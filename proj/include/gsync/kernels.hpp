#pragma once

// Per-block kernels over stacked rn x p panels. Each kernel has a serial
// reference (`*_serial`) kept for testing and benchmarking, and an OpenMP
// version parallel over block rows. Every output block depends only on its own
// inputs, so both produce bit-identical results independent of thread count.

#include <vector>

#include "gsync/block_matrix.hpp"

namespace gsync::kernels {

template <typename S>
void block_apply_serial(const BlockSymmetricMatrix<S>& a, const Mat<S>& x, Mat<S>& out);
template <typename S>
void block_apply(const BlockSymmetricMatrix<S>& a, const Mat<S>& x, Mat<S>& out);

/// Diagonal r x r blocks of A B^*: A_i B_i^*.
template <typename S>
std::vector<Mat<S>> diag_products_serial(const Mat<S>& a, const Mat<S>& b, Index r);
template <typename S>
std::vector<Mat<S>> diag_products(const Mat<S>& a, const Mat<S>& b, Index r);

/// W - SBD(W Y^*) Y, block by block.
template <typename S>
Mat<S> project_tangent_serial(const Mat<S>& y, const Mat<S>& w, Index r);
template <typename S>
Mat<S> project_tangent(const Mat<S>& y, const Mat<S>& w, Index r);

/// Polar factor (M_i M_i^*)^{-1/2} M_i of every r x p block. Throws
/// NumericalError when a block is rank deficient (relative to min_sv).
template <typename S>
Mat<S> blockwise_polar_serial(const Mat<S>& m, Index r, double min_sv = 1e-12);
template <typename S>
Mat<S> blockwise_polar(const Mat<S>& m, Index r, double min_sv = 1e-12);

/// Polar factor of one r x p block; returns false if rank deficient.
template <typename S>
bool polar_block(const Mat<S>& m, Mat<S>& out, double min_sv = 1e-12);

}  // namespace gsync::kernels
