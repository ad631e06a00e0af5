#pragma once

#include <memory>
#include <vector>

#include "gsync/types.hpp"

namespace gsync {

/// Hermitian rn x rn matrix stored as r x r blocks: n diagonal blocks plus the
/// strictly-upper blocks (i < j). Block (j, i) is block (i, j)^* on access.
template <typename S>
class BlockSymmetricMatrix {
 public:
  struct UpperBlock {
    Index i;
    Index j;
    Mat<S> block;
  };
  /// One entry of a block row: column block, index into upper(), and whether
  /// the stored block must be conjugate-transposed.
  struct RowEntry {
    Index col;
    std::size_t k;
    bool adjoint;
  };

  BlockSymmetricMatrix() = default;
  /// Zero matrix with the given block layout.
  BlockSymmetricMatrix(Index n, Index r);
  /// Diagonal blocks are replaced by their Hermitian part.
  BlockSymmetricMatrix(Index n, Index r, std::vector<Mat<S>> diagonal,
                       std::vector<UpperBlock> upper);

  Index n() const { return n_; }
  Index r() const { return r_; }
  Index dim() const { return n_ * r_; }

  const std::vector<Mat<S>>& diagonal() const { return diag_; }
  const std::vector<UpperBlock>& upper() const { return *upper_; }
  const std::vector<RowEntry>& row(Index i) const { return (*rows_)[i]; }

  /// Block (i, j) of the full matrix (zero if not stored).
  Mat<S> block(Index i, Index j) const;

  /// Same off-diagonal structure, new diagonal blocks (shares storage).
  BlockSymmetricMatrix with_diagonal(std::vector<Mat<S>> diagonal) const;

  /// this * X for an rn x p panel. Block-row parallel.
  Mat<S> apply(const Mat<S>& x) const;
  Mat<S> to_dense() const;

 private:
  Index n_ = 0;
  Index r_ = 0;
  std::vector<Mat<S>> diag_;
  std::shared_ptr<const std::vector<UpperBlock>> upper_;
  std::shared_ptr<const std::vector<std::vector<RowEntry>>> rows_;
};

/// Largest singular value of a Hermitian block matrix, via Lanczos on both
/// ends of the spectrum. Relative accuracy ~ rel_tol.
template <typename S>
double operator_norm(const BlockSymmetricMatrix<S>& a, double rel_tol = 1e-8,
                     std::uint64_t seed = 0x0b5e55ed);

/// Smallest eigenvalue: dense solve up to dense_limit rows, Lanczos above.
template <typename S>
double min_eigenvalue(const BlockSymmetricMatrix<S>& a, Index dense_limit = 2000,
                      double abs_tol = 1e-10);

extern template class BlockSymmetricMatrix<double>;
extern template class BlockSymmetricMatrix<cdouble>;

}  // namespace gsync
