#pragma once

#include <cstdint>
#include <vector>

#include "gsync/block_matrix.hpp"
#include "gsync/rng.hpp"

namespace gsync {

/// Point of St(r, p)^n: n stacked r x p blocks with orthonormal rows.
template <typename S>
class StiefelPoint {
 public:
  StiefelPoint() = default;
  /// Checks shape only; use feasibility_error() for the constraint.
  StiefelPoint(Mat<S> y, Index r);

  const Mat<S>& matrix() const { return y_; }
  Index n() const { return r_ ? y_.rows() / r_ : 0; }
  Index r() const { return r_; }
  Index p() const { return y_.cols(); }
  auto block(Index i) const { return y_.middleRows(i * r_, r_); }

  /// max_i ||Y_i Y_i^* - I_r||_F
  double feasibility_error() const;

 private:
  Mat<S> y_;
  Index r_ = 0;
};

/// Tangent vector at a StiefelPoint (same stacked shape).
template <typename S>
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(Mat<S> v, Index r) : v_(std::move(v)), r_(r) {}

  const Mat<S>& matrix() const { return v_; }
  Index r() const { return r_; }
  auto block(Index i) const { return v_.middleRows(i * r_, r_); }
  double norm() const { return v_.norm(); }

  /// max_i ||V_i Y_i^* + Y_i V_i^*||_F
  double tangency_error(const StiefelPoint<S>& y) const;

 private:
  Mat<S> v_;
  Index r_ = 0;
};

/// Symmetric (Hermitian) block-diagonal part of a dense rn x rn matrix.
template <typename S>
Mat<S> sbd(const Mat<S>& m, Index r);
/// SBD of a block matrix: off-diagonal blocks dropped.
template <typename S>
BlockSymmetricMatrix<S> sbd(const BlockSymmetricMatrix<S>& m);

/// W - SBD(W Y^*) Y.
template <typename S>
TangentVector<S> project_tangent(const StiefelPoint<S>& y, const Mat<S>& w);

/// Per-block polar retraction of Y + t V. Throws NumericalError if a block of
/// Y + t V is rank deficient.
template <typename S>
StiefelPoint<S> retract(const StiefelPoint<S>& y, const TangentVector<S>& v, double t);

/// Per-block polar projection onto St(r, p); throws on rank-deficient blocks.
template <typename S>
StiefelPoint<S> project_to_manifold(const Mat<S>& m, Index r);

/// Blocks are Gaussian r x p matrices with orthonormalized rows (QR with the
/// sign/phase fix, so r = p gives Haar samples).
template <typename S>
StiefelPoint<S> random_point(Index n, Index r, Index p, std::uint64_t seed);
template <typename S>
Mat<S> random_stiefel_block(Index r, Index p, Rng& rng);

enum class TangentConstruction {
  /// Ydot_i = G - Y_i G^* Y_i (real default).
  standard,
  /// Ydot_i = 2 G (I - Y_i^* Y_i) + (G Y_i^* - Y_i G^*) Y_i (complex default).
  scaled,
};

template <typename S>
constexpr TangentConstruction default_construction() {
  return is_complex<S>::value ? TangentConstruction::scaled : TangentConstruction::standard;
}

/// Random tangent vector from one Gaussian r x p matrix shared by all blocks.
template <typename S>
TangentVector<S> random_tangent(const StiefelPoint<S>& y, Rng& rng,
                                TangentConstruction c = default_construction<S>());
template <typename S>
TangentVector<S> random_tangent(const StiefelPoint<S>& y, std::uint64_t seed,
                                TangentConstruction c = default_construction<S>());
/// The tangent built from a given Gaussian matrix gamma.
template <typename S>
TangentVector<S> tangent_from_gaussian(const StiefelPoint<S>& y, const Mat<S>& gamma,
                                       TangentConstruction c = default_construction<S>());

/// Closed-form E[Ydot_i Ydot_j^*] for random_tangent with construction c.
template <typename S>
Mat<S> tangent_second_moment(const Mat<S>& yi, const Mat<S>& yj,
                             TangentConstruction c = default_construction<S>());

/// Dimension of the tangent space of St(r, p)^n as a real vector space.
Index tangent_dimension(Index n, Index r, Index p, Field f);

}  // namespace gsync
