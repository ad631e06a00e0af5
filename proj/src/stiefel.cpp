#include "gsync/stiefel.hpp"

#include <cmath>

#include <Eigen/QR>

#include "gsync/kernels.hpp"

namespace gsync {

template <typename S>
StiefelPoint<S>::StiefelPoint(Mat<S> y, Index r) : y_(std::move(y)), r_(r) {
  if (r < 1 || y_.rows() % r != 0 || y_.rows() == 0)
    throw ParameterError("point rows must be a positive multiple of r");
  if (y_.cols() < r) throw ParameterError("Stiefel point needs p >= r");
}

template <typename S>
double StiefelPoint<S>::feasibility_error() const {
  double worst = 0.0;
  for (Index i = 0; i < n(); ++i)
    worst = std::max(worst, (block(i) * block(i).adjoint() - Mat<S>::Identity(r_, r_)).norm());
  return worst;
}

template <typename S>
double TangentVector<S>::tangency_error(const StiefelPoint<S>& y) const {
  double worst = 0.0;
  for (Index i = 0; i < y.n(); ++i) {
    const Mat<S> m = block(i) * y.block(i).adjoint();
    worst = std::max(worst, (m + m.adjoint()).norm());
  }
  return worst;
}

template <typename S>
Mat<S> sbd(const Mat<S>& m, Index r) {
  if (m.rows() != m.cols() || m.rows() % r != 0) throw ParameterError("sbd: bad shape");
  Mat<S> out = Mat<S>::Zero(m.rows(), m.cols());
  for (Index i = 0; i < m.rows() / r; ++i) {
    const auto b = m.block(i * r, i * r, r, r);
    out.block(i * r, i * r, r, r) = (b + b.adjoint()) * 0.5;
  }
  return out;
}

template <typename S>
BlockSymmetricMatrix<S> sbd(const BlockSymmetricMatrix<S>& m) {
  return BlockSymmetricMatrix<S>(m.n(), m.r(), m.diagonal(), {});
}

template <typename S>
TangentVector<S> project_tangent(const StiefelPoint<S>& y, const Mat<S>& w) {
  if (w.rows() != y.matrix().rows() || w.cols() != y.p())
    throw ParameterError("project_tangent: shape mismatch");
  return TangentVector<S>(kernels::project_tangent(y.matrix(), w, y.r()), y.r());
}

template <typename S>
StiefelPoint<S> project_to_manifold(const Mat<S>& m, Index r) {
  return StiefelPoint<S>(kernels::blockwise_polar(m, r), r);
}

template <typename S>
StiefelPoint<S> retract(const StiefelPoint<S>& y, const TangentVector<S>& v, double t) {
  if (t == 0.0) return y;
  return project_to_manifold<S>(y.matrix() + t * v.matrix(), y.r());
}

template <typename S>
Mat<S> random_stiefel_block(Index r, Index p, Rng& rng) {
  const Mat<S> g = gaussian_matrix<S>(p, r, rng);
  Eigen::HouseholderQR<Mat<S>> qr(g);
  Mat<S> q = qr.householderQ() * Mat<S>::Identity(p, r);
  for (Index k = 0; k < r; ++k) {
    const S d = qr.matrixQR()(k, k);
    const double mag = std::abs(d);
    q.col(k) *= mag > 0.0 ? S(d / mag) : S(1.0);
  }
  return q.adjoint();
}

template <typename S>
StiefelPoint<S> random_point(Index n, Index r, Index p, std::uint64_t seed) {
  if (n < 1 || r < 1 || p < r) throw ParameterError("random_point needs n, r >= 1 and p >= r");
  Rng rng(seed);
  Mat<S> y(n * r, p);
  for (Index i = 0; i < n; ++i) y.middleRows(i * r, r) = random_stiefel_block<S>(r, p, rng);
  return StiefelPoint<S>(std::move(y), r);
}

template <typename S>
TangentVector<S> tangent_from_gaussian(const StiefelPoint<S>& y, const Mat<S>& gamma,
                                       TangentConstruction c) {
  const Index r = y.r();
  const Index p = y.p();
  if (gamma.rows() != r || gamma.cols() != p) throw ParameterError("gamma must be r x p");
  if (c == TangentConstruction::scaled && !is_complex<S>::value)
    throw ParameterError("scaled tangent construction is defined for the complex field only");
  Mat<S> v(y.matrix().rows(), p);
  for (Index i = 0; i < y.n(); ++i) {
    const Mat<S> yi = y.block(i);
    if (c == TangentConstruction::standard) {
      v.middleRows(i * r, r) = gamma - yi * gamma.adjoint() * yi;
    } else {
      const Mat<S> null_part = gamma - (gamma * yi.adjoint()) * yi;
      v.middleRows(i * r, r) =
          2.0 * null_part + (gamma * yi.adjoint() - yi * gamma.adjoint()) * yi;
    }
  }
  return TangentVector<S>(std::move(v), r);
}

template <typename S>
TangentVector<S> random_tangent(const StiefelPoint<S>& y, Rng& rng, TangentConstruction c) {
  return tangent_from_gaussian(y, gaussian_matrix<S>(y.r(), y.p(), rng), c);
}

template <typename S>
TangentVector<S> random_tangent(const StiefelPoint<S>& y, std::uint64_t seed,
                                TangentConstruction c) {
  Rng rng(seed);
  return random_tangent(y, rng, c);
}

template <typename S>
Mat<S> tangent_second_moment(const Mat<S>& yi, const Mat<S>& yj, TangentConstruction c) {
  const Index r = yi.rows();
  const Index p = yi.cols();
  if (yj.rows() != r || yj.cols() != p) throw ParameterError("blocks must share (r, p)");
  const Mat<S> m = yi * yj.adjoint();
  const S tr = m.trace();
  const Mat<S> id = Mat<S>::Identity(r, r);
  if constexpr (is_complex<S>::value) {
    if (c == TangentConstruction::standard) return double(p) * id + tr * m;
    return (4.0 * double(p - r) + m.squaredNorm()) * id + tr * m;
  } else {
    if (c == TangentConstruction::scaled)
      throw ParameterError("scaled tangent construction is defined for the complex field only");
    return double(p - 2) * id + tr * m;
  }
}

Index tangent_dimension(Index n, Index r, Index p, Field f) {
  return f == Field::real ? n * (r * p - r * (r + 1) / 2) : n * (2 * r * p - r * r);
}

#define GSYNC_INSTANTIATE(S)                                                                 \
  template class StiefelPoint<S>;                                                            \
  template class TangentVector<S>;                                                           \
  template Mat<S> sbd<S>(const Mat<S>&, Index);                                              \
  template BlockSymmetricMatrix<S> sbd<S>(const BlockSymmetricMatrix<S>&);                   \
  template TangentVector<S> project_tangent<S>(const StiefelPoint<S>&, const Mat<S>&);       \
  template StiefelPoint<S> project_to_manifold<S>(const Mat<S>&, Index);                     \
  template StiefelPoint<S> retract<S>(const StiefelPoint<S>&, const TangentVector<S>&,       \
                                      double);                                               \
  template Mat<S> random_stiefel_block<S>(Index, Index, Rng&);                               \
  template StiefelPoint<S> random_point<S>(Index, Index, Index, std::uint64_t);              \
  template TangentVector<S> tangent_from_gaussian<S>(const StiefelPoint<S>&, const Mat<S>&,  \
                                                     TangentConstruction);                   \
  template TangentVector<S> random_tangent<S>(const StiefelPoint<S>&, Rng&,                  \
                                              TangentConstruction);                          \
  template TangentVector<S> random_tangent<S>(const StiefelPoint<S>&, std::uint64_t,         \
                                              TangentConstruction);                          \
  template Mat<S> tangent_second_moment<S>(const Mat<S>&, const Mat<S>&, TangentConstruction);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync
