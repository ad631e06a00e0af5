#include <cmath>
#include <numbers>

#include "gsync/experiment.hpp"
#include "gsync/kernels.hpp"

namespace gsync {

namespace {

template <typename S>
BlockSymmetricMatrix<S> noisy_lhat(const Graph& g, Index r, double sigma, std::uint64_t seed,
                                   SyncInstance<S>* keep = nullptr) {
  auto inst = make_instance(g, sample_ground_truth<S>(g.n(), r, seed), NoiseModel::gaussian(sigma),
                            seed + 1);
  auto l = connection_laplacian(inst.measurements);
  if (keep) *keep = std::move(inst);
  return l;
}

/// Monte Carlo mean of Ydot_i Ydot_j^* against the closed form; relative
/// Frobenius error over the full block matrix.
template <typename S>
double second_moment_error(Index r, Index p, int draws, std::uint64_t seed) {
  const Index n = 3;
  const auto y = random_point<S>(n, r, p, seed);
  Mat<S> acc = Mat<S>::Zero(n * r, n * r);
  Rng rng(seed + 7);
  for (int k = 0; k < draws; ++k) {
    const Mat<S> v = random_tangent(y, rng).matrix();
    acc.noalias() += v * v.adjoint();
  }
  acc /= double(draws);
  Mat<S> exact(n * r, n * r);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      exact.block(i * r, j * r, r, r) = tangent_second_moment<S>(y.block(i), y.block(j));
  return (acc - exact).norm() / exact.norm();
}

template <typename S>
double gradient_fd_error(std::uint64_t seed) {
  const Graph g = circulant_graph(6, 2);
  const auto lhat = noisy_lhat<S>(g, 2, 0.3, seed);
  const auto y = random_point<S>(6, 2, 4, seed + 2);
  const auto v = random_tangent(y, seed + 3);
  const double h = 1e-5;
  const double fd = (objective(lhat, retract(y, v, h)) - objective(lhat, retract(y, v, -h))) / (2 * h);
  const double exact = real_inner(gradient(lhat, y).matrix(), v.matrix());
  return std::abs(fd - exact) / std::max(1.0, std::abs(exact));
}

template <typename S>
double hessian_fd_error(std::uint64_t seed) {
  const Graph g = circulant_graph(6, 2);
  const auto lhat = noisy_lhat<S>(g, 2, 0.3, seed);
  const auto y = random_point<S>(6, 2, 4, seed + 2);
  const auto v = random_tangent(y, seed + 3);
  const double h = 1e-4;
  const double f0 = objective(lhat, y);
  const double fd =
      (objective(lhat, retract(y, v, h)) - 2 * f0 + objective(lhat, retract(y, v, -h))) / (h * h);
  const double exact = hess_quadratic(lhat, y, v);
  return std::abs(fd - exact) / std::max(1.0, std::abs(exact));
}

template <typename S>
double hessian_symmetry_error(std::uint64_t seed) {
  const Graph g = circulant_graph(6, 2);
  const auto lhat = noisy_lhat<S>(g, 2, 0.3, seed);
  const auto y = random_point<S>(6, 2, 4, seed + 2);
  const auto u = random_tangent(y, seed + 3);
  const auto v = random_tangent(y, seed + 4);
  const HessianOperator<S> h(lhat, y);
  const double a = real_inner(h.apply(u.matrix()), v.matrix());
  const double b = real_inner(u.matrix(), h.apply(v.matrix()));
  return std::abs(a - b) / std::max(1.0, u.norm() * v.norm() * operator_norm(lhat));
}

}  // namespace

std::vector<SelftestCheck> run_selftest(double scale) {
  std::vector<SelftestCheck> out;
  auto add = [&](std::string name, double err, double tol) {
    const double t = tol * scale;
    out.push_back({std::move(name), err, t, err < t});
  };

  {
    const auto y = random_point<double>(5, 2, 4, 11);
    Rng rng(13);
    const Mat<double> w = gaussian_matrix<double>(10, 4, rng);
    const Mat<double> pw = project_tangent(y, w).matrix();
    add("tangent projection is idempotent", (project_tangent(y, pw).matrix() - pw).norm(), 1e-12);
    add("tangent projection output is tangent", TangentVector<double>(pw, 2).tangency_error(y), 1e-12);
    add("retraction stays feasible", retract(y, TangentVector<double>(pw, 2), 0.7).feasibility_error(),
        1e-12);
  }
  {
    const auto y = random_point<cdouble>(4, 2, 3, 12);
    Rng rng(14);
    const Mat<cdouble> w = gaussian_matrix<cdouble>(8, 3, rng);
    const Mat<cdouble> pw = project_tangent(y, w).matrix();
    add("complex tangent projection is idempotent", (project_tangent(y, pw).matrix() - pw).norm(), 1e-12);
  }

  add("second moment, real r=2 p=4", second_moment_error<double>(2, 4, 20000, 21), 0.05);
  add("second moment, complex r=1 p=3", second_moment_error<cdouble>(1, 3, 20000, 22), 0.05);

  add("gradient vs finite difference (real)", gradient_fd_error<double>(31), 1e-5);
  add("gradient vs finite difference (complex)", gradient_fd_error<cdouble>(32), 1e-5);
  add("Hessian form vs finite difference (real)", hessian_fd_error<double>(33), 1e-3);
  add("Hessian form vs finite difference (complex)", hessian_fd_error<cdouble>(34), 1e-3);
  add("Hessian self-adjoint (real)", hessian_symmetry_error<double>(35), 1e-12);
  add("Hessian self-adjoint (complex)", hessian_symmetry_error<cdouble>(36), 1e-12);

  {
    SyncInstance<double> inst;
    const auto l = noisy_lhat<double>(circulant_graph(8, 4), 2, 0.2, 41, &inst);
    const auto l2 = connection_laplacian_from_truth(inst);
    add("Laplacian assembled two ways agrees", (l.to_dense() - l2.to_dense()).norm(), 1e-12);

    const auto y = random_point<double>(8, 2, 5, 42);
    const auto d = residual_decomposition(inst.truth, y.matrix());
    const double lhs = correlation(inst.truth, y.matrix()).raw;
    const double rhs = 8.0 * 8.0 * 2.0 - 8.0 * d.W.squaredNorm();
    add("correlation / residual identity", std::abs(lhs - rhs) / 128.0, 1e-12);

    Mat<double> par, ser;
    kernels::block_apply(l, y.matrix(), par);
    kernels::block_apply_serial(l, y.matrix(), ser);
    add("parallel and serial block products agree", (par - ser).cwiseAbs().maxCoeff(), 1e-14);
  }
  {
    const Graph g = cycle_graph(8);
    const double exact = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 8.0);
    add("Fiedler value of C8", std::abs(laplacian_summary(g).lambda2 - exact), 1e-12);

    Mat<double> z(16, 2);
    for (Index i = 0; i < 8; ++i) z.middleRows(i * 2, 2).setIdentity();
    const auto id = make_instance<double>(g, z, NoiseModel{}, 0);
    const auto lz = connection_laplacian(id.measurements);
    const auto y = random_point<double>(8, 2, 4, 51);
    const double err = (flow_rhs(g, y).matrix() + 0.5 * gradient(lz, y).matrix()).norm();
    add("flow field is -1/2 the gradient", err, 1e-12);
  }
  {
    const Graph g = circulant_graph(20, 4);
    SyncInstance<double> inst;
    auto l = noisy_lhat<double>(g, 2, 0.0, 61, &inst);
    const auto rep = solve(l, random_point<double>(20, 2, 4, 62));
    add("noiseless solve recovers the truth",
        std::abs(1.0 - correlation(inst.truth, rep.y.matrix()).normalized), 1e-9);
  }
  return out;
}

}  // namespace gsync
