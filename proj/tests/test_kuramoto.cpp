#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gsync/instance.hpp"
#include "gsync/kuramoto.hpp"
#include "gsync/solver.hpp"

using namespace gsync;

namespace {

template <typename S>
StiefelPoint<S> all_equal(Index n, const Mat<S>& block) {
  const Index r = block.rows();
  Mat<S> y(n * r, block.cols());
  for (Index i = 0; i < n; ++i) y.middleRows(i * r, r) = block;
  return StiefelPoint<S>(y, r);
}

template <typename S>
double max_spread(const StiefelPoint<S>& y) {
  double m = 0.0;
  for (Index i = 1; i < y.n(); ++i) m = std::max(m, (y.block(i) - y.block(0)).norm());
  return m;
}

}  // namespace

TEST_SUITE("kuramoto") {

TEST_CASE("sync error") {
  Rng rng(1);
  const auto s = all_equal<double>(7, random_stiefel_block<double>(2, 5, rng));
  CHECK(sync_error(s) <= 1e-15);

  Mat<double> anti(2, 2);
  anti << 1, 0, -1, 0;
  CHECK(sync_error(StiefelPoint<double>(anti, 1)) == doctest::Approx(1.0));

  for (Index n : {5, 12, 20}) CHECK(sync_error(twisted_state<double>(n, 1, 2)) == doctest::Approx(1.0).epsilon(1e-14));
  for (Index n : {7, 10}) CHECK(sync_error(twisted_state<double>(n, 3, 4)) == doctest::Approx(1.0).epsilon(1e-14));

  // sync_error = 0 exactly when the blocks agree to 1e-8.
  const auto c = all_equal<cdouble>(6, random_stiefel_block<cdouble>(2, 3, rng));
  CHECK(sync_error(c) <= 1e-15);
  CHECK(max_spread(c) <= 1e-8);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto y = random_point<double>(6, 2, 4, 100 + k);
    CHECK(max_spread(y) > 1e-8);
    CHECK(sync_error(y) > 1e-8);
    CHECK(sync_error(y) <= 2.0);
  }
  // Perturbation by eps moves sync_error on the order of eps^2.
  Mat<double> p = s.matrix();
  p.middleRows(0, 2) = random_stiefel_block<double>(2, 5, rng);
  const auto one_off = project_to_manifold<double>(s.matrix() + 1e-3 * (p - s.matrix()), 2);
  CHECK(sync_error(one_off) > 0.0);
  CHECK(sync_error(one_off) < 1e-5);
}

TEST_CASE("twisted states") {
  const auto t = twisted_state<double>(8, 4, 3);
  for (Index i = 0; i < 8; ++i) {
    CHECK(t.block(i)(0, 0) == doctest::Approx(i % 2 == 0 ? 1.0 : -1.0));
    CHECK(std::abs(t.block(i)(0, 1)) < 1e-15);
    CHECK(t.block(i)(0, 2) == 0.0);
  }
  CHECK(twisted_state<double>(9, 2, 2).feasibility_error() < 1e-15);
  CHECK_THROWS_AS(twisted_state<double>(8, 0, 2), ParameterError);
  CHECK_THROWS_AS(twisted_state<double>(8, 8, 2), ParameterError);
  CHECK_THROWS_AS(twisted_state<double>(8, 1, 1), ParameterError);

  for (Index n : {5, 20, 33})
    for (Index q : {Index(1), Index(2)})
      CHECK(flow_rhs(cycle_graph(n), twisted_state<double>(n, q, 3)).norm() < 1e-13);
}

TEST_CASE("flow field") {
  Rng rng(2);
  const auto s = all_equal<double>(5, random_stiefel_block<double>(2, 4, rng));
  CHECK(flow_rhs(cycle_graph(5), s).norm() == 0.0);

  // n = 2, r = 1, p = 2: the classical angular rule.
  const Graph e(2, {{0, 1, 1.0}});
  for (double a : {0.3, -2.0, 3.0}) {
    const double b = 1.1;
    Mat<double> y(2, 2);
    y << std::cos(a), std::sin(a), std::cos(b), std::sin(b);
    const auto v = flow_rhs(e, StiefelPoint<double>(y, 1)).matrix();
    const double theta_dot = -std::sin(a) * v(0, 0) + std::cos(a) * v(0, 1);
    CHECK(theta_dot == doctest::Approx(-std::sin(a - b)).epsilon(1e-14));
    CHECK(std::abs(std::cos(a) * v(0, 0) + std::sin(a) * v(0, 1)) < 1e-15);
  }

  // -1/2 the solver gradient on identity measurements; tangent; scales together.
  const Graph g = erdos_renyi_graph(15, 0.3, 3);
  const auto lr = identity_connection_laplacian<double>(g, 2);
  const auto lc = identity_connection_laplacian<cdouble>(g, 2);
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto y = random_point<double>(15, 2, 4, 10 + k);
    const auto f = flow_rhs(g, y);
    CHECK((f.matrix() + 0.5 * gradient(lr, y).matrix()).norm() < 1e-12);
    CHECK(f.tangency_error(y) < 1e-12);
    const auto yc = random_point<cdouble>(15, 2, 3, 20 + k);
    CHECK((flow_rhs(g, yc).matrix() + 0.5 * gradient(lc, yc).matrix()).norm() < 1e-12);
  }

  const Mat<double> dense = identity_connection_laplacian<double>(g, 1).to_dense();
  CHECK((dense - laplacian(g)).norm() == 0.0);
}

TEST_CASE("flow energy") {
  const Graph g = cycle_graph(6);
  const auto y = random_point<double>(6, 2, 3, 4);
  double e = 0.0;
  for (const auto& ed : g.edges()) e += (y.block(ed.i) - y.block(ed.j)).squaredNorm();
  CHECK(flow_energy(g, y.matrix(), 2) == doctest::Approx(e).epsilon(1e-14));
  // Equals <L kron I, Y Y^*> up to the factor from counting each edge once.
  const auto l = identity_connection_laplacian<double>(g, 2);
  CHECK(flow_energy(g, y.matrix(), 2) == doctest::Approx(objective(l, y)).epsilon(1e-13));
}

TEST_CASE("synchronized start terminates immediately") {
  Rng rng(5);
  const auto s = all_equal<double>(10, random_stiefel_block<double>(2, 4, rng));
  const auto rep = integrate_flow(cycle_graph(10), s);
  CHECK(rep.termination == FlowTermination::synchronized);
  CHECK(rep.t_final == 0.0);
  CHECK(rep.steps == 0);
}

TEST_CASE("random starts on C10 synchronize with monotone energy") {
  const Graph c10 = cycle_graph(10);
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto rep = integrate_flow(c10, random_point<double>(10, 2, 4, 30 + k));
    CHECK(rep.termination == FlowTermination::synchronized);
    CHECK(sync_error(rep.final_point) <= 1e-10);
    CHECK(rep.final_point.feasibility_error() < 1e-10);
    CHECK(rep.max_drift <= 1e-6);
    REQUIRE(rep.samples.size() >= 2);
    for (std::size_t j = 1; j < rep.samples.size(); ++j)
      CHECK(rep.samples[j].energy <= rep.samples[j - 1].energy * (1.0 + 1e-13));
  }
  const auto cr = integrate_flow(c10, random_point<cdouble>(10, 2, 3, 40));
  CHECK(cr.termination == FlowTermination::synchronized);
}

TEST_CASE("twisted start on C20 is a non-synchronized equilibrium") {
  const auto rep = integrate_flow(cycle_graph(20), twisted_state<double>(20, 1, 2));
  CHECK(rep.termination == FlowTermination::equilibrium_nonsync);
  CHECK(rep.rhs_norm <= 1e-10 * 2.0);
  CHECK(sync_error(rep.final_point) > 1e-10);
}

TEST_CASE("time budget and option errors") {
  FlowOptions opt;
  opt.t_max = 0.5;
  const auto rep = integrate_flow(cycle_graph(30), random_point<double>(30, 1, 3, 50), opt);
  CHECK(rep.termination == FlowTermination::time_budget);
  CHECK(rep.t_final >= 0.5);
  CHECK(to_string(rep.termination) == "time_budget");

  Mat<double> bad = Mat<double>::Ones(4, 2);
  CHECK_THROWS_AS(integrate_flow(cycle_graph(4), StiefelPoint<double>(bad, 1)), ParameterError);
}

TEST_CASE("trajectory csv") {
  std::ostringstream out;
  write_trajectory_csv(out, {{0.0, 0.5, 2.0}, {1.0, 0.25, 1.0}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,sync_error,energy");
  std::getline(in, line);
  CHECK(line == "0,0.5,2");
}

}  // TEST_SUITE
