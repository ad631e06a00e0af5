#include "gsync/kuramoto.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "gsync/kernels.hpp"

namespace gsync {

template <typename S>
BlockSymmetricMatrix<S> identity_connection_laplacian(const Graph& g, Index r) {
  std::vector<Mat<S>> diag;
  for (Index i = 0; i < g.n(); ++i) diag.push_back(g.degree(i) * Mat<S>::Identity(r, r));
  std::vector<typename BlockSymmetricMatrix<S>::UpperBlock> upper;
  for (const auto& e : g.edges()) upper.push_back({e.i, e.j, -e.w * Mat<S>::Identity(r, r)});
  return BlockSymmetricMatrix<S>(g.n(), r, std::move(diag), std::move(upper));
}

namespace {

template <typename S>
Mat<S> rhs(const BlockSymmetricMatrix<S>& lz, const Mat<S>& y, Index r) {
  Mat<S> w;
  kernels::block_apply(lz, y, w);
  Mat<S> out = kernels::project_tangent(y, w, r);
  out *= -1.0;
  return out;
}

}  // namespace

template <typename S>
TangentVector<S> flow_rhs(const Graph& g, const StiefelPoint<S>& y) {
  if (g.n() != y.n()) throw ParameterError("flow_rhs: graph and point sizes differ");
  return TangentVector<S>(rhs(identity_connection_laplacian<S>(g, y.r()), y.matrix(), y.r()), y.r());
}

template <typename S>
double sync_error(const StiefelPoint<S>& y) {
  Mat<S> mean = Mat<S>::Zero(y.r(), y.p());
  for (Index i = 0; i < y.n(); ++i) mean += y.block(i);
  mean /= double(y.n());
  return std::max(0.0, double(y.r()) - mean.squaredNorm());
}

template <typename S>
double flow_energy(const Graph& g, const Mat<S>& y, Index r) {
  double e = 0.0;
  for (const auto& ed : g.edges())
    e += ed.w * (y.middleRows(ed.i * r, r) - y.middleRows(ed.j * r, r)).squaredNorm();
  return e;
}

template <typename S>
StiefelPoint<S> twisted_state(Index n, Index q, Index p) {
  if (p < 2) throw ParameterError("twisted state needs p >= 2");
  if (q < 1 || q >= n) throw ParameterError("twisted state needs 1 <= q < n");
  Mat<S> y = Mat<S>::Zero(n, p);
  for (Index i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * double(q) * double(i) / double(n);
    y(i, 0) = std::cos(th);
    y(i, 1) = std::sin(th);
  }
  return StiefelPoint<S>(std::move(y), 1);
}

std::string to_string(FlowTermination t) {
  switch (t) {
    case FlowTermination::synchronized: return "synchronized";
    case FlowTermination::equilibrium_nonsync: return "equilibrium_nonsync";
    case FlowTermination::time_budget: return "time_budget";
  }
  return "?";
}

template <typename S>
FlowReport<S> integrate_flow(const Graph& g, const StiefelPoint<S>& y0, const FlowOptions& opt) {
  if (g.n() != y0.n()) throw ParameterError("integrate_flow: graph and point sizes differ");
  if (y0.feasibility_error() > 1e-8) throw ParameterError("integrate_flow: infeasible start");
  const Index r = y0.r();
  const double maxdeg = std::max(g.max_degree(), 1e-300);
  const double dt0 = opt.dt > 0.0 ? opt.dt : 0.1 / maxdeg;
  const double rhs_tol = opt.rhs_tol > 0.0 ? opt.rhs_tol : 1e-10 * maxdeg;
  const auto lz = identity_connection_laplacian<S>(g, r);

  FlowReport<S> rep;
  Mat<S> y = y0.matrix();
  double t = 0.0;
  double energy = flow_energy(g, y, r);
  double next_sample = 0.0;

  while (true) {
    const StiefelPoint<S> cur(y, r);
    const double se = sync_error(cur);
    const Mat<S> k1 = rhs(lz, y, r);
    rep.rhs_norm = k1.norm();
    if (t >= next_sample) {
      rep.samples.push_back({t, se, energy});
      next_sample = t + opt.sample_interval;
    }
    if (se <= opt.sync_tol) {
      rep.termination = FlowTermination::synchronized;
      break;
    }
    if (rep.rhs_norm <= rhs_tol) {
      rep.termination = FlowTermination::equilibrium_nonsync;
      break;
    }
    if (t >= opt.t_max) {
      rep.termination = FlowTermination::time_budget;
      break;
    }

    double dt = std::min(dt0, opt.t_max - t);
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, dt *= 0.5) {
      const Mat<S> k2 = rhs(lz, Mat<S>(y + 0.5 * dt * k1), r);
      const Mat<S> k3 = rhs(lz, Mat<S>(y + 0.5 * dt * k2), r);
      const Mat<S> k4 = rhs(lz, Mat<S>(y + dt * k3), r);
      const Mat<S> raw = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double drift = StiefelPoint<S>(raw, r).feasibility_error();
      if (drift > opt.drift_tol) continue;
      Mat<S> yn;
      try {
        yn = kernels::blockwise_polar(raw, r);
      } catch (const NumericalError&) {
        continue;
      }
      const double en = flow_energy(g, yn, r);
      if (en <= energy + opt.energy_slack * std::max(energy, 1e-300)) {
        rep.max_drift = std::max(rep.max_drift, drift);
        y = std::move(yn);
        energy = en;
        t += dt;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw NumericalError("integrate_flow: step size underflow after repeated halving", rep.steps,
                           energy);
    ++rep.steps;
  }
  if (rep.samples.empty() || rep.samples.back().t != t)
    rep.samples.push_back({t, sync_error(StiefelPoint<S>(y, r)), energy});
  rep.final_point = StiefelPoint<S>(std::move(y), r);
  rep.t_final = t;
  return rep;
}

void write_trajectory_csv(std::ostream& out, const std::vector<FlowSample>& samples) {
  out << "t,sync_error,energy\n" << std::setprecision(17);
  for (const auto& s : samples) out << s.t << ',' << s.sync_error << ',' << s.energy << '\n';
}

#define GSYNC_INSTANTIATE(S)                                                                  \
  template BlockSymmetricMatrix<S> identity_connection_laplacian<S>(const Graph&, Index);     \
  template TangentVector<S> flow_rhs<S>(const Graph&, const StiefelPoint<S>&);                \
  template double sync_error<S>(const StiefelPoint<S>&);                                      \
  template double flow_energy<S>(const Graph&, const Mat<S>&, Index);                         \
  template StiefelPoint<S> twisted_state<S>(Index, Index, Index);                             \
  template FlowReport<S> integrate_flow<S>(const Graph&, const StiefelPoint<S>&,              \
                                           const FlowOptions&);

GSYNC_INSTANTIATE(double)
GSYNC_INSTANTIATE(cdouble)
#undef GSYNC_INSTANTIATE

}  // namespace gsync
