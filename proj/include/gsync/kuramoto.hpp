#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gsync/block_matrix.hpp"
#include "gsync/graph.hpp"
#include "gsync/stiefel.hpp"

namespace gsync {

/// L kron I_r as a block matrix (identity measurements).
template <typename S>
BlockSymmetricMatrix<S> identity_connection_laplacian(const Graph& g, Index r);

/// Ydot_i = -P_{T_{Y_i}}( sum_j w_ij (Y_i - Y_j) ).
template <typename S>
TangentVector<S> flow_rhs(const Graph& g, const StiefelPoint<S>& y);

/// r - ||(1/n) sum_i Y_i||_F^2; zero iff all blocks coincide.
template <typename S>
double sync_error(const StiefelPoint<S>& y);

/// sum over edges of w_ij ||Y_i - Y_j||_F^2.
template <typename S>
double flow_energy(const Graph& g, const Mat<S>& y, Index r);

/// r = 1 point with block i = (cos(2 pi q i / n), sin(2 pi q i / n), 0, ...).
template <typename S>
StiefelPoint<S> twisted_state(Index n, Index q, Index p);

struct FlowOptions {
  /// Step size (<= 0: 0.1 / max_degree).
  double dt = -1.0;
  double t_max = 1e3;
  double sync_tol = 1e-10;
  /// RHS norm threshold (<= 0: 1e-10 * max_degree).
  double rhs_tol = -1.0;
  int max_halvings = 20;
  /// Relative slack on the energy comparison, at the rounding floor.
  double energy_slack = 1e-13;
  /// Largest pre-projection ||Y_i Y_i^* - I|| accepted without halving dt.
  double drift_tol = 1e-6;
  /// Time between trajectory samples.
  double sample_interval = 1.0;
};

enum class FlowTermination { synchronized, equilibrium_nonsync, time_budget };
std::string to_string(FlowTermination t);

struct FlowSample {
  double t;
  double sync_error;
  double energy;
};

template <typename S>
struct FlowReport {
  StiefelPoint<S> final_point;
  std::vector<FlowSample> samples;
  FlowTermination termination = FlowTermination::time_budget;
  long steps = 0;
  double t_final = 0.0;
  double rhs_norm = 0.0;
  /// Largest ||Y_i Y_i^* - I|| seen before re-projection.
  double max_drift = 0.0;
};

/// Classical RK4 on the ambient vector field with per-step polar projection.
/// A step that increases the energy or drifts off the manifold by more than
/// drift_tol is retried with dt halved (up to max_halvings times, then
/// NumericalError).
template <typename S>
FlowReport<S> integrate_flow(const Graph& g, const StiefelPoint<S>& y0, const FlowOptions& opt = {});

/// CSV with header t,sync_error,energy.
void write_trajectory_csv(std::ostream& out, const std::vector<FlowSample>& samples);

}  // namespace gsync
