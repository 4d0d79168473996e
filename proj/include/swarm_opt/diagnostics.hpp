#pragma once

#include <span>
#include <vector>

#include "swarm_opt/engine.hpp"

namespace swarm {

/// Per-coordinate matrices of the transformed system phi(k+1) = Psi phi(k) - grad F,
/// with phi = [r_1, z_1, ..., r_n, z_n] and z_i = r_i + (2/p_i) v_i.
struct SystemMatrices {
  Mat E;         // blocks [[1,0],[1,2/p]]
  Mat A;         // blocks built from p, b, T
  Mat Lambda;    // diag(sigma)
  Mat W;         // [[0,0],[T,0]]
  Mat coupling;  // A - Lambda L (x) W
  Mat Psi;       // E(k+1) E(k)^-1 coupling
};

/// Assembles the step-k matrices from the agents' records. For Algorithm B
/// p is constant, E(k+1)E(k)^-1 = I and the consensus coupling is halved.
SystemMatrices build_psi(std::span<const StepRecord> records, const WeightedDigraph& g, double T,
                         Algorithm algorithm = Algorithm::A);

std::vector<StepRecord> records_at(const Trajectory& traj, long k);
Mat psi_at(const Trajectory& traj, const GraphSchedule& schedule, double T, long k);

/// phi for one coordinate at step k.
Vec transformed_state(const Trajectory& traj, long k, Eigen::Index coord);

struct ReplayReport {
  double max_residual = 0.0;
  long worst_step = -1;
  long first_step_over_tol = -1;
};

/// Largest deviation between the logged phi(k+1) and Psi(k) phi(k) - grad F(k)
/// over every step and coordinate, plus the first step whose residual exceeds
/// `tol`. Algorithm A logs only.
ReplayReport replay_check(const Trajectory& traj, const GraphSchedule& schedule, double T, double tol = 1e-9);

/// Gamma(to, from) = Psi(to) ... Psi(from), multiplied with compensated sums.
Mat transition_product(const Trajectory& traj, const GraphSchedule& schedule, double T, long from, long to);

/// Matrix product with Neumaier-compensated inner products.
Mat compensated_product(const Mat& a, const Mat& b);

struct StochasticityReport {
  std::vector<double> row_sum_err;  // per step, max_i |sum_j Psi_ij - 1|
  std::vector<double> min_entry;    // per step
  double max_row_sum_err = 0.0;
  long worst_row_step = -1;
  double min_entry_overall = 0.0;
  long worst_entry_step = -1;
  // 1^T Psi = 1^T, checked on steps where every sigma equals 1.
  double max_col_sum_err = 0.0;
  long col_checked_steps = 0;
  // Smallest nonzero entry of A - Lambda L (x) W over the run.
  double nonzero_floor = 0.0;
  long nonzero_floor_step = -1;
  double min_sigma = 1.0;
};

StochasticityReport stochasticity(const Trajectory& traj, const GraphSchedule& schedule, double T);

struct WindowReport {
  long from = 0;
  long to = 0;
  double row_sum_err = 0.0;
  double min_entry = 0.0;
  int positive_column = -1;  // column whose minimum entry is largest
  double mu_hat = 0.0;       // that minimum
};

/// Gamma over consecutive windows [j*len, (j+1)*len - 1] inside the log.
std::vector<WindowReport> window_products(const Trajectory& traj, const GraphSchedule& schedule, double T, long len);

struct MetricsSeries {
  std::vector<double> consensus_spread;
  std::vector<double> optimality_gap;
  std::vector<double> y_ratio_spread;
  std::vector<double> state_envelope;
};

/// One entry per logged state, k = 0..steps.
MetricsSeries compute_metrics(const Trajectory& traj, const TeamObjective& team, const Vec& optimum);

/// Max over coordinates of (max - min) over the 2n entries of phi(k).
double phi_spread(const Trajectory& traj, long k);

/// Sup-norm of grad F(k) (z entries 2 sigma theta / p(k+1)).
double grad_f_norm(const Trajectory& traj, long k);

struct ContractionReport {
  long window = 0;
  long checks = 0;
  long violations = 0;
  long first_violation = -1;
  double epsilon_final = 0.0;  // sup of |grad F| from the last checkpoint on
  double worst_excess = 0.0;   // largest amount by which a check exceeded its slack
};

/// Spread at consecutive checkpoints j*window must satisfy
/// spread(next) <= spread(this) + 8 n (eta + 1) eps, where eps is the sup of
/// |grad F| from the checkpoint on.
ContractionReport spread_contraction(const Trajectory& traj, long window, long eta);

struct InvariantCheck {
  std::string name;
  bool passed = true;
  long first_step = -1;  // first offending step, -1 when none
  std::string detail;
};

/// Per-step invariants of a logged run: velocity feasibility, position
/// feasibility (agents with a position region under Algorithm B), sigma
/// bounds, and for Algorithm A gain monotonicity, p*T < 1 and sigma = 1 on
/// steps where the gradient was applied.
std::vector<InvariantCheck> trajectory_invariants(const Trajectory& traj, const Scenario& sc);

}  // namespace swarm
