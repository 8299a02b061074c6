#pragma once

// Interacting-repon dynamics: two same-class representations near each other
// under a locally linear decoder D(x) = A x + b, trained by gradient flow.
//
//   dA/dt = -2 eta_A A r r^T      dr/dt = -eta_x A^T A r
//
// with r half the separation. Along the invariant family A = a A0 + b A0 r0 r0^T,
// r = c r0 the flow reduces to
//
//   da2/dt = -2 eta_A c^2 a2      dc/dt = -eta_x a2^2 c,     a2 = a + b,
//
// which conserves C = a2^2 / (2 eta_A) - c^2 / eta_x. The sign of C decides
// whether the pair collides (c -> 0) or the decoder dies first (a2 -> 0).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace geneft {

struct ReponReducedState {
  double a2 = 0.0;
  double c = 0.0;
  double eta_A = 1.0;
  double eta_x = 1.0;
};

struct ReponFullState {
  Eigen::MatrixXd A;  // d_out x d_in
  Eigen::VectorXd r;  // d_in
  double eta_A = 1.0;
  double eta_x = 1.0;
};

struct InitDistribution {
  double sigma_a = 1.0;
  double sigma_c = 1.0;
};

enum class CollisionLabel { Collision, NoCollision, Boundary };

const char* to_string(CollisionLabel label);

struct ReponOutcome {
  CollisionLabel label;
  double final_a2;
  double final_c;
};

/// RK4 trajectories. Element 0 is the initial state; every `stride`-th step
/// after that is recorded, and the final state is always included. The step
/// count is round(T / dt). Throws NumericalError on a non-finite state.
std::vector<ReponFullState> integrate_full(const ReponFullState& state, double dt, double T, std::size_t stride = 1);
std::vector<ReponReducedState> integrate_reduced(const ReponReducedState& state, double dt, double T,
                                                 std::size_t stride = 1);

/// Final state only.
ReponReducedState evolve_reduced(const ReponReducedState& state, double dt, double T);

double conserved_quantity(const ReponReducedState& state);

/// Default tie tolerance for classify_outcome: 1e-12 times the larger of the
/// two terms of C.
double default_boundary_tolerance(const ReponReducedState& state);

/// Asymptotic outcome predicted from the sign of C. A negative `tol` selects
/// default_boundary_tolerance.
ReponOutcome classify_outcome(const ReponReducedState& state, double tol = -1.0);

/// (2/pi) arctan((sigma_a / sigma_c) sqrt(eta_x / (2 eta_A))).
double collision_probability_closed_form(const InitDistribution& init, double eta_A, double eta_x);

struct ProbabilityEstimate {
  double estimate;
  double std_error;
};

/// Fraction of Gaussian initializations (a2, c) with C > 0, with binomial
/// standard error.
ProbabilityEstimate collision_probability_mc(const InitDistribution& init, double eta_A, double eta_x,
                                             std::size_t samples, std::uint64_t seed);

// One repon against a cluster of N coincident repons. In the centre-of-mass
// frame the decoder equation picks up a factor kappa = 2N / (N + 1):
//
//   da2/dt = -2 eta_A kappa c^2 a2      dc/dt = -eta_x a2^2 c
//
// conserving a2^2 / (2 eta_A kappa) - c^2 / eta_x. kappa = 1 at N = 1.

double cluster_coupling(int cluster_size);
double conserved_quantity_multi(const ReponReducedState& state, int cluster_size);

/// (2/pi) arctan((sigma_a / sigma_c) sqrt(eta_x / ((4 / (1 + 1/N)) eta_A))).
double multi_repon_probability(const InitDistribution& init, double eta_A, double eta_x, int cluster_size);

std::vector<ReponReducedState> integrate_multi(int cluster_size, const ReponReducedState& state, double dt, double T,
                                               std::size_t stride = 1);
ReponReducedState evolve_multi(int cluster_size, const ReponReducedState& state, double dt, double T);

struct PhaseSpaceCell {
  double a2_0;
  double c_0;
  double eta_A;
  double eta_x;
  double C;
  CollisionLabel label;
};

struct Range {
  double lo;
  double hi;
};

/// grid x grid initializations spanning the two ranges (endpoints included),
/// a2 varying fastest.
std::vector<PhaseSpaceCell> phase_space_map(Range a2_range, Range c_range, std::size_t grid, double eta_A,
                                            double eta_x);

/// Columns: a2_0, c_0, eta_A, eta_x, C, label.
void write_phase_space_csv(std::ostream& out, const std::vector<PhaseSpaceCell>& cells);

struct ProbabilityPoint {
  double ratio;  // eta_A / eta_x, i.e. decoder over encoder learning rate
  double p_closed;
  double p_mc;
  double std_error;
  InitDistribution init;
};

/// Closed form and MC estimate at each ratio, with eta_x = 1, eta_A = ratio.
std::vector<ProbabilityPoint> probability_sweep(const std::vector<InitDistribution>& inits,
                                                const std::vector<double>& ratios, std::size_t samples,
                                                std::uint64_t seed, std::size_t workers);

/// Columns: ratio, p_closed, p_mc, stderr, sigma_a, sigma_c.
void write_probability_csv(std::ostream& out, const std::vector<ProbabilityPoint>& points);

}  // namespace geneft
