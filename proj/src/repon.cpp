#include "geneft/repon.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "geneft/common.hpp"

namespace geneft {

const char* to_string(CollisionLabel label) {
  switch (label) {
    case CollisionLabel::Collision:
      return "Collision";
    case CollisionLabel::NoCollision:
      return "NoCollision";
    case CollisionLabel::Boundary:
      return "Boundary";
  }
  return "?";
}

namespace {

void check_rates(double eta_A, double eta_x) {
  if (eta_A < 0.0 || eta_x < 0.0 || (eta_A == 0.0 && eta_x == 0.0)) {
    throw std::invalid_argument("repon: learning rates must be non-negative and not both zero");
  }
}

std::size_t step_count(double dt, double T) {
  if (!(dt > 0.0)) throw std::invalid_argument("repon: dt must be positive");
  if (!(T >= dt)) throw std::invalid_argument("repon: T must be at least dt");
  return static_cast<std::size_t>(std::llround(T / dt));
}

[[noreturn]] void non_finite(std::size_t step) {
  throw NumericalError("repon: non-finite state at step " + std::to_string(step));
}

// Reduced right-hand side with decoder coupling kappa.
struct ReducedFlow {
  double eta_A, eta_x, kappa;
  void operator()(double a2, double c, double& da2, double& dc) const {
    da2 = -2.0 * eta_A * kappa * c * c * a2;
    dc = -eta_x * a2 * a2 * c;
  }
};

void rk4_reduced(const ReducedFlow& f, double dt, double& a2, double& c) {
  double k1a, k1c, k2a, k2c, k3a, k3c, k4a, k4c;
  f(a2, c, k1a, k1c);
  f(a2 + 0.5 * dt * k1a, c + 0.5 * dt * k1c, k2a, k2c);
  f(a2 + 0.5 * dt * k2a, c + 0.5 * dt * k2c, k3a, k3c);
  f(a2 + dt * k3a, c + dt * k3c, k4a, k4c);
  a2 += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
  c += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
}

std::vector<ReponReducedState> run_reduced(const ReponReducedState& s0, double kappa, double dt, double T,
                                           std::size_t stride, bool keep_path) {
  check_rates(s0.eta_A, s0.eta_x);
  const std::size_t steps = step_count(dt, T);
  if (stride == 0) stride = 1;
  const ReducedFlow flow{s0.eta_A, s0.eta_x, kappa};
  std::vector<ReponReducedState> path;
  if (keep_path) {
    path.reserve(steps / stride + 2);
    path.push_back(s0);
  }
  ReponReducedState s = s0;
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_reduced(flow, dt, s.a2, s.c);
    if (!std::isfinite(s.a2) || !std::isfinite(s.c)) non_finite(k);
    if (keep_path && (k % stride == 0 || k == steps)) path.push_back(s);
  }
  if (!keep_path) path.push_back(s);
  return path;
}

}  // namespace

std::vector<ReponReducedState> integrate_reduced(const ReponReducedState& state, double dt, double T,
                                                 std::size_t stride) {
  return run_reduced(state, 1.0, dt, T, stride, true);
}

ReponReducedState evolve_reduced(const ReponReducedState& state, double dt, double T) {
  return run_reduced(state, 1.0, dt, T, 1, false).back();
}

std::vector<ReponFullState> integrate_full(const ReponFullState& state, double dt, double T, std::size_t stride) {
  check_rates(state.eta_A, state.eta_x);
  if (state.A.cols() != state.r.size()) throw std::invalid_argument("integrate_full: A must have r.size() columns");
  const std::size_t steps = step_count(dt, T);
  if (stride == 0) stride = 1;
  const double eta_A = state.eta_A, eta_x = state.eta_x;

  auto dA = [&](const Eigen::MatrixXd& A, const Eigen::VectorXd& r) -> Eigen::MatrixXd {
    return -2.0 * eta_A * (A * r) * r.transpose();
  };
  auto dr = [&](const Eigen::MatrixXd& A, const Eigen::VectorXd& r) -> Eigen::VectorXd {
    return -eta_x * (A.transpose() * (A * r));
  };

  std::vector<ReponFullState> path;
  path.reserve(steps / stride + 2);
  path.push_back(state);
  Eigen::MatrixXd A = state.A;
  Eigen::VectorXd r = state.r;
  for (std::size_t k = 1; k <= steps; ++k) {
    const Eigen::MatrixXd kA1 = dA(A, r);
    const Eigen::VectorXd kr1 = dr(A, r);
    const Eigen::MatrixXd A2 = A + 0.5 * dt * kA1;
    const Eigen::VectorXd r2 = r + 0.5 * dt * kr1;
    const Eigen::MatrixXd kA2 = dA(A2, r2);
    const Eigen::VectorXd kr2 = dr(A2, r2);
    const Eigen::MatrixXd A3 = A + 0.5 * dt * kA2;
    const Eigen::VectorXd r3 = r + 0.5 * dt * kr2;
    const Eigen::MatrixXd kA3 = dA(A3, r3);
    const Eigen::VectorXd kr3 = dr(A3, r3);
    const Eigen::MatrixXd A4 = A + dt * kA3;
    const Eigen::VectorXd r4 = r + dt * kr3;
    const Eigen::MatrixXd kA4 = dA(A4, r4);
    const Eigen::VectorXd kr4 = dr(A4, r4);
    A += dt / 6.0 * (kA1 + 2.0 * kA2 + 2.0 * kA3 + kA4);
    r += dt / 6.0 * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
    if (!A.allFinite() || !r.allFinite()) non_finite(k);
    if (k % stride == 0 || k == steps) path.push_back(ReponFullState{A, r, eta_A, eta_x});
  }
  return path;
}

double conserved_quantity(const ReponReducedState& s) {
  return s.a2 * s.a2 / (2.0 * s.eta_A) - s.c * s.c / s.eta_x;
}

double default_boundary_tolerance(const ReponReducedState& s) {
  const double decoder_term = s.a2 * s.a2 / (2.0 * s.eta_A);
  const double separation_term = s.c * s.c / s.eta_x;
  return 1e-12 * std::max(decoder_term, separation_term);
}

ReponOutcome classify_outcome(const ReponReducedState& s, double tol) {
  if (tol < 0.0) tol = default_boundary_tolerance(s);
  const double C = conserved_quantity(s);
  if (std::abs(C) <= tol) return {CollisionLabel::Boundary, 0.0, 0.0};
  if (C > 0.0) return {CollisionLabel::Collision, std::copysign(std::sqrt(2.0 * s.eta_A * C), s.a2), 0.0};
  return {CollisionLabel::NoCollision, 0.0, std::copysign(std::sqrt(-s.eta_x * C), s.c)};
}

double collision_probability_closed_form(const InitDistribution& init, double eta_A, double eta_x) {
  if (!(init.sigma_a > 0 && init.sigma_c > 0 && eta_A > 0 && eta_x > 0)) {
    throw std::invalid_argument("collision_probability_closed_form: parameters must be positive");
  }
  return 2.0 / std::numbers::pi * std::atan(init.sigma_a / init.sigma_c * std::sqrt(eta_x / (2.0 * eta_A)));
}

ProbabilityEstimate collision_probability_mc(const InitDistribution& init, double eta_A, double eta_x,
                                             std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("collision_probability_mc: samples must be >= 1");
  if (!(init.sigma_a > 0 && init.sigma_c > 0 && eta_A > 0 && eta_x > 0)) {
    throw std::invalid_argument("collision_probability_mc: parameters must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> da(0.0, init.sigma_a), dc(0.0, init.sigma_c);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double a2 = da(rng);
    const double c = dc(rng);
    if (conserved_quantity({a2, c, eta_A, eta_x}) > 0.0) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

double cluster_coupling(int cluster_size) {
  if (cluster_size < 1) throw std::invalid_argument("repon: cluster size must be >= 1");
  return 2.0 * cluster_size / (cluster_size + 1.0);
}

double conserved_quantity_multi(const ReponReducedState& s, int cluster_size) {
  const double kappa = cluster_coupling(cluster_size);
  return s.a2 * s.a2 / (2.0 * s.eta_A * kappa) - s.c * s.c / s.eta_x;
}

double multi_repon_probability(const InitDistribution& init, double eta_A, double eta_x, int cluster_size) {
  if (cluster_size < 1) throw std::invalid_argument("multi_repon_probability: N must be >= 1");
  if (!(init.sigma_a > 0 && init.sigma_c > 0 && eta_A > 0 && eta_x > 0)) {
    throw std::invalid_argument("multi_repon_probability: parameters must be positive");
  }
  const double effective = 4.0 / (1.0 + 1.0 / cluster_size) * eta_A;
  return 2.0 / std::numbers::pi * std::atan(init.sigma_a / init.sigma_c * std::sqrt(eta_x / effective));
}

std::vector<ReponReducedState> integrate_multi(int cluster_size, const ReponReducedState& state, double dt, double T,
                                               std::size_t stride) {
  return run_reduced(state, cluster_coupling(cluster_size), dt, T, stride, true);
}

ReponReducedState evolve_multi(int cluster_size, const ReponReducedState& state, double dt, double T) {
  return run_reduced(state, cluster_coupling(cluster_size), dt, T, 1, false).back();
}

std::vector<PhaseSpaceCell> phase_space_map(Range a2_range, Range c_range, std::size_t grid, double eta_A,
                                            double eta_x) {
  if (grid < 2) throw std::invalid_argument("phase_space_map: grid must be >= 2");
  if (!(eta_A > 0 && eta_x > 0)) throw std::invalid_argument("phase_space_map: learning rates must be positive");
  std::vector<PhaseSpaceCell> cells;
  cells.reserve(grid * grid);
  const double steps = static_cast<double>(grid - 1);
  for (std::size_t ic = 0; ic < grid; ++ic) {
    const double c = c_range.lo + (c_range.hi - c_range.lo) * static_cast<double>(ic) / steps;
    for (std::size_t ia = 0; ia < grid; ++ia) {
      const double a2 = a2_range.lo + (a2_range.hi - a2_range.lo) * static_cast<double>(ia) / steps;
      const ReponReducedState s{a2, c, eta_A, eta_x};
      cells.push_back({a2, c, eta_A, eta_x, conserved_quantity(s), classify_outcome(s).label});
    }
  }
  return cells;
}

void write_phase_space_csv(std::ostream& out, const std::vector<PhaseSpaceCell>& cells) {
  CsvWriter csv(out);
  csv.header({"a2_0", "c_0", "eta_A", "eta_x", "C", "label"});
  for (const auto& c : cells) {
    csv.field(c.a2_0).field(c.c_0).field(c.eta_A).field(c.eta_x).field(c.C).field(to_string(c.label));
    csv.end_row();
  }
}

std::vector<ProbabilityPoint> probability_sweep(const std::vector<InitDistribution>& inits,
                                                const std::vector<double>& ratios, std::size_t samples,
                                                std::uint64_t seed, std::size_t workers) {
  std::vector<ProbabilityPoint> points(inits.size() * ratios.size());
  parallel_for(points.size(), workers, [&](std::size_t k) {
    const InitDistribution& init = inits[k / ratios.size()];
    const double ratio = ratios[k % ratios.size()];
    const auto mc = collision_probability_mc(init, ratio, 1.0, samples, derive_seed(seed, {k}));
    points[k] = {ratio, collision_probability_closed_form(init, ratio, 1.0), mc.estimate, mc.std_error, init};
  });
  return points;
}

void write_probability_csv(std::ostream& out, const std::vector<ProbabilityPoint>& points) {
  CsvWriter csv(out);
  csv.header({"ratio", "p_closed", "p_mc", "stderr", "sigma_a", "sigma_c"});
  for (const auto& p : points) {
    csv.field(p.ratio).field(p.p_closed).field(p.p_mc).field(p.std_error).field(p.init.sigma_a).field(p.init.sigma_c);
    csv.end_row();
  }
}

}  // namespace geneft
