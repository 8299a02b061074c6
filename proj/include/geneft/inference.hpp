#pragma once

// Statics: logical closure of partial relation knowledge, Monte Carlo
// estimates of the best attainable accuracy, and the bucket-filling formulas.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "geneft/relations.hpp"

namespace geneft {

enum class Cell : std::uint8_t { Unknown = 0, Known0 = 1, Known1 = 2 };

enum class Property : unsigned {
  None = 0,
  Symmetric = 1u << 0,
  Reflexive = 1u << 1,
  Transitive = 1u << 2,
  Antisymmetric = 1u << 3,  // strict order: R(i,j)=1 => R(j,i)=0, and R(i,i)=0
};

constexpr Property operator|(Property a, Property b) {
  return static_cast<Property>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has(Property set, Property p) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(p)) != 0;
}

inline constexpr Property kEquivalence = Property::Symmetric | Property::Reflexive | Property::Transitive;
inline constexpr Property kStrictOrder = Property::Antisymmetric | Property::Transitive;

/// Thrown when closure derives both 0 and 1 for the same cell.
class ContradictionError : public std::runtime_error {
 public:
  ContradictionError(int row, int col);
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

/// Per-pair ternary knowledge about a relation plus the properties it is
/// known to satisfy.
class KnowledgeState {
 public:
  KnowledgeState(int n, Property properties);

  int n() const { return n_; }
  Property properties() const { return properties_; }
  Cell operator()(int i, int j) const { return cells_[index(i, j)]; }
  const std::vector<Cell>& cells() const { return cells_; }

  /// Records a value. Throws ContradictionError if the opposite is known.
  /// Returns true when the cell changed.
  bool set(int i, int j, bool value);

  std::size_t known_count() const;

  friend bool operator==(const KnowledgeState&, const KnowledgeState&) = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_;
  Property properties_;
  std::vector<Cell> cells_;
};

/// Knowledge obtained by observing `pairs` of `truth`.
KnowledgeState observe(const RelationMatrix& truth, const std::vector<PairIndex>& pairs, Property properties);

/// Fixed point of the inference rules enabled by the state's properties.
/// With both Symmetric and Transitive, negative facts also propagate through
/// known equalities: R(i,j)=1 and R(j,k)=0 give R(i,k)=0.
KnowledgeState closure(KnowledgeState state);

/// Probability of guessing a non-inferable entry: 1/k, 1/2, 1/3.
/// Throws std::invalid_argument for custom relations.
double guess_probability(const RelationSpec& spec);

/// f(m) = 1 - (1 - 1/b)^m.
double analytic_inferable_fraction(double m, double b);

/// f_UB(m) = f(m) + max(p*, 1-p*) (1 - f(m)).
double analytic_upper_bound(double m, double b, double p_star);

/// Training fraction at which f(N p_c) reaches alpha. May exceed 1.
double critical_fraction(double alpha, double b, double total_samples);

struct StaticsEstimate {
  double inferable_fraction;
  double accuracy_upper_bound;
  double p_star;
};

StaticsEstimate statics_estimate(double m, double b, double p_star);

/// Mean accuracy over independent trials with its spread.
struct OracleEstimate {
  double accuracy = 0.0;
  double std_error = 0.0;  // standard error of the mean
  double spread = 0.0;   // sample standard deviation over trials
  int trials = 0;
};

/// Accuracy from a closed knowledge state and per-cell probabilities that the
/// entry is 1: known cells score 1, unknown cells max(p, 1-p), divided by n^2.
double score_knowledge(const KnowledgeState& state, const std::vector<double>& prob_one);

/// Equivalence-class oracle. Works for ModuloK and, via the complement, for
/// CompleteBipartite (two classes).
OracleEstimate mc_oracle_equivalence(const RelationSpec& spec, double fraction, int trials, std::uint64_t seed);

/// Single-trial building block of mc_oracle_equivalence, exposed for testing.
double equivalence_trial_accuracy(const RelationSpec& spec, const std::vector<PairIndex>& pairs);

enum class ExtensionSampler {
  AdjacentTransposition,  // lazy adjacent-swap Markov chain, uniform stationary law
  RandomTopological,      // Kahn's algorithm with random tie-breaking (biased)
};

struct ExtensionSamplerOptions {
  ExtensionSampler kind = ExtensionSampler::AdjacentTransposition;
  std::size_t burn_in = 0;   // chain steps before the first sample; 0 selects n^3 * ceil(ln n)
  std::size_t thinning = 0;  // chain steps between samples; 0 selects n^2
};

/// Estimates, for each ordered pair, the probability that i precedes j in a
/// total order compatible with `state` (R(i,j)=1 means i precedes j; a known
/// R(j,i)=0 with i != j also forces i before j). Row-major n x n.
std::vector<double> precedence_probabilities(const KnowledgeState& state, std::size_t sequences, std::uint64_t seed,
                                             const ExtensionSamplerOptions& options = {});

OracleEstimate mc_oracle_total_order(int n, double fraction, std::size_t sequences, int trials, std::uint64_t seed,
                                     const ExtensionSamplerOptions& options = {});

/// Dispatches to the equivalence or total-order oracle.
OracleEstimate mc_oracle(const RelationSpec& spec, double fraction, int trials, std::size_t sequences,
                         std::uint64_t seed);

/// Closed-form description length used for the analytic curve of a spec.
double relation_bits(const RelationSpec& spec);

struct OracleCurvePoint {
  double fraction;
  OracleEstimate estimate;
};

/// Oracle sweep over training fractions. Each fraction uses a seed derived
/// from (seed, fraction index).
std::vector<OracleCurvePoint> oracle_curve(const RelationSpec& spec, const std::vector<double>& fractions, int trials,
                                           std::size_t sequences, std::uint64_t seed, std::size_t workers);

/// CSV columns: relation, n, fraction, accuracy, stderr, trials, seed.
void write_oracle_csv(std::ostream& out, const RelationSpec& spec, const std::vector<OracleCurvePoint>& curve,
                      std::uint64_t seed);

}  // namespace geneft
