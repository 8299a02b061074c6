#include "geneft/inference.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "geneft/common.hpp"

namespace geneft {

ContradictionError::ContradictionError(int row, int col)
    : std::runtime_error("contradiction: cell (" + std::to_string(row) + ", " + std::to_string(col) +
                         ") is derivable as both 0 and 1"),
      row_(row),
      col_(col) {}

KnowledgeState::KnowledgeState(int n, Property properties)
    : n_(n), properties_(properties), cells_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), Cell::Unknown) {
  if (n < 1) throw std::invalid_argument("KnowledgeState: n must be positive");
}

bool KnowledgeState::set(int i, int j, bool value) {
  Cell& c = cells_[index(i, j)];
  const Cell want = value ? Cell::Known1 : Cell::Known0;
  if (c == want) return false;
  if (c != Cell::Unknown) throw ContradictionError(i, j);
  c = want;
  return true;
}

std::size_t KnowledgeState::known_count() const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](Cell c) { return c != Cell::Unknown; }));
}

KnowledgeState observe(const RelationMatrix& truth, const std::vector<PairIndex>& pairs, Property properties) {
  KnowledgeState state(truth.n(), properties);
  const auto n = static_cast<PairIndex>(truth.n());
  for (PairIndex p : pairs) {
    const int i = static_cast<int>(p / n), j = static_cast<int>(p % n);
    state.set(i, j, truth(i, j));
  }
  return state;
}

KnowledgeState closure(KnowledgeState state) {
  const int n = state.n();
  const Property props = state.properties();
  const bool sym = has(props, Property::Symmetric);
  const bool refl = has(props, Property::Reflexive);
  const bool trans = has(props, Property::Transitive);
  const bool anti = has(props, Property::Antisymmetric);
  const bool negative_through_equality = sym && trans;

  if (refl)
    for (int i = 0; i < n; ++i) state.set(i, i, true);
  if (anti)
    for (int i = 0; i < n; ++i) state.set(i, i, false);

  bool changed = true;
  while (changed) {
    changed = false;
    if (sym) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Cell c = state(i, j);
          if (c != Cell::Unknown) changed |= state.set(j, i, c == Cell::Known1);
        }
    }
    if (anti) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (state(i, j) == Cell::Known1) changed |= state.set(j, i, false);
    }
    if (trans) {
      // Warshall pass over the known-1 graph.
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          if (state(i, k) != Cell::Known1) continue;
          for (int j = 0; j < n; ++j)
            if (state(k, j) == Cell::Known1) changed |= state.set(i, j, true);
        }
    }
    if (negative_through_equality) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (state(i, j) != Cell::Known1) continue;
          for (int k = 0; k < n; ++k)
            if (state(j, k) == Cell::Known0) changed |= state.set(i, k, false);
        }
    }
  }
  return state;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double guess_probability(const RelationSpec& spec) {
  return std::visit(Overloaded{
                        [](const ModuloK& m) { return 1.0 / m.k; },
                        [](const CompleteBipartite&) { return 0.5; },
                        [](const GreaterThan&) { return 1.0 / 3.0; },
                        [](const CustomRelation&) -> double {
                          throw std::invalid_argument("guess_probability: custom relations need a caller-supplied p*");
                        },
                    },
                    spec.kind);
}

double analytic_inferable_fraction(double m, double b) {
  if (b < 1.0) throw std::invalid_argument("analytic_inferable_fraction: b must be >= 1");
  if (m <= 0.0) return 0.0;
  return 1.0 - std::pow(1.0 - 1.0 / b, m);
}

double analytic_upper_bound(double m, double b, double p_star) {
  if (!(p_star > 0.0 && p_star < 1.0)) throw std::invalid_argument("analytic_upper_bound: p* must lie in (0, 1)");
  const double f = analytic_inferable_fraction(m, b);
  return f + std::max(p_star, 1.0 - p_star) * (1.0 - f);
}

double critical_fraction(double alpha, double b, double total_samples) {
  if (!(b > 1.0)) throw std::invalid_argument("critical_fraction: b must exceed 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("critical_fraction: alpha must lie in (0, 1)");
  if (!(total_samples >= 1.0)) throw std::invalid_argument("critical_fraction: N must be >= 1");
  return std::log(1.0 - alpha) / std::log(1.0 - 1.0 / b) / total_samples;
}

StaticsEstimate statics_estimate(double m, double b, double p_star) {
  return {analytic_inferable_fraction(m, b), analytic_upper_bound(m, b, p_star), p_star};
}

double score_knowledge(const KnowledgeState& state, const std::vector<double>& prob_one) {
  const int n = state.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (state(i, j) != Cell::Unknown) {
        total += 1.0;
      } else {
        const double p = prob_one[static_cast<std::size_t>(i) * n + j];
        total += std::max(p, 1.0 - p);
      }
    }
  return total / (static_cast<double>(n) * n);
}

namespace {

struct ClassView {
  RelationMatrix equivalence;  // 1 iff same class
  std::vector<int> label;
  int classes;
};

ClassView class_view(const RelationSpec& spec) {
  validate(spec);
  const int n = spec.n;
  ClassView view{build_relation(spec), std::vector<int>(n), 0};
  if (const auto* m = std::get_if<ModuloK>(&spec.kind)) {
    for (int i = 0; i < n; ++i) view.label[i] = i % m->k;
    view.classes = m->k;
  } else if (const auto* b = std::get_if<CompleteBipartite>(&spec.kind)) {
    std::fill(view.label.begin(), view.label.end(), 1);
    for (int v : b->part) view.label[v] = 0;
    view.classes = 2;
    std::vector<std::uint8_t> same(view.equivalence.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) same[view.equivalence.index(i, j)] = view.label[i] == view.label[j];
    view.equivalence = RelationMatrix(spec, std::move(same));
  } else {
    throw std::invalid_argument("equivalence oracle: relation must be ModuloK or CompleteBipartite");
  }
  return view;
}

OracleEstimate summarize(const std::vector<double>& values) {
  OracleEstimate e;
  e.trials = static_cast<int>(values.size());
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.accuracy = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.accuracy) * (v - e.accuracy);
    e.spread = std::sqrt(ss / (values.size() - 1));
    e.std_error = e.spread / std::sqrt(static_cast<double>(values.size()));
  }
  return e;
}

double equivalence_accuracy(const ClassView& view, const std::vector<PairIndex>& pairs) {
  const int n = view.equivalence.n();
  const KnowledgeState state = closure(observe(view.equivalence, pairs, kEquivalence));

  // Candidate classes per node, as bitmasks over class labels.
  std::vector<std::vector<bool>> pos(n, std::vector<bool>(view.classes, true));
  for (int i = 0; i < n; ++i) {
    int partner = -1;
    for (int j = 0; j < n && partner < 0; ++j)
      if (j != i && state(i, j) == Cell::Known1) partner = j;
    if (partner >= 0) {
      std::fill(pos[i].begin(), pos[i].end(), false);
      pos[i][view.label[partner]] = true;
    } else {
      for (int j = 0; j < n; ++j)
        if (state(i, j) == Cell::Known0) pos[i][view.label[j]] = false;
    }
  }
  std::vector<int> size(n, 0);
  for (int i = 0; i < n; ++i) size[i] = static_cast<int>(std::count(pos[i].begin(), pos[i].end(), true));

  std::vector<double> prob_one(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (state(i, j) != Cell::Unknown) continue;
      if (size[i] == 0 || size[j] == 0) throw ContradictionError(i, j);
      int shared = 0;
      for (int c = 0; c < view.classes; ++c) shared += pos[i][c] && pos[j][c];
      prob_one[static_cast<std::size_t>(i) * n + j] = static_cast<double>(shared) / (size[i] * size[j]);
    }
  return score_knowledge(state, prob_one);
}

}  // namespace

double equivalence_trial_accuracy(const RelationSpec& spec, const std::vector<PairIndex>& pairs) {
  return equivalence_accuracy(class_view(spec), pairs);
}

OracleEstimate mc_oracle_equivalence(const RelationSpec& spec, double fraction, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("mc_oracle_equivalence: trials must be >= 1");
  const ClassView view = class_view(spec);
  std::vector<double> acc;
  acc.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const auto pairs = sample_training_set(view.equivalence, fraction, derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    acc.push_back(equivalence_accuracy(view, pairs));
  }
  return summarize(acc);
}

OracleEstimate mc_oracle_total_order(int n, double fraction, std::size_t sequences, int trials, std::uint64_t seed,
                                     const ExtensionSamplerOptions& options) {
  if (trials < 1) throw std::invalid_argument("mc_oracle_total_order: trials must be >= 1");
  if (sequences < 1) throw std::invalid_argument("mc_oracle_total_order: sequences must be >= 1");
  const RelationMatrix truth = build_relation(greater_than_spec(n));
  std::vector<double> acc;
  acc.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, {static_cast<std::uint64_t>(t)});
    const auto pairs = sample_training_set(truth, fraction, trial_seed);
    const KnowledgeState state = closure(observe(truth, pairs, kStrictOrder));
    const auto prob = precedence_probabilities(state, sequences, derive_seed(trial_seed, {1}), options);
    acc.push_back(score_knowledge(state, prob));
  }
  return summarize(acc);
}

OracleEstimate mc_oracle(const RelationSpec& spec, double fraction, int trials, std::size_t sequences,
                         std::uint64_t seed) {
  if (std::holds_alternative<GreaterThan>(spec.kind)) {
    return mc_oracle_total_order(spec.n, fraction, sequences, trials, seed);
  }
  return mc_oracle_equivalence(spec, fraction, trials, seed);
}

double relation_bits(const RelationSpec& spec) {
  const int n = spec.n;
  return std::visit(Overloaded{
                        [&](const ModuloK& m) { return description_length(dl::EquivalenceK{m.k}, n); },
                        [&](const GreaterThan&) { return description_length(dl::TotalOrdering{}, n); },
                        [&](const CompleteBipartite&) { return description_length(dl::CompleteBipartite{}, n); },
                        [&](const CustomRelation&) {
                          return description_length_from_aut(n, automorphism_count(build_relation(spec)));
                        },
                    },
                    spec.kind);
}

std::vector<OracleCurvePoint> oracle_curve(const RelationSpec& spec, const std::vector<double>& fractions, int trials,
                                           std::size_t sequences, std::uint64_t seed, std::size_t workers) {
  std::vector<OracleCurvePoint> curve(fractions.size());
  parallel_for(fractions.size(), workers, [&](std::size_t k) {
    curve[k] = {fractions[k], mc_oracle(spec, fractions[k], trials, sequences, derive_seed(seed, {k}))};
  });
  return curve;
}

void write_oracle_csv(std::ostream& out, const RelationSpec& spec, const std::vector<OracleCurvePoint>& curve,
                      std::uint64_t seed) {
  CsvWriter csv(out);
  csv.header({"relation", "n", "fraction", "accuracy", "stderr", "trials", "seed"});
  const std::string tag = relation_tag(spec);
  for (const auto& p : curve) {
    csv.field(tag).field(spec.n).field(p.fraction).field(p.estimate.accuracy).field(p.estimate.std_error)
        .field(p.estimate.trials).field(std::to_string(seed));
    csv.end_row();
  }
}

}  // namespace geneft
