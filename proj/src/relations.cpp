#include "geneft/relations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace geneft {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void validate(const RelationSpec& spec) {
  require(spec.n >= 1, "relation: n must be positive, got " + std::to_string(spec.n));
  const int n = spec.n;
  std::visit(Overloaded{
                 [&](const ModuloK& m) {
                   require(m.k >= 1 && m.k <= n, "relation: modulo k must satisfy 1 <= k <= n (k=" +
                                                     std::to_string(m.k) + ", n=" + std::to_string(n) + ")");
                 },
                 [](const GreaterThan&) {},
                 [&](const CompleteBipartite& b) {
                   require(!b.part.empty(), "relation: bipartite part must be nonempty");
                   std::vector<int> sorted = b.part;
                   std::sort(sorted.begin(), sorted.end());
                   require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                           "relation: bipartite part contains duplicate nodes");
                   require(sorted.front() >= 0 && sorted.back() < n, "relation: bipartite part node out of range");
                   require(static_cast<int>(sorted.size()) < n,
                           "relation: bipartite part must be a proper subset of the nodes");
                 },
                 [&](const CustomRelation& c) {
                   require(c.entries.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                           "relation: custom matrix must be n x n");
                   require(std::all_of(c.entries.begin(), c.entries.end(), [](std::uint8_t v) { return v <= 1; }),
                           "relation: custom matrix entries must be 0 or 1");
                 },
             },
             spec.kind);
}

std::string relation_tag(const RelationSpec& spec) {
  return std::visit(Overloaded{
                        [](const ModuloK& m) { return "mod" + std::to_string(m.k); },
                        [](const GreaterThan&) { return std::string("greater"); },
                        [](const CompleteBipartite&) { return std::string("bipartite"); },
                        [](const CustomRelation&) { return std::string("custom"); },
                    },
                    spec.kind);
}

RelationMatrix::RelationMatrix(RelationSpec spec, std::vector<std::uint8_t> entries)
    : spec_(std::move(spec)), entries_(std::move(entries)) {
  if (entries_.size() != static_cast<std::size_t>(spec_.n) * static_cast<std::size_t>(spec_.n)) {
    throw std::invalid_argument("RelationMatrix: entry count does not match n*n");
  }
}

RelationMatrix build_relation(const RelationSpec& spec) {
  validate(spec);
  const int n = spec.n;
  std::vector<std::uint8_t> e(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  auto at = [&](int i, int j) -> std::uint8_t& { return e[static_cast<std::size_t>(i) * n + j]; };
  std::visit(Overloaded{
                 [&](const ModuloK& m) {
                   for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j) at(i, j) = (i % m.k == j % m.k) ? 1 : 0;
                 },
                 [&](const GreaterThan&) {
                   for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j) at(i, j) = (i < j) ? 1 : 0;
                 },
                 [&](const CompleteBipartite& b) {
                   std::vector<bool> in(n, false);
                   for (int v : b.part) in[v] = true;
                   for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j) at(i, j) = (in[i] != in[j]) ? 1 : 0;
                 },
                 [&](const CustomRelation& c) { e = c.entries; },
             },
             spec.kind);
  return RelationMatrix(spec, std::move(e));
}

RelationSpec modulo_spec(int n, int k) { return RelationSpec{ModuloK{k}, n}; }

RelationSpec greater_than_spec(int n) { return RelationSpec{GreaterThan{}, n}; }

RelationSpec bipartite_spec(int n, int part_size) {
  CompleteBipartite b;
  b.part.resize(static_cast<std::size_t>(std::max(part_size, 0)));
  std::iota(b.part.begin(), b.part.end(), 0);
  return RelationSpec{std::move(b), n};
}

double log2_factorial(int n) {
  double s = 0.0;
  for (int i = 2; i <= n; ++i) s += std::log2(static_cast<double>(i));
  return s;
}

double description_length(const DescriptionLengthModel& model, int n) {
  if (n < 2) throw std::invalid_argument("description_length: n must be at least 2");
  const double nn = n;
  return std::visit(
      Overloaded{
          [&](const dl::Generic&) { return nn * nn; },
          [&](const dl::Symmetric&) { return nn * (nn + 1.0) / 2.0; },
          [&](const dl::Antisymmetric&) { return nn * (nn - 1.0) / 2.0; },
          [&](const dl::Reflexive&) { return nn * (nn - 1.0); },
          [&](const dl::Transitive& t) {
            require(t.mean_chain_length > 1.0, "description_length: mean chain length must exceed 1");
            // (<k> - 1)! continued to real arguments as Gamma(<k>).
            return nn * nn / std::tgamma(t.mean_chain_length);
          },
          [&](const dl::EquivalenceK& e) {
            require(e.k >= 2, "description_length: equivalence needs k >= 2 classes");
            return nn * std::log2(static_cast<double>(e.k));
          },
          [&](const dl::TotalOrdering&) { return log2_factorial(n); },
          [&](const dl::CompleteBipartite&) { return nn; },
          [&](const dl::IncompleteBipartite& b) {
            require(b.s1 >= 1 && b.s2 >= 1, "description_length: bipartite part sizes must be positive");
            return static_cast<double>(b.s1) * static_cast<double>(b.s2);
          },
          [&](const dl::Tree& t) {
            require(t.mean_depth > 1.0, "description_length: mean depth must exceed 1");
            return nn * std::log2(t.mean_depth);
          },
          [&](const dl::Automorphism& a) { return description_length_from_aut(n, a.aut_count); },
      },
      model);
}

double description_length_from_aut(int n, std::uint64_t aut_count) {
  if (aut_count < 1) throw std::invalid_argument("description_length_from_aut: automorphism count must be >= 1");
  return log2_factorial(n) - std::log2(static_cast<double>(aut_count));
}

namespace {

struct AutSearch {
  const RelationMatrix& m;
  int n;
  std::vector<int> image;
  std::vector<bool> used;
  std::uint64_t count = 0;

  bool consistent(int v) const {
    const int pv = image[v];
    if (m(v, v) != m(pv, pv)) return false;
    for (int u = 0; u < v; ++u) {
      const int pu = image[u];
      if (m(u, v) != m(pu, pv) || m(v, u) != m(pv, pu)) return false;
    }
    return true;
  }

  void extend(int v) {
    if (v == n) {
      ++count;
      return;
    }
    for (int target = 0; target < n; ++target) {
      if (used[target]) continue;
      image[v] = target;
      if (!consistent(v)) continue;
      used[target] = true;
      extend(v + 1);
      used[target] = false;
    }
  }
};

}  // namespace

std::uint64_t automorphism_count(const RelationMatrix& matrix) {
  const int n = matrix.n();
  if (n > kMaxAutomorphismNodes) {
    throw std::invalid_argument("automorphism_count: n=" + std::to_string(n) + " exceeds the brute-force bound of " +
                                std::to_string(kMaxAutomorphismNodes) +
                                "; use a closed-form description-length model instead");
  }
  AutSearch search{matrix, n, std::vector<int>(n, -1), std::vector<bool>(n, false)};
  search.extend(0);
  return search.count;
}

std::vector<PairIndex> sample_training_set(const RelationMatrix& matrix, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("sample_training_set: fraction must lie in [0, 1]");
  }
  const std::size_t total = matrix.size();
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<PairIndex> all(total);
  std::iota(all.begin(), all.end(), PairIndex{0});
  // Partial Fisher-Yates: the first `take` slots end up a uniform sample.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(take);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace geneft
