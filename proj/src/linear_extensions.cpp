#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "geneft/common.hpp"
#include "geneft/inference.hpp"

namespace geneft {
namespace {

// before[i*n+j] == 1 when the knowledge forces i to precede j.
std::vector<std::uint8_t> precedence_constraints(const KnowledgeState& state) {
  const int n = state.n();
  std::vector<std::uint8_t> before(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        if (state(i, i) == Cell::Known1) throw ContradictionError(i, i);
        continue;
      }
      if (state(i, j) == Cell::Known1 || state(j, i) == Cell::Known0) before[static_cast<std::size_t>(i) * n + j] = 1;
    }
  return before;
}

// Kahn's algorithm, choosing uniformly among the currently free elements.
std::vector<int> random_topological_order(int n, const std::vector<std::uint8_t>& before, std::mt19937_64& rng) {
  std::vector<int> indegree(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) indegree[j] += before[static_cast<std::size_t>(i) * n + j];
  std::vector<int> free;
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) free.push_back(v);
  std::vector<int> order;
  order.reserve(n);
  while (!free.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const std::size_t k = pick(rng);
    const int v = free[k];
    free[k] = free.back();
    free.pop_back();
    order.push_back(v);
    for (int w = 0; w < n; ++w)
      if (before[static_cast<std::size_t>(v) * n + w] && --indegree[w] == 0) free.push_back(w);
  }
  if (static_cast<int>(order.size()) != n) {
    throw std::runtime_error("precedence_probabilities: no total order is compatible with the knowledge (cycle)");
  }
  return order;
}

void accumulate(const std::vector<int>& order, std::vector<std::uint32_t>& counts, int n) {
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) ++counts[static_cast<std::size_t>(order[a]) * n + order[b]];
}

}  // namespace

std::vector<double> precedence_probabilities(const KnowledgeState& state, std::size_t sequences, std::uint64_t seed,
                                             const ExtensionSamplerOptions& options) {
  if (sequences < 1) throw std::invalid_argument("precedence_probabilities: sequences must be >= 1");
  const int n = state.n();
  const auto before = precedence_constraints(state);
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(n) * n, 0);

  std::vector<int> order = random_topological_order(n, before, rng);
  if (options.kind == ExtensionSampler::RandomTopological) {
    accumulate(order, counts, n);
    for (std::size_t s = 1; s < sequences; ++s) accumulate(random_topological_order(n, before, rng), counts, n);
  } else if (n >= 2) {
    // Lazy chain over linear extensions: pick an adjacent slot and a fair
    // coin; swap on heads when no constraint forbids it. The proposal is
    // symmetric, so the stationary law is uniform over linear extensions.
    const std::uint64_t nn = static_cast<std::uint64_t>(n);
    const std::size_t burn_in =
        options.burn_in ? options.burn_in
                        : static_cast<std::size_t>(nn * nn * nn * std::max(1.0, std::ceil(std::log(double(n)))));
    const std::size_t thinning = options.thinning ? options.thinning : static_cast<std::size_t>(nn * nn);
    const std::uint64_t slots = nn - 1;
    auto step = [&] {
      const std::uint64_t r = rng();
      if ((r & 1u) == 0) return;
      const std::size_t p = static_cast<std::size_t>((r >> 1) % slots);
      const int a = order[p], b = order[p + 1];
      if (!before[static_cast<std::size_t>(a) * n + b]) std::swap(order[p], order[p + 1]);
    };
    for (std::size_t s = 0; s < burn_in; ++s) step();
    for (std::size_t k = 0; k < sequences; ++k) {
      if (k > 0)
        for (std::size_t s = 0; s < thinning; ++s) step();
      accumulate(order, counts, n);
    }
  } else {
    for (std::size_t s = 0; s < sequences; ++s) accumulate(order, counts, n);
  }

  std::vector<double> prob(counts.size());
  const double inv = 1.0 / static_cast<double>(sequences);
  for (std::size_t k = 0; k < counts.size(); ++k) prob[k] = counts[k] * inv;
  return prob;
}

}  // namespace geneft
