#pragma once

// Independent reference implementations used to cross-check the library.
// Deliberately naive: exhaustive enumeration, no pruning, no shared code.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<int>>;

inline Matrix from_flat(const std::vector<std::uint8_t>& flat, int n) {
  Matrix m(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = flat[static_cast<std::size_t>(i) * n + j];
  return m;
}

// Counts permutations preserving every entry by trying all n! of them.
inline std::uint64_t automorphisms(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j) ok = m[p[i]][p[j]] == m[i][j];
    if (ok) ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

// prob[i*n+j] = fraction of permutations (as orders) compatible with
// `before` in which i comes before j. before[a*n+b] means a must precede b.
inline std::vector<double> exact_precedence(int n, const std::vector<bool>& before) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> count(static_cast<std::size_t>(n) * n, 0.0);
  std::size_t total = 0;
  do {
    std::vector<int> pos(n);
    for (int k = 0; k < n; ++k) pos[order[k]] = k;
    bool ok = true;
    for (int a = 0; a < n && ok; ++a)
      for (int b = 0; b < n && ok; ++b)
        if (before[static_cast<std::size_t>(a) * n + b] && pos[a] > pos[b]) ok = false;
    if (!ok) continue;
    ++total;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (pos[a] < pos[b]) count[static_cast<std::size_t>(a) * n + b] += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& c : count) c /= static_cast<double>(total);
  return count;
}

// All equivalence relations on n nodes, via restricted growth strings.
inline std::vector<Matrix> equivalence_relations(int n) {
  std::vector<Matrix> out;
  std::vector<int> label(n, 0);
  auto emit = [&] {
    Matrix m(n, std::vector<int>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = label[i] == label[j];
    out.push_back(m);
  };
  // Iterate restricted growth strings: label[0] = 0, label[i] <= 1 + max(label[0..i-1]).
  std::vector<int> max_prefix(n, 0);
  while (true) {
    emit();
    int i = n - 1;
    while (i > 0 && label[i] == max_prefix[i - 1] + 1) --i;
    if (i == 0) break;
    ++label[i];
    for (int k = i; k < n; ++k) {
      if (k > i) label[k] = 0;
      max_prefix[k] = std::max(k ? max_prefix[k - 1] : 0, label[k]);
    }
  }
  return out;
}

// All strict partial orders on n nodes (irreflexive, transitive).
inline std::vector<Matrix> strict_partial_orders(int n) {
  std::vector<Matrix> out;
  const int cells = n * (n - 1);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
    Matrix m(n, std::vector<int>(n, 0));
    int bit = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) m[i][j] = (mask >> bit++) & 1;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j) {
        if (!m[i][j]) continue;
        if (m[j][i]) ok = false;
        for (int k = 0; k < n && ok; ++k)
          if (m[j][k] && !m[i][k]) ok = false;
      }
    if (ok) out.push_back(m);
  }
  return out;
}

// -1 unknown, 0/1 forced: a cell is forced when every candidate relation
// that agrees with the observations has the same value there.
inline Matrix forced_cells(const std::vector<Matrix>& candidates, const Matrix& truth,
                           const std::vector<std::pair<int, int>>& observed) {
  const int n = static_cast<int>(truth.size());
  Matrix forced(n, std::vector<int>(n, -2));
  for (const auto& c : candidates) {
    bool agrees = true;
    for (auto [i, j] : observed) agrees = agrees && c[i][j] == truth[i][j];
    if (!agrees) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int& f = forced[i][j];
        if (f == -2) f = c[i][j];
        else if (f != c[i][j]) f = -1;
      }
  }
  return forced;
}

}  // namespace oracle
