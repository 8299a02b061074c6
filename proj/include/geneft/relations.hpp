#pragma once

// Binary relations over {0, ..., n-1}: generators for the benchmark relations,
// description-length formulas, and brute-force automorphism counting.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace geneft {

struct ModuloK {
  int k = 3;
};
struct GreaterThan {};
struct CompleteBipartite {
  std::vector<int> part;  // nodes in S; the rest form the complement
};
struct CustomRelation {
  std::vector<std::uint8_t> entries;  // row-major n x n, values in {0,1}
};

using RelationKind = std::variant<ModuloK, GreaterThan, CompleteBipartite, CustomRelation>;

struct RelationSpec {
  RelationKind kind;
  int n = 30;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const RelationSpec& spec);

/// Short tag such as "mod3", "greater", "bipartite", "custom".
std::string relation_tag(const RelationSpec& spec);

/// n x n 0/1 matrix of a relation together with the spec that produced it.
class RelationMatrix {
 public:
  RelationMatrix(RelationSpec spec, std::vector<std::uint8_t> entries);

  int n() const { return spec_.n; }
  const RelationSpec& spec() const { return spec_; }
  const std::vector<std::uint8_t>& entries() const { return entries_; }

  bool operator()(int i, int j) const { return entries_[index(i, j)] != 0; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(spec_.n) + static_cast<std::size_t>(j);
  }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const RelationMatrix& a, const RelationMatrix& b) {
    return a.spec_.n == b.spec_.n && a.entries_ == b.entries_;
  }

 private:
  RelationSpec spec_;
  std::vector<std::uint8_t> entries_;
};

RelationMatrix build_relation(const RelationSpec& spec);

/// Convenience constructors for the benchmark relations.
RelationSpec modulo_spec(int n, int k);
RelationSpec greater_than_spec(int n);
/// Complete bipartite graph with S = {0, ..., part_size-1}.
RelationSpec bipartite_spec(int n, int part_size);

// Description-length models. Each row of the bits table is one alternative.
namespace dl {
struct Generic {};
struct Symmetric {};
struct Antisymmetric {};
struct Reflexive {};
struct Transitive {
  double mean_chain_length;  // <k> > 1
};
struct EquivalenceK {
  int k;
};
struct TotalOrdering {};
struct CompleteBipartite {};
struct IncompleteBipartite {
  int s1;
  int s2;
};
struct Tree {
  double mean_depth;  // <d> > 1
};
struct Automorphism {
  std::uint64_t aut_count;
};
}  // namespace dl

using DescriptionLengthModel =
    std::variant<dl::Generic, dl::Symmetric, dl::Antisymmetric, dl::Reflexive, dl::Transitive, dl::EquivalenceK,
                 dl::TotalOrdering, dl::CompleteBipartite, dl::IncompleteBipartite, dl::Tree, dl::Automorphism>;

/// log2(n!) by direct summation.
double log2_factorial(int n);

/// Bits needed to single out one relation within its property class.
double description_length(const DescriptionLengthModel& model, int n);

/// log2(n! / aut_count).
double description_length_from_aut(int n, std::uint64_t aut_count);

/// Largest n accepted by automorphism_count.
inline constexpr int kMaxAutomorphismNodes = 10;

/// Number of permutations p with R[p(i)][p(j)] == R[i][j] for all i, j.
/// Exhaustive search over S_n with prefix pruning; n <= 10.
std::uint64_t automorphism_count(const RelationMatrix& matrix);

/// Flat pair index i*n + j.
using PairIndex = std::uint32_t;

/// round(fraction * n^2) ordered pairs drawn without replacement, sorted.
std::vector<PairIndex> sample_training_set(const RelationMatrix& matrix, double fraction, std::uint64_t seed);

// Text formats. Edge list: first line `n`, then one `i j` line per 1-entry.
// Dense CSV: n rows of n comma-separated 0/1 values.
void write_edge_list(std::ostream& out, const RelationMatrix& matrix);
void write_dense_csv(std::ostream& out, const RelationMatrix& matrix);
RelationMatrix read_edge_list(std::istream& in);
RelationMatrix read_dense_csv(std::istream& in);
/// Picks the reader from the extension (.csv -> dense, anything else -> edge list).
RelationMatrix load_relation_file(const std::string& path);

}  // namespace geneft
