#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "geneft/relations.hpp"
#include "oracles.hpp"

using namespace geneft;

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

RelationMatrix random_relation(int n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<std::uint8_t> e(static_cast<std::size_t>(n) * n);
  for (auto& x : e) x = coin(rng);
  return RelationMatrix(RelationSpec{CustomRelation{e}, n}, e);
}

}  // namespace

TEST(BuildRelation, Examples) {
  EXPECT_TRUE(build_relation(modulo_spec(6, 3))(1, 4));
  EXPECT_FALSE(build_relation(modulo_spec(6, 3))(1, 2));
  const auto gt = build_relation(greater_than_spec(6));
  EXPECT_TRUE(gt(2, 5));
  EXPECT_FALSE(gt(5, 2));
  EXPECT_FALSE(gt(3, 3));
  const auto bip = build_relation(RelationSpec{CompleteBipartite{{0, 1}}, 5});
  EXPECT_TRUE(bip(0, 2));
  EXPECT_FALSE(bip(0, 1));
}

TEST(BuildRelation, RejectsInvalidSpecs) {
  EXPECT_THROW(build_relation(modulo_spec(3, 5)), std::invalid_argument);
  EXPECT_THROW(build_relation(RelationSpec{CompleteBipartite{{}}, 4}), std::invalid_argument);
  EXPECT_THROW(build_relation(RelationSpec{CompleteBipartite{{0, 1, 2, 3}}, 4}), std::invalid_argument);
  EXPECT_THROW(build_relation(RelationSpec{CompleteBipartite{{0, 7}}, 4}), std::invalid_argument);
  EXPECT_THROW(build_relation(RelationSpec{CustomRelation{{1, 0, 0}}, 2}), std::invalid_argument);
}

TEST(BuildRelation, RegenerationIsIdentical) {
  for (const auto& spec : {modulo_spec(30, 3), greater_than_spec(30), bipartite_spec(30, 15)}) {
    EXPECT_EQ(build_relation(spec), build_relation(spec));
  }
}

TEST(BuildRelation, ModuloIsEquivalence) {
  for (int k = 1; k <= 6; ++k) {
    const auto m = build_relation(modulo_spec(30, k));
    for (int i = 0; i < 30; ++i) {
      EXPECT_TRUE(m(i, i));
      for (int j = 0; j < 30; ++j) {
        EXPECT_EQ(m(i, j), m(j, i));
        for (int l = 0; l < 30; ++l)
          if (m(i, j) && m(j, l)) EXPECT_TRUE(m(i, l));
      }
    }
  }
}

TEST(BuildRelation, GreaterThanIsStrictOrder) {
  const auto m = build_relation(greater_than_spec(30));
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) {
      EXPECT_FALSE(m(i, j) && m(j, i));
      for (int l = 0; l < 30; ++l)
        if (m(i, j) && m(j, l)) EXPECT_TRUE(m(i, l));
    }
}

TEST(BuildRelation, BipartiteSymmetricZeroDiagonal) {
  const auto m = build_relation(bipartite_spec(30, 12));
  for (int i = 0; i < 30; ++i) {
    EXPECT_FALSE(m(i, i));
    for (int j = 0; j < 30; ++j) EXPECT_EQ(m(i, j), m(j, i));
  }
}

TEST(DescriptionLength, TableRows) {
  EXPECT_DOUBLE_EQ(description_length(dl::CompleteBipartite{}, 30), 30.0);
  double lf = 0;
  for (int i = 1; i <= 30; ++i) lf += std::log2(i);
  EXPECT_NEAR(description_length(dl::TotalOrdering{}, 30), lf, 1e-9);
  EXPECT_NEAR(description_length(dl::TotalOrdering{}, 30), 107.7, 0.05);
  EXPECT_NEAR(description_length(dl::EquivalenceK{3}, 30), 30 * std::log2(3.0), 1e-12);
  EXPECT_NEAR(description_length(dl::EquivalenceK{3}, 30), 47.55, 0.01);
  EXPECT_DOUBLE_EQ(description_length(dl::Generic{}, 30), 900.0);
  EXPECT_DOUBLE_EQ(description_length(dl::Symmetric{}, 30), 465.0);
  EXPECT_DOUBLE_EQ(description_length(dl::Antisymmetric{}, 30), 435.0);
  EXPECT_DOUBLE_EQ(description_length(dl::Reflexive{}, 30), 870.0);
  EXPECT_DOUBLE_EQ(description_length(dl::IncompleteBipartite{3, 4}, 30), 12.0);
  EXPECT_NEAR(description_length(dl::Transitive{3.0}, 30), 450.0, 1e-9);
  EXPECT_NEAR(description_length(dl::Tree{4.0}, 30), 60.0, 1e-12);
  EXPECT_NEAR(description_length(dl::Automorphism{12}, 5), std::log2(10.0), 1e-12);
  const std::vector<DescriptionLengthModel> models{
      dl::Generic{}, dl::Symmetric{}, dl::Antisymmetric{}, dl::Reflexive{}, dl::Transitive{2.5}, dl::EquivalenceK{2},
      dl::TotalOrdering{}, dl::CompleteBipartite{}, dl::IncompleteBipartite{1, 1}, dl::Tree{1.5}};
  for (int n = 2; n <= 12; ++n)
    for (const auto& m : models) EXPECT_GT(description_length(m, n), 0.0) << n;
  EXPECT_THROW(description_length(dl::EquivalenceK{1}, 5), std::invalid_argument);
  EXPECT_THROW(description_length(dl::Transitive{1.0}, 5), std::invalid_argument);
  EXPECT_THROW(description_length(dl::Generic{}, 1), std::invalid_argument);
}

TEST(DescriptionLength, FromAutomorphisms) {
  EXPECT_NEAR(description_length_from_aut(4, 1), std::log2(24.0), 1e-12);
  EXPECT_NEAR(description_length_from_aut(5, 12), std::log2(10.0), 1e-12);
  EXPECT_NEAR(description_length_from_aut(2, 2), 0.0, 1e-12);
  EXPECT_THROW(description_length_from_aut(4, 0), std::invalid_argument);
  for (int n = 2; n <= 40; ++n)
    EXPECT_NEAR(description_length_from_aut(n, 1), description_length(dl::TotalOrdering{}, n), 1e-9);
}

TEST(Automorphisms, Examples) {
  EXPECT_EQ(automorphism_count(build_relation(bipartite_spec(5, 2))), 12u);
  EXPECT_EQ(automorphism_count(build_relation(greater_than_spec(4))), 1u);
  const std::vector<std::uint8_t> empty(9, 0);
  EXPECT_EQ(automorphism_count(RelationMatrix(RelationSpec{CustomRelation{empty}, 3}, empty)), 6u);
  EXPECT_THROW(automorphism_count(build_relation(greater_than_spec(11))), std::invalid_argument);
}

TEST(Automorphisms, CompleteBipartiteFormula) {
  for (int n = 2; n <= 8; ++n) {
    for (int a = 1; a < n; ++a) {
      const int c = n - a;
      const double expected = a == c ? 2 * factorial(a) * factorial(a) : factorial(a) * factorial(c);
      const auto m = build_relation(bipartite_spec(n, a));
      EXPECT_EQ(static_cast<double>(automorphism_count(m)), expected) << a << "," << c;
      EXPECT_EQ(automorphism_count(m), oracle::automorphisms(oracle::from_flat(m.entries(), n)));
    }
  }
}

TEST(Automorphisms, MatchesBruteForceOnRandomRelations) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const double density = (rng() % 5) / 4.0;
    const auto m = random_relation(n, density, rng);
    EXPECT_EQ(automorphism_count(m), oracle::automorphisms(oracle::from_flat(m.entries(), n))) << t;
  }
  for (int n = 2; n <= 7; ++n) {
    const auto m = build_relation(modulo_spec(n, 2));
    EXPECT_EQ(automorphism_count(m), oracle::automorphisms(oracle::from_flat(m.entries(), n)));
  }
}

TEST(Sampling, SizesAndEndpoints) {
  const auto m = build_relation(modulo_spec(30, 3));
  EXPECT_TRUE(sample_training_set(m, 0.0, 1).empty());
  const auto all = sample_training_set(m, 1.0, 1);
  ASSERT_EQ(all.size(), 900u);
  for (PairIndex k = 0; k < 900; ++k) EXPECT_EQ(all[k], k);
  EXPECT_EQ(sample_training_set(m, 0.75, 1).size(), 675u);
  EXPECT_THROW(sample_training_set(m, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(sample_training_set(m, -0.1, 1), std::invalid_argument);
}

TEST(Sampling, SortedDistinctDeterministic) {
  const auto m = build_relation(greater_than_spec(20));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = sample_training_set(m, 0.3, seed);
    EXPECT_EQ(a, sample_training_set(m, 0.3, seed));
    EXPECT_EQ(a.size(), 120u);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_EQ(std::set<PairIndex>(a.begin(), a.end()).size(), a.size());
    EXPECT_LT(a.back(), 400u);
  }
  EXPECT_NE(sample_training_set(m, 0.3, 1), sample_training_set(m, 0.3, 2));
}

TEST(Sampling, RoughlyUniform) {
  const auto m = build_relation(modulo_spec(10, 3));
  std::vector<int> hits(100, 0);
  const int reps = 4000;
  for (int s = 0; s < reps; ++s)
    for (auto p : sample_training_set(m, 0.25, s)) ++hits[p];
  // Each pair is included with probability 1/4; binomial sd ~ 27.
  for (int h : hits) EXPECT_NEAR(h, reps / 4, 6 * std::sqrt(reps * 0.25 * 0.75));
}

TEST(RelationIo, RoundTrips) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_relation(1 + static_cast<int>(rng() % 9), 0.4, rng);
    std::stringstream edges, dense;
    write_edge_list(edges, m);
    write_dense_csv(dense, m);
    EXPECT_EQ(read_edge_list(edges), m);
    EXPECT_EQ(read_dense_csv(dense), m);
  }
}

TEST(RelationIo, EdgeListFormat) {
  std::stringstream in("3\n0 1\n\n1 2\n");
  const auto m = read_edge_list(in);
  EXPECT_EQ(m.n(), 3);
  EXPECT_TRUE(m(0, 1));
  EXPECT_TRUE(m(1, 2));
  EXPECT_FALSE(m(1, 0));
  std::stringstream out;
  write_edge_list(out, m);
  EXPECT_EQ(out.str(), "3\n0 1\n1 2\n");
}

TEST(RelationIo, RejectsMalformedInput) {
  std::stringstream bad_index("3\n0 5\n");
  EXPECT_THROW(read_edge_list(bad_index), std::invalid_argument);
  std::stringstream bad_line("3\n0\n");
  EXPECT_THROW(read_edge_list(bad_line), std::invalid_argument);
  std::stringstream empty("");
  EXPECT_THROW(read_edge_list(empty), std::invalid_argument);
  std::stringstream ragged("0,1\n1\n");
  EXPECT_THROW(read_dense_csv(ragged), std::invalid_argument);
  std::stringstream not_binary("0,2\n1,0\n");
  EXPECT_THROW(read_dense_csv(not_binary), std::invalid_argument);
  EXPECT_THROW(load_relation_file("/nonexistent/relation.txt"), std::runtime_error);
}

TEST(RelationTag, Names) {
  EXPECT_EQ(relation_tag(modulo_spec(30, 3)), "mod3");
  EXPECT_EQ(relation_tag(greater_than_spec(30)), "greater");
  EXPECT_EQ(relation_tag(bipartite_spec(30, 15)), "bipartite");
}
