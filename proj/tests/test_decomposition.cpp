#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "povdec/decomposition.hpp"

using namespace povdec;

namespace {

VectorD vec(std::initializer_list<double> xs) {
  VectorD v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// {[20, 120], [60]} with Z = 100.
Stratification<double> worked_example() {
  return stratify(vec({20, 60, 120}), {"A", "B", "A"});
}

struct RandomInstance {
  std::vector<double> incomes;
  Stratification<double> strat;
};

RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_n, std::size_t max_k, double z) {
  RandomInstance inst;
  std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_k)(rng);
  do {
    inst.incomes = oracle::random_sample(rng, max_n, z);
  } while (inst.incomes.size() < k);
  const auto part = oracle::random_partition(rng, inst.incomes.size(), k);
  std::vector<std::string> labels;
  for (auto p : part) labels.push_back("g" + std::to_string(p));
  inst.strat = stratify(VectorD(Eigen::Map<const VectorD>(inst.incomes.data(), Index(inst.incomes.size()))), labels);
  return inst;
}

double weight_sum(const GapReport<double>& r) {
  double s = 0;
  for (const auto& g : r.groups) s += g.weight;
  return s;
}

} // namespace

// --- stratify ---------------------------------------------------------------

TEST(Stratify, GroupsByFirstAppearance) {
  const auto s = stratify(vec({1, 2, 3}), {"A", "B", "A"});
  ASSERT_EQ(s.group_count(), 2);
  EXPECT_EQ(s.groups[0].label, "A");
  EXPECT_EQ(s.groups[0].size(), 2);
  EXPECT_EQ(s.groups[1].label, "B");
  EXPECT_EQ(s.groups[1].size(), 1);
  EXPECT_EQ(s.total(), 3);
  EXPECT_DOUBLE_EQ(s.weights()[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.weights()[1], 1.0 / 3.0);
}

TEST(Stratify, SingleLabelIsOneGroup) {
  const auto s = stratify(vec({5, 6, 7, 8}), {"x", "x", "x", "x"});
  ASSERT_EQ(s.group_count(), 1);
  EXPECT_EQ(s.weights()[0], 1.0);
}

TEST(Stratify, GenderSizedSplit) {
  VectorD y = VectorD::LinSpaced(3278, 1.0, 3278.0);
  std::vector<std::string> labels(3278, "F");
  std::fill(labels.begin(), labels.begin() + 2468, "M");
  const auto s = stratify(y, labels);
  const auto w = s.weights();
  EXPECT_NEAR(w[0], 0.7529, 5e-5);
  EXPECT_NEAR(w[1], 0.2471, 5e-5);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
}

TEST(Stratify, ExpectedLabelsFixOrderAndAllowEmptyGroups) {
  const auto s = stratify(vec({1, 2, 3}), {"B", "A", "B"}, std::vector<std::string>{"A", "B", "C"});
  ASSERT_EQ(s.group_count(), 3);
  EXPECT_EQ(s.groups[0].label, "A");
  EXPECT_EQ(s.groups[2].label, "C");
  EXPECT_TRUE(s.groups[2].empty());
  EXPECT_TRUE(s.has_empty_groups());

  const auto r = decompose(s, 10.0, GpiSpec<double>::fgt(1.0));
  EXPECT_TRUE(r.groups[2].empty);
  EXPECT_EQ(r.groups[2].weight, 0.0);
  EXPECT_TRUE(r.has_empty_groups());
  EXPECT_NEAR(weight_sum(r), 1.0, 1e-15);
  EXPECT_NEAR(r.gap, 0.0, 1e-15);
}

TEST(Stratify, Errors) {
  try {
    stratify(vec({1, 2}), {"A", "Z"}, std::vector<std::string>{"A", "B"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownStratum);
    EXPECT_EQ(e.position(), 1u);
  }
  EXPECT_THROW(stratify(vec({1, 2}), {"A"}), Error);
  EXPECT_THROW(stratify(vec({1, 2}), {"A", ""}), Error);
  EXPECT_THROW(stratify(VectorD(), {}), Error);
}

// --- decompose --------------------------------------------------------------

TEST(Decompose, FgtWorkedExampleHasZeroGap) {
  const auto r = decompose(worked_example(), 100.0, GpiSpec<double>::fgt(1.0));
  EXPECT_NEAR(r.global_value, 0.4, 1e-15);
  EXPECT_NEAR(r.groups[0].value, 0.4, 1e-15);
  EXPECT_NEAR(r.groups[1].value, 0.4, 1e-15);
  EXPECT_NEAR(r.recomposed_value, 0.4, 1e-15);
  EXPECT_NEAR(r.gap, 0.0, 1e-15);
}

TEST(Decompose, SenWorkedExample) {
  const auto r = decompose(worked_example(), 100.0, GpiSpec<double>::sen());
  EXPECT_NEAR(r.global_value, 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.groups[0].value, 0.4, 1e-15);
  EXPECT_NEAR(r.groups[1].value, 0.4, 1e-15);
  EXPECT_NEAR(r.recomposed_value, 0.4, 1e-15);
  EXPECT_NEAR(r.gap, 4.0 / 9.0 - 0.4, 1e-15);
  EXPECT_EQ(r.q_poor, 2);
  EXPECT_EQ(r.groups[0].poor + r.groups[1].poor, r.q_poor);
  EXPECT_EQ(r.gap, r.global_value - r.recomposed_value);
  EXPECT_NEAR(r.relative_gap(), 0.1, 1e-14);
}

TEST(Decompose, ShorrocksWorkedExample) {
  // Groups: [20,120] -> (1/4) 3 (0.8) = 0.6; [60] -> 1 (0.4) = 0.4.
  const auto r = decompose(worked_example(), 100.0, GpiSpec<double>::shorrocks());
  EXPECT_NEAR(r.global_value, 5.2 / 9.0, 1e-15);
  EXPECT_NEAR(r.groups[0].value, 0.6, 1e-15);
  EXPECT_NEAR(r.groups[1].value, 0.4, 1e-15);
  EXPECT_NEAR(r.recomposed_value, 1.6 / 3.0, 1e-15);
}

TEST(Decompose, SingleGroupHasZeroGap) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto raw = oracle::random_sample(rng, 40, 100.0);
    const VectorD y = Eigen::Map<const VectorD>(raw.data(), Index(raw.size()));
    const auto s = stratify(y, std::vector<std::string>(raw.size(), "all"));
    for (const auto& spec : {GpiSpec<double>::sen(), GpiSpec<double>::shorrocks(), GpiSpec<double>::fgt(2.0),
                             GpiSpec<double>::ray(2.0)}) {
      EXPECT_EQ(decompose(s, 100.0, spec).gap, 0.0);
    }
  }
}

TEST(DecompositionProperties, AdditiveExactness) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = random_instance(rng, 200, 8, 100.0);
    for (double a : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      const auto r = decompose(inst.strat, 100.0, GpiSpec<double>::fgt(a));
      EXPECT_LE(std::abs(r.gap), 1e-12 * std::max(1.0, std::abs(r.global_value)));
    }
  }
}

TEST(DecompositionProperties, WeightsSumToOne) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng, 200, 12, 100.0);
    const auto r = decompose(inst.strat, 100.0, GpiSpec<double>::sen());
    EXPECT_NEAR(weight_sum(r), 1.0, 1e-15);
    double dot = 0;
    for (const auto& g : r.groups) dot += g.weight * g.value;
    EXPECT_NEAR(r.recomposed_value, dot, 1e-15);
    EXPECT_EQ(r.gap, r.global_value - r.recomposed_value);
  }
}

TEST(DecompositionProperties, PermutationInvariance) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng, 100, 6, 100.0);
    auto shuffled = inst.strat;
    std::shuffle(shuffled.groups.begin(), shuffled.groups.end(), rng);
    for (auto& g : shuffled.groups) std::shuffle(g.incomes.begin(), g.incomes.end(), rng);

    for (const auto& spec : {GpiSpec<double>::sen(), GpiSpec<double>::shorrocks(), GpiSpec<double>::fgt(2.0)}) {
      const auto a = decompose(inst.strat, 100.0, spec);
      const auto b = decompose(shuffled, 100.0, spec);
      EXPECT_EQ(a.global_value, b.global_value);
      EXPECT_NEAR(a.recomposed_value, b.recomposed_value, 1e-15);
      EXPECT_NEAR(a.gap, b.gap, 1e-15);
      for (const auto& ga : a.groups) {
        const auto it = std::find_if(b.groups.begin(), b.groups.end(), [&](const auto& gb) { return gb.label == ga.label; });
        ASSERT_NE(it, b.groups.end());
        EXPECT_EQ(ga.value, it->value);
        EXPECT_EQ(ga.weight, it->weight);
      }
    }
  }
}

TEST(DecompositionProperties, TwoLevelRecompositionEqualsFlat) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng, 200, 5, 100.0);
    const auto spec = GpiSpec<double>::fgt(2.0);
    // Split every group in two by position, then recompose nested and flat.
    Stratification<double> flat;
    double nested = 0;
    const double n = double(inst.strat.total());
    for (const auto& g : inst.strat.groups) {
      if (g.size() < 2) {
        flat.groups.push_back(g);
        nested += double(g.size()) / n * decompose(stratify(g.incomes, std::vector<std::string>(g.size(), "a")), 100.0, spec).recomposed_value;
        continue;
      }
      std::vector<std::string> halves(static_cast<std::size_t>(g.size()), "a");
      std::fill(halves.begin() + g.size() / 2, halves.end(), "b");
      const auto inner = stratify(g.incomes, halves);
      nested += double(g.size()) / n * decompose(inner, 100.0, spec).recomposed_value;
      for (auto sub : inner.groups) {
        sub.label = g.label + "/" + sub.label;
        flat.groups.push_back(sub);
      }
    }
    const auto single = decompose(flat, 100.0, spec);
    EXPECT_NEAR(nested, single.recomposed_value, 1e-12);
    EXPECT_NEAR(single.recomposed_value, decompose(inst.strat, 100.0, spec).recomposed_value, 1e-12);
  }
}

// Partial sums of the pooled-minus-group rank weights are non-negative, and
// deprivations decrease along the ranking, so neither gap can go below zero.
TEST(DecompositionProperties, RankWeightedGapsAreNonNegative) {
  std::mt19937_64 rng(104);
  int sen_positive = 0, sh_positive = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = random_instance(rng, 60, 5, 100.0);
    const double sen_gap = decompose(inst.strat, 100.0, GpiSpec<double>::sen()).gap;
    const double sh_gap = decompose(inst.strat, 100.0, GpiSpec<double>::shorrocks()).gap;
    EXPECT_GE(sen_gap, -1e-15);
    EXPECT_GE(sh_gap, -1e-15);
    sen_positive += sen_gap > 1e-12;
    sh_positive += sh_gap > 1e-12;
  }
  EXPECT_GT(sen_positive, 500);
  EXPECT_GT(sh_positive, 500);
}

TEST(DecompositionProperties, RankWeightedGapVanishesForEqualDeprivations) {
  const auto s = stratify(vec({50, 50, 50, 50, 150}), {"A", "B", "A", "B", "B"});
  EXPECT_NEAR(decompose(s, 100.0, GpiSpec<double>::sen()).gap, 0.0, 1e-15);
}

// --- Ray ---------------------------------------------------------------------

TEST(RayDecomposition, WorkedExampleAlphaTwo) {
  const auto r = ray_nonadditive_decompose(worked_example(), 100.0, 2.0);
  EXPECT_NEAR(r.global_mean_gap, 60.0, 1e-13);
  ASSERT_EQ(r.groups.size(), 2u);
  EXPECT_NEAR(*r.groups[0].mean_gap, 80.0, 1e-13);
  EXPECT_NEAR(*r.groups[1].mean_gap, 40.0, 1e-13);
  EXPECT_NEAR(r.groups[0].value, 0.4, 1e-15);
  EXPECT_NEAR(r.groups[1].value, 0.4, 1e-15);
  EXPECT_NEAR(*r.groups[0].weight, 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(*r.groups[1].weight, 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.weight_sum, 10.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.recomposed_value, 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.global_value, 4.0 / 9.0, 1e-15);
}

TEST(RayDecomposition, AlphaOneIsAdditive) {
  const auto r = ray_nonadditive_decompose(worked_example(), 100.0, 1.0);
  EXPECT_DOUBLE_EQ(*r.groups[0].weight, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.groups[1].weight, 1.0 / 3.0);
  EXPECT_NEAR(r.discrepancy(), 0.0, 1e-15);
  EXPECT_NEAR(r.global_value, decompose(worked_example(), 100.0, GpiSpec<double>::fgt(1.0)).recomposed_value, 1e-15);
}

TEST(RayDecomposition, SingleGroupHasUnitWeight) {
  const auto s = stratify(vec({20, 60, 120}), {"A", "A", "A"});
  const auto r = ray_nonadditive_decompose(s, 100.0, 2.5);
  EXPECT_DOUBLE_EQ(*r.groups[0].weight, 1.0);
  EXPECT_EQ(r.recomposed_value, r.global_value);
}

TEST(RayDecomposition, GroupWithoutPoorIsFlaggedAndSkipped) {
  const auto s = stratify(vec({20, 150, 60, 300}), {"A", "B", "A", "B"});
  const auto r = ray_nonadditive_decompose(s, 100.0, 2.0);
  EXPECT_TRUE(r.has_groups_without_poor);
  EXPECT_FALSE(r.groups[1].weight.has_value());
  EXPECT_FALSE(r.groups[1].mean_gap.has_value());
  EXPECT_EQ(r.groups[1].value, 0.0);
  EXPECT_NEAR(r.recomposed_value, r.global_value, 1e-15);
}

TEST(RayDecomposition, NoPoorAnywhere) {
  const auto s = stratify(vec({150, 160}), {"A", "B"});
  try {
    ray_nonadditive_decompose(s, 100.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPoorHouseholds);
  }
}

TEST(RayDecomposition, ExactOnRandomInstances) {
  std::mt19937_64 rng(105);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const auto inst = random_instance(rng, 150, 6, 100.0);
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
      if (std::none_of(inst.incomes.begin(), inst.incomes.end(), [](double y) { return y < 100.0; })) continue;
      const auto r = ray_nonadditive_decompose(inst.strat, 100.0, a);
      if (r.has_groups_without_poor) continue;
      EXPECT_NEAR(r.recomposed_value, r.global_value, 1e-10 * std::abs(r.global_value));
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

// --- deltas -------------------------------------------------------------------

TEST(DeltaDecompose, IdenticalReports) {
  const auto r = decompose(worked_example(), 100.0, GpiSpec<double>::sen());
  const auto d = delta_decompose(r, r);
  EXPECT_EQ(d.global_delta, 0.0);
  EXPECT_EQ(d.contribution_sum, 0.0);
  EXPECT_EQ(d.residual, 0.0);
  for (const auto& g : d.groups) EXPECT_EQ(g.contribution, 0.0);
}

TEST(DeltaDecompose, AdditiveIndicatorHasNoResidual) {
  const auto before = decompose(worked_example(), 100.0, GpiSpec<double>::fgt(1.0));
  const auto after = decompose(stratify(vec({45, 60, 120}), {"A", "B", "A"}), 100.0, GpiSpec<double>::fgt(1.0));
  const auto d = delta_decompose(before, after);
  EXPECT_NEAR(d.global_delta, -0.25 / 3.0, 1e-15);
  EXPECT_NEAR(d.groups[0].contribution, -0.25 / 3.0, 1e-15);
  EXPECT_EQ(d.groups[1].contribution, 0.0);
  EXPECT_NEAR(d.residual, 0.0, 1e-15);
}

TEST(DeltaDecompose, ResidualIsChangeInGap) {
  const auto before = decompose(worked_example(), 100.0, GpiSpec<double>::sen());
  const auto after = decompose(stratify(vec({40, 60, 120}), {"A", "B", "A"}), 100.0, GpiSpec<double>::sen());
  const auto d = delta_decompose(before, after);
  // after: pooled Sen (2/9)(2 0.6 + 0.4) = 16/45, groups (0.3, 0.4), recomposed 1/3.
  EXPECT_NEAR(after.global_value, 16.0 / 45.0, 1e-15);
  EXPECT_NEAR(after.recomposed_value, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.residual, after.gap - before.gap, 1e-15);
  EXPECT_NEAR(d.residual, (16.0 / 45.0 - 1.0 / 3.0) - (4.0 / 9.0 - 0.4), 1e-15);
}

TEST(DeltaDecompose, MismatchedStrata) {
  const auto a = decompose(worked_example(), 100.0, GpiSpec<double>::sen());
  const auto b = decompose(stratify(vec({20, 60, 120}), {"B", "A", "B"}), 100.0, GpiSpec<double>::sen());
  const auto c = decompose(worked_example(), 100.0, GpiSpec<double>::shorrocks());
  for (const auto* other : {&b, &c}) {
    try {
      delta_decompose(a, *other);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::IncompatibleReports);
    }
  }
}

TEST(RayFirstOrder, ZeroPerturbation) {
  const auto r = ray_delta_firstorder(worked_example(), worked_example(), 100.0, 2.0);
  EXPECT_EQ(r.exact_delta, 0.0);
  EXPECT_EQ(r.approximation, 0.0);
  EXPECT_EQ(r.discrepancy, 0.0);
}

TEST(RayFirstOrder, AlphaOneIsExact) {
  const auto after = stratify(vec({35, 60, 120}), {"A", "B", "A"});
  const auto r = ray_delta_firstorder(worked_example(), after, 100.0, 1.0);
  EXPECT_NEAR(r.exact_delta, -0.05, 1e-15);
  EXPECT_NEAR(r.discrepancy, 0.0, 1e-15);
}

TEST(RayFirstOrder, DiscrepancyIsSecondOrder) {
  std::vector<double> log_eps, log_disc;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto after = stratify(vec({20 + eps * 100.0, 60, 120}), {"A", "B", "A"});
    const auto r = ray_delta_firstorder(worked_example(), after, 100.0, 2.0);
    ASSERT_GT(r.discrepancy, 0.0);
    log_eps.push_back(std::log(eps));
    log_disc.push_back(std::log(r.discrepancy));
  }
  const double slope_hi = (log_disc[1] - log_disc[0]) / (log_eps[1] - log_eps[0]);
  const double slope_lo = (log_disc[2] - log_disc[1]) / (log_eps[2] - log_eps[1]);
  EXPECT_NEAR(slope_hi, 2.0, 0.2);
  EXPECT_NEAR(slope_lo, 2.0, 0.2);
}

TEST(RayFirstOrder, RejectsGroupsWithoutPoor) {
  const auto s = stratify(vec({20, 150, 60, 300}), {"A", "B", "A", "B"});
  EXPECT_THROW(ray_delta_firstorder(s, s, 100.0, 2.0), Error);
}
