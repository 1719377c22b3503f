/**
 * @file test_evaluation.cpp
 * @brief Unit tests for minutia matching, similarity scoring and CMC curves
 *
 * Tests cover:
 * - Tolerance boundaries (inclusive radius and angle, type switch)
 * - One-to-one pairing against the exhaustive assignment oracle
 * - Recovery report totals and TSV layout
 * - Similarity: self-match, planted rigid transforms, empty sets
 * - Mate ranks and CMC against brute-force sorting; monotonicity; CSV round trip
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fingergan/evaluation.hpp"
#include "fingergan/random.hpp"
#include "fingergan/types.hpp"
#include "../oracles.hpp"

namespace fingergan::evaluation {
namespace {

constexpr double kPi = std::numbers::pi;

MinutiaSet random_set(RandomSource& rng, int count, int size = 200) {
  MinutiaSet s;
  while (static_cast<int>(s.size()) < count) {
    const Minutia m{std::round(rng.uniform(0, size)), std::round(rng.uniform(0, size)), rng.uniform(0, 2 * kPi),
                    rng.uniform01() < 0.5 ? MinutiaKind::ending : MinutiaKind::bifurcation};
    try {
      s.add(m);
    } catch (const std::invalid_argument&) {
    }
  }
  return s;
}

TEST(Compatible, InclusiveBoundaries) {
  const MatchTolerance tol;
  const Minutia g{0, 0, 0, MinutiaKind::ending};
  EXPECT_TRUE(compatible({15, 0, 0, MinutiaKind::ending}, g, tol));
  EXPECT_FALSE(compatible({15.001, 0, 0, MinutiaKind::ending}, g, tol));
  EXPECT_TRUE(compatible({0, 0, kPi / 6, MinutiaKind::ending}, g, tol));
  EXPECT_FALSE(compatible({0, 0, kPi / 6 + 1e-6, MinutiaKind::ending}, g, tol));
  EXPECT_TRUE(compatible({0, 0, 2 * kPi - 0.1, MinutiaKind::ending}, g, tol));
  EXPECT_FALSE(compatible({0, 0, 0, MinutiaKind::bifurcation}, g, tol));
  MatchTolerance loose = tol;
  loose.require_type = false;
  EXPECT_TRUE(compatible({0, 0, 0, MinutiaKind::bifurcation}, g, loose));
}

TEST(AngleDifference, WrapsAroundCircle) {
  EXPECT_NEAR(angle_difference(0.1, 2 * kPi - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(angle_difference(0, kPi), kPi, 1e-12);
  EXPECT_NEAR(angle_difference(-kPi / 2, kPi / 2), kPi, 1e-12);
}

TEST(Match, ExactSetRecoversEverything) {
  RandomSource rng(1);
  const MinutiaSet s = random_set(rng, 25);
  const RecoveryRow r = match_minutiae(s, s);
  EXPECT_EQ(r.recovered, 25u);
  EXPECT_EQ(r.fake, 0u);
}

TEST(Match, OneToOne) {
  MinutiaSet g, e;
  g.add({10, 10, 0, MinutiaKind::ending});
  e.add({11, 10, 0, MinutiaKind::ending});
  e.add({9, 10, 0, MinutiaKind::ending});
  const RecoveryRow r = match_minutiae(e, g);
  EXPECT_EQ(r.recovered, 1u);
  EXPECT_EQ(r.fake, 1u);
  ASSERT_EQ(r.pairs.size(), 1u);
  // Equal distances: the lower extracted index wins.
  EXPECT_EQ(r.pairs[0].extracted, 0u);
}

TEST(Match, AgreesWithAssignmentOracleOnSparseSets) {
  // Sparse sets: every minutia has at most one compatible partner, so the
  // greedy pairing is maximum.
  RandomSource rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    MinutiaSet g = random_set(rng, 8, 400);
    MinutiaSet e;
    for (const auto& m : g) {
      if (rng.uniform01() < 0.7) {
        Minutia x = m;
        x.x += rng.uniform(-5, 5);
        x.y += rng.uniform(-5, 5);
        x.angle = wrap_direction(x.angle + rng.uniform(-0.3, 0.3));
        try {
          e.add(x);
        } catch (const std::invalid_argument&) {
        }
      }
    }
    const MatchTolerance tol;
    const std::size_t best = oracle::max_assignment(e.items(), g.items(), tol.loc_radius, tol.angle_tol, true);
    const RecoveryRow r = match_minutiae(e, g, tol);
    EXPECT_LE(r.recovered, best);
    bool sparse = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        sparse &= std::hypot(g[i].x - g[j].x, g[i].y - g[j].y) > 3 * tol.loc_radius;
      }
    }
    if (sparse) {
      EXPECT_EQ(r.recovered, best);
    }
    EXPECT_EQ(r.recovered + r.fake, e.size());
  }
}

TEST(Match, NeverExceedsOracleOnDenseSets) {
  RandomSource rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const MinutiaSet g = random_set(rng, 12, 60), e = random_set(rng, 12, 60);
    const MatchTolerance tol;
    const RecoveryRow r = match_minutiae(e, g, tol);
    EXPECT_LE(r.recovered, oracle::max_assignment(e.items(), g.items(), tol.loc_radius, tol.angle_tol, true));
    std::vector<char> used_e(e.size(), 0), used_g(g.size(), 0);
    for (const auto& p : r.pairs) {
      ASSERT_FALSE(used_e[p.extracted]);
      ASSERT_FALSE(used_g[p.genuine]);
      used_e[p.extracted] = used_g[p.genuine] = 1;
      EXPECT_TRUE(compatible(e[p.extracted], g[p.genuine], tol));
    }
  }
}

TEST(Report, TotalsAndTsv) {
  RecoveryReport rep;
  RecoveryRow a;
  a.id = "x";
  a.genuine = 5;
  a.extracted = 4;
  a.recovered = 3;
  a.fake = 1;
  RecoveryRow b = a;
  b.id = "y";
  rep.add(a);
  rep.add(b);
  EXPECT_EQ(rep.total_recovered, 6u);
  EXPECT_EQ(rep.total_fake, 2u);
  const std::string tsv = rep.to_tsv();
  EXPECT_NE(tsv.find("x\t5\t4\t3\t1"), std::string::npos);
  EXPECT_NE(tsv.find("TOTAL\t10\t8\t6\t2"), std::string::npos);
}

TEST(Similarity, SelfMatchIsOne) {
  RandomSource rng(4);
  const MinutiaSet s = random_set(rng, 20);
  EXPECT_NEAR(similarity_score(s, s), 1.0, 1e-12);
  EXPECT_EQ(similarity_score(MinutiaSet(), s), 0.0);
}

TEST(Similarity, PlantedRigidTransform) {
  RandomSource rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const MinutiaSet s = random_set(rng, 25);
    const double rot = rng.uniform(-0.5, 0.5);
    const auto moved = transform(s.items(), rot, rng.uniform(-30, 30), rng.uniform(-30, 30));
    MinutiaSet probe;
    for (const auto& m : moved) probe.add(m);
    EXPECT_GE(similarity_score(probe, s), 0.9);
  }
}

TEST(Similarity, TransformRotatesAngles) {
  const std::vector<Minutia> m{{10, 0, 0.5, MinutiaKind::ending}};
  const auto t = transform(m, kPi / 2, 1, 2);
  EXPECT_NEAR(direction_difference(t[0].angle, 0.5 + kPi / 2), 0.0, 1e-12);
  EXPECT_NEAR(std::hypot(t[0].x - 1, t[0].y - 2), 10.0, 1e-9);
}

TEST(Cmc, RanksMatchBruteForce) {
  RandomSource rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreMatrix m;
    for (int p = 0; p < 10; ++p) {
      std::vector<double> row(50);
      // Coarse scores create ties.
      for (auto& v : row) v = std::round(rng.uniform(0, 20)) / 20;
      m.scores.push_back(row);
      m.true_mate.push_back(static_cast<std::size_t>(rng.uniform_int(0, 49)));
    }
    std::vector<double> expected(50, 0.0);
    for (std::size_t p = 0; p < 10; ++p) {
      const std::size_t rank = oracle::rank_of(m.scores[p], m.true_mate[p]);
      ASSERT_EQ(mate_rank(m, p), rank);
      for (std::size_t k = rank; k <= 50; ++k) expected[k - 1] += 0.1;
    }
    const auto curve = cmc_curve(m);
    ASSERT_EQ(curve.size(), 50u);
    for (std::size_t k = 0; k < 50; ++k) {
      EXPECT_NEAR(curve[k], expected[k], 1e-12);
      if (k) {
        EXPECT_GE(curve[k], curve[k - 1]);
      }
    }
    EXPECT_DOUBLE_EQ(curve.back(), 1.0);
  }
}

TEST(Cmc, CsvRoundTripAndValidation) {
  const std::vector<double> curve{0.25, 0.5, 1.0};
  const auto back = read_cmc_csv(cmc_to_csv(curve));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], curve[i], 1e-12);
  EXPECT_THROW(read_cmc_csv("rank,accuracy\n2,0.5\n"), std::runtime_error);
  ScoreMatrix bad;
  bad.scores = {{1.0, 2.0}};
  bad.true_mate = {2};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace fingergan::evaluation
