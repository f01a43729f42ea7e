#include <gtest/gtest.h>

#include <map>

#include "oracle.hpp"
#include "sigmaevo/exponent_calculus.hpp"

using namespace sigmaevo;

namespace {

ProblemParams tuple(int n, double m, double q, double s1, double s2, double p1, double p2) {
  return ProblemParams{n, s1, s2, p1, p2, q, m};
}

ProblemParams to_params(const oracle::Tuple& t) {
  return ProblemParams{static_cast<int>(t.n), t.s1.get_d(), t.s2.get_d(), t.p1.get_d(),
                       t.p2.get_d(),           t.q.get_d(),  t.m.get_d()};
}

}  // namespace

TEST(DerivedConstants, AdmissibleInstance) {
  const auto p = tuple(7, 1, 4, 1, 1, 9, 10);
  const auto c = derived_constants(p);
  EXPECT_EQ(c.half_n, 3);
  EXPECT_DOUBLE_EQ(c.r, 4.0);
  EXPECT_DOUBLE_EQ(c.gamma, 1.25);
  EXPECT_DOUBLE_EQ(c.alpha, 3.75);
  EXPECT_DOUBLE_EQ(c.kappa1, 3.0);
  EXPECT_DOUBLE_EQ(c.kappa2, 3.0);
  EXPECT_EQ(epsilon_p1_sigma2(p, c), 0.0);
}

TEST(DerivedConstants, RelationForR) {
  for (double q : {1.5, 2.0, 3.0, 8.0})
    for (double m : {1.0, 1.25}) {
      const auto c = derived_constants(tuple(3, m, q, 1, 1, 2, 2));
      EXPECT_NEAR(1.0 + 1.0 / q, 1.0 / c.r + 1.0 / m, 1e-15);
    }
}

TEST(DerivedConstants, EqualOrdersGiveEqualKappas) {
  for (int n = 1; n <= 9; ++n)
    for (double s : {1.0, 1.5, 2.0}) {
      const auto c = derived_constants(tuple(n, 1.5, 3, s, s, 2, 2));
      EXPECT_DOUBLE_EQ(c.kappa1, c.kappa2);
      EXPECT_DOUBLE_EQ(c.alpha, c.beta);
    }
}

TEST(Validate, RejectsInvalidTuples) {
  EXPECT_THROW(validate(tuple(3, 2, 2, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(3, 3, 2, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(0, 1, 2, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(3, 0.5, 2, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(3, 1, 1, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(3, 1, 2, 0.5, 1, 2, 2)), InvalidParameters);
  EXPECT_THROW(validate(tuple(3, 1, 2, 1, 1, 1, 2)), InvalidParameters);
  EXPECT_THROW(classify(tuple(3, 2, 2, 1, 1, 2, 2)), InvalidParameters);
  EXPECT_NO_THROW(validate(tuple(3, 1, 2, 1, 1, 2, 2)));
}

TEST(Classify, LossInstance) {
  const auto p = tuple(7, 1, 4, 1, 1, 9, 10);
  const auto v = classify(p);
  EXPECT_EQ(v.scenario, Scenario::Thm11_loss);
  ASSERT_TRUE(v.eps_p1_sigma2.has_value());
  EXPECT_EQ(*v.eps_p1_sigma2, 0.0);
  EXPECT_FALSE(v.eps_p2_sigma1.has_value());
  EXPECT_TRUE(v.report.holds("GN11A1"));
  const auto* thr = v.report.find("EXP11A-threshold");
  ASSERT_NE(thr, nullptr);
  EXPECT_DOUBLE_EQ(thr->rhs, 9.0);

  const auto rates = predicted_rates(p, v, derived_constants(p));
  EXPECT_DOUBLE_EQ(rates.u.rate_lq, -1.125);
  EXPECT_DOUBLE_EQ(rates.u.rate_mid, -1.625);
  EXPECT_DOUBLE_EQ(rates.u.rate_top, -2.125);
  EXPECT_DOUBLE_EQ(rates.v.rate_lq, -1.125);
}

TEST(Classify, NoLossInstance) {
  const auto p = tuple(7, 1, 4, 1, 1, 10, 10);
  const auto v = classify(p);
  EXPECT_EQ(v.scenario, Scenario::Thm11B_noloss);
  EXPECT_EQ(v.note, "branches coincide (sigma1 = sigma2)");
  const auto rates = predicted_rates(p, v, derived_constants(p));
  EXPECT_DOUBLE_EQ(rates.u.rate_lq, -1.5);
  EXPECT_DOUBLE_EQ(rates.u.rate_mid, -2.0);
  EXPECT_DOUBLE_EQ(rates.u.rate_top, -2.5);
  EXPECT_DOUBLE_EQ(rates.v.rate_top, -2.5);
}

TEST(Classify, NoTheoremInstance) {
  const auto p = tuple(8, 1, 2, 1, 1, 2, 2);
  const auto v = classify(p);
  EXPECT_EQ(v.scenario, Scenario::none);
  const auto c = derived_constants(p);
  EXPECT_DOUBLE_EQ(c.alpha, 3.0);
  EXPECT_DOUBLE_EQ(c.gamma, 3.0);
  EXPECT_DOUBLE_EQ(c.kappa1, 3.5);
  EXPECT_THROW(predicted_rates(p, v, c), InvalidParameters);
}

TEST(Classify, SecondFamilyMirrorsFirst) {
  // Swapping the roles of the components maps a first-family tuple to the
  // second family.
  const auto v = classify(tuple(7, 1, 4, 1, 1, 10, 9));
  EXPECT_EQ(v.scenario, Scenario::Thm12_loss);
  ASSERT_TRUE(v.eps_p2_sigma1.has_value());
  EXPECT_EQ(*v.eps_p2_sigma1, 0.0);
}

TEST(Classify, ReportCarriesEveryCondition) {
  const auto v = classify(tuple(3, 1, 2, 1.5, 1, 3, 5));
  for (const char* id : {"GN11A1", "GN11A2", "GN11A3", "GN12A1", "GN12A2", "GN12A3", "EXP11A-part1",
                         "THRESH-DENOM-11", "EXP11A-threshold", "EXP11B", "EXP12A-part1",
                         "THRESH-DENOM-12", "EXP12A-threshold", "EXP12B", "DIM", "ORD-11", "ORD-12"})
    EXPECT_NE(v.report.find(id), nullptr) << id;
  EXPECT_TRUE(v.report.holds("ORD-11"));
  EXPECT_FALSE(v.report.holds("ORD-12"));
}

TEST(Classify, UndefinedThresholdFailsCleanly) {
  // n − 2mσκ <= 0 for this tuple: the threshold entries must fail with NaN rhs.
  const auto p = tuple(2, 1, 8, 1, 1, 9, 9);
  const auto v = classify(p);
  EXPECT_FALSE(v.report.holds("THRESH-DENOM-11"));
  EXPECT_TRUE(std::isnan(v.report.find("EXP11B")->rhs));
  EXPECT_EQ(v.scenario, Scenario::none);
}

TEST(Classify, AgreesWithExactOracle) {
  oracle::Sampler sampler(20240601);
  std::map<std::string, int> seen;
  int disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = sampler.next();
    const std::string expected = oracle::classify(t);
    const std::string got = to_string(classify(to_params(t)).scenario);
    ++seen[expected];
    if (expected != got) {
      ++disagreements;
      ADD_FAILURE() << "tuple n=" << t.n << " m=" << t.m << " q=" << t.q << " s1=" << t.s1
                    << " s2=" << t.s2 << " p1=" << t.p1 << " p2=" << t.p2 << ": oracle " << expected
                    << ", classifier " << got;
      if (disagreements > 10) break;
    }
  }
  EXPECT_EQ(disagreements, 0);
  for (const char* sc : {"Thm11_loss", "Thm12_loss", "Thm11B_noloss", "Thm12B_noloss", "none"})
    EXPECT_GT(seen[sc], 0) << sc;
}

TEST(Epsilon, NonNegativeOnLossHits) {
  oracle::Sampler sampler(7);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto p = to_params(sampler.next());
    const auto v = classify(p);
    if (v.scenario == Scenario::Thm11_loss) {
      ++hits;
      EXPECT_GE(*v.eps_p1_sigma2, -1e-12);
    } else if (v.scenario == Scenario::Thm12_loss) {
      ++hits;
      EXPECT_GE(*v.eps_p2_sigma1, -1e-12);
    }
  }
  EXPECT_GT(hits, 0);
}

TEST(Epsilon, VariantsDifferByHalfKappaTimesP) {
  const auto p = tuple(7, 1, 4, 1, 1, 9, 10);
  const auto c = derived_constants(p);
  const double a = epsilon_p1_sigma2(p, c, EpsVariant::paper);
  const double b = epsilon_p1_sigma2(p, c, EpsVariant::gn_derived);
  EXPECT_NEAR(a - b, 0.5 * p.p1 * c.kappa1, 1e-12);
  EXPECT_THROW(epsilon_loss(1.0, 1.0, 1.0, p), InvalidParameters);
}

TEST(Nonintegrability, KnownValues) {
  const auto p = tuple(7, 1, 4, 1, 1, 9, 10);
  const auto c = derived_constants(p);
  EXPECT_NEAR(gn_source_exponent(9, 1, c.kappa1, 1, p), -14.5, 1e-12);
  EXPECT_FALSE(nonintegrability_flag(9, 1, c.kappa1, p));
  EXPECT_NEAR(gn_source_exponent(9, 1, c.kappa1, 1, p, EpsVariant::paper), *classify(p).eps_p1_sigma2 - 1.0,
              1e-12);

  const auto small = tuple(1, 1, 3, 2, 2, 2, 2);
  EXPECT_NEAR(gn_source_exponent(2, 2, 1, 1, small), -0.25 + 1.0, 1e-12);
  EXPECT_TRUE(nonintegrability_flag(2, 2, 1, small));
}

TEST(Scan, CardinalityAndOrder) {
  ParamGrid g{{3, 7}, {1, 2}, {1}, {2, 9}, {10}, {2, 4}, {1, 1.5, 3}};
  EXPECT_EQ(g.cardinality(), 2u * 2 * 1 * 2 * 1 * 2 * 3);
  const auto rows = region_scan(g, 1);
  ASSERT_EQ(rows.size(), g.cardinality());
  EXPECT_DOUBLE_EQ(rows[0].params.m, 1.0);
  EXPECT_DOUBLE_EQ(rows[1].params.m, 1.5);
  EXPECT_DOUBLE_EQ(rows[3].params.q, 4.0);
  // m = 3 with q = 2 is invalid and kept as such.
  EXPECT_FALSE(rows[2].valid);
  EXPECT_TRUE(rows[5].valid);

  const auto threaded = region_scan(g, 3);
  ASSERT_EQ(threaded.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(threaded[i].params, rows[i].params);
    EXPECT_EQ(threaded[i].verdict.scenario, rows[i].verdict.scenario);
  }
  const auto summary = scan_summary(rows);
  std::size_t total = 0;
  for (const auto& [k, v] : summary) total += v;
  EXPECT_EQ(total, rows.size());
}
