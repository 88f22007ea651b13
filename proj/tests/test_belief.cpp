#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <filesystem>
#include <random>

#include "banditsim/belief.hpp"
#include "banditsim/errors.hpp"
#include "banditsim/numeric.hpp"
#include "oracles.hpp"

using namespace banditsim;

namespace {

struct Instance {
  std::vector<double> m, q, phi;
  int y;
};

/// Random prior, sparse-ish feature vector with entries in {0, 1, U(-2,2)}.
Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 10);
  std::uniform_real_distribution<double> mean(-2.0, 2.0), logq(std::log(0.1), std::log(10.0)), u(0.0, 1.0);
  Instance in;
  const std::size_t d = dim(rng);
  for (std::size_t j = 0; j < d; ++j) {
    in.m.push_back(mean(rng));
    in.q.push_back(std::exp(logq(rng)));
    const double r = u(rng);
    in.phi.push_back(r < 0.3 ? 0.0 : (r < 0.7 ? 1.0 : mean(rng)));
  }
  in.y = u(rng) < 0.5 ? -1 : 1;
  return in;
}

}  // namespace

TEST(InitPrior, Definition) {
  const auto s = init_prior(3, 1.0);
  EXPECT_EQ(std::vector<double>(s.mean().begin(), s.mean().end()), std::vector<double>(3, 0.0));
  EXPECT_EQ(std::vector<double>(s.precision().begin(), s.precision().end()), std::vector<double>(3, 1.0));
  EXPECT_DOUBLE_EQ(1.0 / std::sqrt(init_prior(1, 4.0).precision()[0]), 0.5);
  EXPECT_EQ(predict(init_prior(4, 2.0), std::vector<double>{1, 0.5, -3, 1}).p_success, 0.5);
  EXPECT_THROW(init_prior(3, 0.0), DomainError);
  EXPECT_THROW(init_prior(3, -1.0), DomainError);
  EXPECT_THROW(init_prior(0, 1.0), DomainError);
}

TEST(Update, ZeroFeatureVectorLeavesStateUnchanged) {
  const BeliefState s({0.3, -1.0}, {2.0, 0.5});
  EXPECT_EQ(update(s, std::vector<double>{0, 0}, +1), s);
  EXPECT_EQ(update(s, std::vector<double>{0, 0}, -1), s);
}

TEST(Update, ScalarExampleMatchesOracle) {
  // Frozen from an independent scipy root solve of w = logistic(-w) and the curvature formula.
  const auto plus = update(init_prior(1, 1.0), std::vector<double>{1.0}, +1);
  EXPECT_NEAR(plus.mean()[0], 0.401058137541547, 1e-9);
  EXPECT_NEAR(plus.precision()[0], 1.2402105078532526, 1e-9);
  const auto minus = update(init_prior(1, 1.0), std::vector<double>{1.0}, -1);
  EXPECT_NEAR(minus.mean()[0], -0.401058137541547, 1e-9);
  EXPECT_NEAR(minus.precision()[0], 1.2402105078532526, 1e-9);
}

TEST(Update, DoesNotMutateInput) {
  const BeliefState s({0.1, 0.2}, {1.0, 3.0});
  const BeliefState copy = s;
  (void)update(s, std::vector<double>{1, 1}, 1);
  EXPECT_EQ(s, copy);
}

TEST(Update, Errors) {
  const auto s = init_prior(2, 1.0);
  EXPECT_THROW(update(s, std::vector<double>{1, 0, 0}, 1), DomainError);
  EXPECT_THROW(update(s, std::vector<double>{1, 0}, 0), DomainError);
  EXPECT_THROW(update(s, std::vector<double>{NAN, 0}, 1), NumericError);
  BisectionOptions tight{1e-30, 5};
  EXPECT_THROW(update(s, std::vector<double>{1, 0}, 1, tight), NumericError);
}

TEST(UpdateProperty, PrecisionMonotoneAndUntouchedCoordinatesFrozen) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 500; ++t) {
    const auto in = random_instance(rng);
    const BeliefState s(in.m, in.q);
    const auto next = update(s, in.phi, in.y);
    for (std::size_t j = 0; j < in.phi.size(); ++j) {
      if (in.phi[j] == 0.0) {
        EXPECT_EQ(next.mean()[j], in.m[j]);
        EXPECT_EQ(next.precision()[j], in.q[j]);
      } else {
        EXPECT_GT(next.precision()[j], in.q[j]);
      }
    }
  }
}

TEST(UpdateProperty, StationarityResidualBelow1e8) {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 500; ++t) {
    const auto in = random_instance(rng);
    const auto next = update(BeliefState(in.m, in.q), in.phi, in.y);
    double mp = 0.0;
    for (std::size_t j = 0; j < in.phi.size(); ++j) mp += next.mean()[j] * in.phi[j];
    double norm2 = 0.0;
    for (std::size_t j = 0; j < in.phi.size(); ++j) {
      const double g = in.q[j] * (next.mean()[j] - in.m[j]) - in.y * in.phi[j] * logistic(-in.y * mp);
      norm2 += g * g;
    }
    EXPECT_LT(std::sqrt(norm2), 1e-8);
  }
}

TEST(UpdateProperty, MatchesDenseNewtonOracle) {
  std::mt19937_64 rng(303);
  for (int t = 0; t < 100; ++t) {
    const auto in = random_instance(rng);
    const auto next = update(BeliefState(in.m, in.q), in.phi, in.y);
    const auto ref = oracle::newton_map(in.m, in.q, in.phi, in.y);
    for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(next.mean()[j], ref[j], 1e-6);
  }
}

TEST(UpdateProperty, SignSymmetryFromZeroMeanPrior) {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 200; ++t) {
    auto in = random_instance(rng);
    std::fill(in.m.begin(), in.m.end(), 0.0);
    const BeliefState s(in.m, in.q);
    const auto plus = update(s, in.phi, +1);
    const auto minus = update(s, in.phi, -1);
    for (std::size_t j = 0; j < in.m.size(); ++j) {
      EXPECT_NEAR(plus.mean()[j], -minus.mean()[j], 1e-12);
      EXPECT_NEAR(plus.precision()[j], minus.precision()[j], 1e-12);
    }
  }
}

TEST(Predict, ClosedFormValues) {
  const BeliefState s({1.0}, {1e300});
  const auto r = predict(s, std::vector<double>{1.0});
  EXPECT_NEAR(r.p_success, 0.7310585786300049, 1e-12);

  const auto one = predict(BeliefState({1.0}, {1.0}), std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(one.mu_b, 1.0);
  EXPECT_DOUBLE_EQ(one.sigma2_b, 1.0);
  EXPECT_NEAR(kappa(one.sigma2_b), 0.8473666266006313, 1e-12);
  EXPECT_NEAR(one.p_success, 0.7000144407062076, 1e-12);
  // Monte-Carlo integral of logistic over N(1,1): the moderation error stays within 0.02.
  EXPECT_NEAR(one.p_success, oracle::mc_logistic_normal(1.0, 1.0, 1'000'000, 9), 0.02);
}

TEST(Predict, SymmetricPointIsHalf) {
  const BeliefState s({1.0, -1.0, 3.0}, {0.2, 5.0, 1.0});
  EXPECT_EQ(predict(s, std::vector<double>{1, 1, 0}).p_success, 0.5);
  EXPECT_THROW(predict(s, std::vector<double>{1, 1}), DomainError);
}

TEST(PredictProperty, ModerationShrinksTowardHalf) {
  std::mt19937_64 rng(505);
  for (int t = 0; t < 1000; ++t) {
    const auto in = random_instance(rng);
    const BeliefState s(in.m, in.q);
    const auto r = predict(s, in.phi);
    EXPECT_LE(std::abs(r.p_success - 0.5), std::abs(logistic(r.mu_b) - 0.5) + 1e-15);
    EXPECT_GT(r.p_success, 0.0);
    EXPECT_LT(r.p_success, 1.0);
  }
}

TEST(PredictProperty, InvariantUnderCoordinatePermutation) {
  std::mt19937_64 rng(606);
  for (int t = 0; t < 200; ++t) {
    auto in = random_instance(rng);
    std::vector<std::size_t> perm(in.m.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> m2, q2, p2;
    for (auto i : perm) {
      m2.push_back(in.m[i]);
      q2.push_back(in.q[i]);
      p2.push_back(in.phi[i]);
    }
    EXPECT_NEAR(predict(BeliefState(in.m, in.q), in.phi).p_success, predict(BeliefState(m2, q2), p2).p_success,
                1e-14);
  }
}

TEST(SampleWeights, NearZeroVarianceReturnsMean) {
  const BeliefState s({0.5, -2.0}, {1e12, 1e12});
  Rng rng(1);
  const auto w = sample_weights(s, rng);
  EXPECT_NEAR(w[0], 0.5, 1e-4);
  EXPECT_NEAR(w[1], -2.0, 1e-4);
}

TEST(SampleWeights, MomentsMatchPosterior) {
  const std::vector<double> m{0.5, -1.0, 2.0};
  const std::vector<double> q{1.0, 4.0, 0.25};
  const BeliefState s(m, q);
  Rng rng(77);
  const std::size_t n = 100'000;
  std::vector<double> sum(3, 0.0), sum2(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = sample_weights(s, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      sum[j] += w[j];
      sum2[j] += w[j] * w[j];
    }
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const double var = 1.0 / q[j];
    const double mean = sum[j] / n;
    const double sample_var = sum2[j] / n - mean * mean;
    EXPECT_NEAR(mean, m[j], 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(sample_var, var, 4.0 * var * std::sqrt(2.0 / (n - 1)));  // SE of a Gaussian sample variance
  }
}

TEST(Reshape, Definition) {
  const BeliefState s({1.0, 2.0}, {1.0, 2.0});
  EXPECT_EQ(reshape(s, 1.0), s);
  const auto r = reshape(s, 0.5);
  EXPECT_DOUBLE_EQ(r.precision()[0], 4.0);
  EXPECT_DOUBLE_EQ(r.precision()[1], 8.0);
  EXPECT_EQ(r.mean()[0], 1.0);
  EXPECT_EQ(predict(reshape(s, 3.0), std::vector<double>{2, -1}).p_success, 0.5);
  EXPECT_THROW(reshape(s, 0.0), DomainError);
  EXPECT_THROW(reshape(s, -1.0), DomainError);
}

TEST(BeliefJson, RoundTripIsExact) {
  std::mt19937_64 rng(808);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(rng);
    const BeliefState s(in.m, in.q);
    EXPECT_EQ(belief_from_json(to_json(s)), s);
  }
  const auto path = std::filesystem::temp_directory_path() / "banditsim_belief_test.json";
  const BeliefState s({0.1, 1.0 / 3.0}, {7.0, 1e-3});
  save_belief(s, path);
  EXPECT_EQ(load_belief(path), s);
  std::filesystem::remove(path);
}

TEST(BeliefJson, RejectsMalformed) {
  EXPECT_THROW(belief_from_json("{\"d\": 2, \"m\": [0], \"q\": [1]}"), SchemaError);
  EXPECT_THROW(belief_from_json("not json"), ParseError);
  EXPECT_THROW(belief_from_json("{\"d\": 1, \"m\": [0], \"q\": [-1]}"), DomainError);
}
