#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "banditsim/errors.hpp"
#include "banditsim/simulator.hpp"

using namespace banditsim;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(PolicyKind kind = PolicyKind::kKnowledgeGradient) {
  ExperimentConfig c;
  c.num_patients = 40;
  c.num_physicians = 4;
  c.replications = 60;
  c.seed = 77;
  c.features.context_dim = 5;
  c.features.density = 0.3;
  c.policy.kind = kind;
  return c;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("banditsim_sim_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(GenTruth, ZeroSigmaAndDeterminism) {
  ExperimentConfig c;
  c.sigma_truth = 0.0;
  Rng rng(1);
  const auto zero = gen_truth(c, 7, rng);
  EXPECT_EQ(zero.w_star, std::vector<double>(7, 0.0));

  c.sigma_truth = 1.0;
  Rng a(9), b(9);
  EXPECT_EQ(gen_truth(c, 50, a).w_star, gen_truth(c, 50, b).w_star);
}

TEST(GenTruth, CoordinatesHaveZeroMean) {
  ExperimentConfig c;
  Rng rng(3);
  const auto t = gen_truth(c, 10000, rng);
  // 4 standard errors of the mean of 10^4 standard normals.
  EXPECT_LT(std::abs(mean_of(t.w_star)), 4.0 / 100.0);
}

TEST(GenTruth, LoadsFileAndChecksDimension) {
  const auto dir = temp_dir("truth");
  std::ofstream(dir / "array.json") << "[0.5, -1, 2]";
  std::ofstream(dir / "object.json") << R"({"w_star": [1, 2]})";
  std::ofstream(dir / "bad.json") << "[1, \"x\"]";
  EXPECT_EQ(load_truth(dir / "array.json", 3).w_star, (std::vector<double>{0.5, -1, 2}));
  EXPECT_EQ(load_truth(dir / "object.json", 2).w_star, (std::vector<double>{1, 2}));
  EXPECT_THROW(load_truth(dir / "array.json", 4), ConfigError);
  EXPECT_THROW(load_truth(dir / "bad.json", 2), ConfigError);
  EXPECT_THROW(load_truth(dir / "missing.json", 2), ConfigError);

  ExperimentConfig c;
  c.truth_file = dir / "array.json";
  Rng rng(1);
  EXPECT_EQ(gen_truth(c, 3, rng).w_star[2], 2.0);
}

TEST(GenContexts, DensityZeroAndTarget) {
  ExperimentConfig c;
  c.features.density = 0.0;
  Rng rng(1);
  for (const auto& ctx : gen_contexts(c, rng))
    for (double f : ctx.features) EXPECT_EQ(f, 0.0);

  c.features.context_dim = 2000;
  c.features.density = 31.0 / 2000.0;
  c.num_patients = 500;
  const auto ctxs = gen_contexts(c, rng);
  ASSERT_EQ(ctxs.size(), 500u);
  double nnz = 0.0;
  for (const auto& ctx : ctxs) nnz += std::count(ctx.features.begin(), ctx.features.end(), 1.0);
  EXPECT_NEAR(nnz / 500.0, 31.0, 1.0);
}

TEST(GenContexts, CsvReplayPreservesOrderAndValues) {
  const auto dir = temp_dir("ctx");
  std::ofstream(dir / "ctx.csv") << "patient_id,dx_a,dx_b\nz,1,0\na,0,1\nm,1,1\n";
  ExperimentConfig c;
  c.num_patients = 3;
  c.features.contexts_csv = dir / "ctx.csv";
  Rng rng(1);
  const auto ctxs = gen_contexts(c, rng);
  ASSERT_EQ(ctxs.size(), 3u);
  EXPECT_EQ(ctxs[0].id, "z");
  EXPECT_EQ(ctxs[1].id, "a");
  EXPECT_EQ(ctxs[2].features, (std::vector<double>{1, 1}));
  EXPECT_EQ(context_dimension(c), 2u);

  c.num_patients = 3;
  c.replications = 2;
  c.num_physicians = 2;
  const auto r = run_experiment(c, {1, {}});
  EXPECT_EQ(r.trajectories[0].steps[0].context_id, "z");

  c.num_patients = 4;
  EXPECT_THROW(run_experiment(c), SchemaError);
  std::ofstream(dir / "bad.csv") << "dx_a\n1\n";
  c.features.contexts_csv = dir / "bad.csv";
  EXPECT_THROW(gen_contexts(c, rng), SchemaError);
}

TEST(TrueSuccessProb, ClosedForms) {
  EXPECT_EQ(true_success_prob({{0, 0, 0}}, std::vector<double>{1, 1, 0}), 0.5);
  EXPECT_NEAR(true_success_prob({{0.25, 0.75}}, std::vector<double>{1, 1}), 0.7310585786300049, 1e-15);
  EXPECT_THROW(true_success_prob({{0, 0}}, std::vector<double>{1}), DomainError);

  const std::vector<double> w{0.3, -0.8, 1.1}, phi{1, 0, 1};
  const BeliefState degenerate(w, {1e14, 1e14, 1e14});
  EXPECT_NEAR(predict(degenerate, phi).p_success, true_success_prob({w}, phi), 1e-6);
}

TEST(RunEpisode, SinglePatientSingleAction) {
  ExperimentConfig c;
  c.num_patients = 1;
  c.num_physicians = 1;
  c.features.context_dim = 3;
  Rng rng(5);
  const auto ctxs = gen_contexts(c, rng);
  const TruthModel truth{std::vector<double>(feature_dimension(3, c.action_space()), 0.2)};
  const auto t = run_episode(c, truth, ctxs, rng);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].action, (Action{1, 0}));
  EXPECT_LE(t.final_successes, 1u);
  EXPECT_EQ(t.steps[0].cumulative_successes, t.final_successes);
}

TEST(RunEpisode, InputChecks) {
  ExperimentConfig c;
  c.num_patients = 3;
  c.num_physicians = 2;
  c.features.context_dim = 2;
  Rng rng(1);
  auto ctxs = gen_contexts(c, rng);
  EXPECT_THROW(run_episode(c, TruthModel{std::vector<double>(3)}, ctxs, rng), DomainError);
  ctxs.pop_back();
  EXPECT_THROW(run_episode(c, TruthModel{std::vector<double>(5)}, ctxs, rng), SchemaError);
}

TEST(RunEpisode, DeterministicAndWellFormed) {
  auto c = small_config();
  c.num_patients = 30;
  Rng g(2);
  const auto ctxs = gen_contexts(c, g);
  const auto truth = gen_truth(c, feature_dimension(5, c.action_space()), g);
  auto s1 = replication_streams(11, 3), s2 = replication_streams(11, 3);
  const auto a = run_episode(c, truth, ctxs, s1), b = run_episode(c, truth, ctxs, s2);
  ASSERT_EQ(a.steps.size(), 30u);
  std::size_t prev = 0;
  for (std::size_t n = 0; n < a.steps.size(); ++n) {
    EXPECT_EQ(a.steps[n].action, b.steps[n].action);
    EXPECT_EQ(a.steps[n].outcome, b.steps[n].outcome);
    EXPECT_EQ(a.steps[n].n, n);
    EXPECT_GE(a.steps[n].cumulative_successes, prev);
    EXPECT_LE(a.steps[n].cumulative_successes, n + 1);
    EXPECT_TRUE(a.steps[n].outcome == 1 || a.steps[n].outcome == -1);
    prev = a.steps[n].cumulative_successes;
  }
}

TEST(RunEpisode, OutcomeDrawsAreSharedAcrossPolicies) {
  // Same key, step and action give the same uniform, regardless of history.
  EXPECT_EQ(outcome_uniform(42, 7, 3), outcome_uniform(42, 7, 3));
  EXPECT_NE(outcome_uniform(42, 7, 3), outcome_uniform(42, 7, 4));
  EXPECT_NE(outcome_uniform(42, 7, 3), outcome_uniform(43, 7, 3));
}

TEST(RunExperiment, NullTruthExploreIsFair) {
  auto c = small_config(PolicyKind::kExplore);
  c.sigma_truth = 0.0;
  c.replications = 500;
  const auto r = run_experiment(c);
  std::vector<double> rate;
  for (double f : r.final_counts) rate.push_back(f / static_cast<double>(c.num_patients));
  EXPECT_LT(std::abs(mean_of(rate) - 0.5), 3.0 * se_of(rate));
}

TEST(RunExperiment, ReproducibleAndThreadInvariant) {
  const auto c = small_config();
  const auto a = run_experiment(c, {1, {}});
  const auto b = run_experiment(c, {3, {}});
  const auto again = run_experiment(c, {1, {}});
  EXPECT_EQ(a.final_counts, b.final_counts);
  EXPECT_EQ(a.final_counts, again.final_counts);
  EXPECT_EQ(a.summary.mean_rate, b.summary.mean_rate);
  for (std::size_t r = 0; r < c.replications; ++r)
    for (std::size_t n = 0; n < c.num_patients; ++n)
      EXPECT_EQ(a.trajectories[r].steps[n].action, b.trajectories[r].steps[n].action);
}

TEST(RunExperiment, SingleReplicationMatchesEpisode) {
  auto c = small_config();
  c.replications = 1;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.trajectories.size(), 1u);
  const auto dim = feature_dimension(c.features.context_dim, c.action_space());
  Rng truth_rng = child_rng(c.seed, 0, Stream::kTruth), ctx_rng = child_rng(c.seed, 0, Stream::kContexts);
  const auto truth = gen_truth(c, dim, truth_rng);
  const auto ctxs = gen_contexts(c, ctx_rng);
  auto streams = replication_streams(c.seed, 0);
  const auto t = run_episode(c, truth, ctxs, streams);
  EXPECT_EQ(r.final_counts[0], static_cast<double>(t.final_successes));
  EXPECT_EQ(r.summary.final_counts.median, r.final_counts[0]);
  EXPECT_EQ(r.summary.final_counts.q25, r.final_counts[0]);
  EXPECT_EQ(r.summary.final_counts.q75, r.final_counts[0]);
}

TEST(RunExperiment, DoublingReplicationsShrinksStandardError) {
  auto c = small_config(PolicyKind::kExplore);
  c.replications = 400;
  const auto small = run_experiment(c);
  c.replications = 800;
  const auto large = run_experiment(c);
  const std::size_t last = c.num_patients - 1;
  const double ratio = small.summary.se_rate[last] / large.summary.se_rate[last];
  EXPECT_NEAR(ratio, std::sqrt(2.0), 0.15);
  const double diff = small.summary.mean_rate[last] - large.summary.mean_rate[last];
  EXPECT_LT(std::abs(diff), 3.0 * small.summary.se_rate[last]);
}

TEST(RunExperiment, SharedTruthUsesOneWeightVector) {
  auto c = small_config(PolicyKind::kExplore);
  c.shared_truth = true;
  c.replications = 3;
  c.sigma_truth = 0.0;
  EXPECT_NO_THROW(run_experiment(c));
  c.features.density = 2.0;
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(RunExperiment, OraclePolicyIsAnUpperBound) {
  auto c = small_config();
  c.replications = 200;
  const auto space = c.action_space();
  const auto dim = feature_dimension(c.features.context_dim, space);

  std::vector<double> oracle_rate;
  for (std::size_t r = 0; r < c.replications; ++r) {
    Rng truth_rng = child_rng(c.seed, r, Stream::kTruth), ctx_rng = child_rng(c.seed, r, Stream::kContexts);
    const auto truth = gen_truth(c, dim, truth_rng);
    const auto ctxs = gen_contexts(c, ctx_rng);
    auto streams = replication_streams(c.seed, r);
    const Chooser cheat = [&](const BeliefState&, const PatientContext& ctx, const StepInfo&, Rng&) {
      std::size_t best = 0;
      double best_p = -1.0;
      for (std::size_t a = 0; a < space.size(); ++a) {
        const double p = true_success_prob(truth, assemble(ctx, space.at(a), space).phi);
        if (p > best_p) best_p = p, best = a;
      }
      return space.at(best);
    };
    oracle_rate.push_back(static_cast<double>(run_episode(c, truth, ctxs, streams, cheat).final_successes) /
                          static_cast<double>(c.num_patients));
  }
  for (auto kind : {PolicyKind::kKnowledgeGradient, PolicyKind::kThompson, PolicyKind::kExploit,
                    PolicyKind::kExplore}) {
    c.policy.kind = kind;
    std::vector<double> rate;
    for (double f : run_experiment(c).final_counts) rate.push_back(f / static_cast<double>(c.num_patients));
    EXPECT_GE(mean_of(oracle_rate), mean_of(rate) - 2.0 * se_of(rate)) << to_string(kind);
  }
}

TEST(RunExperiment, SingleActionPoliciesAreIndistinguishable) {
  auto c = small_config();
  c.num_physicians = 1;
  c.replications = 30;
  std::vector<double> reference;
  for (auto kind : {PolicyKind::kKnowledgeGradient, PolicyKind::kThompson, PolicyKind::kExploit,
                    PolicyKind::kExplore}) {
    c.policy.kind = kind;
    const auto counts = run_experiment(c).final_counts;
    if (reference.empty()) reference = counts;
    // Same forced action and shared outcome draws: identical results.
    EXPECT_EQ(counts, reference) << to_string(kind);
  }
}

TEST(RunExperiment, PaperShapedConfigEmitsFullCurve) {
  ExperimentConfig c;
  c.replications = 20;
  c.policy.kind = PolicyKind::kExplore;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.summary.mean_rate.size(), 212u);
  for (double v : r.summary.mean_rate) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Summarize, QuantilesAndOutliers) {
  const auto box = box_stats({1, 2, 3, 4, 100});
  EXPECT_EQ(box.median, 3.0);
  EXPECT_EQ(box.q25, 2.0);
  EXPECT_EQ(box.q75, 4.0);
  EXPECT_EQ(box.outliers, std::vector<double>{100.0});
  EXPECT_EQ(box.whisker_low, 1.0);
  EXPECT_EQ(box.whisker_high, 4.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_EQ(box_stats({7}).median, 7.0);
  EXPECT_EQ(box_stats({7}).q25, 7.0);
  EXPECT_THROW(box_stats({}), DomainError);
}

TEST(Summarize, InvariantUnderPermutation) {
  const auto r = run_experiment(small_config(), {1, {}});
  auto shuffled = r.trajectories;
  std::mt19937_64 g(1);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  const auto a = summarize(r.trajectories), b = summarize(shuffled);
  EXPECT_EQ(a.final_counts.median, b.final_counts.median);
  EXPECT_EQ(a.final_counts.q25, b.final_counts.q25);
  EXPECT_EQ(a.final_counts.outliers.size(), b.final_counts.outliers.size());
  for (std::size_t n = 0; n < a.mean_rate.size(); ++n) {
    EXPECT_NEAR(a.mean_rate[n], b.mean_rate[n], 1e-12);
    EXPECT_NEAR(a.se_rate[n], b.se_rate[n], 1e-12);
  }
}

TEST(PairedComparison, DifferenceOfIdenticalRunsIsZero) {
  const auto r = run_experiment(small_config(), {1, {}});
  const auto p = paired_comparison(r.trajectories, r.trajectories);
  EXPECT_EQ(p.mean_final, 0.0);
  EXPECT_EQ(p.se_final, 0.0);
  EXPECT_EQ(p.mean_average, 0.0);

  auto c = small_config(PolicyKind::kExplore);
  const auto e = run_experiment(c, {1, {}});
  const auto q = paired_comparison(r.trajectories, e.trajectories);
  EXPECT_NEAR(q.ci_low, q.mean_final - 1.96 * q.se_final, 1e-15);
  EXPECT_NEAR(q.ci_high, q.mean_final + 1.96 * q.se_final, 1e-15);
  EXPECT_THROW(paired_comparison(r.trajectories, {}), DomainError);
}

TEST(Config, ValidateNamesOffendingKey) {
  ExperimentConfig c;
  c.policy.eta = 0.0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "policy.eta");
  }
}
