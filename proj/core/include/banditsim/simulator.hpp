#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "banditsim/belief.hpp"
#include "banditsim/model.hpp"
#include "banditsim/policies.hpp"
#include "banditsim/rng.hpp"

namespace banditsim {

struct FeatureConfig {
  std::size_t context_dim = 31;  ///< d_x for synthetic contexts
  double density = 0.1;          ///< P(feature = 1) for synthetic contexts
  std::filesystem::path contexts_csv;  ///< replay contexts from this dataset CSV when set
  bool standardize = false;      ///< z-score numeric CSV columns

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct ExperimentConfig {
  std::size_t num_patients = 212;
  int num_physicians = 20;
  int num_facilities = 0;
  std::size_t replications = 500;
  std::uint64_t seed = 1;
  double sigma_truth = 1.0;
  std::filesystem::path truth_file;
  bool shared_truth = false;
  double prior_lambda = 1.0;
  PolicyConfig policy;
  FeatureConfig features;

  ActionSpace action_space() const { return ActionSpace(num_physicians, num_facilities); }

  /// Throws ConfigError naming the first invalid key.
  void validate() const;
};

bool operator==(const PolicyConfig& a, const PolicyConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct TruthModel {
  std::vector<double> w_star;
};

/// w_star ~ N(0, sigma_truth^2) per coordinate, or the configured truth file verbatim.
TruthModel gen_truth(const ExperimentConfig& config, std::size_t dimension, Rng& rng);

/// Reads a JSON array (or {"w_star": [...]}) of weights; the length must equal `dimension`.
TruthModel load_truth(const std::filesystem::path& path, std::size_t dimension);

/// Synthetic Bernoulli(density) contexts, or the configured CSV rows in file order.
std::vector<PatientContext> gen_contexts(const ExperimentConfig& config, Rng& rng);

/// Context dimension the configuration will produce (reads the CSV header when needed).
std::size_t context_dimension(const ExperimentConfig& config);

double true_success_prob(const TruthModel& truth, std::span<const double> phi);

struct StepRecord {
  std::size_t n = 0;
  std::string context_id;
  Action action;
  int outcome = -1;
  std::size_t cumulative_successes = 0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  std::size_t final_successes = 0;
};

/// Overrides the configured policy, e.g. for oracle baselines in tests.
using Chooser = std::function<Action(const BeliefState&, const PatientContext&, const StepInfo&, Rng&)>;

/// Random sources of one replication. Outcomes are counter-based on (outcome_key, n,
/// action index) so every policy sees the same outcome draw for the same choice.
struct EpisodeStreams {
  Rng policy;
  std::uint64_t outcome_key = 0;
};

/// Streams for replication r derived from the experiment seed.
EpisodeStreams replication_streams(std::uint64_t seed, std::size_t replication);

/// Uniform draw deciding the outcome of `action_index` for patient n: success iff u < p_true.
double outcome_uniform(std::uint64_t outcome_key, std::size_t n, std::size_t action_index);

Trajectory run_episode(const ExperimentConfig& config, const TruthModel& truth,
                       std::span<const PatientContext> contexts, EpisodeStreams& streams,
                       const Chooser& chooser = {});

/// Convenience form drawing the outcome key and policy stream from one engine.
Trajectory run_episode(const ExperimentConfig& config, const TruthModel& truth,
                       std::span<const PatientContext> contexts, Rng& rng);

/// Box-plot statistics with linear-interpolation (inclusive, "type 7") quantiles
/// and 1.5 IQR whiskers.
struct BoxStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

double quantile(std::vector<double> values, double prob);
BoxStats box_stats(const std::vector<double>& values);

struct Summary {
  BoxStats final_counts;
  std::vector<double> mean_rate;  ///< per step: mean over replications of cum_successes / (n+1)
  std::vector<double> se_rate;
};

Summary summarize(const std::vector<Trajectory>& trajectories);

/// Paired difference (a - b) across replications that share truth, contexts and outcome draws.
/// `final` compares final cumulative success rates; `average` compares the per-step rate
/// curve averaged over the horizon. The interval is mean +/- 1.96 SE.
struct PairedComparison {
  double mean_final = 0.0;
  double se_final = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_average = 0.0;
  double se_average = 0.0;
};

PairedComparison paired_comparison(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b);

struct ExperimentResult {
  std::vector<Trajectory> trajectories;  ///< indexed by replication
  std::vector<double> final_counts;
  Summary summary;
};

struct RunOptions {
  std::size_t threads = 0;  ///< 0: hardware concurrency
  Chooser chooser;          ///< empty: use config.policy
};

/// Thread cap from BANDITSIM_THREADS, or 0 when unset.
std::size_t threads_from_env();

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace banditsim
