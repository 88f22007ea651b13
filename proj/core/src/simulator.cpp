#include "banditsim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "banditsim/csv.hpp"
#include "banditsim/errors.hpp"
#include "banditsim/numeric.hpp"

namespace banditsim {

bool operator==(const PolicyConfig& a, const PolicyConfig& b) {
  return a.kind == b.kind && a.tau_mode == b.tau_mode && a.tau == b.tau && a.eta == b.eta;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.num_patients == b.num_patients && a.num_physicians == b.num_physicians &&
         a.num_facilities == b.num_facilities && a.replications == b.replications && a.seed == b.seed &&
         a.sigma_truth == b.sigma_truth && a.truth_file == b.truth_file && a.shared_truth == b.shared_truth &&
         a.prior_lambda == b.prior_lambda && a.policy == b.policy && a.features == b.features;
}

void ExperimentConfig::validate() const {
  if (num_patients < 1) throw ConfigError("experiment.patients", 0, "must be >= 1");
  if (num_physicians < 1) throw ConfigError("experiment.physicians", 0, "must be >= 1");
  if (num_facilities < 0) throw ConfigError("experiment.facilities", 0, "must be >= 0");
  if (replications < 1) throw ConfigError("experiment.replications", 0, "must be >= 1");
  if (!(sigma_truth >= 0.0) || !std::isfinite(sigma_truth)) {
    throw ConfigError("experiment.sigma_truth", 0, "must be a finite real >= 0");
  }
  if (!(prior_lambda > 0.0) || !std::isfinite(prior_lambda)) {
    throw ConfigError("model.lambda", 0, "must be a finite real > 0");
  }
  if (!(policy.eta > 0.0) || !std::isfinite(policy.eta)) throw ConfigError("policy.eta", 0, "must be a finite real > 0");
  if (!(policy.tau >= 0.0) || !std::isfinite(policy.tau)) {
    throw ConfigError("policy.tau", 0, "must be \"horizon\" or a finite real >= 0");
  }
  if (!(features.density >= 0.0 && features.density <= 1.0)) {
    throw ConfigError("features.density", 0, "must lie in [0,1]");
  }
}

TruthModel load_truth(const std::filesystem::path& path, std::size_t dimension) {
  std::ifstream in(path);
  if (!in) throw ConfigError("experiment.truth_file", 0, "cannot open " + path.string());
  TruthModel truth;
  try {
    const auto j = nlohmann::json::parse(in);
    truth.w_star = (j.is_object() ? j.at("w_star") : j).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("experiment.truth_file", 0, std::string("invalid truth JSON: ") + e.what());
  }
  if (truth.w_star.size() != dimension) {
    throw ConfigError("experiment.truth_file", 0,
                      "truth has dimension " + std::to_string(truth.w_star.size()) + ", expected " +
                          std::to_string(dimension));
  }
  return truth;
}

TruthModel gen_truth(const ExperimentConfig& config, std::size_t dimension, Rng& rng) {
  if (!config.truth_file.empty()) return load_truth(config.truth_file, dimension);
  TruthModel truth{std::vector<double>(dimension, 0.0)};
  if (config.sigma_truth == 0.0) return truth;
  std::normal_distribution<double> normal(0.0, config.sigma_truth);
  for (auto& w : truth.w_star) w = normal(rng);
  return truth;
}

namespace {

std::vector<PatientContext> load_csv_contexts(const ExperimentConfig& config) {
  Dataset data;
  try {
    data = read_dataset(config.features.contexts_csv);
  } catch (const std::exception& e) {
    throw SchemaError("context CSV " + config.features.contexts_csv.string() + ": " + e.what());
  }
  if (config.features.standardize) data = standardize_numeric(data);
  std::vector<PatientContext> out;
  out.reserve(data.rows.size());
  for (auto& row : data.rows) out.push_back(std::move(row.context));
  return out;
}

}  // namespace

std::size_t context_dimension(const ExperimentConfig& config) {
  if (config.features.contexts_csv.empty()) return config.features.context_dim;
  const auto contexts = load_csv_contexts(config);
  return contexts.empty() ? 0 : contexts.front().features.size();
}

std::vector<PatientContext> gen_contexts(const ExperimentConfig& config, Rng& rng) {
  if (!config.features.contexts_csv.empty()) return load_csv_contexts(config);
  std::vector<PatientContext> out(config.num_patients);
  std::bernoulli_distribution coin(config.features.density);
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n].id = std::to_string(n);
    out[n].features.resize(config.features.context_dim);
    for (auto& f : out[n].features) f = coin(rng) ? 1.0 : 0.0;
  }
  return out;
}

double true_success_prob(const TruthModel& truth, std::span<const double> phi) {
  if (phi.size() != truth.w_star.size()) throw DomainError("true_success_prob: dimension mismatch");
  return logistic(dot(truth.w_star, phi));
}

EpisodeStreams replication_streams(std::uint64_t seed, std::size_t replication) {
  return {child_rng(seed, replication, Stream::kPolicy), child_seed(seed, replication, Stream::kOutcomes)};
}

double outcome_uniform(std::uint64_t outcome_key, std::size_t n, std::size_t action_index) {
  return counter_uniform(outcome_key, n, action_index, 0);
}

Trajectory run_episode(const ExperimentConfig& config, const TruthModel& truth,
                       std::span<const PatientContext> contexts, EpisodeStreams& streams, const Chooser& chooser) {
  const std::size_t horizon = config.num_patients;
  if (contexts.size() < horizon) {
    throw SchemaError("run_episode: " + std::to_string(contexts.size()) + " contexts for " +
                      std::to_string(horizon) + " patients");
  }
  const ActionSpace space = config.action_space();
  const std::size_t dim = feature_dimension(contexts.front().features.size(), space);
  if (truth.w_star.size() != dim) throw DomainError("run_episode: truth dimension mismatch");

  BeliefState state = init_prior(dim, config.prior_lambda);
  Trajectory traj;
  traj.steps.reserve(horizon);
  std::size_t successes = 0;
  for (std::size_t n = 0; n < horizon; ++n) {
    const PatientContext& ctx = contexts[n];
    const StepInfo step{n, horizon};
    const Action action =
        chooser ? chooser(state, ctx, step, streams.policy) : choose(config.policy, state, ctx, space, step, streams.policy);
    const EncodedInstance phi = assemble(ctx, action, space);
    const double p_true = true_success_prob(truth, phi.phi);
    const int y = outcome_uniform(streams.outcome_key, n, space.index_of(action)) < p_true ? 1 : -1;
    if (y == 1) ++successes;
    state = update(state, phi.phi, y);
    traj.steps.push_back({n, ctx.id, action, y, successes});
  }
  traj.final_successes = successes;
  return traj;
}

Trajectory run_episode(const ExperimentConfig& config, const TruthModel& truth,
                       std::span<const PatientContext> contexts, Rng& rng) {
  EpisodeStreams streams{Rng(rng()), rng()};
  return run_episode(config, truth, contexts, streams);
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BoxStats box_stats(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("box_stats of an empty sample");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  BoxStats box;
  box.median = quantile(sorted, 0.5);
  box.q25 = quantile(sorted, 0.25);
  box.q75 = quantile(sorted, 0.75);
  const double iqr = box.q75 - box.q25;
  const double low_fence = box.q25 - 1.5 * iqr;
  const double high_fence = box.q75 + 1.5 * iqr;
  box.whisker_low = box.q25;
  box.whisker_high = box.q75;
  for (double v : sorted) {
    if (v < low_fence || v > high_fence) {
      box.outliers.push_back(v);
    } else {
      box.whisker_low = std::min(box.whisker_low, v);
      box.whisker_high = std::max(box.whisker_high, v);
    }
  }
  return box;
}

Summary summarize(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw DomainError("summarize: no replications");
  Summary s;
  std::vector<double> finals;
  finals.reserve(trajectories.size());
  for (const auto& t : trajectories) finals.push_back(static_cast<double>(t.final_successes));
  s.final_counts = box_stats(finals);

  const std::size_t steps = trajectories.front().steps.size();
  const double r = static_cast<double>(trajectories.size());
  s.mean_rate.assign(steps, 0.0);
  s.se_rate.assign(steps, 0.0);
  for (std::size_t n = 0; n < steps; ++n) {
    const double denom = static_cast<double>(n + 1);
    double mean = 0.0;
    for (const auto& t : trajectories) mean += static_cast<double>(t.steps.at(n).cumulative_successes) / denom;
    mean /= r;
    double var = 0.0;
    for (const auto& t : trajectories) {
      const double d = static_cast<double>(t.steps[n].cumulative_successes) / denom - mean;
      var += d * d;
    }
    s.mean_rate[n] = mean;
    s.se_rate[n] = trajectories.size() > 1 ? std::sqrt(var / (r - 1.0) / r) : 0.0;
  }
  return s;
}

namespace {

double final_rate(const Trajectory& t) {
  return t.steps.empty() ? 0.0 : static_cast<double>(t.final_successes) / static_cast<double>(t.steps.size());
}

double average_rate(const Trajectory& t) {
  if (t.steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& step : t.steps) s += static_cast<double>(step.cumulative_successes) / static_cast<double>(step.n + 1);
  return s / static_cast<double>(t.steps.size());
}

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / (n - 1.0) / n)};
}

}  // namespace

PairedComparison paired_comparison(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b) {
  if (a.size() != b.size() || a.empty()) throw DomainError("paired_comparison: replication counts differ or are zero");
  std::vector<double> d_final(a.size()), d_avg(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    d_final[r] = final_rate(a[r]) - final_rate(b[r]);
    d_avg[r] = average_rate(a[r]) - average_rate(b[r]);
  }
  PairedComparison out;
  std::tie(out.mean_final, out.se_final) = mean_and_se(d_final);
  std::tie(out.mean_average, out.se_average) = mean_and_se(d_avg);
  out.ci_low = out.mean_final - 1.96 * out.se_final;
  out.ci_high = out.mean_final + 1.96 * out.se_final;
  return out;
}

std::size_t threads_from_env() {
  const char* raw = std::getenv("BANDITSIM_THREADS");
  if (!raw || !*raw) return 0;
  try {
    const long long v = parse_int(raw, "BANDITSIM_THREADS");
    if (v < 1) throw ConfigError("BANDITSIM_THREADS", 0, "must be a positive integer");
    return static_cast<std::size_t>(v);
  } catch (const ParseError&) {
    throw ConfigError("BANDITSIM_THREADS", 0, "must be a positive integer");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const ActionSpace space = config.action_space();
  const bool replay = !config.features.contexts_csv.empty();

  std::vector<PatientContext> replayed;
  if (replay) {
    Rng unused(0);
    replayed = gen_contexts(config, unused);
    if (replayed.size() < config.num_patients) {
      throw SchemaError("context CSV has " + std::to_string(replayed.size()) + " rows for " +
                        std::to_string(config.num_patients) + " patients");
    }
  }
  const std::size_t dim =
      feature_dimension(replay ? replayed.front().features.size() : config.features.context_dim, space);

  std::optional<TruthModel> shared;
  if (config.shared_truth) {
    Rng truth_rng = child_rng(config.seed, 0, Stream::kTruth);
    shared = gen_truth(config, dim, truth_rng);
  }

  ExperimentResult result;
  result.trajectories.resize(config.replications);

  auto run_one = [&](std::size_t r) {
    TruthModel truth;
    if (shared) {
      truth = *shared;
    } else {
      Rng truth_rng = child_rng(config.seed, r, Stream::kTruth);
      truth = gen_truth(config, dim, truth_rng);
    }
    std::vector<PatientContext> synthetic;
    if (!replay) {
      Rng ctx_rng = child_rng(config.seed, r, Stream::kContexts);
      synthetic = gen_contexts(config, ctx_rng);
    }
    EpisodeStreams streams = replication_streams(config.seed, r);
    result.trajectories[r] = run_episode(config, truth, replay ? replayed : synthetic, streams, options.chooser);
  };

  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.replications);

  if (threads <= 1) {
    for (std::size_t r = 0; r < config.replications; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < config.replications; r = next++) {
          try {
            run_one(r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = config.replications;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.final_counts.reserve(config.replications);
  for (const auto& t : result.trajectories) result.final_counts.push_back(static_cast<double>(t.final_successes));
  result.summary = summarize(result.trajectories);
  return result;
}

}  // namespace banditsim
