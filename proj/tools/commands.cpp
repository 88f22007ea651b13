#include "commands.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "banditsim/config.hpp"
#include "banditsim/csv.hpp"
#include "banditsim/errors.hpp"
#include "banditsim/graph.hpp"
#include "banditsim/lasso.hpp"
#include "banditsim/model.hpp"
#include "banditsim/simulator.hpp"

namespace banditsim::cli {

namespace fs = std::filesystem;

const char* version() { return "banditsim 0.1.0"; }

namespace {

/// Maps exceptions onto the exit-code contract: bad input is a usage error,
/// everything else a runtime failure.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kUsageError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories, const std::string& label) {
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    for (const auto& s : trajectories[r].steps) {
      if (!label.empty()) out << label << ',';
      out << r << ',' << s.n << ',' << s.action.physician << ',' << s.action.facility << ',' << s.outcome << ','
          << s.cumulative_successes << '\n';
    }
  }
}

void write_curve_rows(std::ostream& out, const Summary& summary, const std::string& label) {
  for (std::size_t n = 0; n < summary.mean_rate.size(); ++n) {
    if (!label.empty()) out << label << ',';
    out << n << ',' << format_double(summary.mean_rate[n]) << ',' << format_double(summary.se_rate[n]) << '\n';
  }
}

void write_final_row(std::ostream& out, const Summary& summary, const std::string& label) {
  if (!label.empty()) out << label << ',';
  out << format_double(summary.final_counts.median) << ',' << format_double(summary.final_counts.q25) << ','
      << format_double(summary.final_counts.q75) << '\n';
}

void write_manifest(const fs::path& path, const ExperimentConfig& config, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& policies, std::size_t threads, double seconds) {
  nlohmann::json j;
  j["version"] = version();
  j["config"] = to_config_text(config);
  j["seed"] = config.seed;
  j["outputs"] = outputs;
  if (!policies.empty()) j["policies"] = policies;
  j["threads"] = threads;
  j["wall_clock_seconds"] = seconds;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ExperimentConfig load_with_seed(const fs::path& config_path, std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string file_label(const std::string& label) {
  std::string out;
  for (char c : label) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' ? c : '_');
  return out;
}

}  // namespace

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed_override, const fs::path& out_dir,
            std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_with_seed(config_path, seed_override);
    const std::size_t threads = threads_from_env();
    const ExperimentResult result = run_experiment(cfg, {threads, {}});

    fs::create_directories(out_dir);
    {
      auto out = open_out(out_dir / "results.csv");
      out << "rep,n,action_p,action_f,outcome,cum_success\n";
      write_trajectories(out, result.trajectories, "");
    }
    {
      auto out = open_out(out_dir / "summary.csv");
      out << "n,mean_rate,se_rate\n";
      write_curve_rows(out, result.summary, "");
      out << "\nfinal_median,final_q25,final_q75\n";
      write_final_row(out, result.summary, "");
    }
    write_manifest(out_dir / "manifest.json", cfg, {"results.csv", "summary.csv", "manifest.json"}, {}, threads,
                   seconds_since(start));
    log << "policy " << to_string(cfg.policy.kind) << ": median final successes " << result.summary.final_counts.median
        << " over " << cfg.replications << " replications\n";
    return static_cast<int>(kOk);
  });
}

int cmd_compare(const fs::path& config_path, const std::vector<std::string>& policies,
                std::optional<std::uint64_t> seed_override, const fs::path& out_dir, std::ostream& log,
                std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    if (policies.size() < 2) throw ConfigError("--policies", 0, "need at least two policies to compare");
    std::set<std::string> unique(policies.begin(), policies.end());
    if (unique.size() != policies.size()) throw ConfigError("--policies", 0, "duplicate policy label");
    const ExperimentConfig base = load_with_seed(config_path, seed_override);
    std::vector<ExperimentConfig> configs;
    for (const auto& token : policies) {
      ExperimentConfig c = base;
      c.policy = parse_policy_spec(token, base.policy);
      c.validate();
      configs.push_back(c);
    }

    const std::size_t threads = threads_from_env();
    std::vector<ExperimentResult> results;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      results.push_back(run_experiment(configs[i], {threads, {}}));
      log << policies[i] << ": median final successes " << results.back().summary.final_counts.median << '\n';
    }

    fs::create_directories(out_dir);
    {
      auto out = open_out(out_dir / "results.csv");
      out << "policy,rep,n,action_p,action_f,outcome,cum_success\n";
      for (std::size_t i = 0; i < results.size(); ++i) write_trajectories(out, results[i].trajectories, policies[i]);
    }
    {
      auto out = open_out(out_dir / "summary.csv");
      out << "policy,n,mean_rate,se_rate\n";
      for (std::size_t i = 0; i < results.size(); ++i) write_curve_rows(out, results[i].summary, policies[i]);
      out << "\npolicy,final_median,final_q25,final_q75\n";
      for (std::size_t i = 0; i < results.size(); ++i) write_final_row(out, results[i].summary, policies[i]);
    }
    {
      auto out = open_out(out_dir / "pairwise.csv");
      out << "policy_a,policy_b,mean_diff_final,se_diff_final,ci95_low,ci95_high,mean_diff_average,se_diff_average\n";
      for (std::size_t a = 0; a < results.size(); ++a) {
        for (std::size_t b = a + 1; b < results.size(); ++b) {
          const auto d = paired_comparison(results[a].trajectories, results[b].trajectories);
          out << policies[a] << ',' << policies[b] << ',' << format_double(d.mean_final) << ','
              << format_double(d.se_final) << ',' << format_double(d.ci_low) << ',' << format_double(d.ci_high) << ','
              << format_double(d.mean_average) << ',' << format_double(d.se_average) << '\n';
        }
      }
    }
    write_manifest(out_dir / "manifest.json", base, {"results.csv", "summary.csv", "pairwise.csv", "manifest.json"},
                   policies, threads, seconds_since(start));
    return static_cast<int>(kOk);
  });
}

int cmd_report(const fs::path& results_csv, const fs::path& out_dir, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const CsvTable table = read_csv(results_csv);
    const int c_policy = table.column("policy");
    const int c_rep = table.column("rep");
    const int c_n = table.column("n");
    const int c_p = table.column("action_p");
    const int c_f = table.column("action_f");
    const int c_y = table.column("outcome");
    const int c_cum = table.column("cum_success");
    if (c_rep < 0 || c_n < 0 || c_p < 0 || c_f < 0 || c_y < 0 || c_cum < 0) {
      throw ParseError("results CSV must have columns rep,n,action_p,action_f,outcome,cum_success");
    }
    if (table.rows.empty()) throw ParseError("results CSV has no data rows");

    // policy label -> replication -> trajectory
    std::map<std::string, std::map<long long, Trajectory>> groups;
    std::vector<std::string> order;
    for (const auto& row : table.rows) {
      const std::string label = c_policy >= 0 ? row[static_cast<std::size_t>(c_policy)] : std::string();
      if (!groups.count(label)) order.push_back(label);
      auto& traj = groups[label][parse_int(row[static_cast<std::size_t>(c_rep)], "rep")];
      StepRecord s;
      s.n = static_cast<std::size_t>(parse_int(row[static_cast<std::size_t>(c_n)], "n"));
      s.action.physician = static_cast<int>(parse_int(row[static_cast<std::size_t>(c_p)], "action_p"));
      s.action.facility = static_cast<int>(parse_int(row[static_cast<std::size_t>(c_f)], "action_f"));
      s.outcome = static_cast<int>(parse_int(row[static_cast<std::size_t>(c_y)], "outcome"));
      s.cumulative_successes = static_cast<std::size_t>(parse_int(row[static_cast<std::size_t>(c_cum)], "cum_success"));
      if (s.n != traj.steps.size()) throw ParseError("results CSV: steps of a replication must be consecutive from 0");
      traj.steps.push_back(s);
      traj.final_successes = s.cumulative_successes;
    }

    fs::create_directories(out_dir);
    for (const auto& label : order) {
      std::vector<Trajectory> trajectories;
      for (auto& [rep, t] : groups[label]) trajectories.push_back(t);
      const std::size_t steps = trajectories.front().steps.size();
      for (const auto& t : trajectories) {
        if (t.steps.size() != steps) throw ParseError("results CSV: replications have different lengths");
      }
      const Summary summary = summarize(trajectories);
      const std::string suffix = label.empty() ? "" : "_" + file_label(label);
      {
        auto out = open_out(out_dir / ("curve" + suffix + ".csv"));
        out << "n,mean_rate,se_rate\n";
        write_curve_rows(out, summary, "");
      }
      {
        auto out = open_out(out_dir / ("box" + suffix + ".csv"));
        const auto& b = summary.final_counts;
        out << "stat,value\n"
            << "median," << format_double(b.median) << '\n'
            << "q25," << format_double(b.q25) << '\n'
            << "q75," << format_double(b.q75) << '\n'
            << "whisker_low," << format_double(b.whisker_low) << '\n'
            << "whisker_high," << format_double(b.whisker_high) << '\n';
        for (double o : b.outliers) out << "outlier," << format_double(o) << '\n';
      }
      log << (label.empty() ? "results" : label) << ": " << trajectories.size() << " replications, median final "
          << summary.final_counts.median << '\n';
    }
    return static_cast<int>(kOk);
  });
}

namespace {

BinaryMatrix read_binary_matrix(const fs::path& input, std::ostream& log) {
  const Dataset data = read_dataset(input);
  const BinaryMatrix m = BinaryMatrix::from_dataset(data);
  const std::size_t skipped = data.schema.size() - m.cols();
  if (skipped > 0) log << "skipping " << skipped << " non-binary column(s)\n";
  return m;
}

void write_partition(const fs::path& out_path, const SimilarityGraph& graph, const Partition& p) {
  auto out = open_out(out_path);
  out << "node,group\n";
  for (std::size_t i = 0; i < graph.node_count(); ++i) out << graph.nodes()[i] << ',' << p.group[i] << '\n';
}

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("--threshold", 0, "must lie in [0,1]");
}

}  // namespace

int cmd_features_cluster(const fs::path& input, double threshold, const fs::path& out, std::ostream& log,
                         std::ostream& err) {
  return guarded(err, [&] {
    check_threshold(threshold);
    const BinaryMatrix m = read_binary_matrix(input, log);
    const SimilarityGraph g = cosine_graph(m, threshold);
    const Partition p = connected_components(g);
    write_partition(out, g, p);
    log << m.cols() << " columns, " << g.edge_count() << " edges, " << p.group_count << " components\n";
    return static_cast<int>(kOk);
  });
}

int cmd_features_communities(const fs::path& input, double threshold, const fs::path& out, std::ostream& log,
                             std::ostream& err) {
  return guarded(err, [&] {
    check_threshold(threshold);
    const BinaryMatrix m = read_binary_matrix(input, log);
    const SimilarityGraph g = cosine_graph(m, threshold);
    const CommunityResult c = spectral_communities(g);
    write_partition(out, g, c.partition);
    log << m.cols() << " columns, " << g.edge_count() << " edges, " << c.partition.group_count
        << " communities, modularity " << format_double(c.modularity) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_features_lasso(const fs::path& input, const std::string& label, int n_lambda, int folds, std::uint64_t seed,
                       const fs::path& out, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (n_lambda < 1) throw ConfigError("--nlambda", 0, "must be >= 1");
    if (folds < 2) throw ConfigError("--folds", 0, "must be >= 2");
    const CsvTable table = read_csv(input);
    const int label_col = table.column(label);
    if (label_col < 0) throw SchemaError("label column '" + label + "' not found");
    static const std::set<std::string> skip{"patient_id", "action_p", "action_f"};
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (static_cast<int>(c) == label_col || skip.count(table.header[c])) continue;
      feature_cols.push_back(c);
      names.push_back(table.header[c]);
    }
    if (table.rows.empty()) throw ParseError("input has no data rows");
    DesignMatrix x(table.rows.size(), feature_cols.size());
    std::vector<double> y(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      for (std::size_t j = 0; j < feature_cols.size(); ++j) {
        x(i, j) = parse_double(row[feature_cols[j]], "column '" + names[j] + "'");
      }
      y[i] = normalize_outcome(parse_double(row[static_cast<std::size_t>(label_col)], label)) > 0 ? 1.0 : 0.0;
    }

    LassoOptions options;
    options.n_lambda = n_lambda;
    Rng rng = child_rng(seed, 0, Stream::kFolds);
    const CvSelection sel = cv_select(x, y, folds, rng, options);
    if (sel.path.degenerate) log << "warning: all responses identical; intercept-only path\n";

    {
      auto o = open_out(out);
      o << "lambda,cv_mean,cv_se,nnz,is_min,is_1se\n";
      for (std::size_t k = 0; k < sel.path.lambdas.size(); ++k) {
        o << format_double(sel.path.lambdas[k]) << ',' << format_double(sel.path.cv_mean[k]) << ','
          << format_double(sel.path.cv_se[k]) << ',' << sel.path.nnz(k) << ',' << (k == sel.index_min ? 1 : 0) << ','
          << (k == sel.index_1se ? 1 : 0) << '\n';
      }
    }
    {
      auto o = open_out(out.parent_path() / "selected.txt");
      for (auto j : sel.selected) o << names[j] << '\n';
    }
    log << "lambda_min " << format_double(sel.lambda_min) << ", lambda_1se " << format_double(sel.lambda_1se) << ", "
        << sel.selected.size() << " selected feature(s)\n";
    return static_cast<int>(kOk);
  });
}

}  // namespace banditsim::cli
