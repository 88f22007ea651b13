#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = banditsim::cli;
  CLI::App app{"Contextual-bandit simulation toolkit: belief model, policies, feature pipeline"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string config, out, input, policies, label = "outcome";
  std::optional<std::uint64_t> seed;
  double threshold = 0.8;
  int nlambda = 25, folds = 10;
  std::uint64_t lasso_seed = 1;

  auto* run = app.add_subcommand("run", "Run one policy over all replications");
  run->add_option("--config", config, "Experiment config file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Run several policies under paired seeds");
  compare->add_option("--config", config, "Experiment config file")->required();
  compare->add_option("--policies", policies, "Comma-separated, e.g. kg:eta=0.5,thompson,exploit,explore")
      ->required();
  compare->add_option("--seed", seed, "Override the config seed");
  compare->add_option("--out", out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Emit plot-ready curve and box-plot CSVs");
  report->add_option("--input", input, "results.csv from run or compare")->required();
  report->add_option("--out", out, "Output directory")->required();

  auto* features = app.add_subcommand("features", "Feature engineering on a flat binary CSV");
  features->require_subcommand(1);
  auto* cluster = features->add_subcommand("cluster", "Connected components of the cosine graph");
  cluster->add_option("--input", input)->required();
  cluster->add_option("--threshold", threshold, "Cosine threshold in [0,1]")->capture_default_str();
  cluster->add_option("--out", out, "partition CSV (node,group)")->required();
  auto* communities = features->add_subcommand("communities", "Leading-eigenvector modularity communities");
  communities->add_option("--input", input)->required();
  communities->add_option("--threshold", threshold, "Cosine threshold in [0,1]")->default_val(0.5);
  communities->add_option("--out", out, "communities CSV (node,group)")->required();
  auto* lasso = features->add_subcommand("lasso", "L1 logistic path with k-fold CV and the 1-SE rule");
  lasso->add_option("--input", input)->required();
  lasso->add_option("--label", label, "Outcome column")->capture_default_str();
  lasso->add_option("--nlambda", nlambda)->capture_default_str();
  lasso->add_option("--folds", folds)->capture_default_str();
  lasso->add_option("--seed", lasso_seed)->capture_default_str();
  lasso->add_option("--out", out, "path CSV; selected.txt is written beside it")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kUsageError;
  }

  if (*run) return cli::cmd_run(config, seed, out, std::cout, std::cerr);
  if (*compare) return cli::cmd_compare(config, split_list(policies), seed, out, std::cout, std::cerr);
  if (*report) return cli::cmd_report(input, out, std::cout, std::cerr);
  if (*cluster) return cli::cmd_features_cluster(input, threshold, out, std::cout, std::cerr);
  if (*communities) return cli::cmd_features_communities(input, threshold, out, std::cout, std::cerr);
  if (*lasso) return cli::cmd_features_lasso(input, label, nlambda, folds, lasso_seed, out, std::cout, std::cerr);
  return cli::kUsageError;
}
