#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace banditsim::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Version string recorded in run manifests.
const char* version();

int cmd_run(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed_override,
            const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

int cmd_compare(const std::filesystem::path& config_path, const std::vector<std::string>& policies,
                std::optional<std::uint64_t> seed_override, const std::filesystem::path& out_dir,
                std::ostream& log, std::ostream& err);

int cmd_report(const std::filesystem::path& results_csv, const std::filesystem::path& out_dir, std::ostream& log,
               std::ostream& err);

int cmd_features_cluster(const std::filesystem::path& input, double threshold, const std::filesystem::path& out,
                         std::ostream& log, std::ostream& err);

int cmd_features_communities(const std::filesystem::path& input, double threshold,
                             const std::filesystem::path& out, std::ostream& log, std::ostream& err);

int cmd_features_lasso(const std::filesystem::path& input, const std::string& label, int n_lambda, int folds,
                       std::uint64_t seed, const std::filesystem::path& out, std::ostream& log, std::ostream& err);

}  // namespace banditsim::cli
