#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "banditsim/simulator.hpp"

namespace banditsim {

// Experiment configuration text format:
//
//   # comment
//   [experiment]
//   patients = 212
//   physicians = 20
//   facilities = 0
//   replications = 500
//   seed = 7
//   sigma_truth = 1.0
//   truth_file = w.json
//   shared_truth = false
//   [model]
//   lambda = 1.0
//   [policy]
//   policy = kg          # kg | thompson | exploit | explore
//   tau = horizon        # "horizon" or a nonnegative real
//   eta = 0.5
//   [features]
//   dim = 31
//   density = 0.1
//   contexts_csv = contexts.csv
//   standardize = false
//
// Omitted keys keep their defaults. Unknown sections or keys are errors.
// Relative paths resolve against `base_dir`.

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);

/// A policy token of the form name[:key=value]* (keys: tau, eta), e.g. "kg:eta=0.5".
/// Unspecified KG parameters are inherited from `base`.
PolicyConfig parse_policy_spec(const std::string& token, const PolicyConfig& base);

}  // namespace banditsim
