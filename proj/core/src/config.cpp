#include "banditsim/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "banditsim/csv.hpp"
#include "banditsim/errors.hpp"

namespace banditsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  const auto pos = s.find('#');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

struct Setter {
  std::string key;
  int line;

  double real(const std::string& v) const {
    try {
      return parse_double(v, key);
    } catch (const ParseError&) {
      throw ConfigError(key, line, "expected a real number, got '" + v + "'");
    }
  }

  long long integer(const std::string& v, long long min_value) const {
    long long out = 0;
    try {
      out = parse_int(v, key);
    } catch (const ParseError&) {
      throw ConfigError(key, line, "expected an integer, got '" + v + "'");
    }
    if (out < min_value) throw ConfigError(key, line, "must be >= " + std::to_string(min_value));
    return out;
  }

  std::uint64_t unsigned64(const std::string& v) const {
    try {
      std::size_t pos = 0;
      if (v.empty() || v[0] == '-') throw std::invalid_argument("sign");
      const auto out = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return out;
    } catch (const std::exception&) {
      throw ConfigError(key, line, "expected an unsigned 64-bit integer, got '" + v + "'");
    }
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, line, "expected true or false, got '" + v + "'");
  }
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

void apply_tau(PolicyConfig& policy, const std::string& v, const Setter& s) {
  if (v == "horizon") {
    policy.tau_mode = TauMode::kHorizonRemaining;
    return;
  }
  policy.tau_mode = TauMode::kFixed;
  policy.tau = s.real(v);
  if (!(policy.tau >= 0.0)) throw ConfigError(s.key, s.line, "must be \"horizon\" or a real >= 0");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::map<std::string, int> key_lines;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "model" && section != "policy" && section != "features") {
        throw ConfigError(section, line_no, "unknown section (expected experiment, model, policy or features)");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value', got '" + line + "'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(name, line_no, "key outside of any [section]");
    const std::string key = section + "." + name;
    if (value.empty()) throw ConfigError(key, line_no, "missing value");
    if (!key_lines.emplace(key, line_no).second) throw ConfigError(key, line_no, "duplicate key");
    const Setter s{key, line_no};

    if (key == "experiment.patients") {
      cfg.num_patients = static_cast<std::size_t>(s.integer(value, 1));
    } else if (key == "experiment.physicians") {
      cfg.num_physicians = static_cast<int>(s.integer(value, 1));
    } else if (key == "experiment.facilities") {
      cfg.num_facilities = static_cast<int>(s.integer(value, 0));
    } else if (key == "experiment.replications") {
      cfg.replications = static_cast<std::size_t>(s.integer(value, 1));
    } else if (key == "experiment.seed") {
      cfg.seed = s.unsigned64(value);
    } else if (key == "experiment.sigma_truth") {
      cfg.sigma_truth = s.real(value);
    } else if (key == "experiment.truth_file") {
      cfg.truth_file = resolve(base_dir, value);
    } else if (key == "experiment.shared_truth") {
      cfg.shared_truth = s.boolean(value);
    } else if (key == "model.lambda") {
      cfg.prior_lambda = s.real(value);
    } else if (key == "policy.policy") {
      try {
        cfg.policy.kind = parse_policy_kind(value);
      } catch (const DomainError& e) {
        throw ConfigError(key, line_no, e.what());
      }
    } else if (key == "policy.tau") {
      apply_tau(cfg.policy, value, s);
    } else if (key == "policy.eta") {
      cfg.policy.eta = s.real(value);
    } else if (key == "features.dim") {
      cfg.features.context_dim = static_cast<std::size_t>(s.integer(value, 0));
    } else if (key == "features.density") {
      cfg.features.density = s.real(value);
    } else if (key == "features.contexts_csv") {
      cfg.features.contexts_csv = resolve(base_dir, value);
    } else if (key == "features.standardize") {
      cfg.features.standardize = s.boolean(value);
    } else {
      throw ConfigError(key, line_no, "unknown key");
    }
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    auto it = key_lines.find(e.key());
    if (it == key_lines.end()) throw;
    std::string msg = e.what();
    const std::string prefix = "'" + e.key() + "': ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw ConfigError(e.key(), it->second, msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "patients = " << c.num_patients << "\n"
      << "physicians = " << c.num_physicians << "\n"
      << "facilities = " << c.num_facilities << "\n"
      << "replications = " << c.replications << "\n"
      << "seed = " << c.seed << "\n"
      << "sigma_truth = " << format_double(c.sigma_truth) << "\n";
  if (!c.truth_file.empty()) out << "truth_file = " << c.truth_file.string() << "\n";
  out << "shared_truth = " << (c.shared_truth ? "true" : "false") << "\n"
      << "\n[model]\n"
      << "lambda = " << format_double(c.prior_lambda) << "\n"
      << "\n[policy]\n"
      << "policy = " << to_string(c.policy.kind) << "\n"
      << "tau = " << (c.policy.tau_mode == TauMode::kHorizonRemaining ? "horizon" : format_double(c.policy.tau))
      << "\n"
      << "eta = " << format_double(c.policy.eta) << "\n"
      << "\n[features]\n"
      << "dim = " << c.features.context_dim << "\n"
      << "density = " << format_double(c.features.density) << "\n";
  if (!c.features.contexts_csv.empty()) out << "contexts_csv = " << c.features.contexts_csv.string() << "\n";
  out << "standardize = " << (c.features.standardize ? "true" : "false") << "\n";
  return out.str();
}

PolicyConfig parse_policy_spec(const std::string& token, const PolicyConfig& base) {
  PolicyConfig out = base;
  std::stringstream ss(token);
  std::string part;
  bool first = true;
  while (std::getline(ss, part, ':')) {
    part = trim(part);
    if (first) {
      try {
        out.kind = parse_policy_kind(part);
      } catch (const DomainError& e) {
        throw ConfigError("--policies", 0, e.what());
      }
      first = false;
      continue;
    }
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("--policies", 0, "expected key=value in '" + token + "'");
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    const Setter s{"policy." + key, 0};
    if (key == "eta") {
      out.eta = s.real(value);
      if (!(out.eta > 0.0)) throw ConfigError("policy.eta", 0, "must be a finite real > 0");
    } else if (key == "tau") {
      apply_tau(out, value, s);
    } else {
      throw ConfigError("--policies", 0, "unknown policy parameter '" + key + "'");
    }
  }
  if (first) throw ConfigError("--policies", 0, "empty policy name");
  return out;
}

}  // namespace banditsim
