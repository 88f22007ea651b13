#include "banditsim/belief.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "banditsim/errors.hpp"
#include "banditsim/numeric.hpp"

namespace banditsim {

BeliefState::BeliefState(std::vector<double> mean, std::vector<double> precision)
    : mean_(std::move(mean)), precision_(std::move(precision)) {
  if (mean_.size() != precision_.size()) throw DomainError("BeliefState: mean/precision size mismatch");
  if (mean_.empty()) throw DomainError("BeliefState: dimension must be at least 1");
  for (std::size_t j = 0; j < precision_.size(); ++j) {
    if (!(precision_[j] > 0.0) || std::isnan(precision_[j])) {
      throw DomainError("BeliefState: precision must be positive");
    }
    if (!std::isfinite(mean_[j])) throw DomainError("BeliefState: mean must be finite");
  }
}

BeliefState init_prior(std::size_t dimension, double lambda) {
  if (dimension < 1) throw DomainError("init_prior: dimension must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("init_prior: lambda must be positive");
  return BeliefState(std::vector<double>(dimension, 0.0), std::vector<double>(dimension, lambda));
}

namespace {

void check_dimension(const BeliefState& state, std::span<const double> phi, const char* op) {
  if (phi.size() != state.dimension()) {
    throw DomainError(std::string(op) + ": feature dimension " + std::to_string(phi.size()) +
                      " does not match belief dimension " + std::to_string(state.dimension()));
  }
}

}  // namespace

BeliefState update(const BeliefState& state, std::span<const double> phi, int y, const BisectionOptions& options,
                   UpdateDiagnostics* diagnostics) {
  check_dimension(state, phi, "update");
  if (y != 1 && y != -1) throw DomainError("update: outcome must be -1 or +1");

  const auto m = state.mean();
  const auto q = state.precision();
  double m_phi = 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    m_phi += m[j] * phi[j];
    s += phi[j] * phi[j] / q[j];
  }
  if (!std::isfinite(m_phi) || !std::isfinite(s)) throw NumericError("update: non-finite inputs");
  const double yd = static_cast<double>(y);

  // Stationarity of the objective gives m'_j = m_j + y (phi_j / q_j) rho with
  // rho = logistic(-y m'.phi), so rho is the root of g below, unique on [0,1].
  auto g = [&](double rho) { return rho - logistic(-yd * m_phi - rho * s); };
  double lo = 0.0, hi = 1.0;
  double g_lo = g(lo), g_hi = g(hi);
  int it = 0;
  while (hi - lo > options.tolerance) {
    if (++it > options.max_iterations) throw NumericError("update: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (g_mid == 0.0) {
      lo = hi = mid;
      g_lo = g_hi = 0.0;
      break;
    }
    if (g_mid < 0.0) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  // g is smooth and the bracket is tiny: one interpolation step inside it.
  double rho = lo;
  if (hi > lo && g_hi != g_lo) {
    rho = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    if (!(rho >= lo && rho <= hi)) rho = 0.5 * (lo + hi);
  }

  std::vector<double> m_new(m.begin(), m.end());
  std::vector<double> q_new(q.begin(), q.end());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    if (phi[j] != 0.0) m_new[j] = m[j] + yd * (phi[j] / q[j]) * rho;
  }
  double mode_phi = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) mode_phi += m_new[j] * phi[j];
  const double zeta = logistic(-mode_phi);
  const double curvature = zeta * (1.0 - zeta);
  for (std::size_t j = 0; j < phi.size(); ++j) q_new[j] = q[j] + curvature * phi[j] * phi[j];

  if (diagnostics) *diagnostics = {rho, it};
  return BeliefState(std::move(m_new), std::move(q_new));
}

PredictiveResult predict(const BeliefState& state, std::span<const double> phi) {
  check_dimension(state, phi, "predict");
  const auto m = state.mean();
  const auto q = state.precision();
  PredictiveResult r;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    r.mu_b += m[j] * phi[j];
    r.sigma2_b += phi[j] * phi[j] / q[j];
  }
  r.p_success = logistic(kappa(r.sigma2_b) * r.mu_b);
  return r;
}

std::vector<double> sample_weights(const BeliefState& state, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = state.mean();
  const auto q = state.precision();
  std::vector<double> w(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) w[j] = m[j] + normal(rng) / std::sqrt(q[j]);
  return w;
}

BeliefState reshape(const BeliefState& state, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("reshape: eta must be positive");
  if (eta == 1.0) return state;
  const double scale = eta * eta;
  std::vector<double> q(state.precision().begin(), state.precision().end());
  for (auto& v : q) v /= scale;
  return BeliefState(std::vector<double>(state.mean().begin(), state.mean().end()), std::move(q));
}

std::string to_json(const BeliefState& state) {
  nlohmann::json j;
  j["d"] = state.dimension();
  j["m"] = std::vector<double>(state.mean().begin(), state.mean().end());
  j["q"] = std::vector<double>(state.precision().begin(), state.precision().end());
  return j.dump();
}

BeliefState belief_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto d = j.at("d").get<std::size_t>();
    auto m = j.at("m").get<std::vector<double>>();
    auto q = j.at("q").get<std::vector<double>>();
    if (m.size() != d || q.size() != d) throw SchemaError("belief JSON: 'd' does not match vector lengths");
    return BeliefState(std::move(m), std::move(q));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("belief JSON: ") + e.what());
  }
}

void save_belief(const BeliefState& state, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << to_json(state) << '\n';
}

BeliefState load_belief(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return belief_from_json(ss.str());
}

}  // namespace banditsim
