#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "banditsim/rng.hpp"

namespace banditsim {

/// Diagonal-Gaussian posterior over the weight vector: N(w_j | mean_j, 1/precision_j).
/// Immutable in practice: update() and reshape() return new states.
class BeliefState {
 public:
  BeliefState(std::vector<double> mean, std::vector<double> precision);

  std::size_t dimension() const noexcept { return mean_.size(); }
  std::span<const double> mean() const noexcept { return mean_; }
  std::span<const double> precision() const noexcept { return precision_; }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> precision_;
};

struct PredictiveResult {
  double mu_b = 0.0;      ///< latent mean m.phi
  double sigma2_b = 0.0;  ///< latent variance sum phi_j^2 / q_j
  double p_success = 0.5; ///< logistic(kappa(sigma2_b) * mu_b)
};

/// Result of the scalar root solve inside update(); exposed for diagnostics and tests.
struct UpdateDiagnostics {
  double rho = 0.0;       ///< logistic(-y * m'.phi) at the new mode
  int iterations = 0;
};

struct BisectionOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
};

/// Zero-mean prior with precision lambda on every coordinate (bias included).
BeliefState init_prior(std::size_t dimension, double lambda);

/// Absorbs one observation (phi, y) with y in {-1,+1}: Laplace update of the
/// diagonal posterior. The new mean is the minimizer of
///   1/2 sum_j q_j (w_j - m_j)^2 + log(1 + exp(-y w.phi))
/// and the new precision is q_j + zeta(1-zeta) phi_j^2, zeta = logistic(-m'.phi).
BeliefState update(const BeliefState& state, std::span<const double> phi, int y,
                   const BisectionOptions& options = {}, UpdateDiagnostics* diagnostics = nullptr);

/// Moderated predictive probability of a success.
PredictiveResult predict(const BeliefState& state, std::span<const double> phi);

/// One draw from the posterior, coordinates independent.
std::vector<double> sample_weights(const BeliefState& state, Rng& rng);

/// Scales every posterior variance by eta^2. Only for value-of-information
/// computations; never persist the result as the model.
BeliefState reshape(const BeliefState& state, double eta);

/// {"d": int, "m": [...], "q": [...]}; doubles written round-trip exact.
std::string to_json(const BeliefState& state);
BeliefState belief_from_json(const std::string& text);
void save_belief(const BeliefState& state, const std::filesystem::path& path);
BeliefState load_belief(const std::filesystem::path& path);

}  // namespace banditsim
