#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "banditsim/belief.hpp"
#include "banditsim/model.hpp"
#include "banditsim/rng.hpp"

namespace banditsim {

enum class PolicyKind { kKnowledgeGradient, kThompson, kExploit, kExplore };

std::string to_string(PolicyKind kind);
/// Accepts "kg", "thompson", "exploit", "explore" (case-sensitive).
PolicyKind parse_policy_kind(const std::string& name);

/// How the KG weight tau is chosen at each step.
enum class TauMode {
  kHorizonRemaining,  ///< tau = N - n - 1 when N is known, otherwise `tau`
  kFixed,
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kKnowledgeGradient;
  TauMode tau_mode = TauMode::kHorizonRemaining;
  double tau = 1.0;  ///< fixed value, or fallback when the horizon is unknown
  double eta = 1.0;  ///< posterior reshaping factor for KG

  void validate() const;
};

/// Position of the current patient in the episode; horizon is N if known.
struct StepInfo {
  std::size_t n = 0;
  std::optional<std::size_t> horizon;
};

double resolve_tau(const PolicyConfig& config, const StepInfo& step);

struct ScoredAction {
  Action action;
  double exploit_score = 0.0;  ///< predict() under the unreshaped state
  double kg_value = 0.0;
  double total = 0.0;          ///< exploit_score + tau * kg_value
};

/// Joint feature vectors of one context against every action, in ActionSpace order.
std::vector<EncodedInstance> assemble_all(const PatientContext& context, const ActionSpace& space);

/// Expected one-step improvement of max_a' predict(., phi(x, a')) from observing
/// the outcome of `action`, all computed under the eta-reshaped belief.
double kg_value(const BeliefState& state, const PatientContext& context, const Action& action,
                const ActionSpace& space, double eta);

/// KG scores for every action, in ActionSpace order.
std::vector<ScoredAction> score_kg(const BeliefState& state, const PatientContext& context,
                                   const ActionSpace& space, double tau, double eta);

Action choose_kg(const BeliefState& state, const PatientContext& context, const ActionSpace& space, double tau,
                 double eta, Rng& rng);
Action choose_thompson(const BeliefState& state, const PatientContext& context, const ActionSpace& space,
                       Rng& rng);
Action choose_exploit(const BeliefState& state, const PatientContext& context, const ActionSpace& space,
                      Rng& rng);
Action choose_explore(const ActionSpace& space, Rng& rng);

/// Dispatches on config.kind.
Action choose(const PolicyConfig& config, const BeliefState& state, const PatientContext& context,
              const ActionSpace& space, const StepInfo& step, Rng& rng);

/// Index of the maximum score; near-ties (relative 1e-12) are broken uniformly with rng.
/// rng is only consumed when there is more than one candidate.
std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng);

}  // namespace banditsim
