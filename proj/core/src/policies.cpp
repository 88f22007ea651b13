#include "banditsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "banditsim/errors.hpp"
#include "banditsim/numeric.hpp"

namespace banditsim {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kKnowledgeGradient: return "kg";
    case PolicyKind::kThompson: return "thompson";
    case PolicyKind::kExploit: return "exploit";
    case PolicyKind::kExplore: return "explore";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "kg") return PolicyKind::kKnowledgeGradient;
  if (name == "thompson") return PolicyKind::kThompson;
  if (name == "exploit") return PolicyKind::kExploit;
  if (name == "explore") return PolicyKind::kExplore;
  throw DomainError("unknown policy '" + name + "' (expected kg, thompson, exploit or explore)");
}

void PolicyConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("policy eta must be positive");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("policy tau must be nonnegative");
}

double resolve_tau(const PolicyConfig& config, const StepInfo& step) {
  if (config.tau_mode == TauMode::kHorizonRemaining && step.horizon) {
    const auto n_total = *step.horizon;
    return step.n + 1 >= n_total ? 0.0 : static_cast<double>(n_total - step.n - 1);
  }
  return config.tau;
}

std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng) {
  if (scores.empty()) throw DomainError("argmax over an empty action set");
  const double best = *std::max_element(scores.begin(), scores.end());
  const double slack = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= best - slack) ties.push_back(i);
  }
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

std::vector<EncodedInstance> assemble_all(const PatientContext& context, const ActionSpace& space) {
  std::vector<EncodedInstance> out;
  out.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) out.push_back(assemble(context, space.at(i), space));
  return out;
}

namespace {

void require_nonempty(const ActionSpace& space) {
  if (space.size() == 0) throw DomainError("empty action space");
}

double best_value(const BeliefState& state, const std::vector<EncodedInstance>& candidates) {
  double best = 0.0;
  for (const auto& c : candidates) best = std::max(best, predict(state, c.phi).p_success);
  return best;
}

double kg_from_reshaped(const BeliefState& reshaped, const std::vector<EncodedInstance>& candidates,
                        const EncodedInstance& chosen, double current_value) {
  const double p_plus = predict(reshaped, chosen.phi).p_success;
  const BeliefState after_success = update(reshaped, chosen.phi, +1);
  const BeliefState after_failure = update(reshaped, chosen.phi, -1);
  return p_plus * best_value(after_success, candidates) + (1.0 - p_plus) * best_value(after_failure, candidates) -
         current_value;
}

}  // namespace

double kg_value(const BeliefState& state, const PatientContext& context, const Action& action,
                const ActionSpace& space, double eta) {
  const BeliefState reshaped = reshape(state, eta);
  const auto candidates = assemble_all(context, space);
  const double current = best_value(reshaped, candidates);
  return kg_from_reshaped(reshaped, candidates, candidates[space.index_of(action)], current);
}

std::vector<ScoredAction> score_kg(const BeliefState& state, const PatientContext& context,
                                   const ActionSpace& space, double tau, double eta) {
  require_nonempty(space);
  const BeliefState reshaped = reshape(state, eta);
  const auto candidates = assemble_all(context, space);
  const double current = best_value(reshaped, candidates);

  std::vector<ScoredAction> scored(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& s = scored[i];
    s.action = space.at(i);
    s.exploit_score = predict(state, candidates[i].phi).p_success;
    s.kg_value = kg_from_reshaped(reshaped, candidates, candidates[i], current);
    s.total = s.exploit_score + tau * s.kg_value;
  }
  return scored;
}

Action choose_kg(const BeliefState& state, const PatientContext& context, const ActionSpace& space, double tau,
                 double eta, Rng& rng) {
  if (!(tau >= 0.0)) throw DomainError("choose_kg: tau must be nonnegative");
  const auto scored = score_kg(state, context, space, tau, eta);
  std::vector<double> totals(scored.size());
  std::transform(scored.begin(), scored.end(), totals.begin(), [](const ScoredAction& s) { return s.total; });
  return scored[argmax_random_tie(totals, rng)].action;
}

Action choose_thompson(const BeliefState& state, const PatientContext& context, const ActionSpace& space,
                       Rng& rng) {
  require_nonempty(space);
  const auto w = sample_weights(state, rng);
  // Scored on the logit: same argmax as logistic(w.phi) without saturation ties.
  std::vector<double> scores(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    scores[i] = dot(w, assemble(context, space.at(i), space).phi);
  }
  return space.at(argmax_random_tie(scores, rng));
}

Action choose_exploit(const BeliefState& state, const PatientContext& context, const ActionSpace& space,
                      Rng& rng) {
  require_nonempty(space);
  std::vector<double> scores(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    scores[i] = predict(state, assemble(context, space.at(i), space).phi).p_success;
  }
  return space.at(argmax_random_tie(scores, rng));
}

Action choose_explore(const ActionSpace& space, Rng& rng) {
  require_nonempty(space);
  std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
  return space.at(pick(rng));
}

Action choose(const PolicyConfig& config, const BeliefState& state, const PatientContext& context,
              const ActionSpace& space, const StepInfo& step, Rng& rng) {
  switch (config.kind) {
    case PolicyKind::kKnowledgeGradient:
      return choose_kg(state, context, space, resolve_tau(config, step), config.eta, rng);
    case PolicyKind::kThompson: return choose_thompson(state, context, space, rng);
    case PolicyKind::kExploit: return choose_exploit(state, context, space, rng);
    case PolicyKind::kExplore: return choose_explore(space, rng);
  }
  throw DomainError("unknown policy kind");
}

}  // namespace banditsim
