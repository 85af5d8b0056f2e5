#include "ocelad/ocelad.hpp"

#include <cmath>

#include "ocelad/errors.hpp"

namespace ocelad {
namespace {

template <class A, class B>
void require_same_keys(const std::map<DyadicInterval, A>& a, const std::map<DyadicInterval, B>& b) {
  if (a.size() != b.size()) throw InvalidInput("weight and member tables have different key sets");
  auto ib = b.begin();
  for (const auto& [key, value] : a) {
    if (ib->first != key) throw InvalidInput("weight and member tables have different key sets");
    ++ib;
  }
}

double total_weight(const WeightTable& weights) {
  double total = 0.0;
  for (const auto& [iv, w] : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be positive and finite");
    total += w;
  }
  return total;
}

}  // namespace

MetricState combine(const WeightTable& weights, const StateTable& states) {
  if (weights.empty()) throw InvalidInput("cannot combine an empty ensemble");
  require_same_keys(weights, states);
  const double total = total_weight(weights);
  const auto n = states.begin()->second.dim();
  MetricState out{Matrix::Zero(n, n), 0.0};
  for (const auto& [iv, w] : weights) {
    const MetricState& s = states.at(iv);
    if (s.dim() != n) throw InvalidInput("member states differ in dimension");
    const double p = w / total;
    out.M += p * s.M;
    out.mu += p * s.mu;
  }
  // the weighted mean of values >= 1 can round a hair below 1
  if (out.mu < 1.0) out.mu = 1.0;
  return out;
}

WeightUpdate update_weights(const WeightTable& weights, const IntervalValues& losses) {
  require_same_keys(weights, losses);
  WeightUpdate out;
  out.weights = weights;
  if (weights.empty()) return out;

  const double total = total_weight(weights);
  double mixed = 0.0;
  for (const auto& [iv, loss] : losses) {
    if (!std::isfinite(loss)) throw InvalidInput("non-finite learner loss");
    mixed += weights.at(iv) / total * loss;
  }
  double max_abs = 0.0;
  for (const auto& [iv, loss] : losses) {
    const double r = mixed - loss;
    out.regrets[iv] = r;
    max_abs = std::max(max_abs, std::abs(r));
  }
  if (max_abs == 0.0) return out;

  out.rho = 1.0 / max_abs;
  for (auto& [iv, w] : out.weights) w *= 1.0 + spawn_weight(iv) * out.rho * out.regrets.at(iv);
  return out;
}

StateTable member_states(const RiceEnsemble& ens) {
  StateTable states;
  for (const LearnerSlot& slot : ens.slots()) states.emplace(slot.interval, slot.state);
  return states;
}

namespace {

OceladStep run_step(RiceEnsemble ens, const WeightTable& weights, const Constraint& c, const LossParams& lp,
                    Rng* select_rng) {
  if (c.t != ens.t() + 1) throw InvalidInput("constraint time must follow the ensemble time");
  ens.advance(c.t);

  // weights of retired learners are dropped; new learners enter at their spawn weight
  WeightTable current;
  for (const LearnerSlot& slot : ens.slots()) {
    const auto it = weights.find(slot.interval);
    current.emplace(slot.interval, it != weights.end() ? it->second : slot.weight);
  }

  CombinerOutput out;
  out.t = c.t;
  for (const LearnerSlot& slot : ens.slots()) out.per_learner_losses[slot.interval] = margin_loss(slot.state, c);
  if (select_rng != nullptr) {
    auto [iv, state] = saol_select(current, member_states(ens), *select_rng);
    out.selected = iv;
    out.theta_hat = std::move(state);
  } else {
    out.theta_hat = combine(current, member_states(ens));
  }
  out.weights = current;

  ens.step(c, lp);

  WeightUpdate upd = update_weights(current, out.per_learner_losses);
  out.regrets = std::move(upd.regrets);
  out.rho = upd.rho;
  for (LearnerSlot& slot : ens.slots()) slot.weight = upd.weights.at(slot.interval);
  return {std::move(ens), std::move(upd.weights), std::move(out)};
}

}  // namespace

OceladStep ocelad_step(RiceEnsemble ens, WeightTable weights, const Constraint& c, const LossParams& lp) {
  return run_step(std::move(ens), weights, c, lp, nullptr);
}

OceladStep ocelad_step_select(RiceEnsemble ens, WeightTable weights, const Constraint& c, const LossParams& lp,
                              Rng& rng) {
  return run_step(std::move(ens), weights, c, lp, &rng);
}

std::pair<DyadicInterval, MetricState> saol_select(const WeightTable& weights, const StateTable& states, Rng& rng) {
  if (weights.empty()) throw InvalidInput("cannot select from an empty ensemble");
  require_same_keys(weights, states);
  const double total = total_weight(weights);
  const double draw = rng.uniform() * total;
  double acc = 0.0;
  auto chosen = weights.begin();
  for (auto it = weights.begin(); it != weights.end(); ++it) {
    acc += it->second;
    chosen = it;
    if (draw < acc) break;
  }
  return {chosen->first, states.at(chosen->first)};
}

}  // namespace ocelad
