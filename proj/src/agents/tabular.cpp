#include "dmaze/agents.hpp"

namespace dmaze {

double QTable::max_value(std::size_t s) const {
  double best = at(s, Action::Up);
  for (const Action a : kAllActions) best = std::max(best, at(s, a));
  return best;
}

Action QTable::greedy(std::size_t s) const {
  Action best = Action::Up;
  for (const Action a : kAllActions)
    if (at(s, a) > at(s, best)) best = a;
  return best;
}

void q_update(QTable& table, const DiscreteTransition& t, double alpha,
              double gamma) {
  const double bootstrap = t.terminal ? 0.0 : gamma * table.max_value(t.next_state);
  double& q = table.at(t.state, t.action);
  q += alpha * (t.reward + bootstrap - q);
}

}  // namespace dmaze
