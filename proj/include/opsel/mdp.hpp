#ifndef OPSEL_MDP_HPP
#define OPSEL_MDP_HPP

#include <functional>
#include <vector>

#include "opsel/operators.hpp"

namespace opsel {

enum class Phase { destroy, repair };

struct EpisodeConfig {
    int d = 4;   // customers removed per destroy
    int b = 10;  // destroy/repair rounds per episode
};

/**
 * Full observation of the operator-selection process: the evolving solution,
 * which operator family may act next, the remaining round budget and the
 * edge history accumulated inside the episode. An episode runs exactly
 * 2 * b steps, alternating destroy and repair, and pays its only reward at
 * the end: initial cost minus final cost.
 */
struct State {
    const Instance* inst = nullptr;
    EpisodeConfig cfg;
    Solution sol;
    Phase phase = Phase::destroy;
    int budget_remaining = 0;
    double initial_cost = 0.0;
    int step_index = 0;
    PairHistory hist;

    bool terminal() const { return budget_remaining == 0; }
};

struct StepOutcome {
    State next;
    double reward = 0.0;
    bool terminal = false;
};

struct Transition {
    State s;
    OperatorId a;
    double reward = 0.0;
    State next;
};

class Environment {
public:
    Environment(const Instance& inst, Portfolio portfolio, EpisodeConfig cfg);

    // Starts an episode from a complete, feasible solution (validated).
    State reset(const Solution& start) const;

    // Operators whose kind matches the current phase; empty when terminal.
    const std::vector<OperatorId>& valid_actions(const State& s) const;

    StepOutcome step(const State& s, const OperatorId& op, Rng& rng) const;

    const Instance& instance() const { return *inst_; }
    const Portfolio& portfolio() const { return portfolio_; }
    const EpisodeConfig& config() const { return cfg_; }

private:
    const Instance* inst_;
    Portfolio portfolio_;
    EpisodeConfig cfg_;
    std::vector<OperatorId> no_actions_;
};

using Policy = std::function<OperatorId(const State&, const std::vector<OperatorId>&, Rng&)>;

struct EpisodeResult {
    double total_reward = 0.0;
    Solution final_solution;
    std::vector<Transition> log;
};

EpisodeResult run_episode(const Environment& env, const Solution& start, const Policy& policy, Rng& rng,
                          bool keep_log = false);

}  // namespace opsel

#endif
