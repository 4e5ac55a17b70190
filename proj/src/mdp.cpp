#include "opsel/mdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace opsel {

Environment::Environment(const Instance& inst, Portfolio portfolio, EpisodeConfig cfg)
    : inst_(&inst), portfolio_(std::move(portfolio)), cfg_(cfg) {
    if (cfg_.d < 1 || cfg_.d > inst.n_customers())
        throw std::out_of_range("destroy size d outside [1, n_customers]");
    if (cfg_.b < 1) throw std::out_of_range("episode budget must be positive");
    if (portfolio_.destroys.empty() || portfolio_.repairs.empty())
        throw std::invalid_argument("portfolio needs at least one destroy and one repair operator");
}

State Environment::reset(const Solution& start) const {
    if (!start.complete()) throw std::invalid_argument("episodes start from complete solutions");
    const auto violations = validate_solution(*inst_, start);
    if (!violations.empty()) throw std::invalid_argument("infeasible start solution: " + violations.front().what);
    State s;
    s.inst = inst_;
    s.cfg = cfg_;
    s.sol = start;
    s.sol.cached_cost.reset();
    s.initial_cost = solution_cost(*inst_, s.sol);
    s.phase = Phase::destroy;
    s.budget_remaining = cfg_.b;
    s.step_index = 0;
    s.hist.clear();
    return s;
}

const std::vector<OperatorId>& Environment::valid_actions(const State& s) const {
    if (s.terminal()) return no_actions_;
    return s.phase == Phase::destroy ? portfolio_.destroys : portfolio_.repairs;
}

StepOutcome Environment::step(const State& s, const OperatorId& op, Rng& rng) const {
    if (s.terminal()) throw std::logic_error("step on a terminal state");
    const auto& valid = valid_actions(s);
    if (std::find(valid.begin(), valid.end(), op) == valid.end())
        throw std::invalid_argument(std::string(op.name) + " is not a valid action in this phase");

    StepOutcome out;
    out.next = s;
    out.next.step_index = s.step_index + 1;
    if (s.phase == Phase::destroy) {
        apply_destroy(op, *inst_, out.next.sol, cfg_.d, rng, out.next.hist);
        out.next.phase = Phase::repair;
        return out;
    }
    apply_repair(op, *inst_, out.next.sol, rng);
    const double cost = solution_cost(*inst_, out.next.sol);
    out.next.hist.record(*inst_, out.next.sol, cost);
    out.next.phase = Phase::destroy;
    out.next.budget_remaining = s.budget_remaining - 1;
    if (out.next.budget_remaining == 0) {
        out.terminal = true;
        out.reward = s.initial_cost - cost;
    }
    return out;
}

EpisodeResult run_episode(const Environment& env, const Solution& start, const Policy& policy, Rng& rng,
                          bool keep_log) {
    EpisodeResult res;
    State s = env.reset(start);
    while (!s.terminal()) {
        const auto& valid = env.valid_actions(s);
        const OperatorId op = policy(s, valid, rng);
        StepOutcome out = env.step(s, op, rng);
        res.total_reward += out.reward;
        if (keep_log) res.log.push_back({s, op, out.reward, out.next});
        s = std::move(out.next);
    }
    res.final_solution = std::move(s.sol);
    return res;
}

}  // namespace opsel
