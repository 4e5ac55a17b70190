#include "opsel/alns.hpp"

#include <cmath>
#include <stdexcept>

namespace opsel {

double initial_temperature(double start_cost, double w0) {
    if (start_cost < 0.0) throw std::invalid_argument("negative start cost");
    return w0 * start_cost / std::log(2.0);
}

bool sa_accept(double f_new, double f_cur, double temperature, Rng& rng) {
    if (f_new <= f_cur) return true;
    if (temperature <= 0.0) return false;
    return uniform01(rng) < std::exp(-(f_new - f_cur) / temperature);
}

AlnsResult run_alns(const Instance& inst, const Solution& start, const Portfolio& portfolio,
                    OperatorSelector& selector, const AlnsConfig& cfg, Rng& rng,
                    const AcceptRule& accept) {
    if (cfg.iterations < 1) throw std::invalid_argument("need at least one iteration");
    if (cfg.segment_length < 1) throw std::invalid_argument("segment length must be positive");
    if (cfg.budget_cycle < 1) throw std::invalid_argument("budget cycle must be positive");
    if (!start.complete()) throw std::invalid_argument("search starts from a complete solution");
    const auto violations = validate_solution(inst, start);
    if (!violations.empty()) throw std::invalid_argument("infeasible start solution: " + violations.front().what);

    const AcceptRule rule = accept ? accept : AcceptRule(sa_accept);
    const EpisodeConfig feature_cfg{cfg.d, cfg.budget_cycle};

    Solution incumbent = start;
    incumbent.cached_cost.reset();
    const double start_cost = solution_cost(inst, incumbent);

    AlnsResult res;
    res.start_cost = start_cost;
    res.best_cost = start_cost;
    res.incumbent_costs.reserve(static_cast<std::size_t>(cfg.iterations));

    double temperature = initial_temperature(start_cost, cfg.w0);
    PairHistory hist;

    auto make_state = [&](const Solution& sol, Phase phase, int it) {
        State s;
        s.inst = &inst;
        s.cfg = feature_cfg;
        s.sol = sol;
        s.phase = phase;
        s.budget_remaining = cfg.budget_cycle - (it % cfg.budget_cycle);
        s.initial_cost = start_cost;
        s.step_index = 2 * (it % cfg.budget_cycle) + (phase == Phase::repair ? 1 : 0);
        return s;
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        const OperatorId destroy_op =
            selector.select(make_state(incumbent, Phase::destroy, it), portfolio.destroys, rng);
        Solution candidate = incumbent;
        apply_destroy(destroy_op, inst, candidate, cfg.d, rng, hist);
        const OperatorId repair_op =
            selector.select(make_state(candidate, Phase::repair, it), portfolio.repairs, rng);
        apply_repair(repair_op, inst, candidate, rng);

        const double f_new = solution_cost(inst, candidate);
        const double f_cur = solution_cost(inst, incumbent);
        const bool take = rule(f_new, f_cur, temperature, rng);

        Outcome outcome;
        if (f_new < res.best_cost)
            outcome = Outcome::global_best;
        else if (f_new < f_cur)
            outcome = Outcome::local_best;
        else if (take)
            outcome = Outcome::accepted_worse;
        else
            outcome = Outcome::rejected;
        res.best_cost = std::min(res.best_cost, f_new);

        if (take) {
            incumbent = std::move(candidate);
            hist.record(inst, incumbent, f_new);
            ++res.accepted;
        } else {
            ++res.rejected;
        }
        switch (outcome) {
            case Outcome::global_best: ++res.global_best; break;
            case Outcome::local_best: ++res.local_best; break;
            case Outcome::accepted_worse: ++res.accepted_worse; break;
            case Outcome::rejected: break;
        }
        ++res.operator_usage[destroy_op.name];
        ++res.operator_usage[repair_op.name];
        selector.observe(destroy_op, repair_op, outcome);
        if ((it + 1) % cfg.segment_length == 0) selector.end_segment();

        temperature *= cfg.cooling;
        res.incumbent_costs.push_back(solution_cost(inst, incumbent));
    }

    res.final_cost = solution_cost(inst, incumbent);
    res.final_temperature = temperature;
    return res;
}

}  // namespace opsel
