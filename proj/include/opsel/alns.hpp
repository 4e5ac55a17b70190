#ifndef OPSEL_ALNS_HPP
#define OPSEL_ALNS_HPP

#include <functional>
#include <map>

#include "opsel/selectors.hpp"

namespace opsel {

struct AlnsConfig {
    int iterations = 1000;
    int segment_length = 100;
    ScoreRule scores{};
    double w0 = 0.05;       // start temperature as a share of the start cost
    double cooling = 0.9975;
    int d = 4;
    int budget_cycle = 10;  // budget feature fed to learned selectors
};

struct AlnsResult {
    double start_cost = 0.0;
    double best_cost = 0.0;
    double final_cost = 0.0;
    std::vector<double> incumbent_costs;  // one entry per iteration
    std::map<std::string, int> operator_usage;
    int accepted = 0;
    int rejected = 0;
    int global_best = 0;
    int local_best = 0;
    int accepted_worse = 0;
    double final_temperature = 0.0;
};

// T0 chosen so a proposal w0 * start_cost worse than the start is accepted
// with probability one half.
double initial_temperature(double start_cost, double w0);

// Simulated-annealing rule: improvements always pass, a deterioration of
// delta passes with probability exp(-delta / T).
bool sa_accept(double f_new, double f_cur, double temperature, Rng& rng);

using AcceptRule = std::function<bool(double f_new, double f_cur, double temperature, Rng&)>;

/**
 * Destroy/repair search with pluggable operator selection. Each iteration
 * asks the selector for one destroy and one repair (the repair choice sees
 * the destroyed solution), proposes the repaired candidate to the acceptance
 * rule, reports the outcome back to the selector, and closes every segment
 * with the selector's segment hook.
 */
AlnsResult run_alns(const Instance& inst, const Solution& start, const Portfolio& portfolio,
                    OperatorSelector& selector, const AlnsConfig& cfg, Rng& rng,
                    const AcceptRule& accept = {});

}  // namespace opsel

#endif
