#ifndef OPSEL_TEST_UTIL_HPP
#define OPSEL_TEST_UTIL_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opsel/instance.hpp"
#include "opsel/solution.hpp"

namespace opsel_test {

inline std::string data_path(const std::string& name) { return std::string(OPSEL_DATA_DIR) + "/" + name; }

inline opsel::Instance small_instance() {
    // depot at the origin, four customers on the axes
    return opsel::Instance::from_nodes("axes",
                                       {{0, 0.0, 0.0, 0},
                                        {1, 3.0, 0.0, 4},
                                        {2, 0.0, 4.0, 3},
                                        {3, -3.0, 0.0, 2},
                                        {4, 0.0, -4.0, 5}},
                                       10);
}

// Insertion cost recomputed from scratch by copying the solution, inserting
// and differencing full objectives. Independent of the closed-form delta.
inline std::optional<double> recompute_insertion_delta(const opsel::Instance& inst, const opsel::Solution& sol,
                                                       int customer, std::size_t tour_idx, std::size_t pos) {
    const int q = inst.node(customer).demand;
    if (tour_idx < sol.tours.size() && opsel::tour_load(inst, sol.tours[tour_idx]) + q > inst.capacity())
        return std::nullopt;
    if (tour_idx > sol.tours.size() || q > inst.capacity()) return std::nullopt;
    opsel::Solution copy = sol;
    copy.cached_cost.reset();
    const double before = opsel::objective(inst, copy);
    if (tour_idx == copy.tours.size()) copy.tours.emplace_back();
    auto& tour = copy.tours[tour_idx];
    tour.insert(tour.begin() + static_cast<std::ptrdiff_t>(pos), customer);
    std::erase(copy.removal_list, customer);
    return opsel::objective(inst, copy) - before;
}

struct OraclePlacement {
    double delta = std::numeric_limits<double>::infinity();
    std::size_t tour = 0;
    std::size_t pos = 0;
    double second = std::numeric_limits<double>::infinity();
    int options = 0;
    bool found = false;
};

// Exhaustive scan over every feasible slot (existing tours in order, then a
// fresh singleton tour), breaking delta ties by earliest tour then position.
inline OraclePlacement oracle_scan(const opsel::Instance& inst, const opsel::Solution& sol, int customer) {
    OraclePlacement out;
    const int q = inst.node(customer).demand;
    const auto consider = [&](double delta, std::size_t t, std::size_t p) {
        ++out.options;
        const bool better = !out.found || delta < out.delta ||
                            (delta == out.delta && (t < out.tour || (t == out.tour && p < out.pos)));
        if (better) {
            if (out.found) out.second = std::min(out.second, out.delta);
            out.delta = delta;
            out.tour = t;
            out.pos = p;
            out.found = true;
        } else {
            out.second = std::min(out.second, delta);
        }
    };
    for (std::size_t t = 0; t < sol.tours.size(); ++t) {
        if (opsel::tour_load(inst, sol.tours[t]) + q > inst.capacity()) continue;
        for (std::size_t p = 0; p <= sol.tours[t].size(); ++p) {
            const int before = p == 0 ? 0 : sol.tours[t][p - 1];
            const int after = p == sol.tours[t].size() ? 0 : sol.tours[t][p];
            consider(inst.dist(before, customer) + inst.dist(customer, after) - inst.dist(before, after), t, p);
        }
    }
    if (q <= inst.capacity()) consider(2.0 * inst.dist_depot(customer), sol.tours.size(), 0);
    return out;
}

// Reference cheapest-insertion repair: global minimum over all removed
// customers, ties by tour, position, then customer id.
inline void oracle_greedy_repair(const opsel::Instance& inst, opsel::Solution& sol) {
    while (!sol.removal_list.empty()) {
        OraclePlacement best;
        int who = -1;
        for (int c : sol.removal_list) {
            const OraclePlacement p = oracle_scan(inst, sol, c);
            if (!p.found) continue;
            const bool better =
                who < 0 || p.delta < best.delta ||
                (p.delta == best.delta && (p.tour < best.tour || (p.tour == best.tour && p.pos < best.pos)));
            if (better) {
                best = p;
                who = c;
            }
        }
        if (who < 0) throw std::runtime_error("oracle: nothing fits");
        opsel::insert_customer(inst, sol, who, best.tour, best.pos);
    }
}

// Reference 2-regret repair: maximise second-best minus best insertion cost
// (infinite when fewer than two options), ties by cheaper best insertion,
// then customer id.
inline void oracle_regret_repair(const opsel::Instance& inst, opsel::Solution& sol) {
    while (!sol.removal_list.empty()) {
        OraclePlacement best;
        int who = -1;
        double best_regret = -std::numeric_limits<double>::infinity();
        for (int c : sol.removal_list) {
            const OraclePlacement p = oracle_scan(inst, sol, c);
            if (!p.found) continue;
            const double regret = p.options < 2 ? std::numeric_limits<double>::infinity() : p.second - p.delta;
            const bool better = who < 0 || regret > best_regret ||
                                (regret == best_regret && p.delta < best.delta);
            if (better) {
                best = p;
                who = c;
                best_regret = regret;
            }
        }
        if (who < 0) throw std::runtime_error("oracle: nothing fits");
        opsel::insert_customer(inst, sol, who, best.tour, best.pos);
    }
}

// Complete random solution with `remove` random customers taken out.
inline opsel::Solution random_partial(const opsel::Instance& inst, opsel::Rng& rng, int remove) {
    opsel::Solution sol = opsel::random_initial_solution(inst, rng);
    for (int i = 0; i < remove; ++i) {
        const std::vector<int> routed = opsel::routed_customers(sol);
        const int pick = routed[opsel::uniform_int(rng, 0, static_cast<int>(routed.size()) - 1)];
        opsel::remove_customer(inst, sol, pick);
    }
    return sol;
}

}  // namespace opsel_test

#endif
