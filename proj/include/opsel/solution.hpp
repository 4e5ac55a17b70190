#ifndef OPSEL_SOLUTION_HPP
#define OPSEL_SOLUTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "opsel/instance.hpp"
#include "opsel/rng.hpp"

namespace opsel {

/**
 * A (possibly partial) CVRP solution: a set of open tours plus the customers
 * currently removed from the solution. Tours never contain the depot node and
 * never go empty; removal_list is kept sorted so it behaves as a canonical
 * set. cached_cost, when present, tracks the summed tour length and is
 * maintained incrementally by the mutation primitives below.
 */
struct Solution {
    std::vector<std::vector<int>> tours;
    std::vector<int> removal_list;
    std::optional<double> cached_cost;

    bool complete() const { return removal_list.empty(); }
    bool operator==(const Solution& other) const {
        return tours == other.tours && removal_list == other.removal_list;
    }
};

struct Violation {
    std::string what;
};

// Total routed length, recomputed from scratch: for each tour,
// depot -> first -> ... -> last -> depot. Ignores the cache on purpose so it
// can serve as the reference against incrementally maintained costs.
double objective(const Instance& inst, const Solution& sol);

// Cached cost when available, otherwise computes it once and stores it.
double solution_cost(const Instance& inst, Solution& sol);

// Structural checks: every customer appears exactly once across tours and
// removal_list, no depot inside tours, tour loads within capacity, no empty
// tours, removal_list sorted and duplicate-free. Empty result means valid.
std::vector<Violation> validate_solution(const Instance& inst, const Solution& sol);

int tour_load(const Instance& inst, const std::vector<int>& tour);

// Customers currently routed, in tour order.
std::vector<int> routed_customers(const Solution& sol);

// Cost increase of placing `customer` into tours[tour_idx] before position
// `pos` (pos == tour size appends; tour_idx == tours.size() opens a new
// singleton tour). Returns nullopt when the tour's load would exceed
// capacity. Throws std::invalid_argument when customer is not on the
// removal_list or the position does not exist.
std::optional<double> insertion_delta(const Instance& inst, const Solution& sol, int customer,
                                      std::size_t tour_idx, std::size_t pos);

// Cost decrease of splicing a routed customer out of its tour.
double removal_gain(const Instance& inst, const Solution& sol, int customer);

// Mutation primitives. Both keep cached_cost in sync when it is set, keep
// removal_list sorted, and prune a tour as soon as it becomes empty.
void remove_customer(const Instance& inst, Solution& sol, int customer);
void insert_customer(const Instance& inst, Solution& sol, int customer, std::size_t tour_idx, std::size_t pos);

/**
 * Uniform random complete solution: visits customers in a random order and
 * opens a new tour whenever the next customer would exceed capacity.
 */
Solution random_initial_solution(const Instance& inst, Rng& rng);

// Canonical text form ("t 3 1 2 | r 5 7"), used for set fingerprints and the
// solution-set files.
std::string solution_key(const Solution& sol);

}  // namespace opsel

#endif
