#ifndef OPSEL_OPERATORS_HPP
#define OPSEL_OPERATORS_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "opsel/solution.hpp"

namespace opsel {

enum class OperatorKind { destroy, repair };

struct OperatorId {
    OperatorKind kind = OperatorKind::destroy;
    int index = 0;  // position in the catalogue of its kind
    const char* name = "";

    bool operator==(const OperatorId& o) const { return kind == o.kind && index == o.index; }
};

// Destroy operators in canonical order. A portfolio of size k uses the first
// k of these together with both repair operators.
const std::array<OperatorId, 12>& destroy_catalogue();
const std::array<OperatorId, 2>& repair_catalogue();
OperatorId find_operator(const std::string& name);

struct Portfolio {
    std::vector<OperatorId> destroys;
    std::vector<OperatorId> repairs;

    int action_count() const { return static_cast<int>(destroys.size() + repairs.size()); }
    // Global action indexing: destroys first, then repairs.
    const OperatorId& action(int idx) const;
    int action_index(const OperatorId& op) const;
};

Portfolio build_portfolio(int destroy_count);

/**
 * Best cost ever observed for each directionless tour edge (i, j), depot
 * edges included. Fed by whichever loop owns the search, read by the
 * history-pair destroy operator.
 */
class PairHistory {
public:
    void record(const Instance& inst, const Solution& sol, double cost);
    bool seen(int a, int b) const;
    double best_cost(int a, int b) const;
    void clear() { best_.clear(); }
    std::size_t size() const { return best_.size(); }

private:
    std::map<std::pair<int, int>, double> best_;
};

// Removes exactly d customers from a complete solution. Throws
// std::invalid_argument for a repair operator or an incomplete solution,
// std::out_of_range when d is outside [1, n_customers].
void apply_destroy(const OperatorId& op, const Instance& inst, Solution& sol, int d, Rng& rng,
                   const PairHistory& hist);

// Reinserts every removed customer; an empty removal list is a no-op. Both
// repairs are deterministic, rng is accepted only for interface symmetry.
void apply_repair(const OperatorId& op, const Instance& inst, Solution& sol, Rng& rng);

void greedy_repair(const Instance& inst, Solution& sol);
void regret2_repair(const Instance& inst, Solution& sol);

}  // namespace opsel

#endif
