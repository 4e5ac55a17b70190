#include "opsel/solution.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace opsel {

double objective(const Instance& inst, const Solution& sol) {
    double total = 0.0;
    for (const auto& tour : sol.tours) {
        if (tour.empty()) continue;
        int prev = 0;
        for (int c : tour) {
            if (c < 1 || c > inst.n_customers())
                throw std::out_of_range("tour references unknown customer " + std::to_string(c));
            total += inst.dist(prev, c);
            prev = c;
        }
        total += inst.dist(prev, 0);
    }
    return total;
}

double solution_cost(const Instance& inst, Solution& sol) {
    if (!sol.cached_cost) sol.cached_cost = objective(inst, sol);
    return *sol.cached_cost;
}

int tour_load(const Instance& inst, const std::vector<int>& tour) {
    int load = 0;
    for (int c : tour) load += inst.node(c).demand;
    return load;
}

std::vector<int> routed_customers(const Solution& sol) {
    std::vector<int> out;
    for (const auto& tour : sol.tours) out.insert(out.end(), tour.begin(), tour.end());
    return out;
}

std::vector<Violation> validate_solution(const Instance& inst, const Solution& sol) {
    std::vector<Violation> v;
    std::vector<int> seen(static_cast<std::size_t>(inst.n_customers()) + 1, 0);
    auto mark = [&](int c, const std::string& where) {
        if (c < 1 || c > inst.n_customers()) {
            v.push_back({where + " references unknown node " + std::to_string(c)});
            return;
        }
        if (++seen[static_cast<std::size_t>(c)] > 1)
            v.push_back({"customer " + std::to_string(c) + " appears more than once"});
    };
    for (std::size_t t = 0; t < sol.tours.size(); ++t) {
        const auto& tour = sol.tours[t];
        if (tour.empty()) v.push_back({"tour " + std::to_string(t) + " is empty"});
        for (int c : tour) {
            if (c == 0) {
                v.push_back({"tour " + std::to_string(t) + " contains the depot"});
                continue;
            }
            mark(c, "tour " + std::to_string(t));
        }
        const int load = tour_load(inst, tour);
        if (load > inst.capacity())
            v.push_back({"tour " + std::to_string(t) + " load " + std::to_string(load) +
                         " exceeds capacity " + std::to_string(inst.capacity())});
    }
    if (!std::is_sorted(sol.removal_list.begin(), sol.removal_list.end()))
        v.push_back({"removal_list is not sorted"});
    for (int c : sol.removal_list) mark(c, "removal_list");
    for (int c = 1; c <= inst.n_customers(); ++c)
        if (seen[static_cast<std::size_t>(c)] == 0)
            v.push_back({"customer " + std::to_string(c) + " is missing"});
    return v;
}

std::optional<double> insertion_delta(const Instance& inst, const Solution& sol, int customer,
                                      std::size_t tour_idx, std::size_t pos) {
    if (!std::binary_search(sol.removal_list.begin(), sol.removal_list.end(), customer))
        throw std::invalid_argument("customer " + std::to_string(customer) + " is not on the removal list");
    if (tour_idx > sol.tours.size())
        throw std::invalid_argument("tour index " + std::to_string(tour_idx) + " out of range");
    const int q = inst.node(customer).demand;
    if (tour_idx == sol.tours.size()) {
        if (pos != 0) throw std::invalid_argument("new tour only accepts position 0");
        if (q > inst.capacity()) return std::nullopt;
        return 2.0 * inst.dist_depot(customer);
    }
    const auto& tour = sol.tours[tour_idx];
    if (pos > tour.size()) throw std::invalid_argument("position " + std::to_string(pos) + " out of range");
    if (tour_load(inst, tour) + q > inst.capacity()) return std::nullopt;
    const int before = pos == 0 ? 0 : tour[pos - 1];
    const int after = pos == tour.size() ? 0 : tour[pos];
    return inst.dist(before, customer) + inst.dist(customer, after) - inst.dist(before, after);
}

namespace {

std::pair<std::size_t, std::size_t> locate(const Solution& sol, int customer) {
    for (std::size_t t = 0; t < sol.tours.size(); ++t) {
        const auto& tour = sol.tours[t];
        const auto it = std::find(tour.begin(), tour.end(), customer);
        if (it != tour.end()) return {t, static_cast<std::size_t>(it - tour.begin())};
    }
    throw std::invalid_argument("customer " + std::to_string(customer) + " is not routed");
}

}  // namespace

double removal_gain(const Instance& inst, const Solution& sol, int customer) {
    const auto [t, p] = locate(sol, customer);
    const auto& tour = sol.tours[t];
    const int before = p == 0 ? 0 : tour[p - 1];
    const int after = p + 1 == tour.size() ? 0 : tour[p + 1];
    return inst.dist(before, customer) + inst.dist(customer, after) - inst.dist(before, after);
}

void remove_customer(const Instance& inst, Solution& sol, int customer) {
    const auto [t, p] = locate(sol, customer);
    const double gain = removal_gain(inst, sol, customer);
    auto& tour = sol.tours[t];
    tour.erase(tour.begin() + static_cast<std::ptrdiff_t>(p));
    if (tour.empty()) sol.tours.erase(sol.tours.begin() + static_cast<std::ptrdiff_t>(t));
    const auto it = std::lower_bound(sol.removal_list.begin(), sol.removal_list.end(), customer);
    sol.removal_list.insert(it, customer);
    if (sol.cached_cost) *sol.cached_cost -= gain;
}

void insert_customer(const Instance& inst, Solution& sol, int customer, std::size_t tour_idx, std::size_t pos) {
    const auto delta = insertion_delta(inst, sol, customer, tour_idx, pos);
    if (!delta)
        throw std::invalid_argument("inserting customer " + std::to_string(customer) + " would exceed capacity");
    if (tour_idx == sol.tours.size())
        sol.tours.push_back({customer});
    else
        sol.tours[tour_idx].insert(sol.tours[tour_idx].begin() + static_cast<std::ptrdiff_t>(pos), customer);
    const auto it = std::lower_bound(sol.removal_list.begin(), sol.removal_list.end(), customer);
    sol.removal_list.erase(it);
    if (sol.cached_cost) *sol.cached_cost += *delta;
}

Solution random_initial_solution(const Instance& inst, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(inst.n_customers()));
    std::iota(order.begin(), order.end(), 1);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    Solution sol;
    std::vector<int> tour;
    int load = 0;
    for (int c : order) {
        const int q = inst.node(c).demand;
        if (q > inst.capacity())
            throw std::runtime_error("customer " + std::to_string(c) + " demand exceeds vehicle capacity");
        if (load + q > inst.capacity()) {
            sol.tours.push_back(std::move(tour));
            tour = {};
            load = 0;
        }
        tour.push_back(c);
        load += q;
    }
    if (!tour.empty()) sol.tours.push_back(std::move(tour));
    sol.cached_cost = objective(inst, sol);
    return sol;
}

std::string solution_key(const Solution& sol) {
    std::ostringstream out;
    for (const auto& tour : sol.tours) {
        out << "t";
        for (int c : tour) out << ' ' << c;
        out << " | ";
    }
    out << "r";
    for (int c : sol.removal_list) out << ' ' << c;
    return out.str();
}

}  // namespace opsel
