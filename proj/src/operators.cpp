#include "opsel/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opsel {

namespace {

constexpr std::array<OperatorId, 12> kDestroys = {{
    {OperatorKind::destroy, 0, "random-node"},
    {OperatorKind::destroy, 1, "random-route"},
    {OperatorKind::destroy, 2, "worst-node"},
    {OperatorKind::destroy, 3, "neighbourhood"},
    {OperatorKind::destroy, 4, "greedy-route"},
    {OperatorKind::destroy, 5, "proximity"},
    {OperatorKind::destroy, 6, "cluster"},
    {OperatorKind::destroy, 7, "node-neighbourhood"},
    {OperatorKind::destroy, 8, "zone"},
    {OperatorKind::destroy, 9, "route-neighbourhood"},
    {OperatorKind::destroy, 10, "pair"},
    {OperatorKind::destroy, 11, "history-pair"},
}};

constexpr std::array<OperatorId, 2> kRepairs = {{
    {OperatorKind::repair, 0, "greedy-insert"},
    {OperatorKind::repair, 1, "regret2-insert"},
}};

// Uniform sample of k elements, Fisher-Yates prefix on a copy.
std::vector<int> sample_subset(const std::vector<int>& pool, int k, Rng& rng) {
    std::vector<int> v = pool;
    const int m = static_cast<int>(v.size());
    for (int i = 0; i < k; ++i) {
        const int j = uniform_int(rng, i, m - 1);
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
    v.resize(static_cast<std::size_t>(k));
    return v;
}

struct Point {
    double x = 0.0;
    double y = 0.0;
};

Point centroid(const Instance& inst, const std::vector<int>& customers) {
    Point p;
    for (int c : customers) {
        p.x += inst.node(c).x;
        p.y += inst.node(c).y;
    }
    const double m = static_cast<double>(customers.size());
    p.x /= m;
    p.y /= m;
    return p;
}

double point_dist(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void remove_all(const Instance& inst, Solution& sol, const std::vector<int>& victims) {
    for (int c : victims) remove_customer(inst, sol, c);
}

// Staged-batch bookkeeping shared by the operators that collect whole groups
// (tours, clusters, pairs) and may overshoot d: all batches but the last are
// kept in full, the last is trimmed uniformly.
std::vector<int> flatten_with_trim(const std::vector<std::vector<int>>& batches, int d, Rng& rng) {
    std::vector<int> victims;
    for (std::size_t i = 0; i + 1 < batches.size(); ++i)
        victims.insert(victims.end(), batches[i].begin(), batches[i].end());
    const int want = d - static_cast<int>(victims.size());
    const auto& last = batches.back();
    if (want >= static_cast<int>(last.size())) {
        victims.insert(victims.end(), last.begin(), last.end());
    } else {
        const auto keep = sample_subset(last, want, rng);
        victims.insert(victims.end(), keep.begin(), keep.end());
    }
    return victims;
}

void destroy_random_node(const Instance& inst, Solution& sol, int d, Rng& rng) {
    remove_all(inst, sol, sample_subset(routed_customers(sol), d, rng));
}

void destroy_random_route(const Instance& inst, Solution& sol, int d, Rng& rng) {
    std::vector<int> remaining(sol.tours.size());
    for (std::size_t t = 0; t < remaining.size(); ++t) remaining[t] = static_cast<int>(t);
    std::vector<std::vector<int>> batches;
    int staged = 0;
    while (staged < d) {
        const int r = uniform_int(rng, 0, static_cast<int>(remaining.size()) - 1);
        const int t = remaining[static_cast<std::size_t>(r)];
        remaining[static_cast<std::size_t>(r)] = remaining.back();
        remaining.pop_back();
        batches.push_back(sol.tours[static_cast<std::size_t>(t)]);
        staged += static_cast<int>(batches.back().size());
    }
    remove_all(inst, sol, flatten_with_trim(batches, d, rng));
}

void destroy_worst_node(const Instance& inst, Solution& sol, int d) {
    for (int round = 0; round < d; ++round) {
        int best = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (const auto& tour : sol.tours) {
            for (int c : tour) {
                const double g = removal_gain(inst, sol, c);
                if (g > best_gain || (g == best_gain && c < best)) {
                    best_gain = g;
                    best = c;
                }
            }
        }
        remove_customer(inst, sol, best);
    }
}

void destroy_neighbourhood(const Instance& inst, Solution& sol, int d) {
    for (int round = 0; round < d; ++round) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (const auto& tour : sol.tours) {
            for (int c : tour) {
                double score;
                if (tour.size() == 1) {
                    score = inst.dist_depot(c);
                } else {
                    double sum = 0.0;
                    for (int o : tour)
                        if (o != c) sum += inst.dist(c, o);
                    score = sum / static_cast<double>(tour.size() - 1);
                }
                if (score > best_score || (score == best_score && c < best)) {
                    best_score = score;
                    best = c;
                }
            }
        }
        remove_customer(inst, sol, best);
    }
}

void destroy_greedy_route(const Instance& inst, Solution& sol, int d, Rng& rng) {
    std::vector<int> order(sol.tours.size());
    for (std::size_t t = 0; t < order.size(); ++t) order[t] = static_cast<int>(t);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto sa = sol.tours[static_cast<std::size_t>(a)].size();
        const auto sb = sol.tours[static_cast<std::size_t>(b)].size();
        return sa != sb ? sa < sb : a < b;
    });
    std::vector<std::vector<int>> batches;
    int staged = 0;
    for (int t : order) {
        if (staged >= d) break;
        batches.push_back(sol.tours[static_cast<std::size_t>(t)]);
        staged += static_cast<int>(batches.back().size());
    }
    remove_all(inst, sol, flatten_with_trim(batches, d, rng));
}

void destroy_proximity(const Instance& inst, Solution& sol, int d, Rng& rng) {
    const auto routed = routed_customers(sol);
    const int seed = routed[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(routed.size()) - 1))];
    std::vector<int> others;
    for (int c : routed)
        if (c != seed) others.push_back(c);
    std::sort(others.begin(), others.end(), [&](int a, int b) {
        const double da = inst.dist(seed, a), db = inst.dist(seed, b);
        return da != db ? da < db : a < b;
    });
    std::vector<int> victims = {seed};
    victims.insert(victims.end(), others.begin(), others.begin() + (d - 1));
    remove_all(inst, sol, victims);
}

// Two-seed split of one tour: the farthest pair of its members seeds two
// clusters, each member joins the nearer seed, and a fair coin picks the
// cluster to stage. Search then hops to the tour whose centroid lies closest
// to the centroid of everything staged so far.
void destroy_cluster(const Instance& inst, Solution& sol, int d, Rng& rng) {
    std::vector<std::vector<int>> remaining = sol.tours;
    std::vector<int> alive(remaining.size());
    for (std::size_t t = 0; t < alive.size(); ++t) alive[t] = static_cast<int>(t);

    std::vector<std::vector<int>> batches;
    std::vector<int> staged;
    int current = alive[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(alive.size()) - 1))];
    while (true) {
        auto& mem = remaining[static_cast<std::size_t>(current)];
        std::vector<int> batch;
        if (mem.size() <= 1) {
            batch = mem;
        } else {
            std::size_t pa = 0, pb = 1;
            double far = -1.0;
            for (std::size_t i = 0; i < mem.size(); ++i)
                for (std::size_t j = i + 1; j < mem.size(); ++j)
                    if (inst.dist(mem[i], mem[j]) > far) {
                        far = inst.dist(mem[i], mem[j]);
                        pa = i;
                        pb = j;
                    }
            const int a = mem[pa], b = mem[pb];
            if (far == 0.0) {
                batch = mem;
            } else {
                std::vector<int> ca, cb;
                for (int m : mem) (inst.dist(m, a) <= inst.dist(m, b) ? ca : cb).push_back(m);
                batch = uniform_int(rng, 0, 1) == 0 ? ca : cb;
            }
        }
        for (int c : batch) {
            mem.erase(std::find(mem.begin(), mem.end(), c));
            staged.push_back(c);
        }
        batches.push_back(std::move(batch));
        if (mem.empty()) alive.erase(std::find(alive.begin(), alive.end(), current));
        if (static_cast<int>(staged.size()) >= d) break;

        const Point target = centroid(inst, staged);
        int next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int t : alive) {
            const double dd = point_dist(centroid(inst, remaining[static_cast<std::size_t>(t)]), target);
            if (dd < best) {
                best = dd;
                next = t;
            }
        }
        current = next;
    }
    remove_all(inst, sol, flatten_with_trim(batches, d, rng));
}

// Relatedness in the spirit of Shaw: normalized distance plus normalized
// demand difference, smaller means more related to the seed.
void destroy_node_neighbourhood(const Instance& inst, Solution& sol, int d, Rng& rng) {
    const auto routed = routed_customers(sol);
    const int seed = routed[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(routed.size()) - 1))];
    const double md = inst.max_dist();
    const int qs = inst.node(seed).demand;
    auto relatedness = [&](int c) {
        const double geo = md > 0.0 ? inst.dist(seed, c) / md : 0.0;
        return geo + std::abs(qs - inst.node(c).demand) / static_cast<double>(inst.capacity());
    };
    std::vector<int> others;
    for (int c : routed)
        if (c != seed) others.push_back(c);
    std::sort(others.begin(), others.end(), [&](int a, int b) {
        const double ra = relatedness(a), rb = relatedness(b);
        return ra != rb ? ra < rb : a < b;
    });
    std::vector<int> victims = {seed};
    victims.insert(victims.end(), others.begin(), others.begin() + (d - 1));
    remove_all(inst, sol, victims);
}

void destroy_zone(const Instance& inst, Solution& sol, int d, Rng& rng) {
    const double px = std::uniform_real_distribution<double>(inst.min_x(), inst.max_x())(rng);
    const double py = std::uniform_real_distribution<double>(inst.min_y(), inst.max_y())(rng);
    std::vector<int> routed = routed_customers(sol);
    auto cheb = [&](int c) {
        return std::max(std::abs(inst.node(c).x - px), std::abs(inst.node(c).y - py));
    };
    std::sort(routed.begin(), routed.end(), [&](int a, int b) {
        const double da = cheb(a), db = cheb(b);
        return da != db ? da < db : a < b;
    });
    routed.resize(static_cast<std::size_t>(d));
    remove_all(inst, sol, routed);
}

void destroy_route_neighbourhood(const Instance& inst, Solution& sol, int d, Rng& rng) {
    const int seed = uniform_int(rng, 0, static_cast<int>(sol.tours.size()) - 1);
    const Point sc = centroid(inst, sol.tours[static_cast<std::size_t>(seed)]);
    std::vector<int> order(sol.tours.size());
    for (std::size_t t = 0; t < order.size(); ++t) order[t] = static_cast<int>(t);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = point_dist(centroid(inst, sol.tours[static_cast<std::size_t>(a)]), sc);
        const double db = point_dist(centroid(inst, sol.tours[static_cast<std::size_t>(b)]), sc);
        return da != db ? da < db : a < b;
    });
    std::vector<std::vector<int>> batches;
    int staged = 0;
    for (int t : order) {
        if (staged >= d) break;
        batches.push_back(sol.tours[static_cast<std::size_t>(t)]);
        staged += static_cast<int>(batches.back().size());
    }
    remove_all(inst, sol, flatten_with_trim(batches, d, rng));
}

void destroy_pair(const Instance& inst, Solution& sol, int d, Rng& rng) {
    std::vector<int> remaining = routed_customers(sol);
    std::vector<std::vector<int>> batches;
    int staged = 0;
    while (staged < d) {
        const int r = uniform_int(rng, 0, static_cast<int>(remaining.size()) - 1);
        const int c = remaining[static_cast<std::size_t>(r)];
        remaining.erase(remaining.begin() + r);
        std::vector<int> batch = {c};
        if (!remaining.empty()) {
            std::size_t np = 0;
            for (std::size_t i = 1; i < remaining.size(); ++i) {
                const double di = inst.dist(c, remaining[i]), dn = inst.dist(c, remaining[np]);
                if (di < dn || (di == dn && remaining[i] < remaining[np])) np = i;
            }
            batch.push_back(remaining[np]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(np));
        }
        staged += static_cast<int>(batch.size());
        batches.push_back(std::move(batch));
    }
    remove_all(inst, sol, flatten_with_trim(batches, d, rng));
}

// Customers whose current edges have been part of good solutions before score
// high: for each incident edge, current cost minus the best cost ever seen
// with that edge (unseen edges contribute nothing).
void destroy_history_pair(const Instance& inst, Solution& sol, int d, const PairHistory& hist) {
    const double cost_cur = solution_cost(inst, sol);
    std::vector<std::pair<double, int>> scored;
    for (const auto& tour : sol.tours) {
        for (std::size_t p = 0; p < tour.size(); ++p) {
            const int c = tour[p];
            const int prev = p == 0 ? 0 : tour[p - 1];
            const int next = p + 1 == tour.size() ? 0 : tour[p + 1];
            double s = 0.0;
            if (hist.seen(prev, c)) s += cost_cur - hist.best_cost(prev, c);
            if (hist.seen(c, next)) s += cost_cur - hist.best_cost(c, next);
            scored.emplace_back(s, c);
        }
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<int> victims;
    for (int i = 0; i < d; ++i) victims.push_back(scored[static_cast<std::size_t>(i)].second);
    remove_all(inst, sol, victims);
}

struct Placement {
    double delta = std::numeric_limits<double>::infinity();
    std::size_t tour = 0;
    std::size_t pos = 0;
    bool found = false;
};

bool placement_less(double delta, std::size_t t, std::size_t p, const Placement& best) {
    if (delta != best.delta) return delta < best.delta;
    if (t != best.tour) return t < best.tour;
    return p < best.pos;
}

// Scans every feasible slot for one customer. Returns the lexicographically
// first best placement, the second-best delta and the number of options.
Placement scan_placements(const Instance& inst, const Solution& sol, const std::vector<int>& loads,
                          int customer, double& second_best, int& options) {
    Placement best;
    second_best = std::numeric_limits<double>::infinity();
    options = 0;
    const int q = inst.node(customer).demand;
    auto consider = [&](double delta, std::size_t t, std::size_t p) {
        ++options;
        if (!best.found || placement_less(delta, t, p, best)) {
            if (best.found) second_best = std::min(second_best, best.delta);
            best = {delta, t, p, true};
        } else {
            second_best = std::min(second_best, delta);
        }
    };
    for (std::size_t t = 0; t < sol.tours.size(); ++t) {
        if (loads[t] + q > inst.capacity()) continue;
        const auto& tour = sol.tours[t];
        for (std::size_t p = 0; p <= tour.size(); ++p) {
            const int before = p == 0 ? 0 : tour[p - 1];
            const int after = p == tour.size() ? 0 : tour[p];
            consider(inst.dist(before, customer) + inst.dist(customer, after) - inst.dist(before, after), t, p);
        }
    }
    if (q <= inst.capacity()) consider(2.0 * inst.dist_depot(customer), sol.tours.size(), 0);
    return best;
}

std::vector<int> current_loads(const Instance& inst, const Solution& sol) {
    std::vector<int> loads(sol.tours.size());
    for (std::size_t t = 0; t < sol.tours.size(); ++t) loads[t] = tour_load(inst, sol.tours[t]);
    return loads;
}

}  // namespace

const std::array<OperatorId, 12>& destroy_catalogue() { return kDestroys; }
const std::array<OperatorId, 2>& repair_catalogue() { return kRepairs; }

OperatorId find_operator(const std::string& name) {
    for (const auto& op : kDestroys)
        if (name == op.name) return op;
    for (const auto& op : kRepairs)
        if (name == op.name) return op;
    throw std::invalid_argument("unknown operator name: " + name);
}

const OperatorId& Portfolio::action(int idx) const {
    const int nd = static_cast<int>(destroys.size());
    if (idx < 0 || idx >= action_count()) throw std::out_of_range("action index out of range");
    return idx < nd ? destroys[static_cast<std::size_t>(idx)] : repairs[static_cast<std::size_t>(idx - nd)];
}

int Portfolio::action_index(const OperatorId& op) const {
    const auto& list = op.kind == OperatorKind::destroy ? destroys : repairs;
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] == op)
            return static_cast<int>(i) + (op.kind == OperatorKind::repair ? static_cast<int>(destroys.size()) : 0);
    throw std::invalid_argument(std::string("operator ") + op.name + " is not in the portfolio");
}

Portfolio build_portfolio(int destroy_count) {
    if (destroy_count < 1 || destroy_count > static_cast<int>(kDestroys.size()))
        throw std::out_of_range("portfolio size must be in [1, 12]");
    Portfolio p;
    p.destroys.assign(kDestroys.begin(), kDestroys.begin() + destroy_count);
    p.repairs.assign(kRepairs.begin(), kRepairs.end());
    return p;
}

void PairHistory::record(const Instance& inst, const Solution& sol, double cost) {
    (void)inst;
    for (const auto& tour : sol.tours) {
        int prev = 0;
        for (std::size_t p = 0; p <= tour.size(); ++p) {
            const int cur = p == tour.size() ? 0 : tour[p];
            const std::pair<int, int> key = std::minmax(prev, cur);
            const auto it = best_.find(key);
            if (it == best_.end())
                best_.emplace(key, cost);
            else
                it->second = std::min(it->second, cost);
            prev = cur;
        }
    }
}

bool PairHistory::seen(int a, int b) const {
    return best_.count(std::pair<int, int>(std::minmax(a, b))) > 0;
}

double PairHistory::best_cost(int a, int b) const {
    const auto it = best_.find(std::pair<int, int>(std::minmax(a, b)));
    if (it == best_.end())
        throw std::out_of_range("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") never observed");
    return it->second;
}

void apply_destroy(const OperatorId& op, const Instance& inst, Solution& sol, int d, Rng& rng,
                   const PairHistory& hist) {
    if (op.kind != OperatorKind::destroy)
        throw std::invalid_argument(std::string(op.name) + " is not a destroy operator");
    if (!sol.complete()) throw std::invalid_argument("destroy requires a complete solution");
    if (d < 1 || d > inst.n_customers())
        throw std::out_of_range("destroy size " + std::to_string(d) + " outside [1, " +
                                std::to_string(inst.n_customers()) + "]");
    solution_cost(inst, sol);
    switch (op.index) {
        case 0: destroy_random_node(inst, sol, d, rng); break;
        case 1: destroy_random_route(inst, sol, d, rng); break;
        case 2: destroy_worst_node(inst, sol, d); break;
        case 3: destroy_neighbourhood(inst, sol, d); break;
        case 4: destroy_greedy_route(inst, sol, d, rng); break;
        case 5: destroy_proximity(inst, sol, d, rng); break;
        case 6: destroy_cluster(inst, sol, d, rng); break;
        case 7: destroy_node_neighbourhood(inst, sol, d, rng); break;
        case 8: destroy_zone(inst, sol, d, rng); break;
        case 9: destroy_route_neighbourhood(inst, sol, d, rng); break;
        case 10: destroy_pair(inst, sol, d, rng); break;
        case 11: destroy_history_pair(inst, sol, d, hist); break;
        default: throw std::invalid_argument("unknown destroy operator index");
    }
}

void greedy_repair(const Instance& inst, Solution& sol) {
    solution_cost(inst, sol);
    std::vector<int> loads = current_loads(inst, sol);
    while (!sol.removal_list.empty()) {
        Placement best;
        int best_customer = -1;
        for (int c : sol.removal_list) {
            double second;
            int options;
            const Placement p = scan_placements(inst, sol, loads, c, second, options);
            if (!p.found) continue;
            if (best_customer < 0 || placement_less(p.delta, p.tour, p.pos, best)) {
                best = p;
                best_customer = c;
            }
        }
        if (best_customer < 0) throw std::runtime_error("no feasible insertion for any removed customer");
        insert_customer(inst, sol, best_customer, best.tour, best.pos);
        if (best.tour == loads.size())
            loads.push_back(inst.node(best_customer).demand);
        else
            loads[best.tour] += inst.node(best_customer).demand;
    }
}

void regret2_repair(const Instance& inst, Solution& sol) {
    solution_cost(inst, sol);
    std::vector<int> loads = current_loads(inst, sol);
    while (!sol.removal_list.empty()) {
        Placement chosen;
        int chosen_customer = -1;
        double chosen_regret = -std::numeric_limits<double>::infinity();
        for (int c : sol.removal_list) {
            double second;
            int options;
            const Placement p = scan_placements(inst, sol, loads, c, second, options);
            if (!p.found) continue;
            const double regret =
                options < 2 ? std::numeric_limits<double>::infinity() : second - p.delta;
            const bool better = chosen_customer < 0 || regret > chosen_regret ||
                                (regret == chosen_regret && p.delta < chosen.delta);
            if (better) {
                chosen = p;
                chosen_customer = c;
                chosen_regret = regret;
            }
        }
        if (chosen_customer < 0) throw std::runtime_error("no feasible insertion for any removed customer");
        insert_customer(inst, sol, chosen_customer, chosen.tour, chosen.pos);
        if (chosen.tour == loads.size())
            loads.push_back(inst.node(chosen_customer).demand);
        else
            loads[chosen.tour] += inst.node(chosen_customer).demand;
    }
}

void apply_repair(const OperatorId& op, const Instance& inst, Solution& sol, Rng& rng) {
    (void)rng;
    if (op.kind != OperatorKind::repair)
        throw std::invalid_argument(std::string(op.name) + " is not a repair operator");
    switch (op.index) {
        case 0: greedy_repair(inst, sol); break;
        case 1: regret2_repair(inst, sol); break;
        default: throw std::invalid_argument("unknown repair operator index");
    }
}

}  // namespace opsel
