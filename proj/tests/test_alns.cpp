#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "opsel/alns.hpp"
#include "opsel/dqn.hpp"
#include "opsel/rng.hpp"
#include "test_util.hpp"

using namespace opsel;

namespace {

Instance r101_20() { return truncate_instance(load_solomon_file(opsel_test::data_path("R101.txt")), 20); }

// Records every state the search hands to the selector, then picks the first
// valid operator so the run stays deterministic.
class ProbeSelector : public OperatorSelector {
public:
    struct Seen {
        Phase phase;
        int budget;
        int step_index;
        std::size_t removed;
        double initial_cost;
    };
    std::vector<Seen> seen;

    OperatorId select(const State& s, const std::vector<OperatorId>& valid, Rng&) override {
        seen.push_back({s.phase, s.budget_remaining, s.step_index, s.sol.removal_list.size(), s.initial_cost});
        return valid.front();
    }
    std::string name() const override { return "probe"; }
};

}  // namespace

TEST_CASE("start temperature accepts the reference deterioration half the time") {
    CHECK(initial_temperature(100.0, 0.05) == doctest::Approx(5.0 / std::log(2.0)));
    CHECK(initial_temperature(0.0, 0.05) == doctest::Approx(0.0));
    CHECK_THROWS_AS(initial_temperature(-1.0, 0.05), std::invalid_argument);

    // exp(-w0 * F / T0) = 1/2 by construction.
    const double t0 = initial_temperature(240.0, 0.05);
    CHECK(std::exp(-0.05 * 240.0 / t0) == doctest::Approx(0.5));
}

TEST_CASE("annealing acceptance follows the Boltzmann profile") {
    Rng rng = make_rng(2);
    CHECK(sa_accept(5.0, 10.0, 1.0, rng));
    CHECK(sa_accept(10.0, 10.0, 0.0, rng));  // ties pass
    CHECK(sa_accept(3.0, 10.0, 0.0, rng));   // improvements pass even when frozen
    CHECK_FALSE(sa_accept(10.1, 10.0, 0.0, rng));

    const int draws = 100000;
    int passed = 0;
    for (int i = 0; i < draws; ++i) passed += sa_accept(12.0, 10.0, 2.0, rng);
    CHECK(static_cast<double>(passed) / draws == doctest::Approx(std::exp(-1.0)).epsilon(0.03));

    passed = 0;
    for (int i = 0; i < draws; ++i) passed += sa_accept(14.0, 10.0, 2.0, rng);
    CHECK(static_cast<double>(passed) / draws == doctest::Approx(std::exp(-2.0)).epsilon(0.03));
}

TEST_CASE("search rejects broken configurations and starts") {
    const Instance inst = opsel_test::small_instance();
    const Portfolio pf = build_portfolio(12);
    RandomSelector sel;
    Rng rng = make_rng(3);
    Solution start = random_initial_solution(inst, rng);

    AlnsConfig cfg;
    cfg.iterations = 0;
    CHECK_THROWS_AS(run_alns(inst, start, pf, sel, cfg, rng), std::invalid_argument);
    cfg.iterations = 10;
    cfg.segment_length = 0;
    CHECK_THROWS_AS(run_alns(inst, start, pf, sel, cfg, rng), std::invalid_argument);
    cfg.segment_length = 5;
    cfg.budget_cycle = 0;
    CHECK_THROWS_AS(run_alns(inst, start, pf, sel, cfg, rng), std::invalid_argument);
    cfg.budget_cycle = 10;
    cfg.d = 2;

    Solution partial = start;
    partial.removal_list.push_back(partial.tours.front().back());
    partial.tours.front().pop_back();
    CHECK_THROWS_AS(run_alns(inst, partial, pf, sel, cfg, rng), std::invalid_argument);

    Solution overloaded;
    overloaded.tours = {{1, 2, 3, 4}};  // demands sum past the capacity
    CHECK_THROWS_AS(run_alns(inst, overloaded, pf, sel, cfg, rng), std::invalid_argument);
}

TEST_CASE("best cost tracks evaluated proposals even when everything is rejected") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(12);
    RandomSelector sel;
    Rng rng = make_rng(7);
    Solution start = random_initial_solution(inst, rng);
    const double start_cost = solution_cost(inst, start);

    std::vector<double> proposals;
    const AcceptRule reject_all = [&](double f_new, double, double, Rng&) {
        proposals.push_back(f_new);
        return false;
    };

    AlnsConfig cfg;
    cfg.iterations = 120;
    cfg.segment_length = 40;
    cfg.d = 3;
    AlnsResult res = run_alns(inst, start, pf, sel, cfg, rng, reject_all);

    REQUIRE(proposals.size() == 120);
    CHECK(res.accepted == 0);
    CHECK(res.rejected == 120);
    CHECK(res.start_cost == doctest::Approx(start_cost));
    CHECK(res.final_cost == doctest::Approx(start_cost));
    const double best_seen = std::min(start_cost, *std::min_element(proposals.begin(), proposals.end()));
    CHECK(res.best_cost == best_seen);
    for (double c : res.incumbent_costs) CHECK(c == doctest::Approx(start_cost));
}

TEST_CASE("a full annealing run keeps its books straight") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(12);
    Rng rng = make_rng(11);
    Solution start = random_initial_solution(inst, rng);

    AlnsConfig cfg;
    cfg.iterations = 600;
    cfg.segment_length = 100;
    cfg.d = 4;
    RandomSelector sel;
    AlnsResult res = run_alns(inst, start, pf, sel, cfg, rng);

    CHECK(res.incumbent_costs.size() == 600);
    CHECK(res.accepted + res.rejected == 600);
    CHECK(res.global_best + res.local_best + res.accepted_worse == res.accepted);
    CHECK(res.best_cost <= res.start_cost);
    CHECK(res.best_cost <= res.final_cost + 1e-9);
    CHECK(res.best_cost < res.start_cost);  // random search still improves a random start
    CHECK(res.final_cost == doctest::Approx(res.incumbent_costs.back()));

    const double t0 = initial_temperature(res.start_cost, cfg.w0);
    CHECK(res.final_temperature == doctest::Approx(t0 * std::pow(cfg.cooling, 600)));

    int usage = 0;
    for (const auto& [name, count] : res.operator_usage) {
        CHECK(count > 0);
        usage += count;
    }
    CHECK(usage == 1200);

    // Same seed, same story.
    Rng rng_a = make_rng(77);
    Rng rng_b = make_rng(77);
    RandomSelector sa, sb;
    AlnsResult a = run_alns(inst, start, pf, sa, cfg, rng_a);
    AlnsResult b = run_alns(inst, start, pf, sb, cfg, rng_b);
    CHECK(a.best_cost == b.best_cost);
    CHECK(a.final_cost == b.final_cost);
    CHECK(a.incumbent_costs == b.incumbent_costs);
    CHECK(a.operator_usage == b.operator_usage);
}

TEST_CASE("adaptive roulette updates once per segment inside the search") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(12);
    Rng rng = make_rng(13);
    Solution start = random_initial_solution(inst, rng);

    AlnsConfig cfg;
    cfg.iterations = 500;
    cfg.segment_length = 100;
    cfg.d = 4;
    RouletteSelector crw(pf, RouletteState(pf), cfg.scores, true);
    AlnsResult res = run_alns(inst, start, pf, crw, cfg, rng);
    CHECK(res.best_cost < res.start_cost);
    CHECK(crw.update_count() == 5);
    for (int a = 0; a < crw.state().action_count(); ++a) CHECK(crw.state().weight(a) > 0.0);
}

TEST_CASE("selectors see the search through episode-shaped states") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(12);
    Rng rng = make_rng(17);
    Solution start = random_initial_solution(inst, rng);
    const double start_cost = solution_cost(inst, start);

    AlnsConfig cfg;
    cfg.iterations = 25;
    cfg.segment_length = 100;
    cfg.d = 3;
    cfg.budget_cycle = 10;
    ProbeSelector probe;
    run_alns(inst, start, pf, probe, cfg, rng);

    REQUIRE(probe.seen.size() == 50);
    for (int it = 0; it < 25; ++it) {
        const auto& d = probe.seen[static_cast<std::size_t>(2 * it)];
        const auto& r = probe.seen[static_cast<std::size_t>(2 * it + 1)];
        CHECK(d.phase == Phase::destroy);
        CHECK(r.phase == Phase::repair);
        CHECK(d.budget == 10 - it % 10);
        CHECK(r.budget == d.budget);
        CHECK(d.step_index == 2 * (it % 10));
        CHECK(r.step_index == d.step_index + 1);
        CHECK(d.removed == 0);
        CHECK(r.removed == 3);
        CHECK(d.initial_cost == doctest::Approx(start_cost));
    }
}

TEST_CASE("a value network drives the search end to end") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(12);
    Rng init = make_rng(19);
    const NetworkConfig ncfg = make_network_config(Arch::mlp, inst, pf);
    QNetwork net(ncfg, init_params(ncfg, init));

    Rng rng = make_rng(23);
    Solution start = random_initial_solution(inst, rng);
    AlnsConfig cfg;
    cfg.iterations = 150;
    cfg.segment_length = 50;
    cfg.d = 4;

    DqnSelector soft(net, pf, 0.01, false);
    Rng run_a = make_rng(29);
    Rng run_b = make_rng(29);
    DqnSelector soft_b(net, pf, 0.01, false);
    AlnsResult a = run_alns(inst, start, pf, soft, cfg, run_a);
    AlnsResult b = run_alns(inst, start, pf, soft_b, cfg, run_b);
    CHECK(a.best_cost == b.best_cost);
    CHECK(a.best_cost <= a.start_cost);
    CHECK(a.accepted + a.rejected == 150);
}
