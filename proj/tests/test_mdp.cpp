#include "doctest.h"
#include "opsel/mdp.hpp"
#include "opsel/selectors.hpp"
#include "test_util.hpp"

using namespace opsel;
using opsel_test::data_path;

namespace {

Instance r101_20() { return truncate_instance(load_solomon_file(data_path("R101.txt")), 20); }

OperatorId random_policy(const State&, const std::vector<OperatorId>& valid, Rng& rng) {
    return valid[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(valid.size()) - 1))];
}

}  // namespace

TEST_CASE("environment constructor validates the episode shape") {
    const Instance inst = r101_20();
    CHECK_THROWS_AS(Environment(inst, build_portfolio(3), EpisodeConfig{0, 10}), std::out_of_range);
    CHECK_THROWS_AS(Environment(inst, build_portfolio(3), EpisodeConfig{21, 10}), std::out_of_range);
    CHECK_THROWS_AS(Environment(inst, build_portfolio(3), EpisodeConfig{4, 0}), std::out_of_range);
    CHECK_THROWS_AS(Environment(inst, Portfolio{}, EpisodeConfig{4, 10}), std::invalid_argument);
    const Environment ok(inst, build_portfolio(3), EpisodeConfig{4, 10});
    CHECK(ok.config().d == 4);
}

TEST_CASE("reset demands a complete feasible start") {
    const Instance inst = r101_20();
    const Environment env(inst, build_portfolio(4), EpisodeConfig{4, 10});
    Rng rng = make_rng(5);
    Solution start = random_initial_solution(inst, rng);

    const State s0 = env.reset(start);
    CHECK(s0.phase == Phase::destroy);
    CHECK(s0.budget_remaining == 10);
    CHECK(s0.step_index == 0);
    CHECK(s0.initial_cost == doctest::Approx(objective(inst, start)));
    CHECK(!s0.terminal());
    CHECK(s0.hist.size() == 0);

    Solution incomplete = start;
    remove_customer(inst, incomplete, routed_customers(incomplete).front());
    CHECK_THROWS_AS(env.reset(incomplete), std::invalid_argument);

    Solution broken = start;
    broken.tours[0].push_back(broken.tours[0].front());
    CHECK_THROWS_AS(env.reset(broken), std::invalid_argument);
}

TEST_CASE("valid actions follow the phase") {
    const Instance inst = r101_20();
    const Portfolio pf = build_portfolio(5);
    const Environment env(inst, pf, EpisodeConfig{3, 2});
    Rng rng = make_rng(8);
    State s = env.reset(random_initial_solution(inst, rng));

    const auto& destroys = env.valid_actions(s);
    REQUIRE(destroys.size() == 5);
    for (const OperatorId& op : destroys) CHECK(op.kind == OperatorKind::destroy);

    CHECK_THROWS_AS(env.step(s, pf.repairs[0], rng), std::invalid_argument);
    StepOutcome out = env.step(s, destroys[0], rng);
    CHECK(out.reward == 0.0);
    CHECK(!out.terminal);
    CHECK(out.next.phase == Phase::repair);
    CHECK(out.next.budget_remaining == 2);
    CHECK(static_cast<int>(out.next.sol.removal_list.size()) == 3);

    const auto& repairs = env.valid_actions(out.next);
    REQUIRE(repairs.size() == 2);
    for (const OperatorId& op : repairs) CHECK(op.kind == OperatorKind::repair);
    CHECK_THROWS_AS(env.step(out.next, destroys[0], rng), std::invalid_argument);

    StepOutcome after = env.step(out.next, repairs[0], rng);
    CHECK(after.next.budget_remaining == 1);
    CHECK(after.next.phase == Phase::destroy);
    CHECK(after.next.sol.complete());
    CHECK(after.reward == 0.0);
    CHECK(after.next.hist.size() > 0);
}

TEST_CASE("episodes run exactly 2b steps and pay the terminal reward") {
    const Instance inst = r101_20();
    const Environment env(inst, build_portfolio(12), EpisodeConfig{4, 10});
    Rng rng = make_rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        Solution start = random_initial_solution(inst, rng);
        const double c0 = objective(inst, start);
        const EpisodeResult res = run_episode(env, start, random_policy, rng, true);
        REQUIRE(res.log.size() == 20);
        for (std::size_t i = 0; i < res.log.size(); ++i) {
            const Transition& tr = res.log[i];
            CHECK(tr.s.phase == (i % 2 == 0 ? Phase::destroy : Phase::repair));
            CHECK(tr.a.kind == (i % 2 == 0 ? OperatorKind::destroy : OperatorKind::repair));
            CHECK(tr.s.step_index == static_cast<int>(i));
            if (i + 1 < res.log.size()) CHECK(tr.reward == 0.0);
        }
        CHECK(res.log.back().next.terminal());
        CHECK(res.final_solution.complete());
        CHECK(validate_solution(inst, res.final_solution).empty());
        Solution fin = res.final_solution;
        CHECK(res.total_reward ==
              doctest::Approx(c0 - solution_cost(inst, fin)).epsilon(1e-9));
        CHECK(res.log.back().reward == doctest::Approx(res.total_reward));
    }
}

TEST_CASE("terminal states offer no actions") {
    const Instance inst = r101_20();
    const Environment env(inst, build_portfolio(2), EpisodeConfig{2, 1});
    Rng rng = make_rng(4);
    State s = env.reset(random_initial_solution(inst, rng));
    s = env.step(s, env.valid_actions(s)[0], rng).next;
    const StepOutcome last = env.step(s, env.valid_actions(s)[0], rng);
    CHECK(last.terminal);
    CHECK(last.next.terminal());
    CHECK(env.valid_actions(last.next).empty());
    CHECK_THROWS_AS(env.step(last.next, build_portfolio(2).destroys[0], rng), std::logic_error);
}

TEST_CASE("history inside an episode feeds the history-pair operator") {
    const Instance inst = r101_20();
    Portfolio pf;
    pf.destroys = {find_operator("history-pair")};
    pf.repairs = {find_operator("greedy-insert")};
    const Environment env(inst, pf, EpisodeConfig{3, 4});
    Rng rng = make_rng(33);
    const EpisodeResult res = run_episode(env, random_initial_solution(inst, rng), random_policy, rng, true);
    CHECK(res.log.size() == 8);
    CHECK(res.final_solution.complete());
}
