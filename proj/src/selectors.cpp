#include "opsel/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace opsel {

double ScoreRule::score(Outcome o) const {
    switch (o) {
        case Outcome::global_best: return global_best;
        case Outcome::local_best: return local_best;
        case Outcome::accepted_worse: return accepted_worse;
        case Outcome::rejected: return 0.0;
    }
    throw std::logic_error("unknown outcome");
}

RouletteState::RouletteState(const Portfolio& portfolio, double alpha, double initial_weight)
    : weights_(static_cast<std::size_t>(portfolio.action_count()), initial_weight),
      scores_(static_cast<std::size_t>(portfolio.action_count()), 0.0),
      uses_(static_cast<std::size_t>(portfolio.action_count()), 0),
      alpha_(alpha) {
    if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("reaction factor must be in (0, 1]");
    if (initial_weight <= 0.0) throw std::invalid_argument("initial weight must be positive");
}

void RouletteState::add_score(int action, double score, int uses) {
    scores_.at(static_cast<std::size_t>(action)) += score;
    uses_.at(static_cast<std::size_t>(action)) += uses;
}

void RouletteState::update() {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (scores_[i] > 0.0) {
            if (uses_[i] <= 0) throw std::logic_error("positive score with zero recorded uses");
            weights_[i] = (1.0 - alpha_) * weights_[i] + alpha_ * scores_[i] / uses_[i];
        }
        scores_[i] = 0.0;
        uses_[i] = 0;
    }
}

OperatorId ran_select(const std::vector<OperatorId>& valid, Rng& rng) {
    if (valid.empty()) throw std::invalid_argument("no valid operator to select from");
    return valid[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(valid.size()) - 1))];
}

OperatorId rw_select(const RouletteState& rs, const Portfolio& portfolio,
                     const std::vector<OperatorId>& valid, Rng& rng) {
    if (valid.empty()) throw std::invalid_argument("no valid operator to select from");
    double total = 0.0;
    for (const auto& op : valid) {
        const double w = rs.weight(portfolio.action_index(op));
        if (!(w > 0.0)) throw std::runtime_error(std::string("non-positive weight for operator ") + op.name);
        total += w;
    }
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    for (const auto& op : valid) {
        acc += rs.weight(portfolio.action_index(op));
        if (u < acc) return op;
    }
    return valid.back();  // u == total after rounding
}

void OperatorSelector::observe(const OperatorId&, const OperatorId&, Outcome) {}
void OperatorSelector::end_segment() {}

OperatorId RandomSelector::select(const State&, const std::vector<OperatorId>& valid, Rng& rng) {
    return ran_select(valid, rng);
}

RouletteSelector::RouletteSelector(Portfolio portfolio, RouletteState state, ScoreRule rule, bool adaptive)
    : portfolio_(std::move(portfolio)), state_(std::move(state)), rule_(rule), adaptive_(adaptive) {
    if (state_.action_count() != portfolio_.action_count())
        throw std::invalid_argument("weight vector does not match portfolio size");
}

OperatorId RouletteSelector::select(const State&, const std::vector<OperatorId>& valid, Rng& rng) {
    return rw_select(state_, portfolio_, valid, rng);
}

void RouletteSelector::observe(const OperatorId& destroy_op, const OperatorId& repair_op, Outcome outcome) {
    if (!adaptive_) return;
    const double s = rule_.score(outcome);
    state_.add_score(portfolio_.action_index(destroy_op), s, 1);
    state_.add_score(portfolio_.action_index(repair_op), s, 1);
}

void RouletteSelector::end_segment() {
    if (!adaptive_) return;
    state_.update();
    ++updates_;
}

RouletteState train_roulette(const Environment& env, const std::vector<Solution>& starts, int episodes,
                             double alpha, Rng& rng) {
    if (starts.empty()) throw std::invalid_argument("no start solutions");
    const Portfolio& pf = env.portfolio();
    RouletteState rs(pf, alpha);
    std::vector<int> used(static_cast<std::size_t>(pf.action_count()));
    for (int e = 0; e < episodes; ++e) {
        std::fill(used.begin(), used.end(), 0);
        const Policy policy = [&](const State&, const std::vector<OperatorId>& valid, Rng& r) {
            const OperatorId op = rw_select(rs, pf, valid, r);
            ++used[static_cast<std::size_t>(pf.action_index(op))];
            return op;
        };
        const std::size_t pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(starts.size()) - 1));
        const EpisodeResult res = run_episode(env, starts[pick], policy, rng);
        const double credit = std::max(res.total_reward, 0.0);
        for (int a = 0; a < pf.action_count(); ++a) {
            const int n = used[static_cast<std::size_t>(a)];
            if (n > 0) rs.add_score(a, credit * n, n);
        }
        rs.update();
    }
    return rs;
}

void save_roulette_weights(const std::string& path, const Portfolio& portfolio, const RouletteState& rs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write weight file: " + path);
    out << "roulette-weights v1\n";
    for (int a = 0; a < portfolio.action_count(); ++a) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s %.17g\n", portfolio.action(a).name, rs.weight(a));
        out << buf;
    }
    if (!out) throw std::runtime_error("failed writing weight file: " + path);
}

RouletteState load_roulette_weights(const std::string& path, const Portfolio& portfolio, double alpha) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weight file: " + path);
    std::string header;
    if (!std::getline(in, header) || header != "roulette-weights v1")
        throw std::runtime_error("bad weight file header in " + path);
    RouletteState rs(portfolio, alpha);
    std::string name;
    double w = 0.0;
    int seen = 0;
    while (in >> name >> w) {
        rs.set_weight(portfolio.action_index(find_operator(name)), w);
        ++seen;
    }
    if (seen != portfolio.action_count())
        throw std::runtime_error("weight file lists " + std::to_string(seen) + " operators, expected " +
                                 std::to_string(portfolio.action_count()));
    return rs;
}

}  // namespace opsel
