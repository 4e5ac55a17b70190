#ifndef OPSEL_SELECTORS_HPP
#define OPSEL_SELECTORS_HPP

#include <memory>
#include <string>
#include <vector>

#include "opsel/mdp.hpp"

namespace opsel {

// What a proposed solution did to the search, best outcome first.
enum class Outcome { global_best, local_best, accepted_worse, rejected };

struct ScoreRule {
    double global_best = 33.0;
    double local_best = 13.0;
    double accepted_worse = 9.0;

    double score(Outcome o) const;
};

/**
 * Per-operator weights plus the per-segment score/usage accumulators of
 * classic adaptive weighting. Indexed by the portfolio's global action index.
 */
class RouletteState {
public:
    RouletteState() = default;
    explicit RouletteState(const Portfolio& portfolio, double alpha = 0.1, double initial_weight = 1.0);

    double weight(int action) const { return weights_.at(static_cast<std::size_t>(action)); }
    void set_weight(int action, double w) { weights_.at(static_cast<std::size_t>(action)) = w; }
    int action_count() const { return static_cast<int>(weights_.size()); }
    double alpha() const { return alpha_; }

    void add_score(int action, double score, int uses);

    // w <- (1 - alpha) * w + alpha * score / uses for every operator that
    // collected positive score; others keep their weight. Accumulators reset.
    void update();

private:
    std::vector<double> weights_;
    std::vector<double> scores_;
    std::vector<int> uses_;
    double alpha_ = 0.1;
};

OperatorId ran_select(const std::vector<OperatorId>& valid, Rng& rng);

// Weight-proportional draw among the valid subset. Weights must be positive.
OperatorId rw_select(const RouletteState& rs, const Portfolio& portfolio,
                     const std::vector<OperatorId>& valid, Rng& rng);

/**
 * Uniform policy, weight-frozen roulette policy and the segment-adaptive
 * roulette policy behind one interface so the embedding search loop does not
 * care which selection brain it runs.
 */
class OperatorSelector {
public:
    virtual ~OperatorSelector() = default;
    virtual OperatorId select(const State& s, const std::vector<OperatorId>& valid, Rng& rng) = 0;
    // Feedback after a full destroy+repair proposal; default ignores it.
    virtual void observe(const OperatorId& destroy_op, const OperatorId& repair_op, Outcome outcome);
    virtual void end_segment();
    virtual std::string name() const = 0;
};

class RandomSelector : public OperatorSelector {
public:
    OperatorId select(const State& s, const std::vector<OperatorId>& valid, Rng& rng) override;
    std::string name() const override { return "ran"; }
};

class RouletteSelector : public OperatorSelector {
public:
    // adaptive = true gives the classic segment-updated scheme; false freezes
    // the provided weights (used for offline-trained roulette policies).
    RouletteSelector(Portfolio portfolio, RouletteState state, ScoreRule rule, bool adaptive);

    OperatorId select(const State& s, const std::vector<OperatorId>& valid, Rng& rng) override;
    void observe(const OperatorId& destroy_op, const OperatorId& repair_op, Outcome outcome) override;
    void end_segment() override;
    std::string name() const override { return adaptive_ ? "crw" : "lrw"; }

    const RouletteState& state() const { return state_; }
    int update_count() const { return updates_; }

private:
    Portfolio portfolio_;
    RouletteState state_;
    ScoreRule rule_;
    bool adaptive_;
    int updates_ = 0;
};

/**
 * Offline roulette training: run whole episodes with the weight-proportional
 * policy, credit every operator used in an episode with the episode's
 * positive terminal reward, and apply the weight update after each episode.
 */
RouletteState train_roulette(const Environment& env, const std::vector<Solution>& starts, int episodes,
                             double alpha, Rng& rng);

void save_roulette_weights(const std::string& path, const Portfolio& portfolio, const RouletteState& rs);
RouletteState load_roulette_weights(const std::string& path, const Portfolio& portfolio, double alpha = 0.1);

}  // namespace opsel

#endif
