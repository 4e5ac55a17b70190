#ifndef OPSEL_DQN_HPP
#define OPSEL_DQN_HPP

#include <functional>
#include <utility>

#include "opsel/adam.hpp"
#include "opsel/network.hpp"
#include "opsel/selectors.hpp"

namespace opsel {

struct DqnConfig {
    int total_steps = 15000;
    double eps_start = 1.0;
    double eps_end = 0.1;
    double eps_decay_share = 0.1;  // anneal over the first tenth of training
    double replay_share = 0.2;     // buffer capacity as a share of total steps
    int batch_size = 64;
    int target_sync_period = 100;
    double gamma = 1.0;
    double tau = 0.01;  // softmax temperature used when the policy is deployed
    int validation_period = 1000;
    double learning_rate = 5e-4;

    int replay_capacity() const;
    int decay_steps() const;
};

double epsilon_at(int step, const DqnConfig& cfg);

int argmax_valid(const std::vector<double>& q, const std::vector<std::uint8_t>& valid);
int epsilon_greedy(const std::vector<double>& q, const std::vector<std::uint8_t>& valid, double eps, Rng& rng);

// Boltzmann distribution over the valid actions (invalid entries get 0),
// computed with the usual max-shift so extreme temperatures stay finite.
std::vector<double> softmax_policy(const std::vector<double>& q, const std::vector<std::uint8_t>& valid,
                                   double tau);
int sample_softmax(const std::vector<double>& q, const std::vector<std::uint8_t>& valid, double tau, Rng& rng);

// One-step bootstrap target; terminal transitions take the reward alone.
double td_target(double reward, bool terminal, double gamma, const std::vector<double>& next_q,
                 const std::vector<std::uint8_t>& next_valid);

struct ReplayTransition {
    EncodedObs obs;
    int action = 0;
    double reward = 0.0;
    EncodedObs next;
    bool terminal = false;
};

// Fixed-capacity ring with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);
    void push(ReplayTransition t);
    int size() const { return static_cast<int>(store_.size()); }
    int capacity() const { return capacity_; }
    const ReplayTransition& sample(Rng& rng) const;
    const ReplayTransition& at(int i) const { return store_.at(static_cast<std::size_t>(i)); }

private:
    int capacity_;
    std::size_t write_ = 0;
    std::vector<ReplayTransition> store_;
};

struct EnvStep {
    EncodedObs obs;
    double reward = 0.0;
    bool terminal = false;
};

// Minimal environment surface the trainer needs; lets the same loop learn on
// the routing process and on tiny synthetic processes alike.
class TrainEnv {
public:
    virtual ~TrainEnv() = default;
    virtual int action_count() const = 0;
    virtual EncodedObs reset(Rng& rng) = 0;
    virtual EnvStep step(int action, Rng& rng) = 0;
};

class CvrpTrainEnv : public TrainEnv {
public:
    CvrpTrainEnv(const Environment& env, const std::vector<Solution>& starts);
    int action_count() const override;
    EncodedObs reset(Rng& rng) override;
    EnvStep step(int action, Rng& rng) override;

private:
    const Environment* env_;
    const std::vector<Solution>* starts_;
    State state_;
    bool live_ = false;
};

struct TrainLog {
    std::vector<std::pair<int, double>> validation;  // step, score
    int best_step = -1;
    double best_score = 0.0;
    double last_loss = 0.0;
    int updates = 0;
};

using Validator = std::function<double(const QNetwork&)>;

/**
 * Standard DQN: epsilon-greedy rollouts, uniform replay, one gradient step
 * per environment step once the buffer can fill a batch, periodic hard target
 * sync, optional periodic validation that checkpoints the best-scoring
 * parameters (returned instead of the final ones when present).
 */
Parameters train_q_network(TrainEnv& env, const NetworkConfig& netcfg, const DqnConfig& cfg, Rng& rng,
                           const Validator& validator = nullptr, TrainLog* log = nullptr);

// Softmax (or greedy) policy over the network's action values.
class DqnSelector : public OperatorSelector {
public:
    DqnSelector(const QNetwork& net, const Portfolio& portfolio, double tau, bool greedy = false);
    OperatorId select(const State& s, const std::vector<OperatorId>& valid, Rng& rng) override;
    std::string name() const override { return "dqn"; }

private:
    const QNetwork* net_;
    const Portfolio* portfolio_;
    double tau_;
    bool greedy_;
};

// Mean episode reward of a selector over a whole solution set.
double mean_episode_reward(const Environment& env, const std::vector<Solution>& starts,
                           OperatorSelector& selector, Rng& rng);

// Deterministic-policy validation score used during training: greedy action
// choice, fresh rng stream per call so scores are comparable across steps.
Validator make_greedy_validator(const Environment& env, const std::vector<Solution>& validate,
                                std::uint64_t seed);

NetworkConfig make_network_config(Arch arch, const Instance& inst, const Portfolio& portfolio);

}  // namespace opsel

#endif
