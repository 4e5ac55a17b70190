#include "opsel/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opsel {

int DqnConfig::replay_capacity() const {
    return std::max(1, static_cast<int>(std::llround(replay_share * total_steps)));
}

int DqnConfig::decay_steps() const {
    return std::max(1, static_cast<int>(std::llround(eps_decay_share * total_steps)));
}

double epsilon_at(int step, const DqnConfig& cfg) {
    if (step < 0) throw std::out_of_range("negative step");
    const int decay = cfg.decay_steps();
    if (step >= decay) return cfg.eps_end;
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * static_cast<double>(step) / decay;
}

int argmax_valid(const std::vector<double>& q, const std::vector<std::uint8_t>& valid) {
    if (q.size() != valid.size()) throw std::invalid_argument("mask size does not match value count");
    int best = -1;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!valid[i]) continue;
        if (best < 0 || q[i] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    if (best < 0) throw std::invalid_argument("no valid action");
    return best;
}

int epsilon_greedy(const std::vector<double>& q, const std::vector<std::uint8_t>& valid, double eps, Rng& rng) {
    if (uniform01(rng) < eps) {
        std::vector<int> pool;
        for (std::size_t i = 0; i < valid.size(); ++i)
            if (valid[i]) pool.push_back(static_cast<int>(i));
        if (pool.empty()) throw std::invalid_argument("no valid action");
        return pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))];
    }
    return argmax_valid(q, valid);
}

std::vector<double> softmax_policy(const std::vector<double>& q, const std::vector<std::uint8_t>& valid,
                                   double tau) {
    if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
    if (q.size() != valid.size()) throw std::invalid_argument("mask size does not match value count");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i)
        if (valid[i]) mx = std::max(mx, q[i] / tau);
    if (mx == -std::numeric_limits<double>::infinity()) throw std::invalid_argument("no valid action");
    std::vector<double> p(q.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!valid[i]) continue;
        p[i] = std::exp(q[i] / tau - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

int sample_softmax(const std::vector<double>& q, const std::vector<std::uint8_t>& valid, double tau, Rng& rng) {
    const auto p = softmax_policy(q, valid, tau);
    const double u = uniform01(rng);
    double acc = 0.0;
    int last_valid = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!valid[i]) continue;
        last_valid = static_cast<int>(i);
        acc += p[i];
        if (u < acc) return last_valid;
    }
    return last_valid;
}

double td_target(double reward, bool terminal, double gamma, const std::vector<double>& next_q,
                 const std::vector<std::uint8_t>& next_valid) {
    if (terminal) return reward;
    return reward + gamma * next_q[static_cast<std::size_t>(argmax_valid(next_q, next_valid))];
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be positive");
    store_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(ReplayTransition t) {
    if (size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[write_] = std::move(t);
    }
    write_ = (write_ + 1) % static_cast<std::size_t>(capacity_);
}

const ReplayTransition& ReplayBuffer::sample(Rng& rng) const {
    if (store_.empty()) throw std::logic_error("sampling from an empty replay buffer");
    return store_[static_cast<std::size_t>(uniform_int(rng, 0, size() - 1))];
}

CvrpTrainEnv::CvrpTrainEnv(const Environment& env, const std::vector<Solution>& starts)
    : env_(&env), starts_(&starts) {
    if (starts.empty()) throw std::invalid_argument("no start solutions");
}

int CvrpTrainEnv::action_count() const { return env_->portfolio().action_count(); }

EncodedObs CvrpTrainEnv::reset(Rng& rng) {
    const std::size_t pick =
        static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(starts_->size()) - 1));
    state_ = env_->reset((*starts_)[pick]);
    live_ = true;
    return encode_state(state_, env_->portfolio());
}

EnvStep CvrpTrainEnv::step(int action, Rng& rng) {
    if (!live_) throw std::logic_error("step before reset");
    StepOutcome out = env_->step(state_, env_->portfolio().action(action), rng);
    state_ = std::move(out.next);
    if (out.terminal) live_ = false;
    return {encode_state(state_, env_->portfolio()), out.reward, out.terminal};
}

Parameters train_q_network(TrainEnv& env, const NetworkConfig& netcfg, const DqnConfig& cfg, Rng& rng,
                           const Validator& validator, TrainLog* log) {
    if (netcfg.outputs != env.action_count())
        throw std::invalid_argument("network outputs do not match the environment's action count");
    if (cfg.replay_capacity() < cfg.batch_size)
        throw std::invalid_argument("replay capacity smaller than one batch, no update would ever run");
    QNetwork online(netcfg, init_params(netcfg, rng));
    QNetwork target(netcfg, online.params());
    Adam adam(online.params(), cfg.learning_rate);
    ReplayBuffer buffer(cfg.replay_capacity());

    Parameters best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool have_best = false;

    EncodedObs obs = env.reset(rng);
    std::vector<const EncodedObs*> fwd(static_cast<std::size_t>(cfg.batch_size));
    std::vector<const ReplayTransition*> batch(static_cast<std::size_t>(cfg.batch_size));

    for (int step = 0; step < cfg.total_steps; ++step) {
        const double eps = epsilon_at(step, cfg);
        const int action = epsilon_greedy(online.q_values(obs), obs.valid, eps, rng);
        EnvStep res = env.step(action, rng);
        buffer.push({obs, action, res.reward, res.obs, res.terminal});
        obs = res.terminal ? env.reset(rng) : std::move(res.obs);

        if (buffer.size() >= cfg.batch_size) {
            for (int i = 0; i < cfg.batch_size; ++i) {
                batch[static_cast<std::size_t>(i)] = &buffer.sample(rng);
                fwd[static_cast<std::size_t>(i)] = &batch[static_cast<std::size_t>(i)]->next;
            }
            BatchCache next_cache;
            const Matrix next_q = target.forward_batch(fwd, next_cache);
            std::vector<double> targets(static_cast<std::size_t>(cfg.batch_size));
            for (int i = 0; i < cfg.batch_size; ++i) {
                const ReplayTransition& t = *batch[static_cast<std::size_t>(i)];
                const std::vector<double> row(next_q.row(i), next_q.row(i) + next_q.cols());
                targets[static_cast<std::size_t>(i)] = td_target(t.reward, t.terminal, cfg.gamma, row, t.next.valid);
            }
            for (int i = 0; i < cfg.batch_size; ++i) fwd[static_cast<std::size_t>(i)] = &batch[static_cast<std::size_t>(i)]->obs;
            BatchCache cache;
            const Matrix q = online.forward_batch(fwd, cache);
            Matrix dq(q.rows(), q.cols());
            double loss = 0.0;
            for (int i = 0; i < cfg.batch_size; ++i) {
                const ReplayTransition& t = *batch[static_cast<std::size_t>(i)];
                const double err = q(i, t.action) - targets[static_cast<std::size_t>(i)];
                loss += err * err / cfg.batch_size;
                dq(i, t.action) = 2.0 * err / cfg.batch_size;
            }
            const Parameters grads = online.backward_batch(cache, dq);
            adam.step(online.params(), grads);
            if (log) {
                log->last_loss = loss;
                ++log->updates;
            }
        }

        if ((step + 1) % cfg.target_sync_period == 0) target.params() = online.params();

        if (validator && (step + 1) % cfg.validation_period == 0) {
            const double score = validator(online);
            if (log) log->validation.emplace_back(step + 1, score);
            if (score > best_score) {
                best_score = score;
                best = online.params();
                have_best = true;
                if (log) {
                    log->best_step = step + 1;
                    log->best_score = score;
                }
            }
        }
    }
    return have_best ? best : online.params();
}

DqnSelector::DqnSelector(const QNetwork& net, const Portfolio& portfolio, double tau, bool greedy)
    : net_(&net), portfolio_(&portfolio), tau_(tau), greedy_(greedy) {
    if (net.config().outputs != portfolio.action_count())
        throw std::invalid_argument("network outputs do not match the portfolio");
}

OperatorId DqnSelector::select(const State& s, const std::vector<OperatorId>& valid, Rng& rng) {
    if (valid.empty()) throw std::invalid_argument("no valid operator to select from");
    const EncodedObs obs = encode_state(s, *portfolio_);
    const std::vector<double> q = net_->q_values(obs);
    const int a = greedy_ ? argmax_valid(q, obs.valid) : sample_softmax(q, obs.valid, tau_, rng);
    return portfolio_->action(a);
}

double mean_episode_reward(const Environment& env, const std::vector<Solution>& starts,
                           OperatorSelector& selector, Rng& rng) {
    if (starts.empty()) throw std::invalid_argument("no start solutions");
    const Policy policy = [&](const State& s, const std::vector<OperatorId>& valid, Rng& r) {
        return selector.select(s, valid, r);
    };
    double total = 0.0;
    for (const Solution& start : starts) total += run_episode(env, start, policy, rng).total_reward;
    return total / static_cast<double>(starts.size());
}

Validator make_greedy_validator(const Environment& env, const std::vector<Solution>& validate,
                                std::uint64_t seed) {
    const Environment* envp = &env;
    const std::vector<Solution>* set = &validate;
    return [envp, set, seed](const QNetwork& net) {
        DqnSelector sel(net, envp->portfolio(), 1.0, true);
        Rng rng = make_rng(seed, {stream_tag("validation")});
        return mean_episode_reward(*envp, *set, sel, rng);
    };
}

NetworkConfig make_network_config(Arch arch, const Instance& inst, const Portfolio& portfolio) {
    NetworkConfig cfg;
    cfg.arch = arch;
    cfg.outputs = portfolio.action_count();
    cfg.node_count = arch == Arch::mlp ? inst.n_nodes() : 0;
    return cfg;
}

}  // namespace opsel
