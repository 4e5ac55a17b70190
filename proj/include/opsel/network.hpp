#ifndef OPSEL_NETWORK_HPP
#define OPSEL_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "opsel/mdp.hpp"
#include "opsel/tensor.hpp"

namespace opsel {

enum class Arch { mlp, gat };

Arch arch_from_string(const std::string& s);
std::string arch_to_string(Arch a);

struct NetworkConfig {
    Arch arch = Arch::mlp;
    int node_features = 6;
    int node_count = 0;  // mlp: fixed node rows (depot included); gat accepts any
    int global_features = 4;
    std::vector<int> hidden = {256, 128, 64};
    int gat_layers = 3;
    int gat_embed = 32;
    int outputs = 0;
    double leaky_slope = 0.2;

    int mlp_input_width() const { return node_count * node_features + global_features; }
};

struct NamedArray {
    std::string name;
    Matrix value;
};

struct Parameters {
    std::vector<NamedArray> arrays;

    Matrix& at(const std::string& name);
    const Matrix& at(const std::string& name) const;
    std::size_t total_size() const;
};

Parameters zeros_like(const Parameters& p);

// Glorot-uniform weights, zero biases, drawn in array order.
Parameters init_params(const NetworkConfig& cfg, Rng& rng);

/**
 * Fixed-size view of a State for function approximation. One row per node in
 * id order: x/100, y/100, demand/capacity, depot distance/max distance,
 * routed flag, removed flag. Globals: destroy-phase bit, remaining budget
 * share, removed share, destroy-size share. valid masks the portfolio's
 * global action indices that are selectable in this state.
 */
struct EncodedObs {
    Matrix nodes;
    std::vector<double> globals;
    std::vector<std::uint8_t> valid;
};

EncodedObs encode_state(const State& s, const Portfolio& portfolio);

struct MlpCache {
    Matrix input;
    std::vector<Matrix> acts;
};

struct GatGraphCache {
    Matrix h0;
    std::vector<Matrix> z;      // per layer, N x F
    std::vector<std::vector<double>> src_score;
    std::vector<std::vector<double>> dst_score;
    std::vector<Matrix> att;    // row-softmax attention, N x N
    std::vector<Matrix> pre;    // aggregation before ELU
    std::vector<Matrix> hout;   // after ELU
    std::vector<double> head_in;
};

struct BatchCache {
    MlpCache mlp;
    std::vector<GatGraphCache> gat;
    std::vector<const EncodedObs*> batch;
};

/**
 * Q-value function over encoded states. Two function approximators share the
 * interface: a dense net over the flattened encoding (size-locked to one
 * instance size) and a graph attention net (single head, complete graph with
 * self loops) that works on any node count.
 */
class QNetwork {
public:
    QNetwork(NetworkConfig cfg, Parameters params);

    const NetworkConfig& config() const { return cfg_; }
    const Parameters& params() const { return params_; }
    Parameters& params() { return params_; }

    std::vector<double> q_values(const EncodedObs& obs) const;

    Matrix forward_batch(const std::vector<const EncodedObs*>& batch, BatchCache& cache) const;
    // dq: gradient of the loss w.r.t. the forward output, same shape.
    Parameters backward_batch(const BatchCache& cache, const Matrix& dq) const;

private:
    NetworkConfig cfg_;
    Parameters params_;
};

}  // namespace opsel

#endif
