#include "opsel/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opsel {

Arch arch_from_string(const std::string& s) {
    if (s == "mlp") return Arch::mlp;
    if (s == "gat") return Arch::gat;
    throw std::invalid_argument("unknown architecture: " + s);
}

std::string arch_to_string(Arch a) { return a == Arch::mlp ? "mlp" : "gat"; }

Matrix& Parameters::at(const std::string& name) {
    for (auto& a : arrays)
        if (a.name == name) return a.value;
    throw std::out_of_range("no parameter array named " + name);
}

const Matrix& Parameters::at(const std::string& name) const {
    for (const auto& a : arrays)
        if (a.name == name) return a.value;
    throw std::out_of_range("no parameter array named " + name);
}

std::size_t Parameters::total_size() const {
    std::size_t n = 0;
    for (const auto& a : arrays) n += a.value.size();
    return n;
}

Parameters zeros_like(const Parameters& p) {
    Parameters out;
    out.arrays.reserve(p.arrays.size());
    for (const auto& a : p.arrays) out.arrays.push_back({a.name, Matrix(a.value.rows(), a.value.cols())});
    return out;
}

namespace {

Matrix glorot(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
}

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }
double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

void add_bias_rows(Matrix& m, const Matrix& bias) {
    for (int r = 0; r < m.rows(); ++r) {
        double* row = m.row(r);
        const double* b = bias.row(0);
        for (int c = 0; c < m.cols(); ++c) row[c] += b[c];
    }
}

}  // namespace

Parameters init_params(const NetworkConfig& cfg, Rng& rng) {
    if (cfg.outputs < 1) throw std::invalid_argument("network needs at least one output");
    Parameters p;
    if (cfg.arch == Arch::mlp) {
        if (cfg.node_count < 1) throw std::invalid_argument("dense network needs a fixed node count");
        if (cfg.hidden.empty()) throw std::invalid_argument("dense network needs hidden layers");
        int in = cfg.mlp_input_width();
        for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
            const int out = cfg.hidden[l];
            p.arrays.push_back({"mlp.w" + std::to_string(l), glorot(in, out, rng)});
            p.arrays.push_back({"mlp.b" + std::to_string(l), Matrix(1, out)});
            in = out;
        }
        p.arrays.push_back({"mlp.head.w", glorot(in, cfg.outputs, rng)});
        p.arrays.push_back({"mlp.head.b", Matrix(1, cfg.outputs)});
    } else {
        if (cfg.gat_layers < 1) throw std::invalid_argument("graph network needs at least one layer");
        int in = cfg.node_features;
        for (int l = 0; l < cfg.gat_layers; ++l) {
            const std::string tag = "gat.l" + std::to_string(l);
            p.arrays.push_back({tag + ".w", glorot(in, cfg.gat_embed, rng)});
            p.arrays.push_back({tag + ".asrc", glorot(cfg.gat_embed, 1, rng)});
            p.arrays.push_back({tag + ".adst", glorot(cfg.gat_embed, 1, rng)});
            in = cfg.gat_embed;
        }
        p.arrays.push_back({"gat.head.w", glorot(cfg.gat_embed + cfg.global_features, cfg.outputs, rng)});
        p.arrays.push_back({"gat.head.b", Matrix(1, cfg.outputs)});
    }
    return p;
}

EncodedObs encode_state(const State& s, const Portfolio& portfolio) {
    const Instance& inst = *s.inst;
    const int nn = inst.n_nodes();
    EncodedObs obs;
    obs.nodes = Matrix(nn, 6);
    const double md = inst.max_dist();
    const double cap = static_cast<double>(inst.capacity());
    for (int id = 0; id < nn; ++id) {
        const NodeRecord& nd = inst.node(id);
        const bool removed =
            id > 0 && std::binary_search(s.sol.removal_list.begin(), s.sol.removal_list.end(), id);
        double* row = obs.nodes.row(id);
        row[0] = nd.x / 100.0;
        row[1] = nd.y / 100.0;
        row[2] = nd.demand / cap;
        row[3] = md > 0.0 ? inst.dist_depot(id) / md : 0.0;
        row[4] = removed ? 0.0 : 1.0;
        row[5] = removed ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(inst.n_customers());
    obs.globals = {s.phase == Phase::destroy ? 1.0 : 0.0,
                   static_cast<double>(s.budget_remaining) / static_cast<double>(s.cfg.b),
                   static_cast<double>(s.sol.tours.size()) / n,
                   static_cast<double>(s.cfg.d) / n};
    obs.valid.assign(static_cast<std::size_t>(portfolio.action_count()), 0);
    if (!s.terminal()) {
        const auto& ops = s.phase == Phase::destroy ? portfolio.destroys : portfolio.repairs;
        for (const auto& op : ops) obs.valid[static_cast<std::size_t>(portfolio.action_index(op))] = 1;
    }
    return obs;
}

QNetwork::QNetwork(NetworkConfig cfg, Parameters params) : cfg_(std::move(cfg)), params_(std::move(params)) {}

namespace {

void mlp_forward(const NetworkConfig& cfg, const Parameters& params,
                 const std::vector<const EncodedObs*>& batch, MlpCache& cache, Matrix& q) {
    const int bsz = static_cast<int>(batch.size());
    const int in = cfg.mlp_input_width();
    cache.input = Matrix(bsz, in);
    for (int i = 0; i < bsz; ++i) {
        const EncodedObs& o = *batch[static_cast<std::size_t>(i)];
        if (o.nodes.rows() != cfg.node_count || o.nodes.cols() != cfg.node_features)
            throw std::invalid_argument("encoding shape " + std::to_string(o.nodes.rows()) +
                                        " nodes does not match the dense network's fixed input of " +
                                        std::to_string(cfg.node_count));
        if (static_cast<int>(o.globals.size()) != cfg.global_features)
            throw std::invalid_argument("global feature count mismatch");
        double* row = cache.input.row(i);
        std::copy(o.nodes.data(), o.nodes.data() + o.nodes.size(), row);
        std::copy(o.globals.begin(), o.globals.end(), row + o.nodes.size());
    }
    cache.acts.clear();
    const Matrix* h = &cache.input;
    for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
        Matrix a;
        matmul(*h, params.at("mlp.w" + std::to_string(l)), a);
        add_bias_rows(a, params.at("mlp.b" + std::to_string(l)));
        for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] = std::max(a.data()[k], 0.0);
        cache.acts.push_back(std::move(a));
        h = &cache.acts.back();
    }
    matmul(*h, params.at("mlp.head.w"), q);
    add_bias_rows(q, params.at("mlp.head.b"));
}

void mlp_backward(const NetworkConfig& cfg, const Parameters& params, const MlpCache& cache,
                  const Matrix& dq, Parameters& grads) {
    const Matrix& last = cache.acts.back();
    matmul_tn(last, dq, grads.at("mlp.head.w"), true);
    {
        Matrix& db = grads.at("mlp.head.b");
        for (int r = 0; r < dq.rows(); ++r)
            for (int c = 0; c < dq.cols(); ++c) db(0, c) += dq(r, c);
    }
    Matrix dh;
    matmul_nt(dq, params.at("mlp.head.w"), dh);
    for (int l = static_cast<int>(cfg.hidden.size()) - 1; l >= 0; --l) {
        const Matrix& act = cache.acts[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < dh.size(); ++k)
            if (act.data()[k] <= 0.0) dh.data()[k] = 0.0;
        const Matrix& prev = l == 0 ? cache.input : cache.acts[static_cast<std::size_t>(l - 1)];
        matmul_tn(prev, dh, grads.at("mlp.w" + std::to_string(l)), true);
        Matrix& db = grads.at("mlp.b" + std::to_string(l));
        for (int r = 0; r < dh.rows(); ++r)
            for (int c = 0; c < dh.cols(); ++c) db(0, c) += dh(r, c);
        if (l > 0) {
            Matrix next_dh;
            matmul_nt(dh, params.at("mlp.w" + std::to_string(l)), next_dh);
            dh = std::move(next_dh);
        }
    }
}

void gat_forward(const NetworkConfig& cfg, const Parameters& params, const EncodedObs& obs,
                 GatGraphCache& cache, double* q_row) {
    if (obs.nodes.cols() != cfg.node_features)
        throw std::invalid_argument("node feature count mismatch");
    if (static_cast<int>(obs.globals.size()) != cfg.global_features)
        throw std::invalid_argument("global feature count mismatch");
    const int n = obs.nodes.rows();
    cache.h0 = obs.nodes;
    cache.z.assign(static_cast<std::size_t>(cfg.gat_layers), Matrix());
    cache.src_score.assign(static_cast<std::size_t>(cfg.gat_layers), {});
    cache.dst_score.assign(static_cast<std::size_t>(cfg.gat_layers), {});
    cache.att.assign(static_cast<std::size_t>(cfg.gat_layers), Matrix());
    cache.pre.assign(static_cast<std::size_t>(cfg.gat_layers), Matrix());
    cache.hout.assign(static_cast<std::size_t>(cfg.gat_layers), Matrix());

    const Matrix* h = &cache.h0;
    for (int l = 0; l < cfg.gat_layers; ++l) {
        const std::string tag = "gat.l" + std::to_string(l);
        const std::size_t li = static_cast<std::size_t>(l);
        Matrix& z = cache.z[li];
        matmul(*h, params.at(tag + ".w"), z);
        const Matrix& asrc = params.at(tag + ".asrc");
        const Matrix& adst = params.at(tag + ".adst");
        auto& s = cache.src_score[li];
        auto& t = cache.dst_score[li];
        s.assign(static_cast<std::size_t>(n), 0.0);
        t.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* zi = z.row(i);
            double ss = 0.0, tt = 0.0;
            for (int k = 0; k < z.cols(); ++k) {
                ss += zi[k] * asrc(k, 0);
                tt += zi[k] * adst(k, 0);
            }
            s[static_cast<std::size_t>(i)] = ss;
            t[static_cast<std::size_t>(i)] = tt;
        }
        // Attention over the complete graph with self loops: every node
        // attends to every node, rows softmax-normalized.
        Matrix& att = cache.att[li];
        att = Matrix(n, n);
        for (int i = 0; i < n; ++i) {
            double* ai = att.row(i);
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                ai[j] = leaky(s[static_cast<std::size_t>(i)] + t[static_cast<std::size_t>(j)], cfg.leaky_slope);
                mx = std::max(mx, ai[j]);
            }
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                ai[j] = std::exp(ai[j] - mx);
                sum += ai[j];
            }
            for (int j = 0; j < n; ++j) ai[j] /= sum;
        }
        Matrix& pre = cache.pre[li];
        matmul(att, z, pre);
        Matrix& hout = cache.hout[li];
        hout = pre;
        for (std::size_t k = 0; k < hout.size(); ++k) hout.data()[k] = elu(hout.data()[k]);
        h = &hout;
    }

    const Matrix& hl = cache.hout.back();
    cache.head_in.assign(static_cast<std::size_t>(cfg.gat_embed + cfg.global_features), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = hl.row(i);
        for (int k = 0; k < cfg.gat_embed; ++k) cache.head_in[static_cast<std::size_t>(k)] += row[k];
    }
    for (int k = 0; k < cfg.gat_embed; ++k) cache.head_in[static_cast<std::size_t>(k)] /= n;
    for (int k = 0; k < cfg.global_features; ++k)
        cache.head_in[static_cast<std::size_t>(cfg.gat_embed + k)] = obs.globals[static_cast<std::size_t>(k)];

    const Matrix& hw = params.at("gat.head.w");
    const Matrix& hb = params.at("gat.head.b");
    for (int c = 0; c < cfg.outputs; ++c) {
        double acc = hb(0, c);
        for (int k = 0; k < hw.rows(); ++k) acc += cache.head_in[static_cast<std::size_t>(k)] * hw(k, c);
        q_row[c] = acc;
    }
}

void gat_backward(const NetworkConfig& cfg, const Parameters& params, const GatGraphCache& cache,
                  const double* dq_row, Parameters& grads) {
    const int n = cache.h0.rows();
    const int fe = cfg.gat_embed;
    const Matrix& hw = params.at("gat.head.w");

    {
        Matrix& gw = grads.at("gat.head.w");
        Matrix& gb = grads.at("gat.head.b");
        for (int c = 0; c < cfg.outputs; ++c) {
            gb(0, c) += dq_row[c];
            for (int k = 0; k < hw.rows(); ++k)
                gw(k, c) += cache.head_in[static_cast<std::size_t>(k)] * dq_row[c];
        }
    }

    // Mean pooling spreads the head gradient evenly over node embeddings.
    std::vector<double> dpool(static_cast<std::size_t>(fe), 0.0);
    for (int k = 0; k < fe; ++k) {
        double acc = 0.0;
        for (int c = 0; c < cfg.outputs; ++c) acc += hw(k, c) * dq_row[c];
        dpool[static_cast<std::size_t>(k)] = acc / n;
    }
    Matrix dh(n, fe);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < fe; ++k) dh(i, k) = dpool[static_cast<std::size_t>(k)];

    for (int l = cfg.gat_layers - 1; l >= 0; --l) {
        const std::string tag = "gat.l" + std::to_string(l);
        const std::size_t li = static_cast<std::size_t>(l);
        const Matrix& z = cache.z[li];
        const Matrix& att = cache.att[li];
        const Matrix& pre = cache.pre[li];
        const auto& s = cache.src_score[li];
        const auto& t = cache.dst_score[li];
        const Matrix& asrc = params.at(tag + ".asrc");
        const Matrix& adst = params.at(tag + ".adst");

        Matrix du = dh;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < z.cols(); ++k) du(i, k) *= elu_grad(pre(i, k));

        Matrix datt;
        matmul_nt(du, z, datt);  // dA = dU Z^T
        Matrix dz;
        matmul_tn(att, du, dz);  // aggregation path: dZ += A^T dU

        // Row softmax backward, then the LeakyReLU mask on s_i + t_j.
        std::vector<double> ds(static_cast<std::size_t>(n), 0.0);
        std::vector<double> dt(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* arow = att.row(i);
            const double* darow = datt.row(i);
            double dot = 0.0;
            for (int j = 0; j < n; ++j) dot += arow[j] * darow[j];
            const double si = s[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) {
                const double de = arow[j] * (darow[j] - dot);
                const double dp = de * leaky_grad(si + t[static_cast<std::size_t>(j)], cfg.leaky_slope);
                ds[static_cast<std::size_t>(i)] += dp;
                dt[static_cast<std::size_t>(j)] += dp;
            }
        }

        Matrix& gasrc = grads.at(tag + ".asrc");
        Matrix& gadst = grads.at(tag + ".adst");
        for (int i = 0; i < n; ++i) {
            const double* zi = z.row(i);
            const double dsi = ds[static_cast<std::size_t>(i)];
            const double dti = dt[static_cast<std::size_t>(i)];
            double* dzi = dz.row(i);
            for (int k = 0; k < z.cols(); ++k) {
                gasrc(k, 0) += zi[k] * dsi;
                gadst(k, 0) += zi[k] * dti;
                dzi[k] += dsi * asrc(k, 0) + dti * adst(k, 0);
            }
        }

        const Matrix& hin = l == 0 ? cache.h0 : cache.hout[li - 1];
        matmul_tn(hin, dz, grads.at(tag + ".w"), true);
        if (l > 0) {
            Matrix dh_next;
            matmul_nt(dz, params.at(tag + ".w"), dh_next);
            dh = std::move(dh_next);
        }
    }
}

}  // namespace

Matrix QNetwork::forward_batch(const std::vector<const EncodedObs*>& batch, BatchCache& cache) const {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    cache.batch = batch;
    Matrix q(static_cast<int>(batch.size()), cfg_.outputs);
    if (cfg_.arch == Arch::mlp) {
        mlp_forward(cfg_, params_, batch, cache.mlp, q);
    } else {
        cache.gat.assign(batch.size(), GatGraphCache());
        for (std::size_t i = 0; i < batch.size(); ++i)
            gat_forward(cfg_, params_, *batch[i], cache.gat[i], q.row(static_cast<int>(i)));
    }
    return q;
}

Parameters QNetwork::backward_batch(const BatchCache& cache, const Matrix& dq) const {
    Parameters grads = zeros_like(params_);
    if (cfg_.arch == Arch::mlp) {
        mlp_backward(cfg_, params_, cache.mlp, dq, grads);
    } else {
        for (std::size_t i = 0; i < cache.gat.size(); ++i)
            gat_backward(cfg_, params_, cache.gat[i], dq.row(static_cast<int>(i)), grads);
    }
    return grads;
}

std::vector<double> QNetwork::q_values(const EncodedObs& obs) const {
    BatchCache cache;
    const Matrix q = forward_batch({&obs}, cache);
    return std::vector<double>(q.row(0), q.row(0) + q.cols());
}

}  // namespace opsel
