#include "opsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace opsel {

namespace fs = std::filesystem;

SolutionSets make_solution_sets(const Instance& inst, std::uint64_t master_seed, int size) {
    if (size < 1) throw std::invalid_argument("set size must be positive");
    SolutionSets out;
    std::set<std::string> seen;
    const auto fill = [&](std::vector<Solution>& pool, const char* tag) {
        Rng rng = make_rng(master_seed, {stream_tag("solution-sets"), stream_tag(tag)});
        pool.reserve(static_cast<std::size_t>(size));
        while (static_cast<int>(pool.size()) < size) {
            Solution s = random_initial_solution(inst, rng);
            if (seen.insert(solution_key(s)).second) pool.push_back(std::move(s));
        }
    };
    fill(out.train, "train");
    fill(out.validate, "validate");
    fill(out.test, "test");
    return out;
}

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("failed writing " + tmp);
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::uint64_t file_fingerprint(const std::string& path) { return fnv1a(read_file(path)); }

void save_solution_set(const std::string& path, const std::vector<Solution>& set) {
    std::ostringstream out;
    out << "solution-set v1\n";
    out << "count " << set.size() << "\n";
    for (const Solution& s : set) out << solution_key(s) << "\n";
    write_file_atomic(path, out.str());
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx\n", static_cast<unsigned long long>(file_fingerprint(path)));
    write_file_atomic(path + ".fnv", hex);
}

std::vector<Solution> load_solution_set(const std::string& path, const Instance& inst) {
    {
        const std::string recorded = read_file(path + ".fnv");
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx\n", static_cast<unsigned long long>(file_fingerprint(path)));
        if (recorded != hex)
            throw std::runtime_error("fingerprint mismatch for " + path + ", the file was modified");
    }
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line != "solution-set v1")
        throw std::runtime_error("not a solution-set file: " + path);
    std::size_t count = 0;
    in >> line >> count;
    std::getline(in, line);
    std::vector<Solution> set;
    set.reserve(count);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Solution s;
        std::istringstream ss(line);
        std::string tok;
        std::vector<int>* target = nullptr;
        while (ss >> tok) {
            if (tok == "t") {
                s.tours.emplace_back();
                target = &s.tours.back();
            } else if (tok == "r") {
                target = &s.removal_list;
            } else if (tok == "|") {
                target = nullptr;
            } else {
                if (!target) throw std::runtime_error("malformed solution line in " + path + ": " + line);
                target->push_back(std::stoi(tok));
            }
        }
        const auto violations = validate_solution(inst, s);
        if (!violations.empty())
            throw std::runtime_error("solution in " + path + " does not fit the instance: " +
                                     violations.front().what);
        s.cached_cost = objective(inst, s);
        set.push_back(std::move(s));
    }
    if (set.size() != count)
        throw std::runtime_error(path + " lists " + std::to_string(set.size()) + " solutions, header says " +
                                 std::to_string(count));
    return set;
}

std::pair<double, double> confidence_interval(const std::vector<double>& values) {
    const std::size_t k = values.size();
    if (k < 2) throw std::invalid_argument("confidence interval needs at least two values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    return {mean, 1.96 * sd / std::sqrt(static_cast<double>(k))};
}

namespace {
constexpr const char* kCsvHeader = "study,instance,class,n,portfolio,agent,seed,metric,value";
}

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    char buf[512];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%d,%s,%d,%s,%.10g\n", r.study.c_str(), r.instance.c_str(),
                      r.klass.c_str(), r.n, r.portfolio, r.agent.c_str(), r.seed, r.metric.c_str(), r.value);
        out << buf;
    }
    write_file_atomic(path, out.str());
}

std::vector<ResultRow> read_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("unexpected results header in " + path);
    std::vector<ResultRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 9)
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": expected 9 fields");
        ResultRow r;
        r.study = f[0];
        r.instance = f[1];
        r.klass = f[2];
        r.n = std::stoi(f[3]);
        r.portfolio = std::stoi(f[4]);
        r.agent = f[5];
        r.seed = std::stoi(f[6]);
        r.metric = f[7];
        r.value = std::stod(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, int, int, std::string, std::string>;
    std::map<Key, std::vector<double>> groups;
    for (const ResultRow& r : rows)
        groups[{r.study, r.instance, r.klass, r.n, r.portfolio, r.agent, r.metric}].push_back(r.value);
    std::ostringstream out;
    out << "study,instance,class,n,portfolio,agent,metric,seeds,mean,ci95\n";
    char buf[512];
    for (const auto& [key, vals] : groups) {
        double mean = 0.0, ci = 0.0;
        if (vals.size() >= 2) {
            std::tie(mean, ci) = confidence_interval(vals);
        } else {
            mean = vals.front();
        }
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%d,%s,%s,%zu,%.10g,%.10g\n", std::get<0>(key).c_str(),
                      std::get<1>(key).c_str(), std::get<2>(key).c_str(), std::get<3>(key), std::get<4>(key),
                      std::get<5>(key).c_str(), std::get<6>(key).c_str(), vals.size(), mean, ci);
        out << buf;
    }
    write_file_atomic(path, out.str());
}

namespace {

enum class AgentKind { dqn_mlp, dqn_gnn, lrw, crw, ran };

AgentKind parse_agent(const std::string& a) {
    if (a == "dqn-mlp") return AgentKind::dqn_mlp;
    if (a == "dqn-gnn") return AgentKind::dqn_gnn;
    if (a == "lrw") return AgentKind::lrw;
    if (a == "crw") return AgentKind::crw;
    if (a == "ran") return AgentKind::ran;
    throw std::invalid_argument("unknown agent '" + a + "' (expected dqn-mlp, dqn-gnn, lrw, crw or ran)");
}

std::string class_file(const std::string& klass) {
    if (klass == "C") return "C101.txt";
    if (klass == "R") return "R101.txt";
    if (klass == "RC") return "RC101.txt";
    throw std::invalid_argument("unknown instance class '" + klass + "' (expected C, R or RC)");
}

Instance load_instance_sized(const StudySpec& spec, const std::string& klass, int n) {
    const std::string path = (!spec.instance_override.empty() && spec.classes.size() == 1)
                                 ? spec.instance_override
                                 : spec.data_dir + "/" + class_file(klass);
    Instance full = load_solomon_file(path);
    return n == full.n_customers() ? full : truncate_instance(full, n);
}

int default_steps(const StudySpec& spec, Arch arch) {
    if (spec.dqn.total_steps > 0) return spec.dqn.total_steps;
    return arch == Arch::gat ? 25000 : 15000;
}

std::string set_base(const StudySpec& spec, const std::string& klass, int n) {
    return spec.out_dir + "/sets/" + klass + std::to_string(n);
}

}  // namespace

Instance load_class_instance(const StudySpec& spec, const std::string& klass) {
    return load_instance_sized(spec, klass, spec.n);
}

SolutionSets ensure_sets(const StudySpec& spec, const Instance& inst, const std::string& klass, int n) {
    fs::create_directories(spec.out_dir + "/sets");
    const std::string base = set_base(spec, klass, n);
    const std::string train = base + "_train.sols", validate = base + "_validate.sols", test = base + "_test.sols";
    if (fs::exists(train) && fs::exists(validate) && fs::exists(test)) {
        SolutionSets sets;
        sets.train = load_solution_set(train, inst);
        sets.validate = load_solution_set(validate, inst);
        sets.test = load_solution_set(test, inst);
        return sets;
    }
    SolutionSets sets = make_solution_sets(
        inst, mix_seed(spec.master_seed, {stream_tag("sets"), stream_tag(klass), static_cast<std::uint64_t>(n)}),
        spec.set_size);
    save_solution_set(train, sets.train);
    save_solution_set(validate, sets.validate);
    save_solution_set(test, sets.test);
    return sets;
}

// Models trained under a non-default episode shape get their own cache slot;
// a d=2 policy must never be mistaken for the d=4 one.
std::string episode_key_tag(const EpisodeConfig& episode) {
    const EpisodeConfig defaults{};
    if (episode.d == defaults.d && episode.b == defaults.b) return "";
    return "_d" + std::to_string(episode.d) + "b" + std::to_string(episode.b);
}

Checkpoint train_or_load_dqn(const StudySpec& spec, const Instance& inst, const SolutionSets& sets,
                             const std::string& klass, int portfolio_size, Arch arch, int seed) {
    fs::create_directories(spec.out_dir + "/models");
    const std::string agent = arch == Arch::gat ? "dqn-gnn" : "dqn-mlp";
    const std::string path = spec.out_dir + "/models/" + klass + std::to_string(inst.n_customers()) + "_k" +
                             std::to_string(portfolio_size) + episode_key_tag(spec.episode) + "_" + agent + "_s" +
                             std::to_string(seed) + ".ckpt";
    const Portfolio pf = build_portfolio(portfolio_size);
    if (fs::exists(path)) {
        Checkpoint ck = load_checkpoint(path);
        if (ck.cfg.outputs != pf.action_count())
            throw std::runtime_error("cached model " + path + " does not match the requested portfolio");
        return ck;
    }
    const Environment env(inst, pf, spec.episode);
    CvrpTrainEnv tenv(env, sets.train);
    DqnConfig dcfg = spec.dqn;
    dcfg.total_steps = default_steps(spec, arch);
    const NetworkConfig ncfg = make_network_config(arch, inst, pf);
    Rng rng = make_rng(spec.master_seed,
                       {stream_tag("dqn-train"), stream_tag(klass), static_cast<std::uint64_t>(inst.n_customers()),
                        static_cast<std::uint64_t>(portfolio_size), static_cast<std::uint64_t>(arch == Arch::gat),
                        static_cast<std::uint64_t>(seed)});
    const Validator validator = make_greedy_validator(
        env, sets.validate,
        mix_seed(spec.master_seed, {stream_tag("dqn-validate"), stream_tag(klass),
                                    static_cast<std::uint64_t>(inst.n_customers()),
                                    static_cast<std::uint64_t>(portfolio_size),
                                    static_cast<std::uint64_t>(arch == Arch::gat), static_cast<std::uint64_t>(seed)}));
    Checkpoint ck;
    ck.cfg = ncfg;
    ck.params = train_q_network(tenv, ncfg, dcfg, rng, validator);
    const std::string tmp = path + ".tmp";
    save_checkpoint(tmp, ck.cfg, ck.params);
    fs::rename(tmp, path);
    return ck;
}

RouletteState train_or_load_roulette(const StudySpec& spec, const Instance& inst, const SolutionSets& sets,
                                     const std::string& klass, int portfolio_size, int seed) {
    fs::create_directories(spec.out_dir + "/models");
    const std::string path = spec.out_dir + "/models/" + klass + std::to_string(inst.n_customers()) + "_k" +
                             std::to_string(portfolio_size) + episode_key_tag(spec.episode) + "_lrw_s" +
                             std::to_string(seed) + ".rw";
    const Portfolio pf = build_portfolio(portfolio_size);
    if (fs::exists(path)) return load_roulette_weights(path, pf);
    const Environment env(inst, pf, spec.episode);
    const int episodes = default_steps(spec, Arch::mlp) / (2 * spec.episode.b);
    Rng rng = make_rng(spec.master_seed,
                       {stream_tag("lrw-train"), stream_tag(klass), static_cast<std::uint64_t>(inst.n_customers()),
                        static_cast<std::uint64_t>(portfolio_size), static_cast<std::uint64_t>(seed)});
    const RouletteState rs = train_roulette(env, sets.train, episodes, 0.1, rng);
    const std::string tmp = path + ".tmp";
    save_roulette_weights(tmp, pf, rs);
    fs::rename(tmp, path);
    return rs;
}

std::vector<ResultRow> run_tasks(const std::vector<std::function<std::vector<ResultRow>()>>& tasks, int jobs) {
    const int total = static_cast<int>(tasks.size());
    std::vector<std::vector<ResultRow>> results(static_cast<std::size_t>(total));
    int workers = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, total);
    if (workers <= 1) {
        for (int i = 0; i < total; ++i) results[static_cast<std::size_t>(i)] = tasks[static_cast<std::size_t>(i)]();
    } else {
        std::atomic<int> next{0};
        std::mutex err_mutex;
        std::exception_ptr first_error;
        const auto worker = [&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= total) return;
                try {
                    results[static_cast<std::size_t>(i)] = tasks[static_cast<std::size_t>(i)]();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    std::vector<ResultRow> merged;
    for (auto& r : results) merged.insert(merged.end(), r.begin(), r.end());
    return merged;
}

namespace {

struct ClassContext {
    std::string klass;
    Instance inst;
    SolutionSets sets;
};

std::vector<ClassContext> build_contexts(const StudySpec& spec, int n) {
    std::vector<ClassContext> out;
    out.reserve(spec.classes.size());
    for (const std::string& klass : spec.classes) {
        Instance inst = load_instance_sized(spec, klass, n);
        SolutionSets sets = ensure_sets(spec, inst, klass, n);
        out.push_back(ClassContext{klass, std::move(inst), std::move(sets)});
    }
    return out;
}

Rng eval_rng(const StudySpec& spec, const char* purpose, const std::string& klass, int n, int k,
             const std::string& agent, int seed, int extra = 0) {
    return make_rng(spec.master_seed,
                    {stream_tag(purpose), stream_tag(klass), static_cast<std::uint64_t>(n),
                     static_cast<std::uint64_t>(k), stream_tag(agent), static_cast<std::uint64_t>(seed),
                     static_cast<std::uint64_t>(extra)});
}

// Mean episode reward of one agent on the test pool, training (or loading)
// whatever the agent needs first.
double mdp_cell_value(const StudySpec& spec, const ClassContext& ctx, int k, const std::string& agent, int seed,
                      const EpisodeConfig& eval_episode, int rng_extra = 0) {
    const Portfolio pf = build_portfolio(k);
    const Environment env(ctx.inst, pf, eval_episode);
    Rng rng = eval_rng(spec, "mdp-eval", ctx.klass, ctx.inst.n_customers(), k, agent, seed, rng_extra);
    switch (parse_agent(agent)) {
        case AgentKind::ran: {
            RandomSelector sel;
            return mean_episode_reward(env, ctx.sets.test, sel, rng);
        }
        case AgentKind::lrw: {
            const RouletteState rs = train_or_load_roulette(spec, ctx.inst, ctx.sets, ctx.klass, k, seed);
            RouletteSelector sel(pf, rs, ScoreRule{}, false);
            return mean_episode_reward(env, ctx.sets.test, sel, rng);
        }
        case AgentKind::dqn_mlp:
        case AgentKind::dqn_gnn: {
            const Arch arch = parse_agent(agent) == AgentKind::dqn_gnn ? Arch::gat : Arch::mlp;
            const Checkpoint ck = train_or_load_dqn(spec, ctx.inst, ctx.sets, ctx.klass, k, arch, seed);
            const QNetwork net(ck.cfg, ck.params);
            DqnSelector sel(net, pf, spec.dqn.tau);
            return mean_episode_reward(env, ctx.sets.test, sel, rng);
        }
        case AgentKind::crw:
            throw std::invalid_argument("crw only exists inside the full search loop; it has no episode policy");
    }
    throw std::logic_error("unreachable");
}

// Generalization evaluation needs an environment and test pool from another
// instance size than the one the agent was trained on.
double mdp_cell_value_on(const StudySpec& spec, const ClassContext& train_ctx, const ClassContext& eval_ctx,
                         int k, const std::string& agent, int seed, const EpisodeConfig& eval_episode) {
    const Portfolio pf = build_portfolio(k);
    const Environment env(eval_ctx.inst, pf, eval_episode);
    Rng rng = eval_rng(spec, "mdp-eval", eval_ctx.klass, eval_ctx.inst.n_customers(), k, agent, seed);
    switch (parse_agent(agent)) {
        case AgentKind::ran: {
            RandomSelector sel;
            return mean_episode_reward(env, eval_ctx.sets.test, sel, rng);
        }
        case AgentKind::lrw: {
            const RouletteState rs =
                train_or_load_roulette(spec, train_ctx.inst, train_ctx.sets, train_ctx.klass, k, seed);
            RouletteSelector sel(pf, rs, ScoreRule{}, false);
            return mean_episode_reward(env, eval_ctx.sets.test, sel, rng);
        }
        case AgentKind::dqn_gnn: {
            const Checkpoint ck =
                train_or_load_dqn(spec, train_ctx.inst, train_ctx.sets, train_ctx.klass, k, Arch::gat, seed);
            const QNetwork net(ck.cfg, ck.params);
            DqnSelector sel(net, pf, spec.dqn.tau);
            return mean_episode_reward(env, eval_ctx.sets.test, sel, rng);
        }
        case AgentKind::dqn_mlp: {
            const Checkpoint ck =
                train_or_load_dqn(spec, train_ctx.inst, train_ctx.sets, train_ctx.klass, k, Arch::mlp, seed);
            const QNetwork net(ck.cfg, ck.params);
            DqnSelector sel(net, pf, spec.dqn.tau);
            return mean_episode_reward(env, eval_ctx.sets.test, sel, rng);
        }
        case AgentKind::crw:
            throw std::invalid_argument("crw only exists inside the full search loop; it has no episode policy");
    }
    throw std::logic_error("unreachable");
}

struct AlnsCellResult {
    double obj_avg = 0.0;
    double obj_min = 0.0;
};

AlnsCellResult alns_cell(const StudySpec& spec, const ClassContext& ctx, int k, const std::string& agent,
                         int seed, double tau_override = -1.0) {
    const Portfolio pf = build_portfolio(k);
    AlnsConfig acfg = spec.alns;
    acfg.d = spec.episode.d;
    acfg.budget_cycle = spec.episode.b;
    const int starts = std::min(spec.alns_starts, static_cast<int>(ctx.sets.test.size()));
    if (starts < 1) throw std::invalid_argument("no start solutions for the search comparison");
    const AgentKind kind = parse_agent(agent);

    const Checkpoint ck = (kind == AgentKind::dqn_mlp || kind == AgentKind::dqn_gnn)
                              ? train_or_load_dqn(spec, ctx.inst, ctx.sets, ctx.klass, k,
                                                  kind == AgentKind::dqn_gnn ? Arch::gat : Arch::mlp, seed)
                              : Checkpoint{};
    const QNetwork net(ck.cfg, ck.params);
    const RouletteState lrw_state = kind == AgentKind::lrw
                                        ? train_or_load_roulette(spec, ctx.inst, ctx.sets, ctx.klass, k, seed)
                                        : RouletteState{};
    const double tau = tau_override > 0.0 ? tau_override : spec.dqn.tau;

    std::vector<double> bests;
    bests.reserve(static_cast<std::size_t>(starts));
    for (int i = 0; i < starts; ++i) {
        Rng rng = eval_rng(spec, "alns-run", ctx.klass, ctx.inst.n_customers(), k, agent, seed, i);
        AlnsResult r;
        switch (kind) {
            case AgentKind::ran: {
                RandomSelector sel;
                r = run_alns(ctx.inst, ctx.sets.test[static_cast<std::size_t>(i)], pf, sel, acfg, rng);
                break;
            }
            case AgentKind::crw: {
                RouletteSelector sel(pf, RouletteState(pf, 0.1), spec.alns.scores, true);
                r = run_alns(ctx.inst, ctx.sets.test[static_cast<std::size_t>(i)], pf, sel, acfg, rng);
                break;
            }
            case AgentKind::lrw: {
                RouletteSelector sel(pf, lrw_state, spec.alns.scores, false);
                r = run_alns(ctx.inst, ctx.sets.test[static_cast<std::size_t>(i)], pf, sel, acfg, rng);
                break;
            }
            case AgentKind::dqn_mlp:
            case AgentKind::dqn_gnn: {
                DqnSelector sel(net, pf, tau);
                r = run_alns(ctx.inst, ctx.sets.test[static_cast<std::size_t>(i)], pf, sel, acfg, rng);
                break;
            }
        }
        bests.push_back(r.best_cost);
    }
    AlnsCellResult out;
    out.obj_min = bests.front();
    for (double b : bests) {
        out.obj_avg += b;
        out.obj_min = std::min(out.obj_min, b);
    }
    out.obj_avg /= static_cast<double>(bests.size());
    return out;
}

std::string format_tau(double tau) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", tau);
    return buf;
}

}  // namespace

std::vector<ResultRow> run_mdp_table(const StudySpec& spec) {
    const std::vector<ClassContext> contexts = build_contexts(spec, spec.n);
    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (const ClassContext& ctx : contexts) {
        for (int k : spec.portfolio_sizes) {
            for (const std::string& agent : spec.agents) {
                for (int seed = 0; seed < spec.seeds; ++seed) {
                    tasks.push_back([&spec, &ctx, k, agent, seed]() {
                        const double v = mdp_cell_value(spec, ctx, k, agent, seed, spec.episode);
                        return std::vector<ResultRow>{{"mdp-table", ctx.inst.name(), ctx.klass, spec.n, k, agent,
                                                       seed, "cum_reward", v}};
                    });
                }
            }
        }
    }
    return run_tasks(tasks, spec.jobs);
}

std::vector<ResultRow> run_alns_table(const StudySpec& spec) {
    const std::vector<ClassContext> contexts = build_contexts(spec, spec.n);
    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (const ClassContext& ctx : contexts) {
        for (int k : spec.portfolio_sizes) {
            for (const std::string& agent : spec.agents) {
                for (int seed = 0; seed < spec.seeds; ++seed) {
                    tasks.push_back([&spec, &ctx, k, agent, seed]() {
                        const AlnsCellResult cell = alns_cell(spec, ctx, k, agent, seed);
                        return std::vector<ResultRow>{
                            {"alns-table", ctx.inst.name(), ctx.klass, spec.n, k, agent, seed, "obj_avg",
                             cell.obj_avg},
                            {"alns-table", ctx.inst.name(), ctx.klass, spec.n, k, agent, seed, "obj_min",
                             cell.obj_min}};
                    });
                }
            }
        }
    }
    return run_tasks(tasks, spec.jobs);
}

std::vector<ResultRow> run_generalization(const StudySpec& spec) {
    if (spec.portfolio_sizes.empty()) throw std::invalid_argument("no portfolio size given");
    const int k = spec.portfolio_sizes.back();
    const int train_n = spec.n;
    std::vector<int> sizes = spec.generalization_sizes;
    if (std::find(sizes.begin(), sizes.end(), train_n) == sizes.end()) sizes.insert(sizes.begin(), train_n);

    // One context per class and size; training always happens at train_n.
    std::vector<std::vector<ClassContext>> by_size;
    for (int n : sizes) {
        StudySpec sized = spec;
        sized.n = n;
        by_size.push_back(build_contexts(sized, n));
    }
    const std::vector<ClassContext>* train_row = nullptr;
    for (std::size_t si = 0; si < sizes.size(); ++si)
        if (sizes[si] == train_n) train_row = &by_size[si];

    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
        for (const std::string& agent : spec.agents) {
            for (int seed = 0; seed < spec.seeds; ++seed) {
                tasks.push_back([&spec, &by_size, &sizes, train_row, ci, k, agent, seed]() {
                    std::vector<ResultRow> rows;
                    const ClassContext& tctx = (*train_row)[ci];
                    for (std::size_t si = 0; si < sizes.size(); ++si) {
                        const ClassContext& ectx = by_size[si][ci];
                        const int n = sizes[si];
                        if (n < 5) throw std::invalid_argument("generalization sizes must be at least 5");
                        const EpisodeConfig episode{n / 5, spec.episode.b};
                        const double v = mdp_cell_value_on(spec, tctx, ectx, k, agent, seed, episode);
                        rows.push_back({"generalization", ectx.inst.name(), ectx.klass, n, k, agent, seed,
                                        "cum_reward", v});
                    }
                    return rows;
                });
            }
        }
    }
    return run_tasks(tasks, spec.jobs);
}

std::vector<ResultRow> run_scale_sweep(const StudySpec& spec) {
    if (spec.portfolio_sizes.empty()) throw std::invalid_argument("no portfolio size given");
    const int k = spec.portfolio_sizes.back();
    const std::vector<ClassContext> contexts = build_contexts(spec, spec.n);
    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (const ClassContext& ctx : contexts) {
        for (const std::string& agent : spec.agents) {
            for (int seed = 0; seed < spec.seeds; ++seed) {
                tasks.push_back([&spec, &ctx, k, agent, seed]() {
                    std::vector<ResultRow> rows;
                    for (std::size_t di = 0; di < spec.scale_grid.size(); ++di) {
                        const int dd = spec.scale_grid[di];
                        // Agents are trained at the sweep's own scale; the
                        // default scale reuses the selection-study models.
                        StudySpec at_d = spec;
                        at_d.episode = EpisodeConfig{dd, spec.episode.b};
                        const double v =
                            mdp_cell_value(at_d, ctx, k, agent, seed, at_d.episode, static_cast<int>(di) + 1);
                        rows.push_back({"scale-sweep/d=" + std::to_string(dd), ctx.inst.name(), ctx.klass,
                                        spec.n, k, agent, seed, "cum_reward", v});
                    }
                    return rows;
                });
            }
        }
    }
    return run_tasks(tasks, spec.jobs);
}

std::vector<ResultRow> run_temperature_sweep(const StudySpec& spec) {
    if (spec.portfolio_sizes.empty()) throw std::invalid_argument("no portfolio size given");
    const int k = spec.portfolio_sizes.back();
    for (const std::string& agent : spec.agents) {
        const AgentKind kind = parse_agent(agent);
        if (kind != AgentKind::dqn_mlp && kind != AgentKind::dqn_gnn)
            throw std::invalid_argument("the temperature sweep studies the learned policy; agent '" + agent +
                                        "' has no temperature");
    }
    const std::vector<ClassContext> contexts = build_contexts(spec, spec.n);
    // Models are shared across temperatures; warm the cache sequentially so
    // parallel tasks only read it.
    for (const ClassContext& ctx : contexts)
        for (const std::string& agent : spec.agents)
            for (int seed = 0; seed < spec.seeds; ++seed)
                train_or_load_dqn(spec, ctx.inst, ctx.sets, ctx.klass, k,
                                  parse_agent(agent) == AgentKind::dqn_gnn ? Arch::gat : Arch::mlp, seed);

    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (double tau : spec.tau_grid) {
        for (const std::string& agent : spec.agents) {
            for (int seed = 0; seed < spec.seeds; ++seed) {
                tasks.push_back([&spec, &contexts, k, tau, agent, seed]() {
                    std::vector<ResultRow> rows;
                    const std::string study = "temp-sweep/tau=" + format_tau(tau);
                    double sum_avg = 0.0;
                    for (const ClassContext& ctx : contexts) {
                        const AlnsCellResult cell = alns_cell(spec, ctx, k, agent, seed, tau);
                        rows.push_back({study, ctx.inst.name(), ctx.klass, spec.n, k, agent, seed, "obj_avg",
                                        cell.obj_avg});
                        rows.push_back({study, ctx.inst.name(), ctx.klass, spec.n, k, agent, seed, "obj_min",
                                        cell.obj_min});
                        sum_avg += cell.obj_avg;
                    }
                    rows.push_back({study, "all", "all", spec.n, k, agent, seed, "obj_avg",
                                    sum_avg / static_cast<double>(contexts.size())});
                    return rows;
                });
            }
        }
    }
    return run_tasks(tasks, spec.jobs);
}

std::string write_study_outputs(const StudySpec& spec, const std::string& study_name,
                                const std::vector<ResultRow>& rows) {
    fs::create_directories(spec.out_dir);
    const std::string rows_path = spec.out_dir + "/" + study_name + ".csv";
    write_rows_csv(rows_path, rows);
    write_aggregate_csv(spec.out_dir + "/" + study_name + "_agg.csv", rows);
    return rows_path;
}

}  // namespace opsel
