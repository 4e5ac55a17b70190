#ifndef OPSEL_HARNESS_HPP
#define OPSEL_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "opsel/alns.hpp"
#include "opsel/checkpoint.hpp"
#include "opsel/dqn.hpp"

namespace opsel {

/**
 * Disjoint training / validation / test pools of random start solutions.
 * Each pool draws from its own random stream; cross-pool duplicates are
 * redrawn so the pools never share a solution.
 */
struct SolutionSets {
    std::vector<Solution> train;
    std::vector<Solution> validate;
    std::vector<Solution> test;
};

SolutionSets make_solution_sets(const Instance& inst, std::uint64_t master_seed, int size = 128);

// Text serialization plus a sidecar fingerprint (<path>.fnv); loading
// re-validates every solution against the instance and the fingerprint.
void save_solution_set(const std::string& path, const std::vector<Solution>& set);
std::vector<Solution> load_solution_set(const std::string& path, const Instance& inst);
std::uint64_t file_fingerprint(const std::string& path);

// Mean and 1.96 * s / sqrt(k) half-width; needs at least two values.
std::pair<double, double> confidence_interval(const std::vector<double>& values);

struct ResultRow {
    std::string study;
    std::string instance;
    std::string klass;
    int n = 0;
    int portfolio = 0;
    std::string agent;
    int seed = 0;
    std::string metric;
    double value = 0.0;
};

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_rows_csv(const std::string& path);
// Groups rows over seeds and writes mean plus CI half-width per group (0
// half-width for singleton groups).
void write_aggregate_csv(const std::string& path, const std::vector<ResultRow>& rows);

struct StudySpec {
    std::vector<std::string> classes = {"C", "R", "RC"};
    int n = 20;
    std::vector<int> portfolio_sizes = {2, 5, 12};
    std::vector<std::string> agents = {"dqn-mlp", "lrw", "ran"};
    int seeds = 5;
    int set_size = 128;
    EpisodeConfig episode{4, 10};
    DqnConfig dqn{};  // dqn.total_steps == 0 picks the per-architecture default
    AlnsConfig alns{};
    int alns_starts = 32;
    std::vector<int> scale_grid = {2, 4, 6, 8, 10};
    std::vector<double> tau_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<int> generalization_sizes = {20, 50, 100};
    std::uint64_t master_seed = 24601;
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::string instance_override;  // single-class runs may point at a file directly
    int jobs = 0;                   // 0 = hardware concurrency
};

Instance load_class_instance(const StudySpec& spec, const std::string& klass);

// Loads the pools for one class/size from disk or generates and saves them.
SolutionSets ensure_sets(const StudySpec& spec, const Instance& inst, const std::string& klass, int n);

// Trained artifacts are cached under <out>/models keyed by class, size,
// portfolio, agent and seed; a second run loads instead of retraining.
Checkpoint train_or_load_dqn(const StudySpec& spec, const Instance& inst, const SolutionSets& sets,
                             const std::string& klass, int portfolio_size, Arch arch, int seed);
RouletteState train_or_load_roulette(const StudySpec& spec, const Instance& inst, const SolutionSets& sets,
                                     const std::string& klass, int portfolio_size, int seed);

// Index-ordered parallel task runner; results merge in task order regardless
// of the worker count, keeping study output deterministic.
std::vector<ResultRow> run_tasks(const std::vector<std::function<std::vector<ResultRow>()>>& tasks, int jobs);

// Mean cumulative episode reward per (class, portfolio, agent, seed) cell.
std::vector<ResultRow> run_mdp_table(const StudySpec& spec);
// Full-search comparison: obj_avg and obj_min over restarts per cell.
std::vector<ResultRow> run_alns_table(const StudySpec& spec);
// Train small, evaluate on larger truncations with d = n / 5.
std::vector<ResultRow> run_generalization(const StudySpec& spec);
// Reward gap versus destroy size d at a fixed portfolio.
std::vector<ResultRow> run_scale_sweep(const StudySpec& spec);
// Deployment-temperature sensitivity of the learned policy inside the search.
std::vector<ResultRow> run_temperature_sweep(const StudySpec& spec);

// Writes <study>.csv and <study>_agg.csv under spec.out_dir, returns the row
// file path.
std::string write_study_outputs(const StudySpec& spec, const std::string& study_name,
                                const std::vector<ResultRow>& rows);

}  // namespace opsel

#endif
