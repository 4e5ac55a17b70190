#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opsel/harness.hpp"

namespace {

void add_common(CLI::App* cmd, opsel::StudySpec& spec) {
    cmd->add_option("--class", spec.classes, "instance classes (C, R, RC)")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--n", spec.n, "customers kept from each base instance")->capture_default_str();
    cmd->add_option("--portfolio", spec.portfolio_sizes, "destroy portfolio sizes")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--agent", spec.agents, "agents (dqn-mlp, dqn-gnn, lrw, crw, ran)")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--seeds", spec.seeds, "independent seeds per cell")->capture_default_str();
    cmd->add_option("--set-size", spec.set_size, "solutions per train/validate/test pool")
        ->capture_default_str();
    cmd->add_option("--d", spec.episode.d, "customers removed per destroy")->capture_default_str();
    cmd->add_option("--budget", spec.episode.b, "destroy/repair rounds per episode")->capture_default_str();
    cmd->add_option("--steps", spec.dqn.total_steps, "training steps (0 = per-architecture default)")
        ->capture_default_str();
    cmd->add_option("--tau", spec.dqn.tau, "softmax temperature of the deployed policy")
        ->capture_default_str();
    cmd->add_option("--iters", spec.alns.iterations, "search iterations per run")->capture_default_str();
    cmd->add_option("--starts", spec.alns_starts, "restarts per search cell")->capture_default_str();
    cmd->add_option("--scale-grid", spec.scale_grid, "destroy sizes for the scale sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--tau-grid", spec.tau_grid, "temperatures for the temperature sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--gen-sizes", spec.generalization_sizes, "evaluation sizes for generalization")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--master-seed", spec.master_seed, "root of every random stream")
        ->capture_default_str();
    cmd->add_option("--data-dir", spec.data_dir, "directory holding the instance files")
        ->capture_default_str();
    cmd->add_option("--out", spec.out_dir, "output directory (results, pools, models)")
        ->capture_default_str();
    cmd->add_option("--instance", spec.instance_override,
                    "explicit instance file (single-class runs only)");
    cmd->add_option("--jobs", spec.jobs, "worker threads (0 = hardware concurrency)")
        ->capture_default_str();
}

void run_study(const opsel::StudySpec& spec, const std::string& name,
               std::vector<opsel::ResultRow> (*study)(const opsel::StudySpec&)) {
    const std::vector<opsel::ResultRow> rows = study(spec);
    const std::string path = opsel::write_study_outputs(spec, name, rows);
    std::printf("wrote %s (%zu rows)\n", path.c_str(), rows.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-selection experiments for capacitated vehicle routing"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file applied before the flags");
    opsel::StudySpec spec;

    CLI::App* gen_data = app.add_subcommand("gen-data", "generate and save the start-solution pools");
    CLI::App* train = app.add_subcommand("train", "train (or reuse cached) agents");
    CLI::App* eval_mdp = app.add_subcommand("eval-mdp", "episode-reward comparison of agents");
    CLI::App* eval_alns = app.add_subcommand("eval-alns", "full-search comparison of selection schemes");
    CLI::App* generalize = app.add_subcommand("generalize", "train small, evaluate on larger instances");
    CLI::App* sweep_scale = app.add_subcommand("sweep-scale", "reward gap versus destroy size");
    CLI::App* sweep_temp = app.add_subcommand("sweep-temp", "search quality versus policy temperature");
    CLI::App* report = app.add_subcommand("report", "aggregate a results file over seeds");
    for (CLI::App* cmd : {gen_data, train, eval_mdp, eval_alns, generalize, sweep_scale, sweep_temp})
        add_common(cmd, spec);

    std::string report_in;
    report->add_option("--in", report_in, "results csv to aggregate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(gen_data)) {
            for (const std::string& klass : spec.classes) {
                const opsel::Instance inst = opsel::load_class_instance(spec, klass);
                const opsel::SolutionSets sets = opsel::ensure_sets(spec, inst, klass, spec.n);
                std::printf("%s n=%d: %zu/%zu/%zu train/validate/test solutions\n", inst.name().c_str(),
                            spec.n, sets.train.size(), sets.validate.size(), sets.test.size());
            }
        } else if (app.got_subcommand(train)) {
            for (const std::string& klass : spec.classes) {
                const opsel::Instance inst = opsel::load_class_instance(spec, klass);
                const opsel::SolutionSets sets = opsel::ensure_sets(spec, inst, klass, spec.n);
                for (int k : spec.portfolio_sizes) {
                    for (const std::string& agent : spec.agents) {
                        for (int seed = 0; seed < spec.seeds; ++seed) {
                            if (agent == "dqn-mlp" || agent == "dqn-gnn") {
                                const opsel::Arch arch =
                                    agent == "dqn-gnn" ? opsel::Arch::gat : opsel::Arch::mlp;
                                opsel::train_or_load_dqn(spec, inst, sets, klass, k, arch, seed);
                            } else if (agent == "lrw") {
                                opsel::train_or_load_roulette(spec, inst, sets, klass, k, seed);
                            } else {
                                throw std::invalid_argument("agent '" + agent + "' needs no training");
                            }
                            std::printf("ready: %s n=%d k=%d %s seed=%d\n", klass.c_str(), spec.n, k,
                                        agent.c_str(), seed);
                            std::fflush(stdout);
                        }
                    }
                }
            }
        } else if (app.got_subcommand(eval_mdp)) {
            run_study(spec, "mdp-table", opsel::run_mdp_table);
        } else if (app.got_subcommand(eval_alns)) {
            run_study(spec, "alns-table", opsel::run_alns_table);
        } else if (app.got_subcommand(generalize)) {
            run_study(spec, "generalization", opsel::run_generalization);
        } else if (app.got_subcommand(sweep_scale)) {
            run_study(spec, "scale-sweep", opsel::run_scale_sweep);
        } else if (app.got_subcommand(sweep_temp)) {
            run_study(spec, "temp-sweep", opsel::run_temperature_sweep);
        } else if (app.got_subcommand(report)) {
            const std::vector<opsel::ResultRow> rows = opsel::read_rows_csv(report_in);
            std::string out = report_in;
            const std::string suffix = ".csv";
            if (out.size() > suffix.size() && out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
                out.resize(out.size() - suffix.size());
            out += "_agg.csv";
            opsel::write_aggregate_csv(out, rows);
            std::printf("wrote %s\n", out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
