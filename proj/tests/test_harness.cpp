#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "opsel/harness.hpp"
#include "test_util.hpp"

using namespace opsel;
namespace fs = std::filesystem;

namespace {

Instance r101_20() { return truncate_instance(load_solomon_file(opsel_test::data_path("R101.txt")), 20); }

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::set<std::string> keys_of(const std::vector<Solution>& set) {
    std::set<std::string> keys;
    for (const auto& s : set) keys.insert(solution_key(s));
    return keys;
}

// Smallest spec that exercises the study pipelines without training a
// network: roulette and uniform agents only, a handful of episodes.
StudySpec micro_spec(const std::string& out_dir) {
    StudySpec spec;
    spec.classes = {"R"};
    spec.n = 15;
    spec.portfolio_sizes = {2, 5};
    spec.agents = {"lrw", "ran"};
    spec.seeds = 2;
    spec.set_size = 6;
    spec.episode = {3, 4};
    spec.dqn.total_steps = 240;
    spec.alns.iterations = 40;
    spec.alns.segment_length = 20;
    spec.alns_starts = 3;
    spec.data_dir = std::string(OPSEL_DATA_DIR);
    spec.out_dir = out_dir;
    spec.jobs = 1;
    return spec;
}

}  // namespace

TEST_CASE("solution pools are sized, valid, disjoint and reproducible") {
    const Instance inst = r101_20();
    SolutionSets sets = make_solution_sets(inst, 99, 16);
    CHECK(sets.train.size() == 16);
    CHECK(sets.validate.size() == 16);
    CHECK(sets.test.size() == 16);

    for (const auto* pool : {&sets.train, &sets.validate, &sets.test})
        for (const auto& s : *pool) {
            CHECK(s.complete());
            CHECK(validate_solution(inst, s).empty());
        }

    const auto train_keys = keys_of(sets.train);
    const auto val_keys = keys_of(sets.validate);
    const auto test_keys = keys_of(sets.test);
    for (const auto& k : val_keys) CHECK(train_keys.count(k) == 0);
    for (const auto& k : test_keys) CHECK(train_keys.count(k) == 0);
    for (const auto& k : test_keys) CHECK(val_keys.count(k) == 0);

    SolutionSets again = make_solution_sets(inst, 99, 16);
    CHECK(keys_of(again.train) == train_keys);
    SolutionSets other = make_solution_sets(inst, 100, 16);
    CHECK(keys_of(other.train) != train_keys);
}

TEST_CASE("solution sets survive disk and reject tampering") {
    const Instance inst = r101_20();
    SolutionSets sets = make_solution_sets(inst, 5, 8);
    const fs::path dir = fresh_dir("opsel_sets_test");
    const fs::path path = dir / "pool.sols";

    save_solution_set(path.string(), sets.train);
    CHECK(fs::exists(path));
    CHECK(fs::exists(dir / "pool.sols.fnv"));

    const std::vector<Solution> loaded = load_solution_set(path.string(), inst);
    REQUIRE(loaded.size() == sets.train.size());
    for (std::size_t i = 0; i < loaded.size(); ++i)
        CHECK(solution_key(loaded[i]) == solution_key(sets.train[i]));

    std::string text = slurp(path);
    const auto pos = text.rfind("t ");
    text[pos + 2] = text[pos + 2] == '1' ? '2' : '1';
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_WITH_AS(static_cast<void>(load_solution_set(path.string(), inst)),
                         doctest::Contains("fingerprint"), std::runtime_error);

    CHECK_THROWS_AS(static_cast<void>(load_solution_set((dir / "absent.sols").string(), inst)),
                    std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("confidence interval matches the normal approximation") {
    const auto [mean, half] = confidence_interval({1.0, 2.0, 3.0});
    CHECK(mean == doctest::Approx(2.0));
    CHECK(half == doctest::Approx(1.96 * 1.0 / std::sqrt(3.0)));
    CHECK_THROWS_AS(confidence_interval({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval({}), std::invalid_argument);
}

TEST_CASE("result rows round-trip through csv and aggregate over seeds") {
    const fs::path dir = fresh_dir("opsel_csv_test");
    const fs::path path = dir / "rows.csv";

    std::vector<ResultRow> rows;
    for (int seed = 0; seed < 3; ++seed)
        rows.push_back({"mdp-table", "R101", "R", 20, 12, "ran", seed, "cum_reward", 10.0 + seed});
    rows.push_back({"mdp-table", "R101", "R", 20, 12, "lrw", 0, "cum_reward", 42.5});

    write_rows_csv(path.string(), rows);
    const std::vector<ResultRow> back = read_rows_csv(path.string());
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].study == rows[i].study);
        CHECK(back[i].agent == rows[i].agent);
        CHECK(back[i].seed == rows[i].seed);
        CHECK(back[i].value == doctest::Approx(rows[i].value).epsilon(1e-12));
    }

    const fs::path agg = dir / "agg.csv";
    write_aggregate_csv(agg.string(), rows);
    std::ifstream in(agg);
    std::string line;
    std::getline(in, line);
    CHECK(line == "study,instance,class,n,portfolio,agent,metric,seeds,mean,ci95");
    std::vector<std::string> body;
    while (std::getline(in, line))
        if (!line.empty()) body.push_back(line);
    REQUIRE(body.size() == 2);
    // lrw sorts before ran; singleton groups carry a zero half-width.
    CHECK(body[0].find(",lrw,") != std::string::npos);
    CHECK(body[0].find(",1,42.5,0") != std::string::npos);
    CHECK(body[1].find(",ran,") != std::string::npos);
    CHECK(body[1].find(",3,11,") != std::string::npos);

    std::ofstream(dir / "broken.csv") << "study,wrong,header\n";
    CHECK_THROWS_AS(read_rows_csv((dir / "broken.csv").string()), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("task runner keeps task order regardless of worker count") {
    std::vector<std::function<std::vector<ResultRow>()>> tasks;
    for (int i = 0; i < 17; ++i)
        tasks.push_back([i]() {
            std::vector<ResultRow> rows;
            ResultRow r;
            r.study = "order";
            r.seed = i;
            r.value = i * 1.5;
            rows.push_back(r);
            if (i % 3 == 0) {
                r.metric = "extra";
                rows.push_back(r);
            }
            return rows;
        });

    const std::vector<ResultRow> serial = run_tasks(tasks, 1);
    const std::vector<ResultRow> parallel = run_tasks(tasks, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].seed == parallel[i].seed);
        CHECK(serial[i].metric == parallel[i].metric);
    }
    int last = -1;
    for (const auto& row : serial) {
        CHECK(row.seed >= last);
        last = row.seed;
    }

    tasks.emplace_back([]() -> std::vector<ResultRow> { throw std::runtime_error("task blew up"); });
    CHECK_THROWS_WITH_AS(run_tasks(tasks, 3), "task blew up", std::runtime_error);
}

TEST_CASE("class instances resolve to truncated benchmark files") {
    StudySpec spec = micro_spec((fs::temp_directory_path() / "opsel_unused").string());
    spec.classes = {"C", "R", "RC"};
    spec.n = 25;
    for (const std::string& klass : spec.classes) {
        const Instance inst = load_class_instance(spec, klass);
        CHECK(inst.n_customers() == 25);
        CHECK(inst.name().rfind(klass, 0) == 0);
    }
    spec.classes = {"bogus"};
    CHECK_THROWS(load_class_instance(spec, "bogus"));
}

TEST_CASE("pool files are generated once and reloaded verbatim") {
    const fs::path dir = fresh_dir("opsel_ensure_test");
    StudySpec spec = micro_spec(dir.string());
    const Instance inst = load_class_instance(spec, "R");

    SolutionSets first = ensure_sets(spec, inst, "R", spec.n);
    CHECK(fs::exists(dir / "sets" / "R15_train.sols"));
    CHECK(fs::exists(dir / "sets" / "R15_test.sols.fnv"));

    SolutionSets second = ensure_sets(spec, inst, "R", spec.n);
    CHECK(keys_of(first.train) == keys_of(second.train));
    CHECK(keys_of(first.test) == keys_of(second.test));
    fs::remove_all(dir);
}

TEST_CASE("study pipelines are deterministic end to end") {
    const fs::path dir_a = fresh_dir("opsel_micro_a");
    const fs::path dir_b = fresh_dir("opsel_micro_b");

    for (const fs::path* dir : {&dir_a, &dir_b}) {
        StudySpec spec = micro_spec(dir->string());
        write_study_outputs(spec, "mdp-table", run_mdp_table(spec));
        write_study_outputs(spec, "alns-table", run_alns_table(spec));
    }

    for (const char* name : {"mdp-table.csv", "mdp-table_agg.csv", "alns-table.csv", "alns-table_agg.csv"}) {
        const std::string a = slurp(dir_a / name);
        const std::string b = slurp(dir_b / name);
        CHECK(!a.empty());
        CHECK(a == b);
    }

    // Parallel workers must not change the result either.
    StudySpec spec = micro_spec(dir_a.string());
    spec.jobs = 4;
    const std::vector<ResultRow> rows = run_mdp_table(spec);
    const std::vector<ResultRow> ref = read_rows_csv((dir_a / "mdp-table.csv").string());
    REQUIRE(rows.size() == ref.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].agent == ref[i].agent);
        CHECK(rows[i].seed == ref[i].seed);
        // The reference came back through the csv, which keeps 10
        // significant digits.
        CHECK(rows[i].value == doctest::Approx(ref[i].value).epsilon(1e-9));
    }

    // Cells carry every configured agent, and the cached roulette weights on
    // disk make the rerun cheap: the model directory now holds .rw files.
    bool rw_seen = false;
    for (const auto& entry : fs::directory_iterator(dir_a / "models"))
        rw_seen |= entry.path().extension() == ".rw";
    CHECK(rw_seen);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("the temperature sweep refuses agents without a network") {
    StudySpec spec = micro_spec((fs::temp_directory_path() / "opsel_tau_test").string());
    spec.agents = {"lrw"};
    CHECK_THROWS_AS(run_temperature_sweep(spec), std::invalid_argument);
}
