#include <doctest.h>

#include <map>

#include "test_support.hpp"
#include "xfer/synthetic.hpp"
#include "xfer/task_transfer.hpp"

using namespace xfer;

namespace {

std::shared_ptr<const SourceExpert> constant_expert(const std::string& id, int label) {
    // one stump with a threshold below everything: always predicts `label`
    TransferEnsemble model;
    model.members.push_back({DecisionStump{0, -1e30, label}, 1.0});
    model.window_lo = 0;
    model.window_hi = 1;
    return std::make_shared<SourceExpert>(SourceExpert{id, std::move(model)});
}

}  // namespace

TEST_CASE("phase 1 trains one expert per source in order") {
    Rng rng(101);
    std::vector<TaskDataset> sources;
    sources.push_back(testsupport::random_dataset(rng, 12, 2, "s0"));
    sources.push_back(testsupport::random_dataset(rng, 12, 2, "s1"));
    sources.push_back(testsupport::random_dataset(rng, 12, 2, "s2"));
    const auto experts = task_phase1(sources, 10);
    REQUIRE(experts.size() == 3);
    CHECK(experts[0]->origin_task == "s0");
    CHECK(experts[1]->origin_task == "s1");
    CHECK(experts[2]->origin_task == "s2");

    // a separable source yields a perfect expert on itself
    const auto separable = testsupport::make_1d({1, 2, 3, 4}, {-1, -1, +1, +1}, "sep");
    const auto sep_experts = task_phase1({separable}, 10);
    CHECK(ensemble_accuracy(sep_experts[0]->model, separable) == 1.0);
}

TEST_CASE("phase 1 handles an empty source list and rejects single-label sources") {
    CHECK(task_phase1({}, 10).empty());
    TaskDataset bad{"b", {{{1.0}, +1}, {{2.0}, +1}}};
    CHECK_THROWS_AS(task_phase1({bad}, 10), DataError);
}

TEST_CASE("phase 2 picks a perfect expert and stops") {
    Rng rng(102);
    const auto target = testsupport::random_dataset(rng, 10, 2, "t");
    const auto perfect = task_phase1({target}, 20).front();

    TaskBoostTrace trace;
    const auto result = task_phase2(target, {perfect}, 25, false, &trace);
    CHECK(!result.no_useful_expert);
    CHECK(result.ensemble.size() == 1);  // degenerate reweight stops the loop
    CHECK(ensemble_accuracy(result.ensemble, target) == 1.0);
}

TEST_CASE("phase 2 never selects an expert at or above chance") {
    const auto target = testsupport::make_1d({1, 2, 3, 4}, {-1, -1, +1, +1}, "t");
    const auto good = task_phase1({target}, 10).front();
    auto flipped_data = target;
    for (auto& s : flipped_data.samples) s.label = -s.label;
    const auto flipped = task_phase1({flipped_data}, 10).front();

    TaskBoostTrace trace;
    const auto result = task_phase2(target, {flipped, good}, 15, false, &trace);
    CHECK(!result.no_useful_expert);
    for (int sel : trace.selected) CHECK(sel == 1);
    for (double err : trace.errors) CHECK(err < 0.5);
    for (double sum : trace.weight_sums) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phase 2 reports an all-useless pool distinctly") {
    const auto target = testsupport::make_1d({1, 2, 3, 4}, {-1, +1, -1, +1}, "t");
    // constant experts are exactly at chance on this balanced target
    const auto result = task_phase2(target, {constant_expert("c+", +1), constant_expert("c-", -1)}, 10);
    CHECK(result.no_useful_expert);
    CHECK(result.ensemble.empty());
}

TEST_CASE("phase 2 error paths") {
    const auto target = testsupport::make_1d({1, 2}, {-1, +1}, "t");
    CHECK_THROWS_AS(task_phase2(target, {}, 10), DataError);
    CHECK_THROWS_AS(task_phase2(target, {constant_expert("c", +1)}, 0), DataError);
}

TEST_CASE("remove_selected retires experts from the pool") {
    Rng rng(103);
    const auto target = testsupport::random_dataset(rng, 14, 2, "t");
    std::vector<TaskDataset> sources;
    TaskDataset near = target;
    near.task_id = "near";
    sources.push_back(near);
    sources.push_back(testsupport::random_dataset(rng, 14, 2, "other"));
    const auto experts = task_phase1(sources, 10);

    TaskBoostTrace trace;
    task_phase2(target, experts, 2, true, &trace);
    if (trace.selected.size() == 2) {
        CHECK(trace.selected[0] != trace.selected[1]);
    }
}

TEST_CASE("the expert from the target's own distribution collects the most vote weight") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.n_tasks = 3;
        spec.samples_per_task = 60;
        spec.dim = 4;
        spec.relatedness = 0.0;  // unrelated sources
        spec.noise_sigma = 1.0;
        spec.seed = seed;
        auto tasks = generate_synthetic(spec);

        // sources: the target's own distribution plus two unrelated tasks
        TaskDataset same = tasks[0];
        same.task_id = "same";
        std::vector<TaskDataset> sources{same, tasks[1], tasks[2]};
        const auto experts = task_phase1(sources, 25);

        const auto [train, test] = split_target(tasks[0], 10, seed);
        TaskBoostTrace trace;
        const auto result = task_phase2(train, experts, 25, false, &trace);
        if (result.no_useful_expert) continue;

        std::map<int, double> cumulative;
        for (std::size_t t = 0; t < trace.selected.size(); ++t) {
            cumulative[trace.selected[t]] += trace.alphas[t];
        }
        int best = -1;
        double best_alpha = -1.0;
        for (const auto& [expert, alpha] : cumulative) {
            if (alpha > best_alpha) {
                best_alpha = alpha;
                best = expert;
            }
        }
        if (best == 0) ++wins;
    }
    CHECK(wins >= 18);
}
