#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "xfer/forest_transfer.hpp"
#include "xfer/synthetic.hpp"

using namespace xfer;

namespace {

std::vector<const LabeledSample*> view(const TaskDataset& data) {
    std::vector<const LabeledSample*> v;
    for (const auto& s : data.samples) v.push_back(&s);
    return v;
}

// entropy of a two-class node, in bits
double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

int count_nodes(const TreeNode* node) {
    if (node->is_leaf()) return 1;
    return 1 + count_nodes(node->left.get()) + count_nodes(node->right.get());
}

std::unique_ptr<TreeNode> leaf_with(std::vector<double> mean, std::vector<double> variance,
                                    bool has_target, double p_pos) {
    auto node = std::make_unique<TreeNode>();
    node->mean = std::move(mean);
    node->variance = std::move(variance);
    node->has_target = has_target;
    node->p_pos = p_pos;
    node->n_target = has_target ? 1 : 0;
    node->n_total = 1;
    return node;
}

}  // namespace

TEST_CASE("information gain arithmetic") {
    const auto pure = testsupport::make_1d({1, 2, 3}, {+1, +1, +1});
    CHECK(task_info_gain(view(pure), Split{0, 2.0}) == 0.0);

    const auto balanced = testsupport::make_1d({1, 2, 3, 4}, {-1, -1, +1, +1});
    CHECK(task_info_gain(view(balanced), Split{0, 2.5}) == doctest::Approx(1.0).epsilon(1e-12));

    // 3+/1- split into (2+ | 1+,1-): H(0.25) - 0.5*H(0.5)
    const auto skewed = testsupport::make_1d({1, 2, 3, 4}, {+1, +1, +1, -1});
    const double gain = task_info_gain(view(skewed), Split{0, 2.5});
    CHECK(gain == doctest::Approx(h2(0.25) - 0.5).epsilon(1e-9));
    CHECK(gain == doctest::Approx(0.3112781).epsilon(1e-6));

    CHECK(task_info_gain({}, Split{0, 0.0}) == 0.0);  // empty task contributes nothing
}

TEST_CASE("information gain stays within [0, 1] bits") {
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
        const auto data = testsupport::random_dataset(rng, 2 + rng.below(20), 2);
        const Split split{static_cast<int>(rng.below(2)), rng.normal()};
        const double gain = task_info_gain(view(data), split);
        CHECK(gain >= 0.0);
        CHECK(gain <= 1.0);
    }
}

TEST_CASE("mixed objective combines target and source gains") {
    const auto skewed = testsupport::make_1d({1, 2, 3, 4}, {+1, +1, +1, -1});
    const auto balanced = testsupport::make_1d({1, 2, 3, 4}, {-1, -1, +1, +1});
    const std::vector<std::vector<const LabeledSample*>> per_task{view(skewed), view(balanced)};
    const Split split{0, 2.5};

    CHECK(mixed_objective(per_task, split, 0.0) ==
          doctest::Approx(task_info_gain(view(skewed), split)).epsilon(1e-12));

    const std::vector<std::vector<const LabeledSample*>> no_sources{view(skewed)};
    CHECK(mixed_objective(no_sources, split, 1.0) == 0.0);

    CHECK(mixed_objective(per_task, split, 0.8) == doctest::Approx(0.86226).epsilon(1e-4));

    // affine in gamma: value at 0.5 is the average of the endpoints
    const double at0 = mixed_objective(per_task, split, 0.0);
    const double at1 = mixed_objective(per_task, split, 1.0);
    const double at_half = mixed_objective(per_task, split, 0.5);
    CHECK(at_half == doctest::Approx(0.5 * (at0 + at1)).epsilon(1e-12));
}

TEST_CASE("depth limit bounds the tree") {
    Rng rng(302);
    TrainingBundle bundle{testsupport::random_dataset(rng, 30, 3), {}};
    TLDFConfig config;
    config.max_depth = 1;
    const auto tree = grow_tree(bundle, config, 9);
    CHECK(count_nodes(tree.root.get()) <= 3);
}

TEST_CASE("gamma = 0 reduces to a target-only tree") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.n_tasks = 3;
        spec.samples_per_task = 40;
        spec.dim = 4;
        spec.relatedness = 0.5;
        spec.seed = 7000 + seed;
        const auto tasks = generate_synthetic(spec);

        TrainingBundle with_sources{tasks[0], {tasks[1], tasks[2]}};
        TrainingBundle target_only{tasks[0], {}};

        TLDFConfig config;
        config.gamma = 0.0;
        config.max_depth = 6;
        const auto a = grow_tree(with_sources, config, seed);
        const auto b = grow_tree(target_only, config, seed);
        CHECK(tree_structure_equal(a.root.get(), b.root.get()));
    }
}

TEST_CASE("a feature that separates target and sources is chosen at the root") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(400 + seed);
        TrainingBundle bundle;
        // feature 0 separates every task at 0; feature 1 is noise
        const auto fill = [&](const std::string& id) {
            TaskDataset d{id, {}};
            for (int i = 0; i < 30; ++i) {
                const int label = i % 2 == 0 ? +1 : -1;
                const double x0 = label * (1.0 + rng.uniform01());
                d.samples.push_back({{x0, rng.normal() * 3.0}, label});
            }
            return d;
        };
        bundle.target = fill("t");
        bundle.sources.push_back(fill("s1"));
        bundle.sources.push_back(fill("s2"));

        TLDFConfig config;
        config.n_feature_candidates = 2;
        const auto tree = grow_tree(bundle, config, seed);
        REQUIRE(!tree.root->is_leaf());
        if (tree.root->feature == 0) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("label propagation copies the nearest target leaf") {
    // single target-bearing leaf: everyone copies it
    {
        TLDFTree tree;
        auto root = std::make_unique<TreeNode>();
        root->feature = 0;
        root->threshold = 0.0;
        root->left = leaf_with({-1.0, 0.0}, {1.0, 1.0}, true, 0.9);
        root->right = leaf_with({4.0, 4.0}, {1.0, 1.0}, false, 0.5);
        tree.root = std::move(root);
        propagate_labels(tree, 1e-6);
        CHECK(tree.root->right->p_pos == 0.9);
        CHECK(!tree.degenerate);
    }

    // two candidates at (0,0) and (10,10) with unit covariance: (1,1) copies (0,0)
    {
        TLDFTree tree;
        auto root = std::make_unique<TreeNode>();
        root->feature = 0;
        root->threshold = 0.0;
        auto inner = std::make_unique<TreeNode>();
        inner->feature = 1;
        inner->threshold = 0.0;
        inner->left = leaf_with({0.0, 0.0}, {1.0, 1.0}, true, 0.25);
        inner->right = leaf_with({10.0, 10.0}, {1.0, 1.0}, true, 0.75);
        root->left = std::move(inner);
        root->right = leaf_with({1.0, 1.0}, {1.0, 1.0}, false, 0.5);
        tree.root = std::move(root);
        propagate_labels(tree, 1e-6);
        CHECK(tree.root->right->p_pos == 0.25);
    }

    // all-target trees are untouched; no-target trees are degenerate
    {
        TLDFTree tree;
        tree.fallback_p_pos = 0.6;
        tree.root = leaf_with({0.0}, {1.0}, false, 0.5);
        propagate_labels(tree, 1e-6);
        CHECK(tree.degenerate);
        CHECK(tree.root->p_pos == 0.6);
    }
}

TEST_CASE("after propagation every leaf has a posterior") {
    Rng rng(303);
    SyntheticSpec spec;
    spec.n_tasks = 3;
    spec.samples_per_task = 30;
    spec.dim = 3;
    spec.relatedness = 0.2;
    spec.seed = 99;
    const auto tasks = generate_synthetic(spec);
    const auto [train, test] = split_target(tasks[0], 4, 1);
    TrainingBundle bundle{train, {tasks[1], tasks[2]}};

    TLDFConfig config;
    const auto forest = tldf_train(bundle, config);
    REQUIRE(forest.trees.size() == 3);
    for (const auto& s : test.samples) {
        const double p = forest_posterior(forest, s.features);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("forest prediction combines tree posteriors") {
    const auto tree_with = [](double p) {
        TLDFTree tree;
        tree.root = leaf_with({0.0}, {1.0}, true, p);
        return tree;
    };
    TLDFForest forest;
    forest.trees.push_back(tree_with(0.9));
    const std::vector<double> x{0.0};
    CHECK(forest_predict(forest, x) == +1);  // single tree

    forest.trees.push_back(tree_with(0.8));
    forest.trees.push_back(tree_with(0.7));
    CHECK(forest_predict(forest, x) == +1);  // unanimous

    forest.trees[1] = tree_with(0.1);
    forest.trees[2] = tree_with(0.2);
    CHECK(forest_posterior(forest, x) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(forest_predict(forest, x) == -1);  // 2-vs-1 disagreement

    // exact half goes positive
    forest.trees[2] = tree_with(0.5);
    forest.trees[1] = tree_with(0.6);
    CHECK(forest_posterior(forest, x) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    TLDFForest tie;
    tie.trees.push_back(tree_with(0.5));
    CHECK(forest_predict(tie, x) == +1);
}

TEST_CASE("tldf training is deterministic per seed") {
    Rng rng(304);
    SyntheticSpec spec;
    spec.n_tasks = 2;
    spec.samples_per_task = 40;
    spec.dim = 3;
    spec.seed = 5;
    const auto tasks = generate_synthetic(spec);
    TrainingBundle bundle{tasks[0], {tasks[1]}};
    TLDFConfig config;
    config.rng_seed = 42;
    const auto f1 = tldf_train(bundle, config);
    const auto f2 = tldf_train(bundle, config);
    REQUIRE(f1.trees.size() == f2.trees.size());
    for (std::size_t i = 0; i < f1.trees.size(); ++i) {
        CHECK(tree_structure_equal(f1.trees[i].root.get(), f2.trees[i].root.get()));
    }
}
