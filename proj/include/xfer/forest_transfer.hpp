#ifndef XFER_FOREST_TRANSFER_HPP
#define XFER_FOREST_TRANSFER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "xfer/dataset.hpp"

namespace xfer {

struct TLDFConfig {
    double gamma = 0.8;
    int max_depth = 10;
    int n_trees = 3;
    int n_feature_candidates = 0;  // 0 resolves to ceil(sqrt(d))
    int n_threshold_candidates = 10;
    int min_samples_split = 2;
    double cov_epsilon = 1e-6;
    std::uint64_t rng_seed = 0;
    bool majority_vote = false;  // default combines leaf posteriors
};

struct Split {
    int feature = 0;
    double threshold = 0.0;
};

/// Shannon information gain (bits) of the split on one task's samples at a
/// node; an empty task contributes 0. Samples go right when
/// x[feature] >= threshold.
double task_info_gain(const std::vector<const LabeledSample*>& task_samples, const Split& split);

/// (1-gamma) * target gain + gamma * sum of source gains; per_task[0] is the
/// target.
double mixed_objective(const std::vector<std::vector<const LabeledSample*>>& per_task,
                       const Split& split, double gamma);

/// Internal when feature >= 0, leaf otherwise. Leaf statistics cover every
/// training sample that reached the leaf; the posterior covers only target
/// samples and is copied in by propagation when the leaf has none.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;

    bool has_target = false;
    double p_pos = 0.5;  // target-class posterior
    std::vector<double> mean;
    std::vector<double> variance;  // diagonal, population form
    std::size_t n_total = 0;
    std::size_t n_target = 0;

    bool is_leaf() const { return feature < 0; }
};

struct TLDFTree {
    std::unique_ptr<TreeNode> root;
    bool degenerate = false;   // no leaf holds a target sample
    double fallback_p_pos = 0.5;  // target prior, used when degenerate
};

/// Grows one tree with randomized split candidates: n_feature_candidates
/// features drawn without replacement, n_threshold_candidates thresholds per
/// feature drawn uniformly over the node's target value range (all-sample
/// range when the node has no target samples). The best candidate maximizes
/// mixed_objective; ties go to the lowest feature index, then threshold.
TLDFTree grow_tree(const TrainingBundle& bundle, const TLDFConfig& config,
                   std::uint64_t tree_seed);

/// Copies the posterior of the nearest target-bearing leaf into each leaf
/// without target samples. Distance is Mahalanobis over the leaf means with
/// the elementwise mean of the two diagonal covariances plus cov_epsilon*I.
/// A tree with no target-bearing leaf is marked degenerate.
void propagate_labels(TLDFTree& tree, double cov_epsilon);

struct TLDFForest {
    std::vector<TLDFTree> trees;
    bool majority_vote = false;
};

/// Grows and propagates n_trees trees with per-tree derived seeds.
TLDFForest tldf_train(const TrainingBundle& bundle, const TLDFConfig& config);

/// Mean leaf posterior across trees (degenerate trees contribute their
/// fallback prior).
double forest_posterior(const TLDFForest& forest, std::span<const double> x);

/// Sign of posterior - 1/2, tie -> +1. Majority vote over per-tree signs when
/// the forest was trained with the flag.
int forest_predict(const TLDFForest& forest, std::span<const double> x);

double forest_accuracy(const TLDFForest& forest, const TaskDataset& data);

/// Structural equality of splits, leaf placement, and leaf posteriors.
bool tree_structure_equal(const TreeNode* a, const TreeNode* b);

}  // namespace xfer

#endif
