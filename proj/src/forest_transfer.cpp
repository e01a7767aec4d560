#include "xfer/forest_transfer.hpp"

#include <algorithm>
#include <cmath>

#include "xfer/rng.hpp"

namespace xfer {

namespace {

double entropy_bits(std::size_t pos, std::size_t neg) {
    const std::size_t n = pos + neg;
    if (n == 0 || pos == 0 || neg == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    const double q = 1.0 - p;
    return -p * std::log2(p) - q * std::log2(q);
}

struct LabelCounts {
    std::size_t pos = 0, neg = 0;
    std::size_t total() const { return pos + neg; }
};

LabelCounts count_labels(const std::vector<const LabeledSample*>& samples) {
    LabelCounts c;
    for (const auto* s : samples) (s->label > 0 ? c.pos : c.neg)++;
    return c;
}

bool goes_right(const LabeledSample& s, const Split& split) {
    return s.features[split.feature] >= split.threshold;
}

}  // namespace

double task_info_gain(const std::vector<const LabeledSample*>& task_samples, const Split& split) {
    if (task_samples.empty()) return 0.0;
    LabelCounts parent = count_labels(task_samples), right;
    for (const auto* s : task_samples) {
        if (goes_right(*s, split)) (s->label > 0 ? right.pos : right.neg)++;
    }
    const LabelCounts left{parent.pos - right.pos, parent.neg - right.neg};
    const double n = static_cast<double>(parent.total());
    const double gain = entropy_bits(parent.pos, parent.neg) -
                        (static_cast<double>(left.total()) / n) * entropy_bits(left.pos, left.neg) -
                        (static_cast<double>(right.total()) / n) * entropy_bits(right.pos, right.neg);
    return std::max(gain, 0.0);
}

double mixed_objective(const std::vector<std::vector<const LabeledSample*>>& per_task,
                       const Split& split, double gamma) {
    if (per_task.empty()) throw DataError("mixed_objective: no tasks");
    double value = (1.0 - gamma) * task_info_gain(per_task[0], split);
    for (std::size_t k = 1; k < per_task.size(); ++k) {
        value += gamma * task_info_gain(per_task[k], split);
    }
    return value;
}

namespace {

struct GrowContext {
    const TLDFConfig* config;
    std::size_t dim;
    int n_features;
    std::uint64_t tree_seed;
};

std::unique_ptr<TreeNode> make_leaf(const std::vector<std::vector<const LabeledSample*>>& per_task,
                                    double fallback_p_pos) {
    auto node = std::make_unique<TreeNode>();
    std::size_t n_total = 0;
    for (const auto& task : per_task) n_total += task.size();
    node->n_total = n_total;

    // mean and diagonal covariance over every sample that reached the leaf
    std::size_t dim = 0;
    for (const auto& task : per_task) {
        if (!task.empty()) {
            dim = task[0]->features.size();
            break;
        }
    }
    node->mean.assign(dim, 0.0);
    node->variance.assign(dim, 0.0);
    if (n_total > 0) {
        for (const auto& task : per_task) {
            for (const auto* s : task) {
                for (std::size_t f = 0; f < dim; ++f) node->mean[f] += s->features[f];
            }
        }
        for (std::size_t f = 0; f < dim; ++f) node->mean[f] /= static_cast<double>(n_total);
        for (const auto& task : per_task) {
            for (const auto* s : task) {
                for (std::size_t f = 0; f < dim; ++f) {
                    const double diff = s->features[f] - node->mean[f];
                    node->variance[f] += diff * diff;
                }
            }
        }
        for (std::size_t f = 0; f < dim; ++f) node->variance[f] /= static_cast<double>(n_total);
    }

    const LabelCounts target = count_labels(per_task[0]);
    node->n_target = target.total();
    node->has_target = target.total() > 0;
    node->p_pos = node->has_target
                      ? static_cast<double>(target.pos) / static_cast<double>(target.total())
                      : fallback_p_pos;
    return node;
}

std::unique_ptr<TreeNode> grow_node(const std::vector<std::vector<const LabeledSample*>>& per_task,
                                    int depth, std::uint64_t node_path, const GrowContext& ctx,
                                    double fallback_p_pos) {
    std::size_t n_total = 0;
    for (const auto& task : per_task) n_total += task.size();
    const bool can_split = depth < ctx.config->max_depth &&
                           n_total >= static_cast<std::size_t>(ctx.config->min_samples_split);

    // Each node draws from its own stream keyed by the root-to-node path, so
    // a rejected split attempt in one subtree cannot shift the draws of
    // another.
    Rng rng(derive_seed(ctx.tree_seed, node_path));

    Split best{};
    double best_objective = 0.0;
    bool have_best = false;
    if (can_split) {
        // feature candidates: partial Fisher-Yates prefix over [0, d)
        std::vector<int> features(ctx.dim);
        for (std::size_t f = 0; f < ctx.dim; ++f) features[f] = static_cast<int>(f);
        const int n_feat = std::min<int>(ctx.n_features, static_cast<int>(ctx.dim));
        for (int i = 0; i < n_feat; ++i) {
            const std::size_t j = i + rng.below(ctx.dim - static_cast<std::size_t>(i));
            std::swap(features[static_cast<std::size_t>(i)], features[j]);
        }

        // threshold range from the target samples when present, so candidate
        // draws depend only on the target subset at the node
        for (int i = 0; i < n_feat; ++i) {
            const int f = features[static_cast<std::size_t>(i)];
            double lo = 0.0, hi = 0.0;
            bool first = true;
            if (!per_task[0].empty()) {
                for (const auto* s : per_task[0]) {
                    const double v = s->features[static_cast<std::size_t>(f)];
                    if (first) {
                        lo = hi = v;
                        first = false;
                    } else {
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                }
            } else {
                for (const auto& task : per_task) {
                    for (const auto* s : task) {
                        const double v = s->features[static_cast<std::size_t>(f)];
                        if (first) {
                            lo = hi = v;
                            first = false;
                        } else {
                            lo = std::min(lo, v);
                            hi = std::max(hi, v);
                        }
                    }
                }
            }
            for (int c = 0; c < ctx.config->n_threshold_candidates; ++c) {
                const double threshold = rng.uniform(lo, hi);
                const Split split{f, threshold};
                const double objective = mixed_objective(per_task, split, ctx.config->gamma);
                const bool better =
                    !have_best || objective > best_objective ||
                    (objective == best_objective &&
                     (split.feature < best.feature ||
                      (split.feature == best.feature && split.threshold < best.threshold)));
                if (better && objective > 0.0) {
                    best = split;
                    best_objective = objective;
                    have_best = true;
                }
            }
        }
    }

    if (!have_best) return make_leaf(per_task, fallback_p_pos);

    std::vector<std::vector<const LabeledSample*>> left(per_task.size()), right(per_task.size());
    for (std::size_t k = 0; k < per_task.size(); ++k) {
        for (const auto* s : per_task[k]) {
            (goes_right(*s, best) ? right[k] : left[k]).push_back(s);
        }
    }

    auto node = std::make_unique<TreeNode>();
    node->feature = best.feature;
    node->threshold = best.threshold;
    node->left = grow_node(left, depth + 1, node_path * 2, ctx, fallback_p_pos);
    node->right = grow_node(right, depth + 1, node_path * 2 + 1, ctx, fallback_p_pos);
    return node;
}

void collect_leaves(TreeNode* node, std::vector<TreeNode*>& leaves) {
    if (node->is_leaf()) {
        leaves.push_back(node);
        return;
    }
    collect_leaves(node->left.get(), leaves);
    collect_leaves(node->right.get(), leaves);
}

double mahalanobis_sq(const TreeNode& a, const TreeNode& b, double cov_epsilon) {
    double dist = 0.0;
    for (std::size_t f = 0; f < a.mean.size(); ++f) {
        const double diff = a.mean[f] - b.mean[f];
        const double pooled = 0.5 * (a.variance[f] + b.variance[f]) + cov_epsilon;
        dist += diff * diff / pooled;
    }
    return dist;
}

const TreeNode* walk_to_leaf(const TreeNode* node, std::span<const double> x) {
    while (!node->is_leaf()) {
        node = x[static_cast<std::size_t>(node->feature)] >= node->threshold ? node->right.get()
                                                                             : node->left.get();
    }
    return node;
}

}  // namespace

TLDFTree grow_tree(const TrainingBundle& bundle, const TLDFConfig& config,
                   std::uint64_t tree_seed) {
    if (bundle.target.samples.empty()) throw DataError("grow_tree: empty target");
    const std::size_t d = bundle.target.dim();

    std::vector<std::vector<const LabeledSample*>> per_task(1 + bundle.sources.size());
    for (const auto& s : bundle.target.samples) per_task[0].push_back(&s);
    for (std::size_t k = 0; k < bundle.sources.size(); ++k) {
        for (const auto& s : bundle.sources[k].samples) per_task[k + 1].push_back(&s);
    }

    TLDFTree tree;
    const auto [neg, pos] = bundle.target.label_counts();
    tree.fallback_p_pos = static_cast<double>(pos) / static_cast<double>(pos + neg);

    GrowContext ctx;
    ctx.config = &config;
    ctx.dim = d;
    ctx.n_features = config.n_feature_candidates > 0
                         ? config.n_feature_candidates
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    ctx.tree_seed = tree_seed;
    tree.root = grow_node(per_task, 0, 1, ctx, tree.fallback_p_pos);
    return tree;
}

void propagate_labels(TLDFTree& tree, double cov_epsilon) {
    std::vector<TreeNode*> leaves;
    collect_leaves(tree.root.get(), leaves);

    std::vector<TreeNode*> with_target;
    for (auto* leaf : leaves) {
        if (leaf->has_target) with_target.push_back(leaf);
    }
    if (with_target.empty()) {
        tree.degenerate = true;
        for (auto* leaf : leaves) leaf->p_pos = tree.fallback_p_pos;
        return;
    }
    for (auto* leaf : leaves) {
        if (leaf->has_target) continue;
        TreeNode* nearest = with_target.front();
        double nearest_dist = mahalanobis_sq(*leaf, *nearest, cov_epsilon);
        for (std::size_t i = 1; i < with_target.size(); ++i) {
            const double dist = mahalanobis_sq(*leaf, *with_target[i], cov_epsilon);
            if (dist < nearest_dist) {  // ties keep the first leaf in order
                nearest_dist = dist;
                nearest = with_target[i];
            }
        }
        leaf->p_pos = nearest->p_pos;
    }
}

TLDFForest tldf_train(const TrainingBundle& bundle, const TLDFConfig& config) {
    if (config.n_trees < 1) throw DataError("tldf_train: n_trees must be positive");
    TLDFForest forest;
    forest.majority_vote = config.majority_vote;
    forest.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int i = 0; i < config.n_trees; ++i) {
        TLDFTree tree = grow_tree(bundle, config, derive_seed(config.rng_seed, static_cast<std::uint64_t>(i)));
        propagate_labels(tree, config.cov_epsilon);
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

double forest_posterior(const TLDFForest& forest, std::span<const double> x) {
    if (forest.trees.empty()) throw DataError("forest_posterior: empty forest");
    double sum = 0.0;
    for (const auto& tree : forest.trees) {
        sum += tree.degenerate ? tree.fallback_p_pos : walk_to_leaf(tree.root.get(), x)->p_pos;
    }
    return sum / static_cast<double>(forest.trees.size());
}

int forest_predict(const TLDFForest& forest, std::span<const double> x) {
    if (forest.majority_vote) {
        int votes = 0;
        for (const auto& tree : forest.trees) {
            const double p = tree.degenerate ? tree.fallback_p_pos
                                             : walk_to_leaf(tree.root.get(), x)->p_pos;
            votes += p >= 0.5 ? 1 : -1;
        }
        return votes >= 0 ? +1 : -1;
    }
    return forest_posterior(forest, x) >= 0.5 ? +1 : -1;
}

double forest_accuracy(const TLDFForest& forest, const TaskDataset& data) {
    if (data.samples.empty()) throw DataError("forest_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
        if (forest_predict(forest, s.features) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

bool tree_structure_equal(const TreeNode* a, const TreeNode* b) {
    if (a->is_leaf() != b->is_leaf()) return false;
    if (a->is_leaf()) return a->has_target == b->has_target && a->p_pos == b->p_pos;
    return a->feature == b->feature && a->threshold == b->threshold &&
           tree_structure_equal(a->left.get(), b->left.get()) &&
           tree_structure_equal(a->right.get(), b->right.get());
}

}  // namespace xfer
