#ifndef XFER_DATASET_HPP
#define XFER_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xfer/common.hpp"

namespace xfer {

/// One feature vector with a binary label in {-1,+1}.
struct LabeledSample {
    std::vector<double> features;
    int label = +1;
};

/// All samples of one task, in file order.
struct TaskDataset {
    std::string task_id;
    std::vector<LabeledSample> samples;

    std::size_t size() const { return samples.size(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().features.size(); }
    bool has_both_labels() const;
    /// (negatives, positives)
    std::pair<std::size_t, std::size_t> label_counts() const;
};

/// Per-sample nonnegative training weights.
using WeightVector = std::vector<double>;

/// The target task plus zero or more source tasks, all sharing one dimension.
struct TrainingBundle {
    TaskDataset target;
    std::vector<TaskDataset> sources;

    std::size_t source_sample_count() const {
        std::size_t n = 0;
        for (const auto& s : sources) n += s.size();
        return n;
    }
};

/// Parses the feature-file format: `task_id,label,f1,...,fd` per line, label
/// in {-1,+1} (0/1 accepted and mapped). An optional header line is detected
/// by a non-numeric second field. Tasks are grouped in first-appearance order.
std::vector<TaskDataset> parse_dataset(std::istream& in,
                                       std::optional<std::size_t> expected_dim = std::nullopt);
std::vector<TaskDataset> parse_dataset(const std::string& text,
                                       std::optional<std::size_t> expected_dim = std::nullopt);

/// Inverse of parse_dataset; parse(serialize(x)) == x.
void serialize_datasets(std::ostream& out, const std::vector<TaskDataset>& tasks);
std::string serialize_datasets(const std::vector<TaskDataset>& tasks);

/// Splits off n_train samples under a seeded permutation. For n_train >= 2 the
/// permutation is redrawn until the training part contains both labels; a
/// single-sample split carries whichever label the permutation yields.
std::pair<TaskDataset, TaskDataset> split_target(const TaskDataset& dataset, std::size_t n_train,
                                                 std::uint64_t rng_seed);

/// Scales weights to sum to 1. Throws on negative entries or zero total mass.
WeightVector normalize(const WeightVector& weights);

/// Sum of weights of misclassified samples divided by total weight.
double weighted_error(std::span<const int> labels, std::span<const int> predictions,
                      std::span<const double> weights);

}  // namespace xfer

#endif
