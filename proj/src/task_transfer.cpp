#include "xfer/task_transfer.hpp"

#include <algorithm>
#include <cmath>

namespace xfer {

std::vector<std::shared_ptr<const SourceExpert>> task_phase1(
    const std::vector<TaskDataset>& sources, int rounds) {
    std::vector<std::shared_ptr<const SourceExpert>> experts;
    experts.reserve(sources.size());
    for (const auto& src : sources) {
        if (!src.has_both_labels()) {
            throw DataError("task_phase1: source '" + src.task_id + "' has a single label");
        }
        experts.push_back(std::make_shared<SourceExpert>(
            SourceExpert{src.task_id, adaboost_train(src, rounds)}));
    }
    return experts;
}

TaskBoostResult task_phase2(const TaskDataset& target,
                            const std::vector<std::shared_ptr<const SourceExpert>>& experts,
                            int rounds, bool remove_selected, TaskBoostTrace* trace) {
    if (rounds < 1) throw DataError("task_phase2: rounds must be positive");
    if (experts.empty()) throw DataError("task_phase2: empty expert pool");
    if (target.samples.empty()) throw DataError("task_phase2: empty target");

    const std::size_t n = target.size();
    WeightVector weights(n, 1.0 / static_cast<double>(n));

    // Expert predictions are fixed across rounds; cache them.
    std::vector<std::vector<int>> predictions(experts.size(), std::vector<int>(n));
    for (std::size_t e = 0; e < experts.size(); ++e) {
        for (std::size_t i = 0; i < n; ++i) {
            predictions[e][i] = ensemble_predict(experts[e]->model, target.samples[i].features);
        }
    }

    std::vector<bool> available(experts.size(), true);
    TransferEnsemble ensemble;
    for (int t = 0; t < rounds; ++t) {
        int best = -1;
        double best_error = 0.0;
        for (std::size_t e = 0; e < experts.size(); ++e) {
            if (!available[e]) continue;
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (predictions[e][i] != target.samples[i].label) err += weights[i];
            }
            if (best < 0 || err < best_error) {
                best = static_cast<int>(e);
                best_error = err;
            }
        }
        if (best < 0) break;            // pool exhausted
        if (best_error >= 0.5) break;   // no expert beats chance

        const double error = std::clamp(best_error, kErrorClamp, 0.5 - kErrorClamp);
        const double alpha = alpha_from_error(error);
        ensemble.members.push_back({experts[best], alpha});
        if (remove_selected) available[best] = false;

        for (std::size_t i = 0; i < n; ++i) {
            weights[i] *= std::exp(-alpha * target.samples[i].label * predictions[best][i]);
        }
        weights = normalize(weights);

        if (trace) {
            trace->selected.push_back(best);
            trace->errors.push_back(error);
            trace->alphas.push_back(alpha);
            double sum = 0.0;
            for (double w : weights) sum += w;
            trace->weight_sums.push_back(sum);
        }
        if (best_error == 0.0) break;  // perfect expert, reweighting is degenerate
    }

    ensemble.window_lo = 0;
    ensemble.window_hi = ensemble.members.size();
    const bool no_useful_expert = ensemble.members.empty();
    return {std::move(ensemble), no_useful_expert};
}

}  // namespace xfer
