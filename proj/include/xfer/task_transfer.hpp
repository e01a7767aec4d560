#ifndef XFER_TASK_TRANSFER_HPP
#define XFER_TASK_TRANSFER_HPP

#include <memory>
#include <string>
#include <vector>

#include "xfer/boosting.hpp"
#include "xfer/dataset.hpp"

namespace xfer {

/// An AdaBoost model trained on one source dataset, reused as a weak
/// hypothesis during phase 2.
struct SourceExpert {
    std::string origin_task;
    TransferEnsemble model;
};

/// Phase 1: one off-the-shelf AdaBoost model per source, order preserved.
std::vector<std::shared_ptr<const SourceExpert>> task_phase1(
    const std::vector<TaskDataset>& sources, int rounds);

struct TaskBoostResult {
    TransferEnsemble ensemble;
    /// True when no expert beat chance in round 1, so the ensemble is empty.
    bool no_useful_expert = false;
};

struct TaskBoostTrace {
    std::vector<int> selected;
    std::vector<double> errors;
    std::vector<double> alphas;
    std::vector<double> weight_sums;
};

/// Phase 2: boosts over the expert pool with AdaBoost's weight update on the
/// target. Experts stay in the pool after selection unless remove_selected is
/// set. Stops when the best expert's error reaches 0.5.
TaskBoostResult task_phase2(const TaskDataset& target,
                            const std::vector<std::shared_ptr<const SourceExpert>>& experts,
                            int rounds, bool remove_selected = false,
                            TaskBoostTrace* trace = nullptr);

}  // namespace xfer

#endif
