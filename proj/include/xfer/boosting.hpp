#ifndef XFER_BOOSTING_HPP
#define XFER_BOOSTING_HPP

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "xfer/dataset.hpp"
#include "xfer/stump.hpp"

namespace xfer {

struct SourceExpert;  // pre-trained AdaBoost model, see task_transfer.hpp

/// A voting member: either a stump trained in-loop or a whole source expert.
using Hypothesis = std::variant<DecisionStump, std::shared_ptr<const SourceExpert>>;

struct EnsembleMember {
    Hypothesis hypothesis;
    double alpha = 0.0;
};

/// Weighted-vote classifier shared by every boosting trainer. Only members in
/// [window_lo, window_hi) vote at prediction time.
struct TransferEnsemble {
    std::vector<EnsembleMember> members;
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;

    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
};

int hypothesis_predict(const Hypothesis& hypothesis, std::span<const double> x);

/// Signed vote sum over the window.
double ensemble_margin(const TransferEnsemble& ensemble, std::span<const double> x);

/// Sign of the vote sum; an exact zero returns +1.
int ensemble_predict(const TransferEnsemble& ensemble, std::span<const double> x);

double ensemble_accuracy(const TransferEnsemble& ensemble, const TaskDataset& data);

/// 0.5 * ln((1 - error) / error)
double alpha_from_error(double error);

/// Floor applied to round errors so vote weights stay finite.
inline constexpr double kErrorClamp = 1e-10;

/// Per-round diagnostics; weight_sums hold the post-normalization mass.
struct BoostTrace {
    std::vector<double> errors;  // clamped values used for alpha
    std::vector<double> alphas;
    std::vector<double> weight_sums;
};

/// Standard AdaBoost over decision stumps. A round with error >= 0.5 is
/// dropped and training stops; a perfect round is kept with clamped error and
/// training stops. The vote window spans all retained members.
TransferEnsemble adaboost_train(const TaskDataset& dataset, int rounds, BoostTrace* trace = nullptr);

}  // namespace xfer

#endif
