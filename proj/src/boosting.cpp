#include "xfer/boosting.hpp"

#include <cmath>

#include "xfer/task_transfer.hpp"

namespace xfer {

int hypothesis_predict(const Hypothesis& hypothesis, std::span<const double> x) {
    if (const auto* stump = std::get_if<DecisionStump>(&hypothesis)) {
        return stump_predict(*stump, x);
    }
    const auto& expert = std::get<std::shared_ptr<const SourceExpert>>(hypothesis);
    return ensemble_predict(expert->model, x);
}

double ensemble_margin(const TransferEnsemble& ensemble, std::span<const double> x) {
    if (ensemble.window_lo >= ensemble.window_hi || ensemble.window_hi > ensemble.members.size()) {
        throw DataError("ensemble_margin: empty vote window");
    }
    double sum = 0.0;
    for (std::size_t t = ensemble.window_lo; t < ensemble.window_hi; ++t) {
        const auto& member = ensemble.members[t];
        sum += member.alpha * hypothesis_predict(member.hypothesis, x);
    }
    return sum;
}

int ensemble_predict(const TransferEnsemble& ensemble, std::span<const double> x) {
    return ensemble_margin(ensemble, x) < 0.0 ? -1 : +1;
}

double ensemble_accuracy(const TransferEnsemble& ensemble, const TaskDataset& data) {
    if (data.samples.empty()) throw DataError("ensemble_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
        if (ensemble_predict(ensemble, s.features) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double alpha_from_error(double error) {
    return 0.5 * std::log((1.0 - error) / error);
}

TransferEnsemble adaboost_train(const TaskDataset& dataset, int rounds, BoostTrace* trace) {
    if (rounds < 1) throw DataError("adaboost_train: rounds must be positive");
    if (!dataset.has_both_labels()) throw DataError("adaboost_train: dataset has a single label");

    const std::size_t n = dataset.size();
    WeightVector weights(n, 1.0 / static_cast<double>(n));
    TransferEnsemble ensemble;

    for (int t = 0; t < rounds; ++t) {
        const StumpFit fit = train_stump(dataset.samples, weights);
        const double raw_error = fit.weighted_error;
        if (raw_error >= 0.5) break;  // round dropped

        const double error = std::max(raw_error, kErrorClamp);
        const double alpha = alpha_from_error(error);
        ensemble.members.push_back({fit.stump, alpha});

        for (std::size_t i = 0; i < n; ++i) {
            const int pred = stump_predict(fit.stump, dataset.samples[i].features);
            weights[i] *= std::exp(-alpha * dataset.samples[i].label * pred);
        }
        weights = normalize(weights);

        if (trace) {
            trace->errors.push_back(error);
            trace->alphas.push_back(alpha);
            double sum = 0.0;
            for (double w : weights) sum += w;
            trace->weight_sums.push_back(sum);
        }
        if (raw_error == 0.0) break;  // perfect hypothesis, nothing left to reweight
    }
    ensemble.window_lo = 0;
    ensemble.window_hi = ensemble.members.size();
    return ensemble;
}

}  // namespace xfer
