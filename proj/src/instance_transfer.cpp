#include "xfer/instance_transfer.hpp"

#include <algorithm>
#include <cmath>

namespace xfer {

double eta_value(std::size_t n_target, std::size_t n_source, EtaSchedule schedule) {
    if (n_source == 0) throw DataError("eta_value: n_source must be positive");
    const double nt = static_cast<double>(n_target);
    const double ns = static_cast<double>(n_source);
    switch (schedule) {
        case EtaSchedule::Linear:
            return nt * 100.0 / ns;
        case EtaSchedule::Squared:
            return nt * nt * 100.0 / ns;
    }
    throw DataError("eta_value: unknown schedule");
}

double update_source_weight(double w, double alpha_source, int mismatch, double eta,
                            MSVariant variant) {
    if (w < 0.0) throw DataError("update_source_weight: negative weight");
    const double m = static_cast<double>(mismatch);
    switch (variant) {
        case MSVariant::Plain:
            return w * std::exp(-alpha_source * m);
        case MSVariant::WeightedExponential:
            return w * std::exp(-eta * alpha_source * m);
        case MSVariant::WeightedMultiplicative:
            return w * eta * std::exp(-alpha_source * m);
    }
    throw DataError("update_source_weight: unknown variant");
}

double update_target_weight(double w, double alpha_target, int mismatch, double eta,
                            MSVariant variant) {
    if (w < 0.0) throw DataError("update_target_weight: negative weight");
    const double m = static_cast<double>(mismatch);
    switch (variant) {
        case MSVariant::Plain:
            return w * std::exp(alpha_target * m);
        case MSVariant::WeightedExponential:
            return w * std::exp(eta * alpha_target * m);
        case MSVariant::WeightedMultiplicative:
            return w * eta * std::exp(alpha_target * m);
    }
    throw DataError("update_target_weight: unknown variant");
}

TransferEnsemble ms_tradaboost_train(const TrainingBundle& bundle, const MSConfig& config,
                                     MSTrace* trace) {
    if (config.rounds < 1) throw DataError("ms_tradaboost_train: rounds must be positive");
    if (bundle.sources.empty()) throw DataError("ms_tradaboost_train: no source datasets");

    const std::size_t n_target = bundle.target.size();
    const std::size_t n_source = bundle.source_sample_count();
    if (n_target == 0) throw DataError("ms_tradaboost_train: empty target");
    if (n_source == 0) throw DataError("ms_tradaboost_train: sources are empty");

    // Flat sample pool: target first, then each source in order.
    std::vector<const LabeledSample*> pool;
    pool.reserve(n_target + n_source);
    for (const auto& s : bundle.target.samples) pool.push_back(&s);
    std::vector<std::pair<std::size_t, std::size_t>> source_ranges;  // [begin,end) into pool
    for (const auto& src : bundle.sources) {
        const std::size_t begin = pool.size();
        for (const auto& s : src.samples) pool.push_back(&s);
        source_ranges.emplace_back(begin, pool.size());
    }

    {
        bool pos = false, neg = false;
        for (const auto* s : pool) (s->label > 0 ? pos : neg) = true;
        if (!pos || !neg) {
            throw DataError("ms_tradaboost_train: combined target+source pool has a single label");
        }
    }

    const std::size_t n_total = pool.size();
    const double alpha_source =
        0.5 * std::log(1.0 + std::sqrt(2.0 * std::log(static_cast<double>(n_source)) /
                                       static_cast<double>(config.rounds)));
    const double eta = eta_value(n_target, n_source, config.eta_schedule);
    if (trace) {
        trace->alpha_source = alpha_source;
        trace->eta = eta;
    }

    WeightVector weights(n_total, 1.0 / static_cast<double>(n_total));
    TransferEnsemble ensemble;
    std::vector<const LabeledSample*> candidate_samples;
    std::vector<double> candidate_weights;
    std::vector<int> predictions(n_total);

    for (int t = 0; t < config.rounds; ++t) {
        weights = normalize(weights);
        if (trace) {
            double sum = 0.0;
            for (double w : weights) sum += w;
            trace->concat_weight_sums.push_back(sum);
        }
        const double target_mass = [&] {
            double m = 0.0;
            for (std::size_t i = 0; i < n_target; ++i) m += weights[i];
            return m;
        }();

        // One candidate stump per source, trained on target + that source.
        int best_source = -1;
        double best_error = 0.0;
        DecisionStump best_stump;
        for (std::size_t k = 0; k < source_ranges.size(); ++k) {
            const auto [begin, end] = source_ranges[k];
            candidate_samples.clear();
            candidate_weights.clear();
            for (std::size_t i = 0; i < n_target; ++i) {
                candidate_samples.push_back(pool[i]);
                candidate_weights.push_back(weights[i]);
            }
            for (std::size_t i = begin; i < end; ++i) {
                candidate_samples.push_back(pool[i]);
                candidate_weights.push_back(weights[i]);
            }
            const auto normalized = normalize(candidate_weights);
            const StumpFit fit = train_stump(candidate_samples, normalized);

            double err = 0.0;
            for (std::size_t i = 0; i < n_target; ++i) {
                if (stump_predict(fit.stump, pool[i]->features) != pool[i]->label) {
                    err += weights[i];
                }
            }
            err = target_mass > 0.0 ? err / target_mass : 1.0;
            if (best_source < 0 || err < best_error) {
                best_source = static_cast<int>(k);
                best_error = err;
                best_stump = fit.stump;
            }
        }

        if (best_error >= 0.5) break;  // no candidate beats chance on the target
        const double error = std::clamp(best_error, kErrorClamp, 0.5 - kErrorClamp);
        const double alpha_target = alpha_from_error(error);

        for (std::size_t i = 0; i < n_total; ++i) {
            predictions[i] = stump_predict(best_stump, pool[i]->features);
        }
        for (std::size_t i = 0; i < n_target; ++i) {
            const int mismatch = predictions[i] != pool[i]->label ? 1 : 0;
            weights[i] = update_target_weight(weights[i], alpha_target, mismatch, eta,
                                              config.variant);
        }
        for (std::size_t i = n_target; i < n_total; ++i) {
            const int mismatch = predictions[i] != pool[i]->label ? 1 : 0;
            weights[i] = update_source_weight(weights[i], alpha_source, mismatch, eta,
                                              config.variant);
        }

        ensemble.members.push_back({best_stump, alpha_target});
        if (trace) {
            trace->chosen_source.push_back(best_source);
            trace->errors.push_back(error);
            trace->alphas.push_back(alpha_target);
            double source_mass = 0.0, miss_mass = 0.0, tgt_mass = 0.0;
            for (std::size_t i = 0; i < n_target; ++i) tgt_mass += weights[i];
            for (std::size_t i = n_target; i < n_total; ++i) {
                source_mass += weights[i];
                if (predictions[i] != pool[i]->label) miss_mass += weights[i];
            }
            trace->source_mass_after_update.push_back(source_mass);
            trace->target_mass_after_update.push_back(tgt_mass);
            trace->misclassified_source_mass_after_update.push_back(miss_mass);
        }
    }

    const std::size_t m = ensemble.members.size();
    ensemble.window_lo = (config.vote_window_mode == VoteWindowMode::SecondHalf && m > 0)
                             ? (m - 1) / 2
                             : 0;
    ensemble.window_hi = m;
    return ensemble;
}

}  // namespace xfer
