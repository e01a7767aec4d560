#ifndef XFER_INSTANCE_TRANSFER_HPP
#define XFER_INSTANCE_TRANSFER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xfer/boosting.hpp"
#include "xfer/dataset.hpp"

namespace xfer {

/// Weight-update rule family. Plain is MultiSource TrAdaBoost; the weighted
/// variants scale the update by the target/source balance factor eta, either
/// inside the exponent or as an outer multiplier.
enum class MSVariant { Plain, WeightedExponential, WeightedMultiplicative };

/// eta = n_target*100/n_source (Linear) or n_target^2*100/n_source (Squared).
enum class EtaSchedule { Linear, Squared };

/// AllRounds votes with every member; SecondHalf restricts the vote to the
/// later half of the rounds (ceil(T/2)..T, 1-indexed).
enum class VoteWindowMode { AllRounds, SecondHalf };

struct MSConfig {
    int rounds = 50;
    MSVariant variant = MSVariant::Plain;
    EtaSchedule eta_schedule = EtaSchedule::Linear;
    VoteWindowMode vote_window_mode = VoteWindowMode::AllRounds;
};

double eta_value(std::size_t n_target, std::size_t n_source, EtaSchedule schedule);

/// One source-sample update. mismatch is |h(x)-y| in 0/1 label space.
double update_source_weight(double w, double alpha_source, int mismatch, double eta,
                            MSVariant variant);

/// Mirror rule for target samples: the exponent is positive, so mistakes on
/// the target raise the weight instead of lowering it.
double update_target_weight(double w, double alpha_target, int mismatch, double eta,
                            MSVariant variant);

/// Per-round diagnostics for tests and debugging.
struct MSTrace {
    std::vector<int> chosen_source;
    std::vector<double> errors;             // clamped target errors
    std::vector<double> alphas;             // per-round alpha_T
    std::vector<double> concat_weight_sums; // after the round's normalization
    std::vector<double> source_mass_after_update;
    std::vector<double> target_mass_after_update;
    std::vector<double> misclassified_source_mass_after_update;
    double alpha_source = 0.0;
    double eta = 0.0;
};

/// MultiSource TrAdaBoost. Each round trains one candidate stump per source on
/// target+source_k under the current weights, keeps the candidate with the
/// lowest weighted error on the target, then reweights the target samples up
/// and every source's misclassified samples down. alpha_S is the TrAdaBoost
/// constant 0.5*ln(1 + sqrt(2*ln(N_S)/rounds)).
TransferEnsemble ms_tradaboost_train(const TrainingBundle& bundle, const MSConfig& config,
                                     MSTrace* trace = nullptr);

}  // namespace xfer

#endif
