#ifndef XFER_STUMP_HPP
#define XFER_STUMP_HPP

#include <span>
#include <vector>

#include "xfer/dataset.hpp"

namespace xfer {

/// Axis-aligned threshold rule: predicts polarity when x[feature] >= threshold
/// (inclusive), -polarity otherwise.
struct DecisionStump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = +1;

    bool operator==(const DecisionStump&) const = default;
};

int stump_predict(const DecisionStump& stump, std::span<const double> x);

struct StumpFit {
    DecisionStump stump;
    double weighted_error = 0.0;  // relative to total weight mass
};

/// Minimizes weighted 0-1 error over every (feature, threshold, polarity)
/// triple, where thresholds are the midpoints between consecutive distinct
/// feature values plus one sentinel below the minimum. Candidate errors are
/// direct sums in sample order; ties break toward the lowest feature index,
/// then the lowest threshold, then polarity +1.
StumpFit train_stump(std::span<const LabeledSample* const> samples, std::span<const double> weights);
StumpFit train_stump(const std::vector<LabeledSample>& samples, std::span<const double> weights);

/// `stump <feature> <threshold> <polarity>`, threshold round-trippable.
std::string stump_to_line(const DecisionStump& stump);
DecisionStump stump_from_line(const std::string& line);

}  // namespace xfer

#endif
