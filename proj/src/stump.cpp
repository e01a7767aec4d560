#include "xfer/stump.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace xfer {

int stump_predict(const DecisionStump& stump, std::span<const double> x) {
    if (x.size() <= static_cast<std::size_t>(stump.feature)) {
        throw DataError("stump_predict: input dimension too small for feature index");
    }
    return x[stump.feature] >= stump.threshold ? stump.polarity : -stump.polarity;
}

StumpFit train_stump(std::span<const LabeledSample* const> samples, std::span<const double> weights) {
    const std::size_t n = samples.size();
    if (n == 0) throw DataError("train_stump: no samples");
    if (weights.size() != n) throw DataError("train_stump: weight/sample length mismatch");
    const std::size_t d = samples[0]->features.size();

    StumpFit best;
    bool have_best = false;
    std::vector<double> values(n);

    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) values[i] = samples[i]->features[f];

        std::vector<double> sorted(values);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

        std::vector<double> candidates;
        candidates.reserve(sorted.size());
        candidates.push_back(sorted.front() - 1.0);
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
        }

        for (double threshold : candidates) {
            // err_plus counts polarity +1 mistakes; a sample wrong under one
            // polarity is right under the other, so both come from one pass.
            double err_plus = 0.0, err_minus = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const int pred = values[i] >= threshold ? +1 : -1;
                if (pred != samples[i]->label) {
                    err_plus += weights[i];
                } else {
                    err_minus += weights[i];
                }
            }
            if (!have_best || err_plus < best.weighted_error) {
                best = {{static_cast<int>(f), threshold, +1}, err_plus};
                have_best = true;
            }
            if (err_minus < best.weighted_error) {
                best = {{static_cast<int>(f), threshold, -1}, err_minus};
            }
        }
    }
    return best;
}

StumpFit train_stump(const std::vector<LabeledSample>& samples, std::span<const double> weights) {
    std::vector<const LabeledSample*> ptrs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) ptrs[i] = &samples[i];
    return train_stump(ptrs, weights);
}

std::string stump_to_line(const DecisionStump& stump) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, stump.threshold);
    std::string line = "stump ";
    line += std::to_string(stump.feature);
    line += ' ';
    line.append(buf, res.ptr);
    line += ' ';
    line += std::to_string(stump.polarity);
    return line;
}

DecisionStump stump_from_line(const std::string& line) {
    std::istringstream in(line);
    std::string tag, threshold_text;
    DecisionStump stump;
    if (!(in >> tag >> stump.feature >> threshold_text >> stump.polarity) || tag != "stump") {
        throw DataError("stump_from_line: malformed stump line: " + line);
    }
    auto [ptr, ec] = std::from_chars(threshold_text.data(),
                                     threshold_text.data() + threshold_text.size(), stump.threshold);
    if (ec != std::errc{} || ptr != threshold_text.data() + threshold_text.size()) {
        throw DataError("stump_from_line: bad threshold: " + threshold_text);
    }
    if (stump.polarity != 1 && stump.polarity != -1) {
        throw DataError("stump_from_line: polarity must be +1 or -1");
    }
    return stump;
}

}  // namespace xfer
