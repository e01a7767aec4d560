#ifndef XFER_SYNTHETIC_HPP
#define XFER_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "xfer/dataset.hpp"

namespace xfer {

/// Gaussian-blob task generator. Task 0 is the target; every other task's
/// class means interpolate between the target's means (relatedness = 1) and
/// an independent draw (relatedness = 0).
struct SyntheticSpec {
    int n_tasks = 4;
    int samples_per_task = 200;
    int dim = 10;
    double relatedness = 0.8;
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
    /// When set, all tasks share the target's negative-class mean (one
    /// common background distribution).
    bool shared_negatives = false;
};

struct SyntheticMeans {
    std::vector<std::vector<double>> positive;  // one mean per task
    std::vector<std::vector<double>> negative;
};

/// The exact class means generate_synthetic uses for a spec.
SyntheticMeans synthetic_task_means(const SyntheticSpec& spec);

/// Tasks "task0".."taskN-1", each half positive / half negative, samples drawn
/// from N(mean, noise_sigma^2 I). Deterministic per spec.
std::vector<TaskDataset> generate_synthetic(const SyntheticSpec& spec);

}  // namespace xfer

#endif
