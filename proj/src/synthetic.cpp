#include "xfer/synthetic.hpp"

#include "xfer/rng.hpp"

namespace xfer {

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.n_tasks < 1) throw DataError("generate_synthetic: n_tasks must be positive");
    if (spec.samples_per_task < 2) throw DataError("generate_synthetic: need at least 2 samples per task");
    if (spec.dim < 2) throw DataError("generate_synthetic: dim must be at least 2");
    if (spec.relatedness < 0.0 || spec.relatedness > 1.0) {
        throw DataError("generate_synthetic: relatedness must lie in [0,1]");
    }
    if (spec.noise_sigma <= 0.0) throw DataError("generate_synthetic: noise_sigma must be positive");
}

std::vector<double> draw_mean(Rng& rng, int dim) {
    std::vector<double> m(static_cast<std::size_t>(dim));
    for (auto& v : m) v = rng.normal();
    return m;
}

}  // namespace

SyntheticMeans synthetic_task_means(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(derive_seed(spec.seed, "means"));
    SyntheticMeans means;
    means.positive.push_back(draw_mean(rng, spec.dim));
    means.negative.push_back(draw_mean(rng, spec.dim));
    const double rel = spec.relatedness;
    for (int t = 1; t < spec.n_tasks; ++t) {
        const auto indep_pos = draw_mean(rng, spec.dim);
        const auto indep_neg = draw_mean(rng, spec.dim);
        std::vector<double> pos(static_cast<std::size_t>(spec.dim)),
            neg(static_cast<std::size_t>(spec.dim));
        for (int f = 0; f < spec.dim; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            pos[fi] = rel * means.positive[0][fi] + (1.0 - rel) * indep_pos[fi];
            neg[fi] = rel * means.negative[0][fi] + (1.0 - rel) * indep_neg[fi];
        }
        if (spec.shared_negatives) neg = means.negative[0];
        means.positive.push_back(std::move(pos));
        means.negative.push_back(std::move(neg));
    }
    return means;
}

std::vector<TaskDataset> generate_synthetic(const SyntheticSpec& spec) {
    const SyntheticMeans means = synthetic_task_means(spec);
    std::vector<TaskDataset> tasks;
    tasks.reserve(static_cast<std::size_t>(spec.n_tasks));
    for (int t = 0; t < spec.n_tasks; ++t) {
        Rng rng(derive_seed(derive_seed(spec.seed, "samples"), static_cast<std::uint64_t>(t)));
        TaskDataset task{"task" + std::to_string(t), {}};
        const int n_pos = (spec.samples_per_task + 1) / 2;
        const auto ti = static_cast<std::size_t>(t);
        for (int i = 0; i < spec.samples_per_task; ++i) {
            const bool positive = i < n_pos;
            const auto& mean = positive ? means.positive[ti] : means.negative[ti];
            LabeledSample s;
            s.label = positive ? +1 : -1;
            s.features.resize(static_cast<std::size_t>(spec.dim));
            for (int f = 0; f < spec.dim; ++f) {
                s.features[static_cast<std::size_t>(f)] =
                    mean[static_cast<std::size_t>(f)] + spec.noise_sigma * rng.normal();
            }
            task.samples.push_back(std::move(s));
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

}  // namespace xfer
