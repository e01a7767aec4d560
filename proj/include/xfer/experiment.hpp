#ifndef XFER_EXPERIMENT_HPP
#define XFER_EXPERIMENT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "xfer/config.hpp"
#include "xfer/dataset.hpp"
#include "xfer/model_io.hpp"

namespace xfer {

struct RunRecord {
    std::string method;
    int n_target = 0;
    int permutation = 0;
    int rotation = 0;
    bool ok = false;
    double accuracy = 0.0;
    std::string message;  // failure reason when !ok
};

struct LearningCurvePoint {
    int n_target = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    int n_runs = 0;
};

struct LearningCurve {
    std::string method;
    std::vector<LearningCurvePoint> points;
};

/// Runs the full protocol: for every (method, n_target, permutation,
/// rotation), split the rotated target task, train on the split plus the
/// remaining tasks as sources, and score accuracy on the held-out remainder.
/// Splits are shared across methods at the same (n_target, permutation,
/// rotation); every seed derives from the run identity, so results are
/// independent of worker count and execution order. Failed runs are recorded,
/// not raised.
std::vector<LearningCurve> run_experiment(const ExperimentPlan& plan,
                                          const std::vector<TaskDataset>& data,
                                          std::vector<RunRecord>* records = nullptr);

/// Trains one method on a prepared bundle. source_seed feeds auxiliary
/// training (C selection, source models, phase-1 experts); run_seed feeds the
/// method's own randomness.
AnyModel train_method(const MethodSpec& method, const TrainingBundle& bundle,
                      std::uint64_t source_seed, std::uint64_t run_seed);

/// CSV `method,n_target,mean_accuracy,std_accuracy,n_runs`, sorted by
/// (method, n_target).
void write_curves_csv(std::ostream& out, const std::vector<LearningCurve>& curves);
std::vector<LearningCurve> read_curves_csv(std::istream& in);

/// Gnuplot-ready wide table: one row per n_target, one mean/std column pair
/// per method.
void write_plotdata(std::ostream& out, const std::vector<LearningCurve>& curves);

}  // namespace xfer

#endif
