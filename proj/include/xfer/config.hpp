#ifndef XFER_CONFIG_HPP
#define XFER_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xfer/forest_transfer.hpp"
#include "xfer/instance_transfer.hpp"
#include "xfer/kernel_transfer.hpp"

namespace xfer {

enum class MethodFamily { MS, WMS, Task, MultiKT, SVM, TLDF };

/// A fully resolved method the experiment runner can execute.
struct MethodSpec {
    MethodFamily family = MethodFamily::MS;
    std::string name;  // appears in results CSV

    MSConfig ms;  // MS and WMS

    int task_phase1_rounds = 50;
    int task_phase2_rounds = 50;
    bool task_remove_selected = false;

    KernelSpec kernel;  // MultiKT and SVM
    bool c_auto = true;
    double c_value = 1.0;

    TLDFConfig tldf;
};

struct ExperimentPlan {
    std::vector<MethodSpec> methods;
    std::vector<int> n_target_values;  // defaults to 1..10
    int n_permutations = 5;
    bool rotate_targets = true;
    /// Fraction of the non-training remainder used as the held-out test set.
    double test_fraction = 1.0;
    std::uint64_t master_seed = 0;
    int workers = 1;

    ExperimentPlan();
};

/// Parses the line-oriented `key=value` config format. `#` starts a comment;
/// unknown keys are errors. The `method` key takes a comma-separated list;
/// a `wms` entry may pin its variant inline as wms:<variant>:<eta>.
ExperimentPlan parse_config(const std::string& text);

/// Resolves a single method token ("ms", "wms:exponential:squared", "svm",
/// ...) against family-level settings already parsed into `plan_defaults`.
MethodSpec resolve_method_token(const std::string& token, const MethodSpec& plan_defaults);

}  // namespace xfer

#endif
