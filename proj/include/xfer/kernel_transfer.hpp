#ifndef XFER_KERNEL_TRANSFER_HPP
#define XFER_KERNEL_TRANSFER_HPP

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfer/dataset.hpp"

namespace xfer {

enum class KernelKind { Linear, Gaussian };

/// k(x,z) = x.z (Linear) or exp(-gamma*||x-z||^2) (Gaussian).
struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double gamma = 0.0;

    bool operator==(const KernelSpec&) const = default;
};

double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> z);

Eigen::MatrixXd gram(const std::vector<std::vector<double>>& points_a,
                     const std::vector<std::vector<double>>& points_b, const KernelSpec& kernel);

/// zeta_i = n/(2*n_pos) for positives and n/(2*n_neg) for negatives, so each
/// class carries total cost n/2.
std::vector<double> class_balance_zetas(const std::vector<int>& labels);

/// A pre-trained classifier in kernel-expansion form: w = sum_i c_i phi(x_i).
struct SourceModelK {
    std::string origin_task;
    std::vector<std::vector<double>> support_points;
    std::vector<double> dual_coeffs;
    double bias = 0.0;
    KernelSpec kernel;

    /// w.phi(x), the expansion without the bias.
    double expansion_value(std::span<const double> x) const;
    int predict(std::span<const double> x) const;
};

/// Kernel classifier pulled toward a beta-weighted sum of source models.
/// Decision: f(x) = sum_i dual_i k(x_i,x) + sum_j beta_j w_j.phi(x) + bias.
struct MultiKTModel {
    std::vector<std::vector<double>> training_points;
    std::vector<double> dual_coeffs;
    double bias = 0.0;
    std::vector<double> betas;
    KernelSpec kernel;
    double C = 1.0;
    std::vector<double> zetas;
    std::vector<SourceModelK> sources;

    double decision(std::span<const double> x) const;
};

/// Solves the least-squares model-fidelity problem: squared slacks weighted by
/// C*zeta_i and margin constraints at equality give the saddle system
///   [K + diag(1/(2*C*zeta)), 1; 1^T, 0] [dual; bias] = [y - s; 0]
/// with s_i the beta-weighted source votes at x_i. Unique for C > 0.
/// When fixed_zetas is null, zetas come from class_balance_zetas; a
/// single-label target falls back to zeta = 1.
MultiKTModel solve_multikt(const TaskDataset& target, std::vector<SourceModelK> sources,
                           std::vector<double> betas, double C, const KernelSpec& kernel,
                           const std::vector<double>* fixed_zetas = nullptr);

int multikt_predict(const MultiKTModel& model, std::span<const double> x);

double multikt_accuracy(const MultiKTModel& model, const TaskDataset& data);

/// Closed-form leave-one-out decision values: g_i = y_i - dual_i/(M^-1)_ii.
std::vector<double> multikt_loo_values(const TaskDataset& target,
                                       const std::vector<SourceModelK>& sources,
                                       const std::vector<double>& betas, double C,
                                       const KernelSpec& kernel,
                                       const std::vector<double>* fixed_zetas = nullptr);

/// Fraction of training samples misclassified by their leave-one-out value.
double loo_error(const TaskDataset& target, const std::vector<SourceModelK>& sources,
                 const std::vector<double>& betas, double C, const KernelSpec& kernel,
                 const std::vector<double>* fixed_zetas = nullptr);

/// Smooth surrogate minimized by optimize_betas: sum of squared hinges on the
/// leave-one-out margins, sum_i max(0, 1 - y_i*g_i)^2.
double loo_surrogate(const TaskDataset& target, const std::vector<SourceModelK>& sources,
                     const std::vector<double>& betas, double C, const KernelSpec& kernel);

/// Projected coordinate descent on the surrogate, keeping ||beta||_2 <= 1.
/// Deterministic; beta = 0 is always a candidate, so the returned value is
/// never worse than no transfer under the surrogate.
std::vector<double> optimize_betas(const TaskDataset& target,
                                   const std::vector<SourceModelK>& sources, double C,
                                   const KernelSpec& kernel);

/// Plain no-transfer solve (beta = 0, no sources), repackaged as a kernel
/// expansion usable as a source model.
SourceModelK train_source_model(const TaskDataset& source, double C, const KernelSpec& kernel);

/// 5-fold cross-validation over {0.01, 0.1, 1, 10, 100} on the pooled
/// samples; ties keep the smaller C. Falls back to 1.0 when the pool is too
/// small or single-label.
double select_C(const std::vector<TaskDataset>& pool_tasks, const KernelSpec& kernel,
                std::uint64_t seed);

}  // namespace xfer

#endif
