#include "xfer/kernel_transfer.hpp"

#include <algorithm>
#include <cmath>

#include "xfer/rng.hpp"

namespace xfer {

double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw DataError("kernel_eval: dimension mismatch");
    switch (kernel.kind) {
        case KernelKind::Linear: {
            double dot = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
            return dot;
        }
        case KernelKind::Gaussian: {
            if (kernel.gamma <= 0.0) throw DataError("kernel_eval: gaussian gamma must be positive");
            double sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double diff = x[i] - z[i];
                sq += diff * diff;
            }
            return std::exp(-kernel.gamma * sq);
        }
    }
    throw DataError("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd gram(const std::vector<std::vector<double>>& points_a,
                     const std::vector<std::vector<double>>& points_b, const KernelSpec& kernel) {
    Eigen::MatrixXd g(points_a.size(), points_b.size());
    for (std::size_t i = 0; i < points_a.size(); ++i) {
        for (std::size_t j = 0; j < points_b.size(); ++j) {
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kernel_eval(kernel, points_a[i], points_b[j]);
        }
    }
    return g;
}

std::vector<double> class_balance_zetas(const std::vector<int>& labels) {
    std::size_t pos = 0, neg = 0;
    for (int y : labels) (y > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw DataError("class_balance_zetas: single-label input");
    const double n = static_cast<double>(labels.size());
    const double zp = n / (2.0 * static_cast<double>(pos));
    const double zn = n / (2.0 * static_cast<double>(neg));
    std::vector<double> zetas(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) zetas[i] = labels[i] > 0 ? zp : zn;
    return zetas;
}

double SourceModelK::expansion_value(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < support_points.size(); ++i) {
        v += dual_coeffs[i] * kernel_eval(kernel, support_points[i], x);
    }
    return v;
}

int SourceModelK::predict(std::span<const double> x) const {
    return expansion_value(x) + bias < 0.0 ? -1 : +1;
}

double MultiKTModel::decision(std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < training_points.size(); ++i) {
        f += dual_coeffs[i] * kernel_eval(kernel, training_points[i], x);
    }
    for (std::size_t j = 0; j < sources.size(); ++j) {
        f += betas[j] * sources[j].expansion_value(x);
    }
    return f;
}

int multikt_predict(const MultiKTModel& model, std::span<const double> x) {
    return model.decision(x) < 0.0 ? -1 : +1;
}

double multikt_accuracy(const MultiKTModel& model, const TaskDataset& data) {
    if (data.samples.empty()) throw DataError("multikt_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
        if (multikt_predict(model, s.features) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

// The saddle system M [dual; bias] = [y - F*beta; 0] and its inverse, shared
// by the solver, the LOO formula, and the beta search.
struct KtSystem {
    Eigen::MatrixXd Minv;  // (n+1) x (n+1)
    Eigen::VectorXd y;     // n
    Eigen::MatrixXd F;     // n x J, F(i,j) = source j expansion at x_i
    std::vector<double> zetas;
};

KtSystem build_system(const TaskDataset& target, const std::vector<SourceModelK>& sources,
                      double C, const KernelSpec& kernel, const std::vector<double>* fixed_zetas) {
    const std::size_t n = target.size();
    if (n == 0) throw DataError("solve_multikt: empty target");
    if (C <= 0.0) throw DataError("solve_multikt: C must be positive");
    for (const auto& src : sources) {
        if (!(src.kernel == kernel)) {
            throw DataError("solve_multikt: source model kernel mismatch");
        }
    }

    KtSystem sys;
    if (fixed_zetas) {
        if (fixed_zetas->size() != n) throw DataError("solve_multikt: zeta length mismatch");
        sys.zetas = *fixed_zetas;
    } else if (target.has_both_labels()) {
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = target.samples[i].label;
        sys.zetas = class_balance_zetas(labels);
    } else {
        sys.zetas.assign(n, 1.0);  // single-label target: no balance to apply
    }

    std::vector<std::vector<double>> points(n);
    for (std::size_t i = 0; i < n; ++i) points[i] = target.samples[i].features;
    Eigen::MatrixXd m(n + 1, n + 1);
    m.topLeftCorner(n, n) = gram(points, points, kernel);
    for (std::size_t i = 0; i < n; ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
            1.0 / (2.0 * C * sys.zetas[i]);
    }
    m.topRightCorner(n, 1).setOnes();
    m.bottomLeftCorner(1, n).setOnes();
    m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 0.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (std::abs(lu.determinant()) < 1e-300) {
        throw TrainError("solve_multikt: singular system");
    }
    sys.Minv = lu.inverse();

    sys.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        sys.y(static_cast<Eigen::Index>(i)) = static_cast<double>(target.samples[i].label);
    }
    sys.F.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sources.size()));
    for (std::size_t j = 0; j < sources.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            sys.F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                sources[j].expansion_value(target.samples[i].features);
        }
    }
    return sys;
}

Eigen::VectorXd solve_system(const KtSystem& sys, const Eigen::VectorXd& betas) {
    const Eigen::Index n = sys.y.size();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = sys.y - sys.F * betas;
    rhs(n) = 0.0;
    return sys.Minv * rhs;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

}  // namespace

MultiKTModel solve_multikt(const TaskDataset& target, std::vector<SourceModelK> sources,
                           std::vector<double> betas, double C, const KernelSpec& kernel,
                           const std::vector<double>* fixed_zetas) {
    if (betas.size() != sources.size()) {
        throw DataError("solve_multikt: betas length must match source count");
    }
    const KtSystem sys = build_system(target, sources, C, kernel, fixed_zetas);
    const Eigen::VectorXd z = solve_system(sys, to_eigen(betas));

    MultiKTModel model;
    const std::size_t n = target.size();
    model.training_points.resize(n);
    model.dual_coeffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.training_points[i] = target.samples[i].features;
        model.dual_coeffs[i] = z(static_cast<Eigen::Index>(i));
    }
    model.bias = z(static_cast<Eigen::Index>(n));
    model.betas = std::move(betas);
    model.kernel = kernel;
    model.C = C;
    model.zetas = sys.zetas;
    model.sources = std::move(sources);
    return model;
}

std::vector<double> multikt_loo_values(const TaskDataset& target,
                                       const std::vector<SourceModelK>& sources,
                                       const std::vector<double>& betas, double C,
                                       const KernelSpec& kernel,
                                       const std::vector<double>* fixed_zetas) {
    if (target.size() < 2) throw DataError("multikt_loo_values: need at least 2 samples");
    const KtSystem sys = build_system(target, sources, C, kernel, fixed_zetas);
    const Eigen::VectorXd z = solve_system(sys, to_eigen(betas));

    std::vector<double> values(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        values[i] = sys.y(idx) - z(idx) / sys.Minv(idx, idx);
    }
    return values;
}

double loo_error(const TaskDataset& target, const std::vector<SourceModelK>& sources,
                 const std::vector<double>& betas, double C, const KernelSpec& kernel,
                 const std::vector<double>* fixed_zetas) {
    const auto values = multikt_loo_values(target, sources, betas, C, kernel, fixed_zetas);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int pred = values[i] < 0.0 ? -1 : +1;
        if (pred != target.samples[i].label) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(values.size());
}

double loo_surrogate(const TaskDataset& target, const std::vector<SourceModelK>& sources,
                     const std::vector<double>& betas, double C, const KernelSpec& kernel) {
    const auto values = multikt_loo_values(target, sources, betas, C, kernel);
    double loss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double margin = target.samples[i].label * values[i];
        const double hinge = std::max(0.0, 1.0 - margin);
        loss += hinge * hinge;
    }
    return loss;
}

std::vector<double> optimize_betas(const TaskDataset& target,
                                   const std::vector<SourceModelK>& sources, double C,
                                   const KernelSpec& kernel) {
    const std::size_t J = sources.size();
    if (J == 0) return {};
    const std::size_t n = target.size();
    if (n < 2) return std::vector<double>(J, 0.0);

    const KtSystem sys = build_system(target, sources, C, kernel, nullptr);
    const Eigen::Index ni = static_cast<Eigen::Index>(n);

    // The LOO value g_i is affine in beta: g_i = g0_i + sum_j beta_j * coef(i,j).
    Eigen::VectorXd rhs0(ni + 1);
    rhs0.head(ni) = sys.y;
    rhs0(ni) = 0.0;
    const Eigen::VectorXd z0 = sys.Minv * rhs0;
    Eigen::VectorXd g0(ni);
    Eigen::MatrixXd coef(ni, static_cast<Eigen::Index>(J));
    for (Eigen::Index i = 0; i < ni; ++i) g0(i) = sys.y(i) - z0(i) / sys.Minv(i, i);
    for (std::size_t j = 0; j < J; ++j) {
        Eigen::VectorXd rhs(ni + 1);
        rhs.head(ni) = sys.F.col(static_cast<Eigen::Index>(j));
        rhs(ni) = 0.0;
        const Eigen::VectorXd u = sys.Minv * rhs;
        for (Eigen::Index i = 0; i < ni; ++i) {
            coef(i, static_cast<Eigen::Index>(j)) = u(i) / sys.Minv(i, i);
        }
    }

    const auto surrogate = [&](const Eigen::VectorXd& beta) {
        double loss = 0.0;
        for (Eigen::Index i = 0; i < ni; ++i) {
            const double g = g0(i) + coef.row(i).dot(beta);
            const double hinge = std::max(0.0, 1.0 - sys.y(i) * g);
            loss += hinge * hinge;
        }
        return loss;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J));
    Eigen::VectorXd best_beta = beta;
    double best_loss = surrogate(beta);

    constexpr int kSweeps = 25;
    constexpr int kGoldenIters = 60;
    constexpr double kGolden = 0.6180339887498949;
    for (int sweep = 0; sweep < kSweeps; ++sweep) {
        for (std::size_t j = 0; j < J; ++j) {
            const auto jc = static_cast<Eigen::Index>(j);
            const auto line_loss = [&](double t) {
                const double old = beta(jc);
                beta(jc) = t;
                const double loss = surrogate(beta);
                beta(jc) = old;
                return loss;
            };
            // golden-section search; the loss is convex in one coordinate
            double lo = beta(jc) - 2.0, hi = beta(jc) + 2.0;
            double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
            double f1 = line_loss(x1), f2 = line_loss(x2);
            for (int it = 0; it < kGoldenIters; ++it) {
                if (f1 <= f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - kGolden * (hi - lo);
                    f1 = line_loss(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + kGolden * (hi - lo);
                    f2 = line_loss(x2);
                }
            }
            beta(jc) = 0.5 * (lo + hi);
        }
        const double norm = beta.norm();
        if (norm > 1.0) beta /= norm;
        const double loss = surrogate(beta);
        if (loss < best_loss) {
            best_loss = loss;
            best_beta = beta;
        }
    }

    std::vector<double> out(J);
    for (std::size_t j = 0; j < J; ++j) out[j] = best_beta(static_cast<Eigen::Index>(j));
    return out;
}

SourceModelK train_source_model(const TaskDataset& source, double C, const KernelSpec& kernel) {
    MultiKTModel model = solve_multikt(source, {}, {}, C, kernel);
    return SourceModelK{source.task_id, std::move(model.training_points),
                        std::move(model.dual_coeffs), model.bias, kernel};
}

double select_C(const std::vector<TaskDataset>& pool_tasks, const KernelSpec& kernel,
                std::uint64_t seed) {
    static const double kGrid[] = {0.01, 0.1, 1.0, 10.0, 100.0};
    TaskDataset pool{"pool", {}};
    for (const auto& t : pool_tasks) {
        pool.samples.insert(pool.samples.end(), t.samples.begin(), t.samples.end());
    }
    const std::size_t n = pool.size();
    if (n < 10 || !pool.has_both_labels()) return 1.0;

    constexpr int kFolds = 5;
    Rng rng(seed);
    const auto perm = rng.permutation(n);

    double best_c = kGrid[0];
    std::size_t best_wrong = n + 1;
    for (double c : kGrid) {
        std::size_t wrong = 0;
        for (int fold = 0; fold < kFolds; ++fold) {
            TaskDataset train{"pool", {}}, heldout{"pool", {}};
            for (std::size_t i = 0; i < n; ++i) {
                (static_cast<int>(i % kFolds) == fold ? heldout : train)
                    .samples.push_back(pool.samples[perm[i]]);
            }
            if (train.samples.empty() || heldout.samples.empty()) continue;
            const MultiKTModel model = solve_multikt(train, {}, {}, c, kernel);
            for (const auto& s : heldout.samples) {
                if (multikt_predict(model, s.features) != s.label) ++wrong;
            }
        }
        if (wrong < best_wrong) {
            best_wrong = wrong;
            best_c = c;
        }
    }
    return best_c;
}

}  // namespace xfer
