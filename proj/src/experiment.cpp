#include "xfer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "xfer/rng.hpp"
#include "xfer/synthetic.hpp"
#include "xfer/task_transfer.hpp"

namespace xfer {

namespace {

// Per-(method, rotation) state that does not depend on the target split:
// phase-1 experts and kernel source models train on the full source tasks.
struct RotationContext {
    std::vector<std::shared_ptr<const SourceExpert>> experts;
    std::vector<SourceModelK> source_models;
    double C = 1.0;
    KernelSpec kernel;
};

KernelSpec resolve_kernel(KernelSpec kernel, std::size_t dim) {
    if (kernel.kind == KernelKind::Gaussian && kernel.gamma <= 0.0) {
        kernel.gamma = 1.0 / static_cast<double>(dim);
    }
    return kernel;
}

RotationContext build_rotation_context(const MethodSpec& method,
                                       const std::vector<TaskDataset>& sources, std::size_t dim,
                                       std::uint64_t seed) {
    RotationContext ctx;
    ctx.kernel = resolve_kernel(method.kernel, dim);
    if (method.family == MethodFamily::Task) {
        ctx.experts = task_phase1(sources, method.task_phase1_rounds);
    } else if (method.family == MethodFamily::MultiKT || method.family == MethodFamily::SVM) {
        ctx.C = method.c_auto ? select_C(sources, ctx.kernel, derive_seed(seed, "cselect"))
                              : method.c_value;
        if (method.family == MethodFamily::MultiKT) {
            for (const auto& src : sources) {
                ctx.source_models.push_back(train_source_model(src, ctx.C, ctx.kernel));
            }
        }
    }
    return ctx;
}

AnyModel train_with_context(const MethodSpec& method, const TrainingBundle& bundle,
                            const RotationContext& ctx, std::uint64_t run_seed) {
    switch (method.family) {
        case MethodFamily::MS:
        case MethodFamily::WMS: {
            MSConfig config = method.ms;
            if (method.family == MethodFamily::MS) config.variant = MSVariant::Plain;
            return ms_tradaboost_train(bundle, config);
        }
        case MethodFamily::Task: {
            TaskBoostResult result = task_phase2(bundle.target, ctx.experts,
                                                 method.task_phase2_rounds,
                                                 method.task_remove_selected);
            if (result.no_useful_expert) {
                throw TrainError("no useful expert: every source model is at or below chance");
            }
            return result.ensemble;
        }
        case MethodFamily::MultiKT: {
            const auto betas = optimize_betas(bundle.target, ctx.source_models, ctx.C, ctx.kernel);
            return solve_multikt(bundle.target, ctx.source_models, betas, ctx.C, ctx.kernel);
        }
        case MethodFamily::SVM:
            return solve_multikt(bundle.target, {}, {}, ctx.C, ctx.kernel);
        case MethodFamily::TLDF: {
            TLDFConfig config = method.tldf;
            config.rng_seed = derive_seed(run_seed, "tldf");
            return tldf_train(bundle, config);
        }
    }
    throw TrainError("train_method: unknown method family");
}

std::string run_tag(const char* prefix, const std::string& method, int n, int perm, int rot) {
    return std::string(prefix) + "|" + method + "|" + std::to_string(n) + "|" +
           std::to_string(perm) + "|" + std::to_string(rot);
}

}  // namespace

AnyModel train_method(const MethodSpec& method, const TrainingBundle& bundle,
                      std::uint64_t source_seed, std::uint64_t run_seed) {
    const RotationContext ctx =
        build_rotation_context(method, bundle.sources, bundle.target.dim(), source_seed);
    return train_with_context(method, bundle, ctx, run_seed);
}

std::vector<LearningCurve> run_experiment(const ExperimentPlan& plan,
                                          const std::vector<TaskDataset>& data,
                                          std::vector<RunRecord>* records) {
    if (plan.methods.empty()) throw DataError("run_experiment: no methods in plan");
    if (data.size() < 2) throw DataError("run_experiment: need at least 2 tasks");
    const int max_n = *std::max_element(plan.n_target_values.begin(), plan.n_target_values.end());
    const std::size_t n_rotations = plan.rotate_targets ? data.size() : 1;
    for (std::size_t r = 0; r < n_rotations; ++r) {
        if (data[r].size() <= static_cast<std::size_t>(max_n)) {
            throw DataError("run_experiment: task '" + data[r].task_id +
                            "' is too small to split at n_target=" + std::to_string(max_n));
        }
    }

    // Contexts keyed by (method index, rotation); independent of the split.
    std::vector<std::vector<RotationContext>> contexts(plan.methods.size());
    std::vector<std::vector<TaskDataset>> rotation_sources(n_rotations);
    for (std::size_t r = 0; r < n_rotations; ++r) {
        for (std::size_t t = 0; t < data.size(); ++t) {
            if (t != r) rotation_sources[r].push_back(data[t]);
        }
    }
    for (std::size_t m = 0; m < plan.methods.size(); ++m) {
        contexts[m].resize(n_rotations);
        for (std::size_t r = 0; r < n_rotations; ++r) {
            const std::uint64_t seed = derive_seed(
                plan.master_seed, "context|" + plan.methods[m].name + "|" + std::to_string(r));
            contexts[m][r] = build_rotation_context(plan.methods[m], rotation_sources[r],
                                                    data[r].dim(), seed);
        }
    }

    struct RunJob {
        std::size_t method;
        int n_target;
        int permutation;
        std::size_t rotation;
    };
    std::vector<RunJob> jobs;
    for (std::size_t m = 0; m < plan.methods.size(); ++m) {
        for (int n : plan.n_target_values) {
            for (int p = 0; p < plan.n_permutations; ++p) {
                for (std::size_t r = 0; r < n_rotations; ++r) {
                    jobs.push_back({m, n, p, r});
                }
            }
        }
    }

    std::vector<RunRecord> results(jobs.size());
    const auto execute = [&](std::size_t index) {
        const RunJob& job = jobs[index];
        const MethodSpec& method = plan.methods[job.method];
        RunRecord record;
        record.method = method.name;
        record.n_target = job.n_target;
        record.permutation = job.permutation;
        record.rotation = static_cast<int>(job.rotation);
        try {
            const std::uint64_t split_seed = derive_seed(
                plan.master_seed, run_tag("split", "", job.n_target, job.permutation,
                                          static_cast<int>(job.rotation)));
            auto [train, test] = split_target(data[job.rotation],
                                              static_cast<std::size_t>(job.n_target), split_seed);
            if (plan.test_fraction < 1.0) {
                const auto keep = static_cast<std::size_t>(
                    std::ceil(plan.test_fraction * static_cast<double>(test.size())));
                test.samples.resize(std::max<std::size_t>(keep, 1));
            }
            TrainingBundle bundle{std::move(train), rotation_sources[job.rotation]};
            const std::uint64_t run_seed = derive_seed(
                plan.master_seed, run_tag("train", method.name, job.n_target, job.permutation,
                                          static_cast<int>(job.rotation)));
            const AnyModel model =
                train_with_context(method, bundle, contexts[job.method][job.rotation], run_seed);
            record.accuracy = any_model_accuracy(model, test);
            record.ok = true;
        } catch (const std::exception& e) {
            record.ok = false;
            record.message = e.what();
        }
        results[index] = std::move(record);
    };

    const int workers = std::max(1, plan.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) execute(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) break;
                    execute(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Deterministic reduction in job order, keyed by identity.
    std::vector<LearningCurve> curves;
    for (std::size_t m = 0; m < plan.methods.size(); ++m) {
        LearningCurve curve;
        curve.method = plan.methods[m].name;
        for (int n : plan.n_target_values) {
            double sum = 0.0;
            int count = 0;
            std::vector<double> values;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].method != m || jobs[i].n_target != n || !results[i].ok) continue;
                sum += results[i].accuracy;
                values.push_back(results[i].accuracy);
                ++count;
            }
            LearningCurvePoint point;
            point.n_target = n;
            point.n_runs = count;
            if (count > 0) {
                point.mean_accuracy = sum / count;
                double sq = 0.0;
                for (double v : values) sq += (v - point.mean_accuracy) * (v - point.mean_accuracy);
                point.std_accuracy = count > 1 ? std::sqrt(sq / (count - 1)) : 0.0;
            }
            curve.points.push_back(point);
        }
        curves.push_back(std::move(curve));
    }
    if (records) *records = std::move(results);
    return curves;
}

void write_curves_csv(std::ostream& out, const std::vector<LearningCurve>& curves) {
    struct Row {
        std::string method;
        LearningCurvePoint point;
    };
    std::vector<Row> rows;
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) rows.push_back({curve.method, point});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.method != b.method) return a.method < b.method;
        return a.point.n_target < b.point.n_target;
    });
    out << "method,n_target,mean_accuracy,std_accuracy,n_runs\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%d\n", row.method.c_str(),
                      row.point.n_target, row.point.mean_accuracy, row.point.std_accuracy,
                      row.point.n_runs);
        out << buf;
    }
}

std::vector<LearningCurve> read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("results csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "method,n_target,mean_accuracy,std_accuracy,n_runs") {
        throw DataError("results csv: unexpected header '" + line + "'");
    }
    std::vector<LearningCurve> curves;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string method, field;
        if (!std::getline(ss, method, ',')) throw DataError("results csv: bad row '" + line + "'");
        LearningCurvePoint point;
        try {
            std::getline(ss, field, ',');
            point.n_target = std::stoi(field);
            std::getline(ss, field, ',');
            point.mean_accuracy = std::stod(field);
            std::getline(ss, field, ',');
            point.std_accuracy = std::stod(field);
            std::getline(ss, field, ',');
            point.n_runs = std::stoi(field);
        } catch (const std::exception&) {
            throw DataError("results csv: bad row '" + line + "'");
        }
        auto it = std::find_if(curves.begin(), curves.end(),
                               [&](const LearningCurve& c) { return c.method == method; });
        if (it == curves.end()) {
            curves.push_back({method, {}});
            it = curves.end() - 1;
        }
        it->points.push_back(point);
    }
    return curves;
}

void write_plotdata(std::ostream& out, const std::vector<LearningCurve>& curves) {
    std::vector<int> n_values;
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) n_values.push_back(point.n_target);
    }
    std::sort(n_values.begin(), n_values.end());
    n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());

    out << "# n_target";
    for (const auto& curve : curves) {
        out << ' ' << curve.method << "_mean " << curve.method << "_std";
    }
    out << '\n';
    char buf[64];
    for (int n : n_values) {
        out << n;
        for (const auto& curve : curves) {
            const auto it = std::find_if(curve.points.begin(), curve.points.end(),
                                         [&](const LearningCurvePoint& p) { return p.n_target == n; });
            if (it == curve.points.end() || it->n_runs == 0) {
                out << " nan nan";
            } else {
                std::snprintf(buf, sizeof buf, " %.6f %.6f", it->mean_accuracy, it->std_accuracy);
                out << buf;
            }
        }
        out << '\n';
    }
}

}  // namespace xfer
