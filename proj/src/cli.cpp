#include "xfer/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "xfer/experiment.hpp"
#include "xfer/rng.hpp"
#include "xfer/synthetic.hpp"

namespace xfer {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

const TaskDataset& find_task(const std::vector<TaskDataset>& tasks, const std::string& id) {
    for (const auto& t : tasks) {
        if (t.task_id == id) return t;
    }
    throw DataError("no task '" + id + "' in the data file");
}

struct GenerateArgs {
    SyntheticSpec spec;
    std::string negatives = "own";
    std::string out_path;
};

struct ExperimentArgs {
    std::string data_path, config_path, out_path;
    int workers = 1;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string data_path, config_path, target, model_out;
    int n_target = 5;
    std::uint64_t seed = 0;
};

struct EvaluateArgs {
    std::string model_path, data_path, target;
};

struct CurvesArgs {
    std::string results_path, out_path;
};

void cmd_generate(const GenerateArgs& args, std::ostream& out) {
    SyntheticSpec spec = args.spec;
    spec.shared_negatives = args.negatives == "shared";
    const auto tasks = generate_synthetic(spec);
    auto file = open_output(args.out_path);
    serialize_datasets(file, tasks);
    out << "wrote " << tasks.size() << " tasks x " << spec.samples_per_task << " samples (dim "
        << spec.dim << ") to " << args.out_path << '\n';
}

void cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err) {
    const auto tasks = parse_dataset(read_file(args.data_path));
    ExperimentPlan plan = parse_config(read_file(args.config_path));
    plan.master_seed = args.seed;
    plan.workers = args.workers;

    std::vector<RunRecord> records;
    const auto curves = run_experiment(plan, tasks, &records);

    auto file = open_output(args.out_path);
    write_curves_csv(file, curves);

    std::size_t failures = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++failures;
            err << "run failed: method=" << r.method << " n_target=" << r.n_target
                << " permutation=" << r.permutation << " rotation=" << r.rotation << ": "
                << r.message << '\n';
        }
    }
    out << records.size() << " runs (" << failures << " failed), " << curves.size()
        << " curves written to " << args.out_path << '\n';
}

void cmd_train(const TrainArgs& args, std::ostream& out) {
    const auto tasks = parse_dataset(read_file(args.data_path));
    const ExperimentPlan plan = parse_config(read_file(args.config_path));
    if (plan.methods.size() != 1) {
        throw DataError("train: config must specify exactly one method");
    }
    const MethodSpec& method = plan.methods.front();

    const TaskDataset& target_task = find_task(tasks, args.target);
    if (args.n_target < 1) throw DataError("train: --n-target must be positive");
    const std::uint64_t split_seed =
        derive_seed(args.seed, "split|" + args.target + "|" + std::to_string(args.n_target));
    auto [train, test] = split_target(target_task, static_cast<std::size_t>(args.n_target),
                                      split_seed);

    TrainingBundle bundle;
    bundle.target = std::move(train);
    for (const auto& t : tasks) {
        if (t.task_id != args.target) bundle.sources.push_back(t);
    }

    const std::uint64_t source_seed = derive_seed(args.seed, "context|" + method.name);
    const std::uint64_t run_seed = derive_seed(args.seed, "train|" + method.name);
    const AnyModel model = train_method(method, bundle, source_seed, run_seed);

    auto file = open_output(args.model_out);
    save_model(file, model);

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", any_model_accuracy(model, test));
    out << "trained " << method.name << " on " << args.n_target << " target samples, holdout accuracy="
        << buf << ", model written to " << args.model_out << '\n';
}

void cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
    std::ifstream model_file(args.model_path, std::ios::binary);
    if (!model_file) throw DataError("cannot open file: " + args.model_path);
    const AnyModel model = load_model(model_file);
    const auto tasks = parse_dataset(read_file(args.data_path));
    const TaskDataset& target_task = find_task(tasks, args.target);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", any_model_accuracy(model, target_task));
    out << "accuracy=" << buf << '\n';
}

void cmd_curves(const CurvesArgs& args, std::ostream& out) {
    std::ifstream results(args.results_path, std::ios::binary);
    if (!results) throw DataError("cannot open file: " + args.results_path);
    const auto curves = read_curves_csv(results);
    auto file = open_output(args.out_path);
    write_plotdata(file, curves);
    out << "wrote plot data for " << curves.size() << " methods to " << args.out_path << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"transfer-learning benchmark harness"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic multi-task feature file");
    generate->add_option("--tasks", gen.spec.n_tasks, "number of tasks")->default_val(4);
    generate->add_option("--per-task", gen.spec.samples_per_task, "samples per task")
        ->default_val(200);
    generate->add_option("--dim", gen.spec.dim, "feature dimension")->default_val(10);
    generate->add_option("--relatedness", gen.spec.relatedness,
                         "source-target mean overlap in [0,1]")
        ->default_val(0.8);
    generate->add_option("--noise", gen.spec.noise_sigma, "per-class gaussian sigma")
        ->default_val(1.0);
    generate->add_option("--seed", gen.spec.seed, "generator seed")->default_val(0);
    generate->add_option("--negatives", gen.negatives, "own|shared negative class")
        ->check(CLI::IsMember({"own", "shared"}))
        ->default_val("own");
    generate->add_option("--out", gen.out_path, "output feature file")->required();

    ExperimentArgs exp;
    auto* experiment = app.add_subcommand("experiment", "run the learning-curve protocol");
    experiment->add_option("--data", exp.data_path, "feature file")->required();
    experiment->add_option("--config", exp.config_path, "key=value config file")->required();
    experiment->add_option("--out", exp.out_path, "results CSV path")->required();
    experiment->add_option("--workers", exp.workers, "worker threads")->default_val(1);
    experiment->add_option("--seed", exp.seed, "master seed")->default_val(0);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train one model on a target split");
    train_cmd->add_option("--data", train.data_path, "feature file")->required();
    train_cmd->add_option("--config", train.config_path, "config with exactly one method")
        ->required();
    train_cmd->add_option("--target", train.target, "target task id")->required();
    train_cmd->add_option("--n-target", train.n_target, "target training samples")->required();
    train_cmd->add_option("--model-out", train.model_out, "model file path")->required();
    train_cmd->add_option("--seed", train.seed, "split/train seed")->default_val(0);

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a task");
    evaluate->add_option("--model", eval.model_path, "model file")->required();
    evaluate->add_option("--data", eval.data_path, "feature file")->required();
    evaluate->add_option("--target", eval.target, "task id to score")->required();

    CurvesArgs curves;
    auto* curves_cmd = app.add_subcommand("curves", "convert results CSV to gnuplot wide format");
    curves_cmd->add_option("--results", curves.results_path, "results CSV")->required();
    curves_cmd->add_option("--out", curves.out_path, "plot data path")->required();

    std::vector<const char*> argv;
    argv.push_back("xferbench");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (generate->parsed()) {
            cmd_generate(gen, out);
        } else if (experiment->parsed()) {
            cmd_experiment(exp, out, err);
        } else if (train_cmd->parsed()) {
            cmd_train(train, out);
        } else if (evaluate->parsed()) {
            cmd_evaluate(eval, out);
        } else if (curves_cmd->parsed()) {
            cmd_curves(curves, out);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const TrainError& e) {
        err << "training failure: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace xfer
