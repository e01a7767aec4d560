#include "xfer/model_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace xfer {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double read_double(std::istream& in, const char* what) {
    std::string token;
    if (!(in >> token)) throw DataError(std::string("model file: missing ") + what);
    double out = 0.0;
    const char* first = token.c_str();
    const char* last = first + token.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw DataError(std::string("model file: bad ") + what + " '" + token + "'");
    }
    return out;
}

long read_long(std::istream& in, const char* what) {
    long v = 0;
    if (!(in >> v)) throw DataError(std::string("model file: missing ") + what);
    return v;
}

std::string read_word(std::istream& in, const char* what) {
    std::string token;
    if (!(in >> token)) throw DataError(std::string("model file: missing ") + what);
    return token;
}

void expect_word(std::istream& in, const char* expected) {
    const std::string token = read_word(in, expected);
    if (token != expected) {
        throw DataError(std::string("model file: expected '") + expected + "', got '" + token + "'");
    }
}

void write_kernel(std::ostream& out, const KernelSpec& kernel) {
    if (kernel.kind == KernelKind::Linear) {
        out << "linear";
    } else {
        out << "rbf " << fmt(kernel.gamma);
    }
}

KernelSpec read_kernel(std::istream& in) {
    KernelSpec kernel;
    const std::string kind = read_word(in, "kernel kind");
    if (kind == "linear") {
        kernel.kind = KernelKind::Linear;
    } else if (kind == "rbf") {
        kernel.kind = KernelKind::Gaussian;
        kernel.gamma = read_double(in, "rbf gamma");
    } else {
        throw DataError("model file: unknown kernel '" + kind + "'");
    }
    return kernel;
}

}  // namespace

void write_ensemble(std::ostream& out, const TransferEnsemble& ensemble) {
    out << "ensemble " << ensemble.members.size() << ' ' << ensemble.window_lo << ' '
        << ensemble.window_hi << '\n';
    for (const auto& member : ensemble.members) {
        out << fmt(member.alpha) << ' ';
        if (const auto* stump = std::get_if<DecisionStump>(&member.hypothesis)) {
            out << "stump " << stump->feature << ' ' << fmt(stump->threshold) << ' '
                << stump->polarity;
        } else {
            const auto& expert = std::get<std::shared_ptr<const SourceExpert>>(member.hypothesis);
            out << "expert " << expert->origin_task << ' ' << expert->model.members.size();
            for (const auto& m : expert->model.members) {
                const auto& s = std::get<DecisionStump>(m.hypothesis);
                out << ' ' << fmt(m.alpha) << ' ' << s.feature << ' ' << fmt(s.threshold) << ' '
                    << s.polarity;
            }
        }
        out << '\n';
    }
}

TransferEnsemble read_ensemble(std::istream& in) {
    expect_word(in, "ensemble");
    const long n = read_long(in, "member count");
    TransferEnsemble ensemble;
    ensemble.window_lo = static_cast<std::size_t>(read_long(in, "window_lo"));
    ensemble.window_hi = static_cast<std::size_t>(read_long(in, "window_hi"));
    for (long i = 0; i < n; ++i) {
        EnsembleMember member;
        member.alpha = read_double(in, "member alpha");
        const std::string kind = read_word(in, "member kind");
        if (kind == "stump") {
            DecisionStump stump;
            stump.feature = static_cast<int>(read_long(in, "stump feature"));
            stump.threshold = read_double(in, "stump threshold");
            stump.polarity = static_cast<int>(read_long(in, "stump polarity"));
            member.hypothesis = stump;
        } else if (kind == "expert") {
            auto expert = std::make_shared<SourceExpert>();
            expert->origin_task = read_word(in, "expert task");
            const long m = read_long(in, "expert member count");
            for (long j = 0; j < m; ++j) {
                EnsembleMember inner;
                inner.alpha = read_double(in, "expert stump alpha");
                DecisionStump stump;
                stump.feature = static_cast<int>(read_long(in, "expert stump feature"));
                stump.threshold = read_double(in, "expert stump threshold");
                stump.polarity = static_cast<int>(read_long(in, "expert stump polarity"));
                inner.hypothesis = stump;
                expert->model.members.push_back(inner);
            }
            expert->model.window_lo = 0;
            expert->model.window_hi = expert->model.members.size();
            member.hypothesis = std::shared_ptr<const SourceExpert>(std::move(expert));
        } else {
            throw DataError("model file: unknown member kind '" + kind + "'");
        }
        ensemble.members.push_back(std::move(member));
    }
    if (ensemble.window_hi > ensemble.members.size() || ensemble.window_lo > ensemble.window_hi) {
        throw DataError("model file: vote window out of range");
    }
    return ensemble;
}

void write_kmodel(std::ostream& out, const SourceModelK& model) {
    out << "kmodel " << model.origin_task << ' ';
    write_kernel(out, model.kernel);
    out << ' ' << model.support_points.size() << '\n';
    for (std::size_t i = 0; i < model.support_points.size(); ++i) {
        out << fmt(model.dual_coeffs[i]);
        for (double f : model.support_points[i]) out << ' ' << fmt(f);
        out << '\n';
    }
    out << "bias " << fmt(model.bias) << '\n';
}

SourceModelK read_kmodel(std::istream& in) {
    expect_word(in, "kmodel");
    SourceModelK model;
    model.origin_task = read_word(in, "kmodel task");
    model.kernel = read_kernel(in);
    const long n = read_long(in, "support point count");
    if (n < 0) throw DataError("model file: negative support point count");

    // row width comes from the first row's remainder
    std::string line;
    std::getline(in, line);  // consume end of header line
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError("model file: truncated kmodel block");
        std::istringstream row(line);
        std::vector<double> values;
        std::string token;
        while (row >> token) {
            double v = 0.0;
            const char* first = token.c_str();
            const char* last = first + token.size();
            if (first != last && *first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) {
                throw DataError("model file: bad expansion value '" + token + "'");
            }
            values.push_back(v);
        }
        if (values.size() < 2) throw DataError("model file: expansion row too short");
        model.dual_coeffs.push_back(values.front());
        model.support_points.emplace_back(values.begin() + 1, values.end());
    }
    expect_word(in, "bias");
    model.bias = read_double(in, "kmodel bias");
    return model;
}

void write_multikt(std::ostream& out, const MultiKTModel& model) {
    out << "multikt ";
    write_kernel(out, model.kernel);
    out << ' ' << fmt(model.C) << ' ' << model.sources.size() << '\n';
    out << "betas";
    for (double b : model.betas) out << ' ' << fmt(b);
    out << '\n';
    SourceModelK target_part{"__target__", model.training_points, model.dual_coeffs, model.bias,
                             model.kernel};
    write_kmodel(out, target_part);
    for (const auto& src : model.sources) write_kmodel(out, src);
}

MultiKTModel read_multikt(std::istream& in) {
    expect_word(in, "multikt");
    MultiKTModel model;
    model.kernel = read_kernel(in);
    model.C = read_double(in, "C");
    const long j = read_long(in, "source count");
    expect_word(in, "betas");
    for (long i = 0; i < j; ++i) model.betas.push_back(read_double(in, "beta"));
    SourceModelK target_part = read_kmodel(in);
    model.training_points = std::move(target_part.support_points);
    model.dual_coeffs = std::move(target_part.dual_coeffs);
    model.bias = target_part.bias;
    for (long i = 0; i < j; ++i) model.sources.push_back(read_kmodel(in));
    return model;
}

namespace {

void write_tree_node(std::ostream& out, const TreeNode* node) {
    if (node->is_leaf()) {
        out << "leaf " << fmt(node->p_pos) << '\n';
        return;
    }
    out << "split " << node->feature << ' ' << fmt(node->threshold) << '\n';
    write_tree_node(out, node->left.get());
    write_tree_node(out, node->right.get());
}

std::unique_ptr<TreeNode> read_tree_node(std::istream& in) {
    const std::string kind = read_word(in, "tree node kind");
    auto node = std::make_unique<TreeNode>();
    if (kind == "leaf") {
        node->p_pos = read_double(in, "leaf posterior");
        node->has_target = true;  // posteriors are already resolved on disk
        return node;
    }
    if (kind != "split") throw DataError("model file: unknown tree node '" + kind + "'");
    node->feature = static_cast<int>(read_long(in, "split feature"));
    node->threshold = read_double(in, "split threshold");
    node->left = read_tree_node(in);
    node->right = read_tree_node(in);
    return node;
}

}  // namespace

void write_forest(std::ostream& out, const TLDFForest& forest) {
    out << "tldfforest " << forest.trees.size() << ' ' << (forest.majority_vote ? 1 : 0) << '\n';
    for (const auto& tree : forest.trees) {
        out << "tree " << (tree.degenerate ? 1 : 0) << ' ' << fmt(tree.fallback_p_pos) << '\n';
        write_tree_node(out, tree.root.get());
    }
}

TLDFForest read_forest(std::istream& in) {
    expect_word(in, "tldfforest");
    const long n = read_long(in, "tree count");
    TLDFForest forest;
    forest.majority_vote = read_long(in, "majority flag") != 0;
    for (long i = 0; i < n; ++i) {
        expect_word(in, "tree");
        TLDFTree tree;
        tree.degenerate = read_long(in, "degenerate flag") != 0;
        tree.fallback_p_pos = read_double(in, "fallback posterior");
        tree.root = read_tree_node(in);
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

void save_model(std::ostream& out, const AnyModel& model) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TransferEnsemble>) {
                write_ensemble(out, m);
            } else if constexpr (std::is_same_v<T, MultiKTModel>) {
                write_multikt(out, m);
            } else {
                write_forest(out, m);
            }
        },
        model);
}

AnyModel load_model(std::istream& in) {
    std::string keyword;
    const auto pos = in.tellg();
    if (!(in >> keyword)) throw DataError("model file: empty");
    in.seekg(pos);
    if (keyword == "ensemble") return read_ensemble(in);
    if (keyword == "multikt") return read_multikt(in);
    if (keyword == "tldfforest") return read_forest(in);
    throw DataError("model file: unknown model kind '" + keyword + "'");
}

int any_model_predict(const AnyModel& model, std::span<const double> x) {
    return std::visit(
        [&](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TransferEnsemble>) {
                return ensemble_predict(m, x);
            } else if constexpr (std::is_same_v<T, MultiKTModel>) {
                return multikt_predict(m, x);
            } else {
                return forest_predict(m, x);
            }
        },
        model);
}

double any_model_accuracy(const AnyModel& model, const TaskDataset& data) {
    if (data.samples.empty()) throw DataError("any_model_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
        if (any_model_predict(model, s.features) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace xfer
