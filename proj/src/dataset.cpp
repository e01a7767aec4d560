#include "xfer/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "xfer/rng.hpp"

namespace xfer {

bool TaskDataset::has_both_labels() const {
    auto [neg, pos] = label_counts();
    return neg > 0 && pos > 0;
}

std::pair<std::size_t, std::size_t> TaskDataset::label_counts() const {
    std::size_t neg = 0, pos = 0;
    for (const auto& s : samples) (s.label > 0 ? pos : neg)++;
    return {neg, pos};
}

namespace {

bool parse_double_field(std::string_view field, double& out) {
    // trim surrounding spaces
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') ++first;  // from_chars rejects a leading '+'
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

int canonical_label(double raw, std::size_t line_no) {
    if (raw == -1.0 || raw == 0.0) return -1;
    if (raw == 1.0) return +1;
    throw DataError("line " + std::to_string(line_no) + ": label must be one of -1,+1,0,1");
}

void format_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

std::vector<TaskDataset> parse_dataset(std::istream& in, std::optional<std::size_t> expected_dim) {
    std::vector<TaskDataset> tasks;
    std::unordered_map<std::string, std::size_t> task_index;
    std::optional<std::size_t> dim = expected_dim;
    if (dim && *dim == 0) throw DataError("expected_dim must be positive");

    std::string line;
    std::size_t line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        auto fields = split_fields(line);
        if (fields.size() < 3) {
            throw DataError("line " + std::to_string(line_no) +
                            ": expected task_id,label,features (at least 3 fields)");
        }

        double label_raw = 0.0;
        if (!parse_double_field(fields[1], label_raw)) {
            if (!seen_data && line_no == 1) continue;  // header line
            throw DataError("line " + std::to_string(line_no) + ": non-numeric label field");
        }
        const int label = canonical_label(label_raw, line_no);

        LabeledSample sample;
        sample.label = label;
        sample.features.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            double v = 0.0;
            if (!parse_double_field(fields[i], v)) {
                throw DataError("line " + std::to_string(line_no) + ": non-numeric feature field " +
                                std::to_string(i - 1));
            }
            if (!std::isfinite(v)) {
                throw DataError("line " + std::to_string(line_no) + ": non-finite feature value");
            }
            sample.features.push_back(v);
        }
        if (!dim) {
            dim = sample.features.size();
        } else if (sample.features.size() != *dim) {
            throw DataError("line " + std::to_string(line_no) + ": dimension mismatch, expected " +
                            std::to_string(*dim) + " features, got " +
                            std::to_string(sample.features.size()));
        }

        const std::string id(fields[0]);
        auto it = task_index.find(id);
        if (it == task_index.end()) {
            it = task_index.emplace(id, tasks.size()).first;
            tasks.push_back(TaskDataset{id, {}});
        }
        tasks[it->second].samples.push_back(std::move(sample));
        seen_data = true;
    }
    if (!seen_data) throw DataError("empty input: no data rows");
    return tasks;
}

std::vector<TaskDataset> parse_dataset(const std::string& text,
                                       std::optional<std::size_t> expected_dim) {
    std::istringstream in(text);
    return parse_dataset(in, expected_dim);
}

void serialize_datasets(std::ostream& out, const std::vector<TaskDataset>& tasks) {
    std::string line;
    for (const auto& task : tasks) {
        for (const auto& s : task.samples) {
            line.clear();
            line += task.task_id;
            line += s.label > 0 ? ",+1" : ",-1";
            for (double f : s.features) {
                line += ',';
                format_double(line, f);
            }
            line += '\n';
            out << line;
        }
    }
}

std::string serialize_datasets(const std::vector<TaskDataset>& tasks) {
    std::ostringstream out;
    serialize_datasets(out, tasks);
    return out.str();
}

std::pair<TaskDataset, TaskDataset> split_target(const TaskDataset& dataset, std::size_t n_train,
                                                 std::uint64_t rng_seed) {
    const std::size_t n = dataset.size();
    if (n_train == 0) throw DataError("split_target: n_train must be positive");
    if (n_train >= n) throw DataError("split_target: n_train must be below the dataset size");
    if (!dataset.has_both_labels()) throw DataError("split_target: dataset has a single label");

    Rng rng(rng_seed);
    std::vector<std::size_t> perm;
    const int max_attempts = 100000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        perm = rng.permutation(n);
        if (n_train < 2) break;
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n_train; ++i) {
            (dataset.samples[perm[i]].label > 0 ? pos : neg) = true;
        }
        if (pos && neg) break;
        if (attempt + 1 == max_attempts) {
            throw DataError("split_target: could not draw both labels into the training part");
        }
    }

    TaskDataset train{dataset.task_id, {}}, test{dataset.task_id, {}};
    train.samples.reserve(n_train);
    test.samples.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? train : test).samples.push_back(dataset.samples[perm[i]]);
    }
    return {std::move(train), std::move(test)};
}

WeightVector normalize(const WeightVector& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw DataError("normalize: negative or non-finite weight");
        sum += w;
    }
    if (sum <= 0.0) throw DataError("normalize: total weight mass is zero");
    WeightVector out(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] / sum;
    return out;
}

double weighted_error(std::span<const int> labels, std::span<const int> predictions,
                      std::span<const double> weights) {
    if (labels.size() != predictions.size() || labels.size() != weights.size()) {
        throw DataError("weighted_error: length mismatch");
    }
    double wrong = 0.0, total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += weights[i];
        if (labels[i] != predictions[i]) wrong += weights[i];
    }
    if (total <= 0.0) throw DataError("weighted_error: total weight mass is zero");
    return wrong / total;
}

}  // namespace xfer
