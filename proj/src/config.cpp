#include "xfer/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace xfer {

ExperimentPlan::ExperimentPlan() {
    for (int k = 1; k <= 10; ++k) n_target_values.push_back(k);
}

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
}

double parse_real(const std::string& value, const std::string& key) {
    const char* first = value.c_str();
    const char* last = first + value.size();
    if (first != last && *first == '+') ++first;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

int parse_int(const std::string& value, const std::string& key) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.c_str(), value.c_str() + value.size(), out);
    if (ec != std::errc{} || ptr != value.c_str() + value.size()) {
        throw DataError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw DataError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

// "1,2,3" and "1..10" forms, combinable as "1..3,25,50"
std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto dots = item.find("..");
        if (dots != std::string::npos) {
            const int lo = parse_int(item.substr(0, dots), key);
            const int hi = parse_int(item.substr(dots + 2), key);
            if (lo > hi) throw DataError("config: empty range in key '" + key + "'");
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(parse_int(item, key));
        }
    }
    if (out.empty()) throw DataError("config: key '" + key + "' expects at least one value");
    for (int v : out) {
        if (v < 1) throw DataError("config: key '" + key + "' expects positive values");
    }
    return out;
}

MSVariant parse_variant(const std::string& value) {
    if (value == "exponential") return MSVariant::WeightedExponential;
    if (value == "multiplicative") return MSVariant::WeightedMultiplicative;
    throw DataError("config: wms variant must be exponential or multiplicative, got '" + value + "'");
}

EtaSchedule parse_eta(const std::string& value) {
    if (value == "linear") return EtaSchedule::Linear;
    if (value == "squared") return EtaSchedule::Squared;
    throw DataError("config: wms eta must be linear or squared, got '" + value + "'");
}

std::string variant_name(MSVariant v) {
    return v == MSVariant::WeightedExponential ? "exponential" : "multiplicative";
}

std::string eta_name(EtaSchedule e) { return e == EtaSchedule::Linear ? "linear" : "squared"; }

}  // namespace

MethodSpec resolve_method_token(const std::string& token, const MethodSpec& plan_defaults) {
    MethodSpec spec = plan_defaults;
    std::vector<std::string> parts;
    std::stringstream ss(token);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.empty()) throw DataError("config: empty method token");

    const std::string& head = parts[0];
    if (head == "ms") {
        spec.family = MethodFamily::MS;
        spec.ms.variant = MSVariant::Plain;
        spec.name = "ms";
    } else if (head == "wms") {
        spec.family = MethodFamily::WMS;
        if (spec.ms.variant == MSVariant::Plain) spec.ms.variant = MSVariant::WeightedExponential;
        if (parts.size() > 1) spec.ms.variant = parse_variant(parts[1]);
        if (parts.size() > 2) spec.ms.eta_schedule = parse_eta(parts[2]);
        spec.name = "wms-" + variant_name(spec.ms.variant) + "-" + eta_name(spec.ms.eta_schedule);
    } else if (head == "task") {
        spec.family = MethodFamily::Task;
        spec.name = "task";
    } else if (head == "multikt") {
        spec.family = MethodFamily::MultiKT;
        spec.name = "multikt";
    } else if (head == "svm") {
        spec.family = MethodFamily::SVM;
        spec.name = "svm";
    } else if (head == "tldf") {
        spec.family = MethodFamily::TLDF;
        spec.name = "tldf";
    } else {
        throw DataError("config: unknown method '" + head + "'");
    }
    if (parts.size() > 1 && head != "wms") {
        throw DataError("config: method '" + head + "' takes no qualifiers");
    }
    if (parts.size() > 3) throw DataError("config: too many qualifiers in '" + token + "'");
    return spec;
}

ExperimentPlan parse_config(const std::string& text) {
    ExperimentPlan plan;
    MethodSpec defaults;
    std::vector<std::string> method_tokens;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;

        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw DataError("config line " + std::to_string(line_no) + ": empty key");

        if (key == "method") {
            std::stringstream ss(value);
            std::string token;
            while (std::getline(ss, token, ',')) {
                token = trim(token);
                if (!token.empty()) method_tokens.push_back(token);
            }
            if (method_tokens.empty()) {
                throw DataError("config: method list is empty");
            }
        } else if (key == "rounds") {
            defaults.ms.rounds = parse_int(value, key);
            if (defaults.ms.rounds < 1) throw DataError("config: rounds must be positive");
        } else if (key == "wms.variant") {
            defaults.ms.variant = parse_variant(value);
        } else if (key == "wms.eta") {
            defaults.ms.eta_schedule = parse_eta(value);
        } else if (key == "vote_window") {
            if (value == "all") {
                defaults.ms.vote_window_mode = VoteWindowMode::AllRounds;
            } else if (value == "second_half") {
                defaults.ms.vote_window_mode = VoteWindowMode::SecondHalf;
            } else {
                throw DataError("config: vote_window must be all or second_half");
            }
        } else if (key == "task.phase1_rounds") {
            defaults.task_phase1_rounds = parse_int(value, key);
        } else if (key == "task.phase2_rounds") {
            defaults.task_phase2_rounds = parse_int(value, key);
        } else if (key == "task.remove_selected") {
            defaults.task_remove_selected = parse_bool(value, key);
        } else if (key == "kernel") {
            if (value == "linear") {
                defaults.kernel.kind = KernelKind::Linear;
            } else if (value == "rbf") {
                defaults.kernel.kind = KernelKind::Gaussian;
            } else {
                throw DataError("config: kernel must be linear or rbf");
            }
        } else if (key == "rbf.gamma") {
            defaults.kernel.gamma = parse_real(value, key);
            if (defaults.kernel.gamma <= 0.0) throw DataError("config: rbf.gamma must be positive");
        } else if (key == "svm.C") {
            if (value == "auto") {
                defaults.c_auto = true;
            } else {
                defaults.c_auto = false;
                defaults.c_value = parse_real(value, key);
                if (defaults.c_value <= 0.0) throw DataError("config: svm.C must be positive");
            }
        } else if (key == "tldf.gamma") {
            defaults.tldf.gamma = parse_real(value, key);
            if (defaults.tldf.gamma < 0.0 || defaults.tldf.gamma > 1.0) {
                throw DataError("config: tldf.gamma must lie in [0,1]");
            }
        } else if (key == "tldf.depth") {
            defaults.tldf.max_depth = parse_int(value, key);
        } else if (key == "tldf.trees") {
            defaults.tldf.n_trees = parse_int(value, key);
        } else if (key == "tldf.feature_candidates") {
            defaults.tldf.n_feature_candidates = parse_int(value, key);
        } else if (key == "tldf.threshold_candidates") {
            defaults.tldf.n_threshold_candidates = parse_int(value, key);
        } else if (key == "tldf.cov_epsilon") {
            defaults.tldf.cov_epsilon = parse_real(value, key);
        } else if (key == "tldf.combine") {
            if (value == "posterior") {
                defaults.tldf.majority_vote = false;
            } else if (value == "majority") {
                defaults.tldf.majority_vote = true;
            } else {
                throw DataError("config: tldf.combine must be posterior or majority");
            }
        } else if (key == "n_target") {
            plan.n_target_values = parse_int_list(value, key);
        } else if (key == "permutations") {
            plan.n_permutations = parse_int(value, key);
            if (plan.n_permutations < 1) throw DataError("config: permutations must be positive");
        } else if (key == "rotate_targets") {
            plan.rotate_targets = parse_bool(value, key);
        } else if (key == "test_fraction") {
            if (value == "all") {
                plan.test_fraction = 1.0;
            } else {
                plan.test_fraction = parse_real(value, key);
                if (plan.test_fraction <= 0.0 || plan.test_fraction > 1.0) {
                    throw DataError("config: test_fraction must lie in (0,1]");
                }
            }
        } else {
            throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (method_tokens.empty()) throw DataError("config: no method specified");
    for (const auto& token : method_tokens) {
        plan.methods.push_back(resolve_method_token(token, defaults));
    }
    // duplicate names would collide in the results CSV
    for (std::size_t i = 0; i < plan.methods.size(); ++i) {
        for (std::size_t j = i + 1; j < plan.methods.size(); ++j) {
            if (plan.methods[i].name == plan.methods[j].name) {
                throw DataError("config: duplicate method '" + plan.methods[i].name + "'");
            }
        }
    }
    return plan;
}

}  // namespace xfer
