#ifndef XFER_MODEL_IO_HPP
#define XFER_MODEL_IO_HPP

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "xfer/boosting.hpp"
#include "xfer/forest_transfer.hpp"
#include "xfer/kernel_transfer.hpp"
#include "xfer/task_transfer.hpp"

namespace xfer {

/// Ensemble format: `ensemble <n> <window_lo> <window_hi>` followed by one
/// member per line, either `<alpha> stump <f> <t> <p>` or
/// `<alpha> expert <task> <n>` with n inline (alpha, feature, threshold,
/// polarity) groups. All doubles round-trip at full precision.
void write_ensemble(std::ostream& out, const TransferEnsemble& ensemble);
TransferEnsemble read_ensemble(std::istream& in);

/// `kmodel <task> <kernel...> <n>`, n expansion rows `<coeff> <f1..fd>`,
/// then `bias <b>`.
void write_kmodel(std::ostream& out, const SourceModelK& model);
SourceModelK read_kmodel(std::istream& in);

/// `multikt <kernel...> <C> <J>`, a betas line, the target expansion as a
/// kmodel block, then J source kmodel blocks.
void write_multikt(std::ostream& out, const MultiKTModel& model);
MultiKTModel read_multikt(std::istream& in);

/// `tldfforest <n_trees> <majority>` followed by per-tree preorder blocks of
/// `split <f> <t>` / `leaf <p_pos>` lines.
void write_forest(std::ostream& out, const TLDFForest& forest);
TLDFForest read_forest(std::istream& in);

using AnyModel = std::variant<TransferEnsemble, MultiKTModel, TLDFForest>;

void save_model(std::ostream& out, const AnyModel& model);
/// Dispatches on the leading keyword.
AnyModel load_model(std::istream& in);

int any_model_predict(const AnyModel& model, std::span<const double> x);
double any_model_accuracy(const AnyModel& model, const TaskDataset& data);

}  // namespace xfer

#endif
