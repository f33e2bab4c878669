#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgdig/neural.hpp"

namespace ecgdig {

// One labeled single-lead recording; the classifier's unit of provenance.
struct LabeledRecord {
  std::string id;
  std::string lead;  // "V1" or "V2"
  int label = 0;     // 1 positive, 0 negative
  std::vector<double> samples;
};

enum class Split { train, validation, test };

std::string split_name(Split split);

struct TaggedRecord {
  LabeledRecord record;
  Split split = Split::train;
};

// A fixed-length slice of one record, carrying its parent's identity so that
// no record ever straddles two splits.
struct Window {
  std::vector<double> samples;
  int label = 0;
  std::string record_id;
  std::string lead;
  Split split = Split::train;
};

struct WindowedDataset {
  std::vector<Window> windows;
  int window_size = 0;
};

// Shuffle the records with the seed, then deal them out by the given
// fractions (train, validation, test).  Fractions must be non-negative and
// sum to one; the train and validation counts round half up and the test
// split takes the remainder.  Splitting happens at record level so sibling
// windows can never leak across splits.
std::vector<TaggedRecord> split_records(std::vector<LabeledRecord> records,
                                        std::array<double, 3> fractions, std::uint64_t seed);

// Slice every record into consecutive non-overlapping windows, dropping any
// trailing remainder.  Windows inherit their record's label, lead, and split.
// A record shorter than one window is an error.
WindowedDataset make_windows(const std::vector<TaggedRecord>& records, int window_size = 500);

// Keep only the windows a lead selection covers: "V1", "V2", or "both".
WindowedDataset filter_lead_set(const WindowedDataset& data, const std::string& lead_set);

// The same selection at record level, for trimming a corpus to one lead-set
// experiment before it is split.
std::vector<LabeledRecord> filter_lead_records(const std::vector<LabeledRecord>& records,
                                               const std::string& lead_set);

// Class imbalance of the training split: negative / positive window count.
// Training without positives is meaningless, so zero positives is an error.
double pos_weight(const WindowedDataset& data);

// Fraction of scores whose thresholded class (score strictly above the
// threshold means positive) matches the label.
double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Receiver operating characteristic swept over every distinct score (with a
// +infinity sentinel for the all-negative corner) and its trapezoidal area.
// Tied scores collapse into a single vertex.  Both classes must be present;
// otherwise the area is undefined and the call raises an error.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct Confusion {
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  // Row-normalized rates; zero when the class is empty.
  double tp_rate = 0.0, fn_rate = 0.0, fp_rate = 0.0, tn_rate = 0.0;
};

Confusion confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold = 0.5);

struct EvalReport {
  std::string split;
  std::string lead_set;
  double accuracy = 0.0;
  double total_loss = 0.0;
  std::vector<RocPoint> roc;
  double auc = 0.0;
  Confusion matrix;
};

// Score every window of one split in evaluation mode and summarize: summed
// weighted loss, accuracy and confusion at threshold 0.5, and the ROC.
EvalReport evaluate_model(const LstmModel& model, const WindowedDataset& data, Split split,
                          double loss_pos_weight);

struct SearchGrid {
  std::vector<int> epochs{5, 10, 15};
  std::vector<double> learning_rates{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<int> hidden_sizes{100, 150, 200};
  std::vector<int> layer_counts{1, 2, 3};
  std::string lead_set = "V1";
};

// One trained grid cell's validation outcome.
struct GridCell {
  int epochs = 0;
  double learning_rate = 0.0;
  int hidden_size = 0;
  int num_layers = 0;
  double val_loss = 0.0;
  double val_auc = 0.0;
  double val_accuracy = 0.0;
  bool failed = false;
  std::string failure;
};

// Mean validation metrics over every non-failed run that used one candidate
// value of one parameter (other parameters free, or fixed by earlier stages).
struct MarginalEntry {
  std::string parameter;
  double value = 0.0;
  double mean_val_auc = 0.0;
  double mean_val_loss = 0.0;
  double mean_val_accuracy = 0.0;
  int runs = 0;
};

struct SearchSelection {
  int epochs = 0;
  double learning_rate = 0.0;
  int hidden_size = 0;
  int num_layers = 0;
  std::vector<MarginalEntry> marginals;  // every stage's candidates, in decision order
};

struct SearchResult {
  std::vector<GridCell> table;
  SearchSelection selection;
  // Why no configuration could be chosen (every run of some stage failed);
  // empty when `selection` is valid.  The table is always complete either
  // way, so the per-run failures stay inspectable.
  std::string selection_error;
};

// Sequentially fix one parameter after another (epochs, then learning rate,
// then hidden size, then layer count) by the best marginal validation area
// under the curve; ties fall back to the lower marginal loss, then the higher
// marginal accuracy, then the earlier option.  Failed cells are excluded from
// every mean.  Pure function of the table, so an emitted table can be audited
// against the selection it produced.
SearchSelection select_from_table(const std::vector<GridCell>& table, const SearchGrid& grid);

// Train and validate every parameter combination of the grid on the lead
// selection, then choose a configuration from the resulting table.  Cells are
// independently seeded from the base seed, so results do not depend on the
// number of worker threads.  A diverging cell is marked failed and excluded
// rather than aborting the search.
SearchResult grid_search(const SearchGrid& grid, const WindowedDataset& data, std::uint64_t seed,
                         int jobs = 1);

}  // namespace ecgdig
