#pragma once

#include <string>
#include <vector>

#include "ecgdig/extract.hpp"
#include "ecgdig/provenance.hpp"
#include "ecgdig/study.hpp"

namespace ecgdig {

// One number, nine significant digits, shortest form ("%.9g").
std::string format_number(double value);

// Replaces `path` by writing a sibling temp file and renaming it into place,
// so readers never observe a half-written file.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// A parsed per-lead trace file: one row per sample.
struct TraceFile {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::uint8_t> gaps;
};

// Per-lead trace CSV with header "time_s,voltage_mV,gap".
std::string trace_to_csv(const TimeSeries& series);
TraceFile trace_from_csv(const std::string& text);

// Sidecar JSON describing one emitted trace: lead, dt, n_samples, sheet
// type, and the ordered processing log (stage name plus key/value pairs).
std::string trace_sidecar_json(const TimeSeries& series, int sheet_type,
                               const ProcessingLog& log);

// Labeled-record CSV with header "record_id,lead,label,sample_0..sample_{K-1}".
// The reader takes the sample count from the header, so records of any
// length round trip; rows must all match the header's width.
std::string records_to_csv(const std::vector<LabeledRecord>& records);
std::vector<LabeledRecord> records_from_csv(const std::string& text);

// Evaluation report as JSON: split, lead set, accuracy, total loss, AUC,
// confusion counts and rates, and the ROC vertex list.  The opening ROC
// sentinel threshold (+infinity) serializes as null.
std::string eval_report_json(const EvalReport& report);

// ROC vertices as CSV with header "fpr,tpr,threshold"; the sentinel
// threshold prints as "inf".
std::string roc_to_csv(const RocCurve& curve);

// Every grid-search run as CSV with header
// "epochs,learning_rate,hidden_size,num_layers,val_loss,val_auc,val_accuracy,failed,failure".
std::string grid_table_to_csv(const std::vector<GridCell>& table);

// Search outcome as JSON: the chosen configuration plus every marginal mean
// the selection walked over.
std::string search_selection_json(const SearchSelection& selection);

}  // namespace ecgdig
