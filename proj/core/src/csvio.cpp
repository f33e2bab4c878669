#include "ecgdig/csvio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ecgdig {

namespace {

void check_plain_field(const std::string& value, const char* what) {
  if (value.find_first_of(",\"\r\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " may not contain commas, quotes, or newlines");
  }
}

std::string quote_field(const std::string& value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& field, std::size_t line_number) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw std::invalid_argument("line " + std::to_string(line_number) + ": '" + field +
                                "' is not a number");
  }
  return value;
}

// Splits into lines, tolerating a trailing newline and CRLF endings.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

void expect_field_count(const std::vector<std::string>& fields, std::size_t expected,
                        std::size_t line_number) {
  if (fields.size() != expected) {
    throw std::invalid_argument("line " + std::to_string(line_number) + ": expected " +
                                std::to_string(expected) + " fields, found " +
                                std::to_string(fields.size()));
  }
}

nlohmann::json roc_points_json(const std::vector<RocPoint>& vertices) {
  nlohmann::json points = nlohmann::json::array();
  for (const RocPoint& p : vertices) {
    nlohmann::json entry;
    entry["fpr"] = p.fpr;
    entry["tpr"] = p.tpr;
    if (std::isfinite(p.threshold)) {
      entry["threshold"] = p.threshold;
    } else {
      entry["threshold"] = nullptr;
    }
    points.push_back(std::move(entry));
  }
  return points;
}

}  // namespace

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot replace " + path);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trace_to_csv(const TimeSeries& series) {
  if (series.values.size() != series.gaps.size()) {
    throw std::invalid_argument("trace values and gap mask differ in length");
  }
  std::string out = "time_s,voltage_mV,gap\n";
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    out += format_number(static_cast<double>(k) * series.dt);
    out += ',';
    out += format_number(series.values[k]);
    out += ',';
    out += series.gaps[k] ? '1' : '0';
    out += '\n';
  }
  return out;
}

TraceFile trace_from_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines.front() != "time_s,voltage_mV,gap") {
    throw std::invalid_argument("line 1: expected header 'time_s,voltage_mV,gap'");
  }
  TraceFile trace;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t line_number = k + 1;
    const std::vector<std::string> fields = split_fields(lines[k]);
    expect_field_count(fields, 3, line_number);
    trace.times.push_back(parse_double(fields[0], line_number));
    trace.values.push_back(parse_double(fields[1], line_number));
    if (fields[2] != "0" && fields[2] != "1") {
      throw std::invalid_argument("line " + std::to_string(line_number) +
                                  ": gap flag must be 0 or 1");
    }
    trace.gaps.push_back(fields[2] == "1" ? 1 : 0);
  }
  return trace;
}

std::string trace_sidecar_json(const TimeSeries& series, int sheet_type,
                               const ProcessingLog& log) {
  nlohmann::json doc;
  doc["lead"] = series.lead;
  doc["dt"] = series.dt;
  doc["n_samples"] = series.values.size();
  doc["sheet_type"] = sheet_type;
  nlohmann::json stages = nlohmann::json::array();
  for (const StageRecord& record : log) {
    nlohmann::json stage;
    stage["stage"] = record.stage;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [key, value] : record.params) {
      params.push_back(nlohmann::json::array({key, value}));
    }
    stage["params"] = std::move(params);
    stages.push_back(std::move(stage));
  }
  doc["provenance"] = std::move(stages);
  return doc.dump(2) + "\n";
}

std::string records_to_csv(const std::vector<LabeledRecord>& records) {
  const std::size_t samples = records.empty() ? 0 : records.front().samples.size();
  std::string out = "record_id,lead,label";
  for (std::size_t k = 0; k < samples; ++k) {
    out += ",sample_" + std::to_string(k);
  }
  out += '\n';
  for (const LabeledRecord& record : records) {
    if (record.samples.size() != samples) {
      throw std::invalid_argument("records have differing sample counts");
    }
    check_plain_field(record.id, "record id");
    check_plain_field(record.lead, "lead name");
    out += record.id;
    out += ',';
    out += record.lead;
    out += ',';
    out += std::to_string(record.label);
    for (double sample : record.samples) {
      out += ',';
      out += format_number(sample);
    }
    out += '\n';
  }
  return out;
}

std::vector<LabeledRecord> records_from_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::invalid_argument("line 1: empty record file");
  const std::vector<std::string> header = split_fields(lines.front());
  if (header.size() < 3 || header[0] != "record_id" || header[1] != "lead" ||
      header[2] != "label") {
    throw std::invalid_argument("line 1: expected header 'record_id,lead,label,sample_0...'");
  }
  const std::size_t samples = header.size() - 3;
  for (std::size_t k = 0; k < samples; ++k) {
    if (header[k + 3] != "sample_" + std::to_string(k)) {
      throw std::invalid_argument("line 1: sample column " + std::to_string(k) +
                                  " is misnamed '" + header[k + 3] + "'");
    }
  }

  std::vector<LabeledRecord> records;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t line_number = k + 1;
    const std::vector<std::string> fields = split_fields(lines[k]);
    expect_field_count(fields, header.size(), line_number);
    LabeledRecord record;
    record.id = fields[0];
    record.lead = fields[1];
    if (fields[2] == "0") {
      record.label = 0;
    } else if (fields[2] == "1") {
      record.label = 1;
    } else {
      throw std::invalid_argument("line " + std::to_string(line_number) +
                                  ": label must be 0 or 1");
    }
    record.samples.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      record.samples.push_back(parse_double(fields[s + 3], line_number));
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["split"] = report.split;
  doc["lead_set"] = report.lead_set;
  doc["accuracy"] = report.accuracy;
  doc["total_loss"] = report.total_loss;
  doc["auc"] = report.auc;
  nlohmann::json matrix;
  matrix["tp"] = report.matrix.tp;
  matrix["fp"] = report.matrix.fp;
  matrix["tn"] = report.matrix.tn;
  matrix["fn"] = report.matrix.fn;
  matrix["tp_rate"] = report.matrix.tp_rate;
  matrix["fn_rate"] = report.matrix.fn_rate;
  matrix["fp_rate"] = report.matrix.fp_rate;
  matrix["tn_rate"] = report.matrix.tn_rate;
  doc["confusion"] = std::move(matrix);
  doc["roc"] = roc_points_json(report.roc);
  return doc.dump(2) + "\n";
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points) {
    out += format_number(p.fpr);
    out += ',';
    out += format_number(p.tpr);
    out += ',';
    out += format_number(p.threshold);
    out += '\n';
  }
  return out;
}

std::string grid_table_to_csv(const std::vector<GridCell>& table) {
  std::string out =
      "epochs,learning_rate,hidden_size,num_layers,val_loss,val_auc,val_accuracy,failed,failure\n";
  for (const GridCell& cell : table) {
    out += std::to_string(cell.epochs);
    out += ',';
    out += format_number(cell.learning_rate);
    out += ',';
    out += std::to_string(cell.hidden_size);
    out += ',';
    out += std::to_string(cell.num_layers);
    if (cell.failed) {
      out += ",,,";
    } else {
      out += ',';
      out += format_number(cell.val_loss);
      out += ',';
      out += format_number(cell.val_auc);
      out += ',';
      out += format_number(cell.val_accuracy);
    }
    out += cell.failed ? ",1," : ",0,";
    out += quote_field(cell.failure);
    out += '\n';
  }
  return out;
}

std::string search_selection_json(const SearchSelection& selection) {
  nlohmann::json doc;
  doc["epochs"] = selection.epochs;
  doc["learning_rate"] = selection.learning_rate;
  doc["hidden_size"] = selection.hidden_size;
  doc["num_layers"] = selection.num_layers;
  nlohmann::json marginals = nlohmann::json::array();
  for (const MarginalEntry& entry : selection.marginals) {
    nlohmann::json row;
    row["parameter"] = entry.parameter;
    row["value"] = entry.value;
    row["mean_val_auc"] = entry.mean_val_auc;
    row["mean_val_loss"] = entry.mean_val_loss;
    row["mean_val_accuracy"] = entry.mean_val_accuracy;
    row["runs"] = entry.runs;
    marginals.push_back(std::move(row));
  }
  doc["marginals"] = std::move(marginals);
  return doc.dump(2) + "\n";
}

}  // namespace ecgdig
