#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ecgdig/csvio.hpp"
#include "json.hpp"

using namespace ecgdig;

TEST_CASE("numbers print with nine significant digits") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(-0.25) == "-0.25");
  CHECK(format_number(123456789012.0) == "1.23456789e+11");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("atomic writes replace files without leaving temporaries") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path("csvio_scratch");
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "out.txt").string();

  write_text_atomic(path, "first\n");
  CHECK(read_text(path) == "first\n");
  write_text_atomic(path, "second\n");
  CHECK(read_text(path) == "second\n");

  int entries = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) entries += 1;
  CHECK(entries == 1);

  CHECK_THROWS_AS(read_text((dir / "missing.txt").string()), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("trace files round trip exactly") {
  TimeSeries series;
  series.lead = "V1";
  series.dt = 0.00125;
  series.values = {0.0, 0.5, -0.25};
  series.gaps = {0, 1, 0};

  const std::string csv = trace_to_csv(series);
  CHECK(csv ==
        "time_s,voltage_mV,gap\n"
        "0,0,0\n"
        "0.00125,0.5,1\n"
        "0.0025,-0.25,0\n");

  const TraceFile parsed = trace_from_csv(csv);
  CHECK(parsed.times == std::vector<double>{0.0, 0.00125, 0.0025});
  CHECK(parsed.values == series.values);
  CHECK(parsed.gaps == series.gaps);

  series.gaps.pop_back();
  CHECK_THROWS_AS(trace_to_csv(series), std::invalid_argument);
}

TEST_CASE("trace parsing reports the offending line") {
  CHECK_THROWS_WITH_AS(trace_from_csv("voltage,time\n"),
                       "line 1: expected header 'time_s,voltage_mV,gap'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(trace_from_csv("time_s,voltage_mV,gap\n0,0,0\n1,2\n"),
                       "line 3: expected 3 fields, found 2", std::invalid_argument);
  CHECK_THROWS_WITH_AS(trace_from_csv("time_s,voltage_mV,gap\n0,abc,0\n"),
                       "line 2: 'abc' is not a number", std::invalid_argument);
  CHECK_THROWS_AS(trace_from_csv("time_s,voltage_mV,gap\n0,0,2\n"), std::invalid_argument);
}

TEST_CASE("trace sidecars describe the emitted series") {
  TimeSeries series;
  series.lead = "II";
  series.dt = 0.0025;
  series.values = {0.0, 1.0};
  series.gaps = {0, 0};
  ProcessingLog log;
  log_stage(log, "downsample", {{"factor", "8"}});
  log_stage(log, "calibrate", {{"px_per_big_square", "10"}, {"baseline_row", "37.5"}});

  const nlohmann::json doc = nlohmann::json::parse(trace_sidecar_json(series, 3, log));
  CHECK(doc.at("lead") == "II");
  CHECK(doc.at("dt") == 0.0025);
  CHECK(doc.at("n_samples") == 2);
  CHECK(doc.at("sheet_type") == 3);
  CHECK(doc.at("provenance").size() == 2);
  CHECK(doc.at("provenance")[0].at("stage") == "downsample");
  CHECK(doc.at("provenance")[1].at("params")[1][0] == "baseline_row");
}

TEST_CASE("record files are header-driven and round trip") {
  std::vector<LabeledRecord> records(2);
  records[0] = {"sheet_000_V1", "V1", 1, {0.125, -0.5, 2.0}};
  records[1] = {"sheet_001_V2", "V2", 0, {0.0, 0.25, -1.75}};

  const std::string csv = records_to_csv(records);
  CHECK(csv.rfind("record_id,lead,label,sample_0,sample_1,sample_2\n", 0) == 0);
  const std::vector<LabeledRecord> parsed = records_from_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].id == records[0].id);
  CHECK(parsed[0].lead == "V1");
  CHECK(parsed[0].label == 1);
  CHECK(parsed[0].samples == records[0].samples);
  CHECK(parsed[1].samples == records[1].samples);

  // The header decides the sample count, whatever it is.
  const std::string five =
      "record_id,lead,label,sample_0,sample_1,sample_2,sample_3,sample_4\n"
      "r,V1,0,1,2,3,4,5\n";
  CHECK(records_from_csv(five).front().samples.size() == 5);

  CHECK(records_to_csv({}) == "record_id,lead,label\n");
  CHECK(records_from_csv("record_id,lead,label\n").empty());
}

TEST_CASE("record files reject malformed content with line numbers") {
  std::vector<LabeledRecord> bad(2);
  bad[0] = {"a", "V1", 0, {1.0, 2.0}};
  bad[1] = {"b", "V1", 0, {1.0}};
  CHECK_THROWS_AS(records_to_csv(bad), std::invalid_argument);
  bad[1] = {"b,c", "V1", 0, {1.0, 2.0}};
  CHECK_THROWS_AS(records_to_csv(bad), std::invalid_argument);

  const std::string header = "record_id,lead,label,sample_0\n";
  CHECK_THROWS_WITH_AS(records_from_csv("id,lead,label\n"),
                       "line 1: expected header 'record_id,lead,label,sample_0...'",
                       std::invalid_argument);
  CHECK_THROWS_AS(records_from_csv("record_id,lead,label,sample_1\n"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(records_from_csv(header + "r,V1,2,0\n"), "line 2: label must be 0 or 1",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(records_from_csv(header + "r,V1,0,0\nq,V1,1\n"),
                       "line 3: expected 4 fields, found 3", std::invalid_argument);
}

TEST_CASE("evaluation reports serialize every published metric") {
  EvalReport report;
  report.split = "test";
  report.lead_set = "V1";
  report.accuracy = 0.875;
  report.total_loss = 1.25;
  const RocCurve curve = roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  report.roc = curve.points;
  report.auc = curve.auc;
  report.matrix = confusion({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});

  const nlohmann::json doc = nlohmann::json::parse(eval_report_json(report));
  CHECK(doc.at("split") == "test");
  CHECK(doc.at("lead_set") == "V1");
  CHECK(doc.at("accuracy") == 0.875);
  CHECK(doc.at("total_loss") == 1.25);
  CHECK(doc.at("auc") == 1.0);
  CHECK(doc.at("confusion").at("tp") == 2);
  CHECK(doc.at("confusion").at("tn") == 2);
  CHECK(doc.at("confusion").at("tp_rate") == 1.0);
  CHECK(doc.at("roc").size() == report.roc.size());
  CHECK(doc.at("roc")[0].at("threshold").is_null());
  CHECK(doc.at("roc")[1].at("threshold") == 0.9);
}

TEST_CASE("ROC vertices export with an explicit sentinel") {
  const std::string csv = roc_to_csv(roc_auc({0.9, 0.1}, {1, 0}));
  CHECK(csv.rfind("fpr,tpr,threshold\n0,0,inf\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 vertices
}

TEST_CASE("grid tables keep failures on one quoted line") {
  std::vector<GridCell> table(2);
  table[0].epochs = 5;
  table[0].learning_rate = 1e-3;
  table[0].hidden_size = 100;
  table[0].num_layers = 1;
  table[0].val_loss = 2.5;
  table[0].val_auc = 0.75;
  table[0].val_accuracy = 0.5;
  table[1].epochs = 10;
  table[1].learning_rate = 1e-2;
  table[1].hidden_size = 200;
  table[1].num_layers = 2;
  table[1].failed = true;
  table[1].failure = "training diverged at epoch 3, instance \"7\"";

  const std::string csv = grid_table_to_csv(table);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("5,0.001,100,1,2.5,0.75,0.5,0,\"\"") != std::string::npos);
  CHECK(csv.find("10,0.01,200,2,,,,1,\"training diverged at epoch 3, instance \"\"7\"\"\"") !=
        std::string::npos);
}

TEST_CASE("search selections serialize the choice and its evidence") {
  SearchSelection selection;
  selection.epochs = 15;
  selection.learning_rate = 1e-3;
  selection.hidden_size = 150;
  selection.num_layers = 1;
  MarginalEntry entry;
  entry.parameter = "epochs";
  entry.value = 15;
  entry.mean_val_auc = 0.9;
  entry.mean_val_loss = 1.5;
  entry.mean_val_accuracy = 0.8;
  entry.runs = 36;
  selection.marginals.push_back(entry);

  const nlohmann::json doc = nlohmann::json::parse(search_selection_json(selection));
  CHECK(doc.at("epochs") == 15);
  CHECK(doc.at("learning_rate") == 1e-3);
  CHECK(doc.at("hidden_size") == 150);
  CHECK(doc.at("num_layers") == 1);
  CHECK(doc.at("marginals").size() == 1);
  CHECK(doc.at("marginals")[0].at("parameter") == "epochs");
  CHECK(doc.at("marginals")[0].at("runs") == 36);
}
