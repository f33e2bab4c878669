#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ecgdig/csvio.hpp"
#include "ecgdig/layout.hpp"
#include "ecgdig/neural.hpp"
#include "ecgdig/pgm.hpp"
#include "ecgdig/pipeline.hpp"
#include "ecgdig/plot.hpp"
#include "ecgdig/study.hpp"
#include "ecgdig/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ecgdig;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

// Resolves one parameter from flag > config file > built-in default, and
// records the value with its provenance for the resolved-config echo.
struct ConfigTracker {
  const CLI::App* cmd = nullptr;
  json config;
  json doc = json::object();

  static std::string flag_name(const std::string& key) {
    std::string flag = "--";
    for (char c : key) flag += c == '_' ? '-' : c;
    return flag;
  }

  template <typename T>
  T resolve(const std::string& key, T value, const char* default_origin) {
    const char* origin = default_origin;
    if (cmd->count(flag_name(key)) > 0) {
      origin = "user";
    } else if (config.contains(key)) {
      value = config.at(key).get<T>();
      origin = "user";
    }
    note(key, value, origin);
    return value;
  }

  void note(const std::string& key, const json& value, const char* origin) {
    doc[key] = json{{"value", value}, {"provenance", origin}};
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  const json doc = json::parse(read_text(path));
  if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  return doc;
}

void emit_resolved_config(const std::string& out_dir, const std::string& command,
                          const ConfigTracker& tracker, const json& extra = json()) {
  json doc;
  doc["command"] = command;
  doc["parameters"] = tracker.doc;
  if (!extra.is_null()) {
    for (const auto& [key, value] : extra.items()) doc[key] = value;
  }
  write_text_atomic((fs::path(out_dir) / "resolved_config.json").string(), doc.dump(2) + "\n");
}

void write_pgm_atomic(const std::string& path, const GrayImage& img) {
  const std::string tmp = path + ".tmp";
  write_pgm(tmp, img);
  fs::rename(tmp, path);
}

GrayImage mask_to_gray(const BinaryImage& mask) {
  GrayImage img = GrayImage::filled(mask.width, mask.height, 0);
  for (std::size_t k = 0; k < mask.pixels.size(); ++k) {
    img.pixels[k] = mask.pixels[k] ? 255 : 0;
  }
  return img;
}

int type_number(SheetType type) {
  switch (type) {
    case SheetType::kType1: return 1;
    case SheetType::kType2: return 2;
    case SheetType::kType3: return 3;
  }
  return 0;
}

std::string zero_pad(int value, int digits) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%0*d", digits, value);
  return buffer;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string config_path;
  std::string out_dir = "synth_out";
  std::uint64_t seed = 0;
  int count = 1;
  std::string type = "2";
  double seconds = 10.0;
  double rotation = 0.0;
  double rotation_range = 0.0;
  double noise = 0.0;
  double st_fraction = 0.0;
  int pitch = 80;
};

int run_synth(const CLI::App* cmd, SynthArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};
  fs::create_directories(args.out_dir);

  const std::uint64_t seed = tracker.resolve("seed", args.seed, "calibrated");
  const int count = tracker.resolve("count", args.count, "calibrated");
  const std::string type_name = tracker.resolve("type", args.type, "calibrated");
  const double seconds = tracker.resolve("seconds", args.seconds, "calibrated");
  const double rotation = tracker.resolve("rotation", args.rotation, "calibrated");
  const double rotation_range = tracker.resolve("rotation_range", args.rotation_range, "calibrated");
  const double noise = tracker.resolve("noise", args.noise, "calibrated");
  const double st_fraction = tracker.resolve("st_fraction", args.st_fraction, "calibrated");
  const int pitch = tracker.resolve("pitch", args.pitch, "calibrated");
  const SheetType type = parse_sheet_type(type_name);
  if (count < 0) throw std::invalid_argument("count must be non-negative");
  emit_resolved_config(args.out_dir, "synth", tracker);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-rotation_range, rotation_range);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  json manifest_sheets = json::array();
  json labels = json::object();
  for (int k = 0; k < count; ++k) {
    // Fixed per-sheet draw order keeps the whole corpus a function of the seed.
    const double drawn_angle = angle(rng);
    const double st_draw = unit(rng);
    const std::uint64_t sheet_seed = rng();

    SynthSpec spec = SynthSpec::defaults(type);
    spec.seconds = seconds;
    spec.grid_pitch_px = pitch;
    spec.noise_level = noise;
    spec.rotation_deg = rotation_range > 0.0 ? drawn_angle : rotation;
    const bool flagged = st_draw < st_fraction;
    if (flagged) {
      for (SynthLead& lead : spec.leads) lead.wave.st_elevation = true;
    }

    const SynthResult result = render_sheet(spec, sheet_seed);
    const std::string stem = "sheet_" + zero_pad(k, 3);
    const fs::path base = fs::path(args.out_dir);
    write_pgm_atomic((base / (stem + ".pgm")).string(), result.sheet);
    write_pgm_atomic((base / (stem + "_ink.pgm")).string(), mask_to_gray(result.ink_mask));
    write_pgm_atomic((base / (stem + "_grid.pgm")).string(), mask_to_gray(result.grid_mask));
    write_pgm_atomic((base / (stem + "_glyph.pgm")).string(), mask_to_gray(result.glyph_mask));

    json truth_doc;
    truth_doc["sheet"] = stem;
    truth_doc["type"] = type_number(type);
    truth_doc["rotation_deg"] = spec.rotation_deg;
    truth_doc["st_elevation"] = flagged;
    truth_doc["seconds_per_px"] = result.seconds_per_px;
    truth_doc["px_per_mv"] = result.px_per_mv;
    truth_doc["baseline_rows"] = result.baseline_rows;
    json lead_names = json::array();
    for (const TimeSeries& series : result.truth) {
      lead_names.push_back(series.lead);
      write_text_atomic((base / (stem + "_" + series.lead + "_truth.csv")).string(),
                        trace_to_csv(series));
    }
    truth_doc["leads"] = std::move(lead_names);
    write_text_atomic((base / (stem + "_truth.json")).string(), truth_doc.dump(2) + "\n");

    manifest_sheets.push_back(json{{"path", stem + ".pgm"}, {"type", to_string(type)}});
    labels[stem] = flagged ? 1 : 0;
  }

  json manifest;
  manifest["sheets"] = std::move(manifest_sheets);
  write_text_atomic((fs::path(args.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  write_text_atomic((fs::path(args.out_dir) / "labels.json").string(), labels.dump(2) + "\n");
  std::printf("synth: wrote %d sheet(s) to %s\n", count, args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// digitize

struct DigitizeArgs {
  std::string config_path;
  std::string out_dir = "digitize_out";
  std::uint64_t seed = 1;
  int jobs = 1;
  std::vector<std::string> inputs;
  std::string manifest_path;
  std::string type;
  bool no_deskew = false;
  bool plots = false;
};

TypeProfile profile_from_entry(const json& entry, SheetType type) {
  TypeProfile profile = TypeProfile::defaults(type);
  if (entry.contains("downsample_factor"))
    profile.downsample_factor = entry.at("downsample_factor").get<int>();
  if (entry.contains("binarize_threshold"))
    profile.binarize_threshold = entry.at("binarize_threshold").get<int>();
  if (entry.contains("inverted")) profile.inverted = entry.at("inverted").get<bool>();
  if (entry.contains("min_contour_pixels"))
    profile.min_contour_pixels = entry.at("min_contour_pixels").get<std::size_t>();
  if (entry.contains("px_per_big_square"))
    profile.px_per_big_square = entry.at("px_per_big_square").get<double>();
  if (entry.contains("min_peak_distance"))
    profile.min_peak_distance = entry.at("min_peak_distance").get<int>();
  if (entry.contains("strip_leads"))
    profile.strip_leads = entry.at("strip_leads").get<std::vector<std::string>>();
  if (entry.contains("frame_shifts")) {
    const auto shifts = entry.at("frame_shifts").get<std::vector<int>>();
    if (shifts.size() != 4) {
      throw std::invalid_argument("frame_shifts must be [top, bottom, left, right]");
    }
    profile.frame_shifts = {shifts[0], shifts[1], shifts[2], shifts[3]};
  }
  return profile;
}

int run_digitize(const CLI::App* cmd, DigitizeArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};

  std::vector<json> entries;
  if (!args.manifest_path.empty()) {
    const json doc = json::parse(read_text(args.manifest_path));
    const json& sheets = doc.is_array() ? doc : doc.at("sheets");
    const fs::path manifest_dir = fs::path(args.manifest_path).parent_path();
    for (const json& entry : sheets) {
      json copy = entry;
      // Manifest paths are relative to the manifest file itself.
      const fs::path p(copy.at("path").get<std::string>());
      if (p.is_relative()) copy["path"] = (manifest_dir / p).string();
      entries.push_back(std::move(copy));
    }
  }
  for (const std::string& input : args.inputs) {
    entries.push_back(json{{"path", input}});
  }

  const std::uint64_t seed = tracker.resolve("seed", args.seed, "calibrated");
  const std::string default_type = tracker.resolve("type", args.type, "calibrated");
  bool deskew = true;
  {
    const char* origin = "calibrated";
    if (cmd->count("--no-deskew") > 0) {
      deskew = false;
      origin = "user";
    } else if (tracker.config.contains("deskew")) {
      deskew = tracker.config.at("deskew").get<bool>();
      origin = "user";
    }
    tracker.note("deskew", deskew, origin);
  }
  const bool plots = tracker.resolve("plots", args.plots, "calibrated");
  const int jobs = std::max(1, tracker.resolve("jobs", args.jobs, "calibrated"));

  if (entries.empty()) {
    std::printf("digitize: empty manifest, nothing to do\n");
    return 0;
  }
  fs::create_directories(args.out_dir);
  emit_resolved_config(args.out_dir, "digitize", tracker, json{{"sheets", entries}});

  std::vector<std::string> errors(entries.size());
  auto worker = [&](std::size_t start, std::size_t stride) {
    for (std::size_t k = start; k < entries.size(); k += stride) {
      const json& entry = entries[k];
      const std::string path = entry.at("path").get<std::string>();
      try {
        std::string declared = default_type;
        if (entry.contains("type")) declared = entry.at("type").get<std::string>();
        if (declared.empty()) throw std::invalid_argument("sheet type not declared");
        const SheetType type = parse_sheet_type(declared);
        const TypeProfile profile = profile_from_entry(entry, type);

        DigitizeOptions options;
        options.seed = seed;
        options.deskew_enabled = deskew;
        if (entry.contains("manual_crop")) {
          const auto crop = entry.at("manual_crop").get<std::vector<int>>();
          if (crop.size() != 4) {
            throw std::invalid_argument("manual_crop must be [x, y, width, height]");
          }
          options.manual_crop = Rect{crop[0], crop[1], crop[2], crop[3]};
        }

        const GrayImage sheet = read_pgm(path);
        const DigitizeResult result = digitize_sheet(sheet, profile, options);

        const std::string stem = fs::path(path).stem().string();
        for (const TimeSeries& series : result.series) {
          const fs::path base = fs::path(args.out_dir) / (stem + "_" + series.lead);
          write_text_atomic(base.string() + ".csv", trace_to_csv(series));
          write_text_atomic(base.string() + ".json",
                            trace_sidecar_json(series, type_number(type), result.log));
          if (plots) {
            std::vector<double> times(series.values.size());
            for (std::size_t t = 0; t < times.size(); ++t) {
              times[t] = static_cast<double>(t) * series.dt;
            }
            write_text_atomic(base.string() + ".svg",
                              svg_series(times, series.values, series.gaps,
                                         stem + " " + series.lead));
          }
        }
      } catch (const std::exception& e) {
        errors[k] = path + ": " + e.what();
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), entries.size());
  if (workers <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker, w, workers);
    for (std::thread& t : pool) t.join();
  }

  int failures = 0;
  for (const std::string& error : errors) {
    if (error.empty()) continue;
    failures += 1;
    std::fprintf(stderr, "ecgdig: %s\n", error.c_str());
  }
  std::printf("digitize: %zu sheet(s), %d failed\n", entries.size(), failures);
  return failures > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// dataset loading shared by train / evaluate / search

struct DatasetArgs {
  std::string data_csv;
  std::string traces_dir;
  std::string labels_path;
};

std::vector<LabeledRecord> load_dataset(const DatasetArgs& args) {
  if (!args.data_csv.empty()) return records_from_csv(read_text(args.data_csv));
  if (args.traces_dir.empty() || args.labels_path.empty()) {
    throw std::invalid_argument("provide --data, or --traces together with --labels");
  }
  const json labels = json::parse(read_text(args.labels_path));

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(args.traces_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.size() >= 6 && stem.rfind("_truth") == stem.size() - 6) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<LabeledRecord> records;
  for (const fs::path& file : files) {
    fs::path sidecar = file;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) continue;  // not a digitized trace
    const json meta = json::parse(read_text(sidecar.string()));
    if (!meta.contains("lead")) continue;

    LabeledRecord record;
    record.id = file.stem().string();
    record.lead = meta.at("lead").get<std::string>();

    std::string sheet_key = record.id;
    const std::string suffix = "_" + record.lead;
    if (sheet_key.size() > suffix.size() &&
        sheet_key.compare(sheet_key.size() - suffix.size(), suffix.size(), suffix) == 0) {
      sheet_key = sheet_key.substr(0, sheet_key.size() - suffix.size());
    }
    if (labels.contains(record.id)) {
      record.label = labels.at(record.id).get<int>();
    } else if (labels.contains(sheet_key)) {
      record.label = labels.at(sheet_key).get<int>();
    } else {
      throw std::invalid_argument("no label for " + record.id);
    }

    const TraceFile trace = trace_from_csv(read_text(file.string()));
    record.samples = trace.values;
    records.push_back(std::move(record));
  }
  if (records.empty()) {
    throw std::invalid_argument("no labeled traces found in " + args.traces_dir);
  }
  return records;
}

void print_report_lines(const EvalReport& validation, const EvalReport& test) {
  std::printf("Val Total Loss: %s\n", format_number(validation.total_loss).c_str());
  std::printf("Val AUC: %s\n", format_number(validation.auc).c_str());
  std::printf("Val ACC: %s\n", format_number(validation.accuracy).c_str());
  std::printf("Test AUC: %s\n", format_number(test.auc).c_str());
  std::printf("Test ACC: %s\n", format_number(test.accuracy).c_str());
}

void write_report(const std::string& out_dir, const std::string& name,
                  const EvalReport& report) {
  write_text_atomic((fs::path(out_dir) / (name + "_report.json")).string(),
                    eval_report_json(report));
  RocCurve curve;
  curve.points = report.roc;
  curve.auc = report.auc;
  write_text_atomic((fs::path(out_dir) / (name + "_roc.csv")).string(), roc_to_csv(curve));
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config_path;
  std::string out_dir = "train_out";
  std::uint64_t seed = 0;
  DatasetArgs dataset;
  std::string lead_set = "V1";
  int window_size = 500;
  std::vector<double> fractions = {0.70, 0.15, 0.15};
  int epochs = 15;
  double learning_rate = 1e-3;
  int hidden_size = 150;
  int num_layers = 1;
  double dropout = 0.25;
};

int run_train(const CLI::App* cmd, TrainArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};
  fs::create_directories(args.out_dir);

  const std::uint64_t seed = tracker.resolve("seed", args.seed, "calibrated");
  const std::string lead_set = tracker.resolve("lead_set", args.lead_set, "paper");
  const int window_size = tracker.resolve("window_size", args.window_size, "paper");
  const std::vector<double> fractions = tracker.resolve("fractions", args.fractions, "paper");
  const int epochs = tracker.resolve("epochs", args.epochs, "paper");
  const double learning_rate = tracker.resolve("learning_rate", args.learning_rate, "paper");
  const int hidden_size = tracker.resolve("hidden_size", args.hidden_size, "paper");
  const int num_layers = tracker.resolve("num_layers", args.num_layers, "paper");
  const double dropout = tracker.resolve("dropout", args.dropout, "paper");
  if (fractions.size() != 3) throw std::invalid_argument("fractions must hold three values");

  // The lead-set experiment owns its dataset: trim to the selection first,
  // then split those records, so the published split fractions apply to the
  // records the model will actually see.
  const std::vector<LabeledRecord> records =
      filter_lead_records(load_dataset(args.dataset), lead_set);
  std::mt19937_64 rng(seed);
  const std::uint64_t split_seed = rng();
  const std::uint64_t init_seed = rng();
  const std::uint64_t train_seed = rng();

  const std::vector<TaggedRecord> tagged =
      split_records(records, {fractions[0], fractions[1], fractions[2]}, split_seed);
  const WindowedDataset filtered = make_windows(tagged, window_size);
  const double weight = pos_weight(filtered);
  tracker.note("pos_weight", weight, "computed");
  emit_resolved_config(args.out_dir, "train", tracker);

  std::vector<std::vector<double>> sequences;
  std::vector<int> labels;
  for (const Window& w : filtered.windows) {
    if (w.split != Split::train) continue;
    sequences.push_back(w.samples);
    labels.push_back(w.label);
  }

  LstmModel model = make_model(1, hidden_size, num_layers, dropout, init_seed);
  model.lead_set = lead_set;
  TrainConfig config;
  config.epochs = epochs;
  config.learning_rate = learning_rate;
  config.pos_weight = weight;
  config.seed = train_seed;

  std::printf("train: %zu training windows, pos_weight %s\n", sequences.size(),
              format_number(weight).c_str());
  const std::vector<double> losses = train(model, sequences, labels, config);
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::printf("epoch %zu/%d: training loss %s\n", e + 1, epochs,
                format_number(losses[e]).c_str());
  }

  const std::string model_path = (fs::path(args.out_dir) / "model.json").string();
  save_model(model, model_path);

  const EvalReport validation = evaluate_model(model, filtered, Split::validation, weight);
  const EvalReport test = evaluate_model(model, filtered, Split::test, weight);
  write_report(args.out_dir, "val", validation);
  write_report(args.out_dir, "test", test);
  print_report_lines(validation, test);
  std::printf("train: checkpoint written to %s\n", model_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string config_path;
  std::string out_dir = "evaluate_out";
  std::uint64_t seed = 0;
  DatasetArgs dataset;
  std::string model_path;
  std::string lead_set;
  int window_size = 500;
  std::vector<double> fractions = {0.70, 0.15, 0.15};
};

int run_evaluate(const CLI::App* cmd, EvaluateArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};
  fs::create_directories(args.out_dir);

  const std::uint64_t seed = tracker.resolve("seed", args.seed, "calibrated");
  const std::string model_path = tracker.resolve("model", args.model_path, "user");
  const int window_size = tracker.resolve("window_size", args.window_size, "paper");
  const std::vector<double> fractions = tracker.resolve("fractions", args.fractions, "paper");
  if (fractions.size() != 3) throw std::invalid_argument("fractions must hold three values");
  if (model_path.empty()) throw std::invalid_argument("--model is required");

  const LstmModel model = load_model(model_path);
  std::string lead_set = args.lead_set;
  {
    const char* origin = "checkpoint";
    if (cmd->count("--lead-set") > 0) {
      origin = "user";
    } else if (tracker.config.contains("lead_set")) {
      lead_set = tracker.config.at("lead_set").get<std::string>();
      origin = "user";
    } else {
      lead_set = model.lead_set.empty() ? "V1" : model.lead_set;
    }
    tracker.note("lead_set", lead_set, origin);
  }

  const std::vector<LabeledRecord> records =
      filter_lead_records(load_dataset(args.dataset), lead_set);
  std::mt19937_64 rng(seed);
  const std::uint64_t split_seed = rng();
  const std::vector<TaggedRecord> tagged =
      split_records(records, {fractions[0], fractions[1], fractions[2]}, split_seed);
  const WindowedDataset filtered = make_windows(tagged, window_size);
  const double weight = pos_weight(filtered);
  tracker.note("pos_weight", weight, "computed");
  emit_resolved_config(args.out_dir, "evaluate", tracker);

  const EvalReport validation = evaluate_model(model, filtered, Split::validation, weight);
  const EvalReport test = evaluate_model(model, filtered, Split::test, weight);
  write_report(args.out_dir, "val", validation);
  write_report(args.out_dir, "test", test);
  print_report_lines(validation, test);
  return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
  std::string config_path;
  std::string out_dir = "search_out";
  std::uint64_t seed = 0;
  int jobs = 1;
  DatasetArgs dataset;
  std::string lead_set = "V1";
  int window_size = 500;
  std::vector<double> fractions = {0.70, 0.15, 0.15};
  std::vector<int> epochs;
  std::vector<double> learning_rates;
  std::vector<int> hidden_sizes;
  std::vector<int> layer_counts;
};

int run_search(const CLI::App* cmd, SearchArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};
  fs::create_directories(args.out_dir);

  const SearchGrid paper_grid;
  if (args.epochs.empty()) args.epochs = paper_grid.epochs;
  if (args.learning_rates.empty()) args.learning_rates = paper_grid.learning_rates;
  if (args.hidden_sizes.empty()) args.hidden_sizes = paper_grid.hidden_sizes;
  if (args.layer_counts.empty()) args.layer_counts = paper_grid.layer_counts;

  const std::uint64_t seed = tracker.resolve("seed", args.seed, "calibrated");
  const int jobs = std::max(1, tracker.resolve("jobs", args.jobs, "calibrated"));
  const std::string lead_set = tracker.resolve("lead_set", args.lead_set, "paper");
  const int window_size = tracker.resolve("window_size", args.window_size, "paper");
  const std::vector<double> fractions = tracker.resolve("fractions", args.fractions, "paper");
  SearchGrid grid;
  grid.epochs = tracker.resolve("epochs", args.epochs, "paper");
  grid.learning_rates = tracker.resolve("learning_rates", args.learning_rates, "paper");
  grid.hidden_sizes = tracker.resolve("hidden_sizes", args.hidden_sizes, "paper");
  grid.layer_counts = tracker.resolve("layer_counts", args.layer_counts, "paper");
  if (fractions.size() != 3) throw std::invalid_argument("fractions must hold three values");
  emit_resolved_config(args.out_dir, "search", tracker);

  const std::vector<LabeledRecord> records = load_dataset(args.dataset);
  std::mt19937_64 rng(seed);

  std::vector<std::string> lead_sets;
  if (lead_set == "all") {
    lead_sets = {"V1", "V2", "both"};
  } else {
    lead_sets = {lead_set};
  }

  for (const std::string& ls : lead_sets) {
    grid.lead_set = ls;
    // Each lead-set experiment splits its own record subset.
    const std::uint64_t split_seed = rng();
    const std::uint64_t search_seed = rng();
    const std::vector<TaggedRecord> tagged =
        split_records(filter_lead_records(records, ls),
                      {fractions[0], fractions[1], fractions[2]}, split_seed);
    const WindowedDataset windows = make_windows(tagged, window_size);
    const SearchResult result = grid_search(grid, windows, search_seed, jobs);
    write_text_atomic((fs::path(args.out_dir) / (ls + "_grid_table.csv")).string(),
                      grid_table_to_csv(result.table));
    if (!result.selection_error.empty()) {
      throw std::runtime_error("lead set " + ls + ": " + result.selection_error +
                               " (per-run failures in " + ls + "_grid_table.csv)");
    }
    write_text_atomic((fs::path(args.out_dir) / (ls + "_selection.json")).string(),
                      search_selection_json(result.selection));
    int completed = 0;
    for (const GridCell& cell : result.table) completed += cell.failed ? 0 : 1;
    std::printf(
        "search[%s]: %zu runs (%d completed), chose epochs=%d lr=%s hidden=%d layers=%d\n",
        ls.c_str(), result.table.size(), completed, result.selection.epochs,
        format_number(result.selection.learning_rate).c_str(), result.selection.hidden_size,
        result.selection.num_layers);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string config_path;
  std::string out_dir = "plot_out";
  std::uint64_t seed = 0;
  std::string input;
  std::string kind = "auto";
  std::string title;
};

RocCurve roc_from_points(std::vector<RocPoint> points) {
  RocCurve curve;
  curve.points = std::move(points);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    curve.auc += (curve.points[k].fpr - curve.points[k - 1].fpr) *
                 (curve.points[k].tpr + curve.points[k - 1].tpr) / 2.0;
  }
  return curve;
}

int run_plot(const CLI::App* cmd, PlotArgs& args) {
  ConfigTracker tracker{cmd, load_config_file(args.config_path)};
  fs::create_directories(args.out_dir);

  const std::string kind_flag = tracker.resolve("kind", args.kind, "calibrated");
  const std::string stem = fs::path(args.input).stem().string();
  const std::string title = args.title.empty() ? stem : args.title;
  tracker.note("input", args.input, "user");
  tracker.note("title", title, args.title.empty() ? "calibrated" : "user");
  emit_resolved_config(args.out_dir, "plot", tracker);

  const std::string text = read_text(args.input);
  std::string kind = kind_flag;
  if (kind == "auto") {
    if (fs::path(args.input).extension() == ".json") {
      kind = "roc";
    } else {
      const std::string header = text.substr(0, text.find('\n'));
      if (header == "time_s,voltage_mV,gap") {
        kind = "trace";
      } else if (header == "fpr,tpr,threshold") {
        kind = "roc";
      } else if (header == "row,count") {
        kind = "profile";
      } else {
        throw std::invalid_argument("line 1: unrecognized header '" + header + "'");
      }
    }
  }

  std::string svg;
  if (kind == "trace") {
    const TraceFile trace = trace_from_csv(text);
    svg = svg_series(trace.times, trace.values, trace.gaps, title);
  } else if (kind == "roc") {
    RocCurve curve;
    if (fs::path(args.input).extension() == ".json") {
      const json doc = json::parse(text);
      for (const json& p : doc.at("roc")) {
        RocPoint point;
        point.fpr = p.at("fpr").get<double>();
        point.tpr = p.at("tpr").get<double>();
        point.threshold = p.at("threshold").is_null()
                              ? std::numeric_limits<double>::infinity()
                              : p.at("threshold").get<double>();
        curve.points.push_back(point);
      }
      curve.auc = doc.at("auc").get<double>();
    } else {
      const std::vector<std::string> lines = [&] {
        std::vector<std::string> out;
        std::string current;
        for (char c : text) {
          if (c == '\n') {
            out.push_back(std::move(current));
            current.clear();
          } else if (c != '\r') {
            current += c;
          }
        }
        if (!current.empty()) out.push_back(std::move(current));
        return out;
      }();
      if (lines.empty() || lines.front() != "fpr,tpr,threshold") {
        throw std::invalid_argument("line 1: expected header 'fpr,tpr,threshold'");
      }
      std::vector<RocPoint> points;
      for (std::size_t k = 1; k < lines.size(); ++k) {
        std::stringstream row(lines[k]);
        std::string f, t, th;
        if (!std::getline(row, f, ',') || !std::getline(row, t, ',') ||
            !std::getline(row, th)) {
          throw std::invalid_argument("line " + std::to_string(k + 1) + ": expected 3 fields");
        }
        RocPoint point;
        try {
          point.fpr = std::stod(f);
          point.tpr = std::stod(t);
          point.threshold = th == "inf" ? std::numeric_limits<double>::infinity() : std::stod(th);
        } catch (const std::exception&) {
          throw std::invalid_argument("line " + std::to_string(k + 1) + ": malformed number");
        }
        points.push_back(point);
      }
      curve = roc_from_points(std::move(points));
    }
    svg = svg_roc(curve, title);
  } else if (kind == "profile") {
    const std::vector<std::string> lines = [&] {
      std::vector<std::string> out;
      std::string current;
      for (char c : text) {
        if (c == '\n') {
          out.push_back(std::move(current));
          current.clear();
        } else if (c != '\r') {
          current += c;
        }
      }
      if (!current.empty()) out.push_back(std::move(current));
      return out;
    }();
    if (lines.empty() || lines.front() != "row,count") {
      throw std::invalid_argument("line 1: expected header 'row,count'");
    }
    std::vector<double> counts;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const std::size_t comma = lines[k].find(',');
      if (comma == std::string::npos) {
        throw std::invalid_argument("line " + std::to_string(k + 1) + ": expected 2 fields");
      }
      try {
        counts.push_back(std::stod(lines[k].substr(comma + 1)));
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(k + 1) + ": malformed number");
      }
    }
    svg = svg_profile(counts, title);
  } else {
    throw std::invalid_argument("unknown plot kind '" + kind + "'");
  }

  const std::string out_path = (fs::path(args.out_dir) / (stem + ".svg")).string();
  write_text_atomic(out_path, svg);
  std::printf("plot: wrote %s\n", out_path.c_str());
  return 0;
}

void add_global_flags(CLI::App* cmd, std::string& config_path, std::string& out_dir,
                      std::uint64_t& seed) {
  cmd->add_option("--config", config_path, "JSON config file; flags override its values");
  cmd->add_option("--out", out_dir, "output directory");
  cmd->add_option("--seed", seed, "random seed");
}

void add_dataset_flags(CLI::App* cmd, DatasetArgs& dataset) {
  cmd->add_option("--data", dataset.data_csv, "labeled-record CSV");
  cmd->add_option("--traces", dataset.traces_dir, "directory of digitized per-lead traces");
  cmd->add_option("--labels", dataset.labels_path, "JSON mapping sheet stems to 0/1 labels");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECG paper-sheet digitizer and LSTM classifier"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "render synthetic sheets with ground truth");
  add_global_flags(synth, synth_args.config_path, synth_args.out_dir, synth_args.seed);
  synth->add_option("--count", synth_args.count, "number of sheets");
  synth->add_option("--type", synth_args.type, "sheet type (1, 2, or 3)");
  synth->add_option("--seconds", synth_args.seconds, "strip duration, Types 2/3");
  synth->add_option("--rotation", synth_args.rotation, "fixed rotation in degrees");
  synth->add_option("--rotation-range", synth_args.rotation_range,
                    "rotate each sheet uniformly within +/- this many degrees");
  synth->add_option("--noise", synth_args.noise, "background fleck density");
  synth->add_option("--st-fraction", synth_args.st_fraction,
                    "fraction of sheets rendered with the elevated-ST pattern");
  synth->add_option("--pitch", synth_args.pitch, "full-scale pixels per big square");

  DigitizeArgs digitize_args;
  CLI::App* digitize = app.add_subcommand("digitize", "extract calibrated traces from sheets");
  add_global_flags(digitize, digitize_args.config_path, digitize_args.out_dir,
                   digitize_args.seed);
  digitize->add_option("sheets", digitize_args.inputs, "sheet image files (PGM)");
  digitize->add_option("--manifest", digitize_args.manifest_path,
                       "JSON manifest of sheets with per-sheet settings");
  digitize->add_option("--type", digitize_args.type, "sheet type for positional inputs");
  digitize->add_flag("--no-deskew", digitize_args.no_deskew, "skip rotation correction");
  digitize->add_flag("--plots", digitize_args.plots, "emit an SVG plot per trace");
  digitize->add_option("--jobs", digitize_args.jobs, "parallel sheets");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train the LSTM classifier");
  add_global_flags(train_cmd, train_args.config_path, train_args.out_dir, train_args.seed);
  add_dataset_flags(train_cmd, train_args.dataset);
  train_cmd->add_option("--lead-set", train_args.lead_set, "V1, V2, or both");
  train_cmd->add_option("--window-size", train_args.window_size, "samples per window");
  train_cmd->add_option("--fractions", train_args.fractions, "train,val,test fractions")
      ->delimiter(',')
      ->expected(3);
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
  train_cmd->add_option("--learning-rate", train_args.learning_rate, "ADAM step size");
  train_cmd->add_option("--hidden-size", train_args.hidden_size, "LSTM hidden units");
  train_cmd->add_option("--num-layers", train_args.num_layers, "stacked LSTM layers");
  train_cmd->add_option("--dropout", train_args.dropout, "dropout probability");

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the splits");
  add_global_flags(evaluate, evaluate_args.config_path, evaluate_args.out_dir,
                   evaluate_args.seed);
  add_dataset_flags(evaluate, evaluate_args.dataset);
  evaluate->add_option("--model", evaluate_args.model_path, "model checkpoint JSON");
  evaluate->add_option("--lead-set", evaluate_args.lead_set,
                       "V1, V2, or both (default: from the checkpoint)");
  evaluate->add_option("--window-size", evaluate_args.window_size, "samples per window");
  evaluate->add_option("--fractions", evaluate_args.fractions, "train,val,test fractions")
      ->delimiter(',')
      ->expected(3);

  SearchArgs search_args;
  CLI::App* search = app.add_subcommand("search", "hyperparameter grid search");
  add_global_flags(search, search_args.config_path, search_args.out_dir, search_args.seed);
  add_dataset_flags(search, search_args.dataset);
  search->add_option("--lead-set", search_args.lead_set, "V1, V2, both, or all");
  search->add_option("--window-size", search_args.window_size, "samples per window");
  search->add_option("--fractions", search_args.fractions, "train,val,test fractions")
      ->delimiter(',')
      ->expected(3);
  search->add_option("--epochs", search_args.epochs, "epoch options")->delimiter(',');
  search->add_option("--learning-rates", search_args.learning_rates, "learning-rate options")
      ->delimiter(',');
  search->add_option("--hidden-sizes", search_args.hidden_sizes, "hidden-size options")
      ->delimiter(',');
  search->add_option("--layer-counts", search_args.layer_counts, "layer-count options")
      ->delimiter(',');
  search->add_option("--jobs", search_args.jobs, "parallel grid cells");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "render a CSV or report as SVG");
  add_global_flags(plot, plot_args.config_path, plot_args.out_dir, plot_args.seed);
  plot->add_option("input", plot_args.input, "trace CSV, ROC CSV, profile CSV, or report JSON")
      ->required();
  plot->add_option("--kind", plot_args.kind, "trace, roc, profile, or auto");
  plot->add_option("--title", plot_args.title, "figure title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  std::string out_dir;
  try {
    if (synth->parsed()) {
      command = "synth";
      out_dir = synth_args.out_dir;
      return run_synth(synth, synth_args);
    }
    if (digitize->parsed()) {
      command = "digitize";
      out_dir = digitize_args.out_dir;
      return run_digitize(digitize, digitize_args);
    }
    if (train_cmd->parsed()) {
      command = "train";
      out_dir = train_args.out_dir;
      return run_train(train_cmd, train_args);
    }
    if (evaluate->parsed()) {
      command = "evaluate";
      out_dir = evaluate_args.out_dir;
      return run_evaluate(evaluate, evaluate_args);
    }
    if (search->parsed()) {
      command = "search";
      out_dir = search_args.out_dir;
      return run_search(search, search_args);
    }
    if (plot->parsed()) {
      command = "plot";
      out_dir = plot_args.out_dir;
      return run_plot(plot, plot_args);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ecgdig: %s\n", e.what());
    try {
      if (!out_dir.empty() && fs::exists(out_dir)) {
        const json doc{{"command", command}, {"error", e.what()}};
        write_text_atomic((fs::path(out_dir) / "error.json").string(), doc.dump(2) + "\n");
      }
    } catch (const std::exception&) {
      // the error report is best-effort
    }
    return 1;
  }
  return 2;
}
