#include "ecgdig/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace ecgdig {

namespace {

// Counts come from rounding the extended-precision product half up; double
// multiplication alone would nudge products like 0.15 * 110 onto the exact
// half before the rule could see the true value just below it.
long long round_half_up(long double x) { return static_cast<long long>(std::floor(x + 0.5L)); }

void collect_split(const WindowedDataset& data, Split split,
                   std::vector<std::vector<double>>& sequences, std::vector<int>& labels) {
  sequences.clear();
  labels.clear();
  for (const Window& w : data.windows) {
    if (w.split != split) continue;
    sequences.push_back(w.samples);
    labels.push_back(w.label);
  }
}

}  // namespace

std::string split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  throw std::invalid_argument("unknown split");
}

std::vector<TaggedRecord> split_records(std::vector<LabeledRecord> records,
                                        std::array<double, 3> fractions, std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  std::size_t positive_splits = 0;
  for (double f : fractions) positive_splits += f > 0.0 ? 1 : 0;
  if (records.size() < positive_splits) {
    throw std::invalid_argument("fewer records than splits");
  }

  std::mt19937_64 rng(seed);
  std::shuffle(records.begin(), records.end(), rng);

  const long double n = static_cast<long double>(records.size());
  long long n_train = round_half_up(static_cast<long double>(fractions[0]) * n);
  long long n_val = round_half_up(static_cast<long double>(fractions[1]) * n);
  n_train = std::clamp<long long>(n_train, 0, static_cast<long long>(records.size()));
  n_val = std::clamp<long long>(n_val, 0, static_cast<long long>(records.size()) - n_train);

  std::vector<TaggedRecord> tagged;
  tagged.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    Split split = Split::test;
    if (static_cast<long long>(k) < n_train) {
      split = Split::train;
    } else if (static_cast<long long>(k) < n_train + n_val) {
      split = Split::validation;
    }
    tagged.push_back(TaggedRecord{std::move(records[k]), split});
  }
  return tagged;
}

WindowedDataset make_windows(const std::vector<TaggedRecord>& records, int window_size) {
  if (window_size <= 0) throw std::invalid_argument("window size must be positive");
  WindowedDataset data;
  data.window_size = window_size;
  for (const TaggedRecord& tagged : records) {
    const std::vector<double>& samples = tagged.record.samples;
    if (samples.size() < static_cast<std::size_t>(window_size)) {
      throw std::invalid_argument("record " + tagged.record.id + " is shorter than one window");
    }
    const std::size_t count = samples.size() / static_cast<std::size_t>(window_size);
    for (std::size_t w = 0; w < count; ++w) {
      Window window;
      window.samples.assign(samples.begin() + w * window_size,
                            samples.begin() + (w + 1) * window_size);
      window.label = tagged.record.label;
      window.record_id = tagged.record.id;
      window.lead = tagged.record.lead;
      window.split = tagged.split;
      data.windows.push_back(std::move(window));
    }
  }
  return data;
}

WindowedDataset filter_lead_set(const WindowedDataset& data, const std::string& lead_set) {
  if (lead_set != "V1" && lead_set != "V2" && lead_set != "both") {
    throw std::invalid_argument("unknown lead set: " + lead_set);
  }
  WindowedDataset out;
  out.window_size = data.window_size;
  for (const Window& w : data.windows) {
    const bool keep = lead_set == "both" ? (w.lead == "V1" || w.lead == "V2") : w.lead == lead_set;
    if (keep) out.windows.push_back(w);
  }
  return out;
}

std::vector<LabeledRecord> filter_lead_records(const std::vector<LabeledRecord>& records,
                                               const std::string& lead_set) {
  if (lead_set != "V1" && lead_set != "V2" && lead_set != "both") {
    throw std::invalid_argument("unknown lead set: " + lead_set);
  }
  std::vector<LabeledRecord> out;
  for (const LabeledRecord& record : records) {
    const bool keep = lead_set == "both" ? (record.lead == "V1" || record.lead == "V2")
                                         : record.lead == lead_set;
    if (keep) out.push_back(record);
  }
  return out;
}

double pos_weight(const WindowedDataset& data) {
  long long pos = 0, neg = 0;
  for (const Window& w : data.windows) {
    if (w.split != Split::train) continue;
    (w.label == 1 ? pos : neg) += 1;
  }
  if (pos == 0) throw std::invalid_argument("no positive training windows");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
  if (scores.empty()) throw std::invalid_argument("no scores to evaluate");
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("score and label counts differ");
  }
  long long correct = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const int predicted = scores[k] > threshold ? 1 : 0;
    correct += predicted == labels[k] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw std::invalid_argument("score and label counts differ");
  }
  long long total_pos = 0, total_neg = 0;
  for (int y : labels) (y == 1 ? total_pos : total_neg) += 1;
  if (total_pos == 0 || total_neg == 0) {
    throw std::runtime_error("AUC undefined for single-class labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  long long tp = 0, fp = 0;
  std::size_t k = 0;
  double auc2 = 0.0;  // accumulated twice the area, in pair units
  while (k < order.size()) {
    const double level = scores[order[k]];
    long long group_pos = 0, group_neg = 0;
    while (k < order.size() && scores[order[k]] == level) {
      (labels[order[k]] == 1 ? group_pos : group_neg) += 1;
      ++k;
    }
    // Trapezoid over the tie group: ties earn half credit.
    auc2 += static_cast<double>(group_neg) * (2.0 * tp + group_pos);
    tp += group_pos;
    fp += group_neg;
    curve.points.push_back({static_cast<double>(fp) / total_neg,
                            static_cast<double>(tp) / total_pos, level});
  }
  curve.auc = auc2 / (2.0 * static_cast<double>(total_pos) * static_cast<double>(total_neg));
  return curve;
}

Confusion confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("score and label counts differ");
  }
  Confusion c;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const int predicted = scores[k] > threshold ? 1 : 0;
    if (labels[k] == 1) {
      (predicted == 1 ? c.tp : c.fn) += 1;
    } else {
      (predicted == 1 ? c.fp : c.tn) += 1;
    }
  }
  const long long pos = c.tp + c.fn, neg = c.fp + c.tn;
  if (pos > 0) {
    c.tp_rate = static_cast<double>(c.tp) / pos;
    c.fn_rate = static_cast<double>(c.fn) / pos;
  }
  if (neg > 0) {
    c.fp_rate = static_cast<double>(c.fp) / neg;
    c.tn_rate = static_cast<double>(c.tn) / neg;
  }
  return c;
}

EvalReport evaluate_model(const LstmModel& model, const WindowedDataset& data, Split split,
                          double loss_pos_weight) {
  std::vector<double> scores;
  std::vector<int> labels;
  double total_loss = 0.0;
  for (const Window& w : data.windows) {
    if (w.split != split) continue;
    const ForwardCache cache = forward_sequence(model, w.samples, false);
    scores.push_back(cache.probability);
    labels.push_back(w.label);
    total_loss += loss_weighted_bce_logit(cache.logit, w.label, loss_pos_weight);
  }
  if (scores.empty()) {
    throw std::invalid_argument("no windows in the " + split_name(split) + " split");
  }

  EvalReport report;
  report.split = split_name(split);
  report.lead_set = model.lead_set;
  report.total_loss = total_loss;
  report.accuracy = accuracy(scores, labels);
  const RocCurve curve = roc_auc(scores, labels);
  report.roc = curve.points;
  report.auc = curve.auc;
  report.matrix = confusion(scores, labels);
  return report;
}

namespace {

double cell_value(const GridCell& cell, const std::string& parameter) {
  if (parameter == "epochs") return static_cast<double>(cell.epochs);
  if (parameter == "learning_rate") return cell.learning_rate;
  if (parameter == "hidden_size") return static_cast<double>(cell.hidden_size);
  return static_cast<double>(cell.num_layers);
}

}  // namespace

SearchSelection select_from_table(const std::vector<GridCell>& table, const SearchGrid& grid) {
  if (grid.epochs.empty() || grid.learning_rates.empty() || grid.hidden_sizes.empty() ||
      grid.layer_counts.empty()) {
    throw std::invalid_argument("search grid has an empty option list");
  }
  if (table.empty()) throw std::invalid_argument("empty search table");

  struct Stage {
    std::string parameter;
    std::vector<double> options;
  };
  const std::vector<Stage> stages = {
      {"epochs", std::vector<double>(grid.epochs.begin(), grid.epochs.end())},
      {"learning_rate", grid.learning_rates},
      {"hidden_size", std::vector<double>(grid.hidden_sizes.begin(), grid.hidden_sizes.end())},
      {"num_layers", std::vector<double>(grid.layer_counts.begin(), grid.layer_counts.end())},
  };

  SearchSelection selection;
  std::vector<std::pair<std::string, double>> fixed;
  for (const Stage& stage : stages) {
    int best_index = -1;
    MarginalEntry best{};
    for (std::size_t option = 0; option < stage.options.size(); ++option) {
      const double value = stage.options[option];
      MarginalEntry entry;
      entry.parameter = stage.parameter;
      entry.value = value;
      double sum_auc = 0.0, sum_loss = 0.0, sum_acc = 0.0;
      for (const GridCell& cell : table) {
        if (cell.failed) continue;
        if (cell_value(cell, stage.parameter) != value) continue;
        bool matches = true;
        for (const auto& [parameter, fixed_value] : fixed) {
          if (cell_value(cell, parameter) != fixed_value) {
            matches = false;
            break;
          }
        }
        if (!matches) continue;
        sum_auc += cell.val_auc;
        sum_loss += cell.val_loss;
        sum_acc += cell.val_accuracy;
        entry.runs += 1;
      }
      if (entry.runs > 0) {
        entry.mean_val_auc = sum_auc / entry.runs;
        entry.mean_val_loss = sum_loss / entry.runs;
        entry.mean_val_accuracy = sum_acc / entry.runs;
      }
      selection.marginals.push_back(entry);
      if (entry.runs == 0) continue;
      const bool better =
          best_index < 0 || entry.mean_val_auc > best.mean_val_auc ||
          (entry.mean_val_auc == best.mean_val_auc &&
           (entry.mean_val_loss < best.mean_val_loss ||
            (entry.mean_val_loss == best.mean_val_loss &&
             entry.mean_val_accuracy > best.mean_val_accuracy)));
      if (better) {
        best_index = static_cast<int>(option);
        best = entry;
      }
    }
    if (best_index < 0) {
      throw std::runtime_error("every run failed for parameter " + stage.parameter);
    }
    fixed.emplace_back(stage.parameter, stage.options[best_index]);
    if (stage.parameter == "epochs") selection.epochs = grid.epochs[best_index];
    if (stage.parameter == "learning_rate") selection.learning_rate = grid.learning_rates[best_index];
    if (stage.parameter == "hidden_size") selection.hidden_size = grid.hidden_sizes[best_index];
    if (stage.parameter == "num_layers") selection.num_layers = grid.layer_counts[best_index];
  }
  return selection;
}

SearchResult grid_search(const SearchGrid& grid, const WindowedDataset& data, std::uint64_t seed,
                         int jobs) {
  if (grid.epochs.empty() || grid.learning_rates.empty() || grid.hidden_sizes.empty() ||
      grid.layer_counts.empty()) {
    throw std::invalid_argument("search grid has an empty option list");
  }
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");

  const WindowedDataset filtered = filter_lead_set(data, grid.lead_set);
  std::vector<std::vector<double>> train_sequences;
  std::vector<int> train_labels;
  collect_split(filtered, Split::train, train_sequences, train_labels);
  if (train_sequences.empty()) throw std::invalid_argument("no training windows for the lead set");
  const double weight = pos_weight(filtered);

  std::vector<GridCell> table;
  for (int epochs : grid.epochs) {
    for (double rate : grid.learning_rates) {
      for (int hidden : grid.hidden_sizes) {
        for (int layers : grid.layer_counts) {
          GridCell cell;
          cell.epochs = epochs;
          cell.learning_rate = rate;
          cell.hidden_size = hidden;
          cell.num_layers = layers;
          table.push_back(cell);
        }
      }
    }
  }

  // Seeds drawn up front so cell results cannot depend on scheduling.
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seeds(table.size());
  for (auto& [init_seed, train_seed] : seeds) {
    init_seed = rng();
    train_seed = rng();
  }

  auto run_cell = [&](std::size_t index) {
    GridCell& cell = table[index];
    try {
      LstmModel model = make_model(1, cell.hidden_size, cell.num_layers, 0.25, seeds[index].first);
      model.lead_set = grid.lead_set;
      TrainConfig config;
      config.epochs = cell.epochs;
      config.learning_rate = cell.learning_rate;
      config.pos_weight = weight;
      config.seed = seeds[index].second;
      train(model, train_sequences, train_labels, config);
      const EvalReport report = evaluate_model(model, filtered, Split::validation, weight);
      cell.val_loss = report.total_loss;
      cell.val_auc = report.auc;
      cell.val_accuracy = report.accuracy;
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.failure = e.what();
    }
  };

  const int workers = std::min<int>(jobs, static_cast<int>(table.size()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < table.size(); ++k) run_cell(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t k = static_cast<std::size_t>(w); k < table.size();
             k += static_cast<std::size_t>(workers)) {
          run_cell(k);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  SearchResult result;
  try {
    result.selection = select_from_table(table, grid);
  } catch (const std::runtime_error& e) {
    result.selection_error = e.what();
  }
  result.table = std::move(table);
  return result;
}

}  // namespace ecgdig
