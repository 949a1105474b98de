#pragma once

// Benchmark scoring: multilabel/multiclass F1, max F1 over a fine-tuning
// curve, and the area under the F1-vs-epochs curve ("learning speed").

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mlmprep/corpus.hpp"
#include "mlmprep/error.hpp"

namespace mlmprep {

using Label = std::string;
using LabelSet = std::set<Label>;

struct PredictionRecord {
  std::string example_id;
  LabelSet gold;
  LabelSet predicted;
};

enum class Averaging { micro, macro };

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  // 2TP / (2TP + FP + FN); the 0/0 case is 0.
  double f1() const {
    const std::uint64_t den = 2 * tp + fp + fn;
    return den == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(den);
  }
};

inline LabelSet label_universe_of(const std::vector<PredictionRecord>& preds) {
  LabelSet u;
  for (const auto& p : preds) {
    u.insert(p.gold.begin(), p.gold.end());
    u.insert(p.predicted.begin(), p.predicted.end());
  }
  return u;
}

// `universe` is the declared label set; when null it is inferred from the
// records. Macro averaging is the unweighted mean over the whole universe.
inline double f1_scores(const std::vector<PredictionRecord>& preds, Averaging averaging,
                        const LabelSet* universe = nullptr) {
  if (preds.empty()) throw EmptyPredictions("no prediction records");
  const LabelSet inferred = universe ? LabelSet{} : label_universe_of(preds);
  const LabelSet& labels = universe ? *universe : inferred;

  std::map<Label, ConfusionCounts> per_label;
  for (const auto& l : labels) per_label[l];
  for (const auto& p : preds) {
    for (const auto& l : p.predicted) {
      const auto it = per_label.find(l);
      if (it == per_label.end()) throw UnknownLabel("label '" + l + "' in " + p.example_id);
      (p.gold.count(l) ? it->second.tp : it->second.fp)++;
    }
    for (const auto& l : p.gold) {
      const auto it = per_label.find(l);
      if (it == per_label.end()) throw UnknownLabel("label '" + l + "' in " + p.example_id);
      if (!p.predicted.count(l)) it->second.fn++;
    }
  }

  if (averaging == Averaging::micro) {
    ConfusionCounts pooled;
    for (const auto& [_, c] : per_label) {
      pooled.tp += c.tp;
      pooled.fp += c.fp;
      pooled.fn += c.fn;
    }
    return pooled.f1();
  }
  if (per_label.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [_, c] : per_label) sum += c.f1();
  return sum / static_cast<double>(per_label.size());
}

namespace detail {

inline LabelSet parse_labels(const Json& arr) {
  LabelSet out;
  for (const auto& v : arr) {
    if (v.is_string()) {
      out.insert(v.get<std::string>());
    } else if (v.is_number_integer()) {
      out.insert(std::to_string(v.get<long long>()));
    } else {
      throw std::invalid_argument("labels must be strings or integers");
    }
  }
  return out;
}

}  // namespace detail

// {"example_id": "...", "gold": [...], "predicted": [...]}
inline PredictionRecord parse_prediction(std::string_view line_text, std::size_t line) {
  try {
    const auto j = Json::parse(line_text);
    PredictionRecord r;
    r.example_id = j.at("example_id").is_string() ? j.at("example_id").get<std::string>()
                                                  : j.at("example_id").dump();
    r.gold = detail::parse_labels(j.at("gold"));
    r.predicted = detail::parse_labels(j.at("predicted"));
    return r;
  } catch (const std::exception& e) {
    throw MalformedRecord(line, e.what());
  }
}

inline std::vector<PredictionRecord> read_predictions(std::istream& in) {
  LineReader reader(in);
  std::vector<PredictionRecord> out;
  std::string line;
  while (reader.next(line)) out.push_back(parse_prediction(line, reader.line_number()));
  return out;
}

struct CurvePoint {
  double epoch;
  double f1;
};

struct LearningCurve {
  std::string model_name;
  std::vector<CurvePoint> points;

  void validate() const {
    if (points.empty()) throw InvalidConfig("curve '" + model_name + "' has no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.epoch) || p.epoch < 0.0) throw InvalidConfig("curve '" + model_name + "': bad epoch");
      if (!(p.f1 >= 0.0 && p.f1 <= 1.0)) throw InvalidConfig("curve '" + model_name + "': f1 outside [0, 1]");
      if (i > 0 && !(p.epoch > points[i - 1].epoch)) {
        throw InvalidConfig("curve '" + model_name + "': epochs must be strictly increasing");
      }
    }
  }
};

inline double max_f1(const LearningCurve& curve) {
  curve.validate();
  double best = curve.points.front().f1;
  for (const auto& p : curve.points) best = std::max(best, p.f1);
  return best;
}

// Trapezoidal area from the first recorded epoch to the last.
inline double curve_auc(const LearningCurve& curve) {
  if (curve.points.size() < 2) {
    throw InsufficientPoints("curve '" + curve.model_name + "' needs at least 2 points for an AUC");
  }
  curve.validate();
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += 0.5 * (a.f1 + b.f1) * (b.epoch - a.epoch);
  }
  return area;
}

struct ReportRow {
  std::string model_name;
  double max_f1 = 0.0;
  double auc = 0.0;
  double auc_from = 0.0;  // integration origin: first recorded epoch
  double auc_to = 0.0;
  bool best_max_f1 = false;
  bool best_auc = false;
};

enum class SortKey { none, max_f1, auc };

struct BenchmarkReport {
  std::string dataset_name;
  std::vector<ReportRow> rows;

  // Descending; stable, so ties keep input order.
  void sort_by(SortKey key) {
    if (key == SortKey::none) return;
    std::stable_sort(rows.begin(), rows.end(), [key](const ReportRow& a, const ReportRow& b) {
      return key == SortKey::max_f1 ? a.max_f1 > b.max_f1 : a.auc > b.auc;
    });
  }

  const ReportRow* find(std::string_view model) const {
    for (const auto& r : rows) {
      if (r.model_name == model) return &r;
    }
    return nullptr;
  }
};

// Ties for best are all flagged.
inline BenchmarkReport build_report(const std::vector<LearningCurve>& curves, std::string dataset_name) {
  BenchmarkReport report;
  report.dataset_name = std::move(dataset_name);
  std::set<std::string> names;
  for (const auto& c : curves) {
    if (!names.insert(c.model_name).second) throw DuplicateModelName("duplicate model: " + c.model_name);
    ReportRow row;
    row.model_name = c.model_name;
    row.max_f1 = max_f1(c);
    row.auc = curve_auc(c);
    row.auc_from = c.points.front().epoch;
    row.auc_to = c.points.back().epoch;
    report.rows.push_back(std::move(row));
  }
  if (report.rows.empty()) return report;
  double best_f1 = report.rows.front().max_f1;
  double best_auc = report.rows.front().auc;
  for (const auto& r : report.rows) {
    best_f1 = std::max(best_f1, r.max_f1);
    best_auc = std::max(best_auc, r.auc);
  }
  for (auto& r : report.rows) {
    r.best_max_f1 = r.max_f1 == best_f1;
    r.best_auc = r.auc == best_auc;
  }
  return report;
}

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline void write_report_csv(std::ostream& out, const BenchmarkReport& r, int precision = 4) {
  out << "dataset,model,max_f1,auc,best_max_f1,best_auc,auc_from,auc_to\n";
  for (const auto& row : r.rows) {
    out << r.dataset_name << ',' << row.model_name << ',' << format_fixed(row.max_f1, precision) << ','
        << format_fixed(row.auc, precision) << ',' << (row.best_max_f1 ? 1 : 0) << ',' << (row.best_auc ? 1 : 0)
        << ',' << format_fixed(row.auc_from, precision) << ',' << format_fixed(row.auc_to, precision) << '\n';
  }
}

// Best values carry a trailing '*', standing in for bold.
inline void write_report_table(std::ostream& out, const BenchmarkReport& r, int precision = 4) {
  std::vector<std::array<std::string, 3>> cells;
  cells.push_back({"Model", "Max F1", "Epochs vs F1 AUC"});
  for (const auto& row : r.rows) {
    cells.push_back({row.model_name, format_fixed(row.max_f1, precision) + (row.best_max_f1 ? "*" : ""),
                     format_fixed(row.auc, precision) + (row.best_auc ? "*" : "")});
  }
  std::array<std::size_t, 3> width{};
  for (const auto& c : cells) {
    for (std::size_t k = 0; k < 3; ++k) width[k] = std::max(width[k], c[k].size());
  }
  out << "Dataset: " << r.dataset_name << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out << c[0] << std::string(width[0] - c[0].size() + 2, ' ');
    out << std::string(width[1] - c[1].size(), ' ') << c[1] << "  ";
    out << std::string(width[2] - c[2].size(), ' ') << c[2] << '\n';
    if (i == 0) out << std::string(width[0] + width[1] + width[2] + 4, '-') << '\n';
  }
  if (!r.rows.empty()) {
    out << "(* best in column; AUC integrated from each curve's first recorded epoch)\n";
  }
}

// CSV rows "model,epoch,f1"; an optional header line is skipped. The model
// name is everything before the last two fields, so it may contain commas.
// Curves keep first-appearance order.
inline std::vector<LearningCurve> read_curves_csv(std::istream& in) {
  LineReader reader(in);
  std::vector<LearningCurve> curves;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  bool first = true;
  while (reader.next(line)) {
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : line.rfind(',', c2 - 1);
    if (c1 == std::string::npos) throw MalformedRecord(reader.line_number(), "expected model,epoch,f1");
    const std::string model = line.substr(0, c1);
    const std::string epoch_s = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string f1_s = line.substr(c2 + 1);
    double epoch = 0.0;
    double f1 = 0.0;
    try {
      std::size_t used_e = 0;
      std::size_t used_f = 0;
      epoch = std::stod(epoch_s, &used_e);
      f1 = std::stod(f1_s, &used_f);
      if (used_e != epoch_s.size() || used_f != f1_s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw MalformedRecord(reader.line_number(), "non-numeric epoch or f1");
    }
    first = false;
    auto [it, fresh] = index.emplace(model, curves.size());
    if (fresh) curves.push_back({model, {}});
    curves[it->second].points.push_back({epoch, f1});
  }
  for (const auto& c : curves) c.validate();
  return curves;
}

}  // namespace mlmprep
