#include "drivesense/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::map<int, std::vector<std::size_t>> members_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  return members;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& sorted_subset, std::size_t n) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted_subset.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < sorted_subset.size() && sorted_subset[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::pair<double, double> mean_and_sample_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::string describe_model(const ForestParams& p) {
  std::ostringstream out;
  out << "n_trees=" << p.n_trees << " bootstrap=" << (p.bootstrap ? "true" : "false")
      << " split=" << (p.tree.split_mode == SplitMode::BestThreshold ? "best" : "random");
  if (p.tree.n_candidate_features && *p.tree.n_candidate_features != std::numeric_limits<std::size_t>::max())
    out << " candidates=" << *p.tree.n_candidate_features;
  else if (p.tree.n_candidate_features)
    out << " candidates=all";
  if (p.tree.max_depth) out << " max_depth=" << *p.tree.max_depth;
  return out.str();
}

std::string describe_balance(const BalanceSpec& b) {
  switch (b.mode) {
    case BalanceMode::None: return "none";
    case BalanceMode::ClassWeights: return "weights";
    case BalanceMode::Smote: return "smote(k=" + std::to_string(b.smote_k) + ")";
  }
  return "?";
}

double weighted_f1(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes) {
  return f1_scores(confusion_matrix(truth, predicted, n_classes)).weighted;
}

}  // namespace

FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::Config, "fold count must be at least 2");
  FoldAssignment out;
  std::vector<std::vector<std::size_t>> test(k);
  std::size_t offset = 0;
  for (auto& [cls, rows] : members_by_class(labels)) {
    if (rows.size() < k) out.classes_below_k.push_back(cls);
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(cls), 0xf01d));
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t j = 0; j < rows.size(); ++j) test[(offset + j) % k].push_back(rows[j]);
    offset = (offset + rows.size()) % k;
  }
  out.folds.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(test[f].begin(), test[f].end());
    out.folds[f].train = complement(test[f], labels.size());
    out.folds[f].test = std::move(test[f]);
  }
  return out;
}

Fold stratified_holdout(std::span<const int> labels, double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    fail(ErrorKind::Config, "holdout fraction must lie in (0, 1)");
  Fold out;
  for (auto& [cls, rows] : members_by_class(labels)) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(cls), 0x401d));
    std::shuffle(rows.begin(), rows.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) take = std::clamp<std::size_t>(take, 1, rows.size() - 1);
    else take = 0;
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.test.begin(), out.test.end());
  out.train = complement(out.test, labels.size());
  return out;
}

void ConfusionMatrix::add(int truth, int predicted, std::size_t count) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= n_ ||
      static_cast<std::size_t>(predicted) >= n_)
    fail(ErrorKind::InvalidArgument, "class index outside the confusion matrix");
  counts_[static_cast<std::size_t>(truth) * n_ + static_cast<std::size_t>(predicted)] += count;
}

std::size_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::support(std::size_t cls) const noexcept {
  std::size_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += at(cls, p);
  return s;
}

std::size_t ConfusionMatrix::predicted(std::size_t cls) const noexcept {
  std::size_t s = 0;
  for (std::size_t t = 0; t < n_; ++t) s += at(t, cls);
  return s;
}

std::vector<std::vector<double>> ConfusionMatrix::row_normalized() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_, 0.0));
  for (std::size_t t = 0; t < n_; ++t) {
    const std::size_t s = support(t);
    if (s == 0) continue;
    for (std::size_t p = 0; p < n_; ++p)
      out[t][p] = static_cast<double>(at(t, p)) / static_cast<double>(s);
  }
  return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n_ != n_) fail(ErrorKind::InvalidArgument, "confusion matrices differ in size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t n_classes) {
  if (truth.size() != predicted.size())
    fail(ErrorKind::InvalidArgument, "truth and predictions differ in length");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

F1Scores f1_scores(const ConfusionMatrix& cm) {
  F1Scores out;
  const std::size_t n = cm.size();
  out.per_class.assign(n, 0.0);
  double macro_sum = 0.0, weighted_sum = 0.0;
  std::size_t macro_count = 0, support_total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const std::size_t support = cm.support(c);
    const std::size_t predicted = cm.predicted(c);
    const double precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.per_class[c] = f1;
    if (support > 0 || predicted > 0) {
      macro_sum += f1;
      ++macro_count;
    }
    weighted_sum += f1 * static_cast<double>(support);
    support_total += support;
  }
  out.macro = macro_count > 0 ? macro_sum / static_cast<double>(macro_count) : 0.0;
  out.weighted = support_total > 0 ? weighted_sum / static_cast<double>(support_total) : 0.0;
  return out;
}

TrainingSet prepare_training(const Dataset& data, std::span<const std::size_t> train,
                             const BalanceSpec& balance) {
  TrainingSet out;
  const Dataset subset = data.select_rows(train);
  switch (balance.mode) {
    case BalanceMode::None:
      out.x = subset.x;
      out.y = subset.y;
      break;
    case BalanceMode::ClassWeights:
      out.x = subset.x;
      out.y = subset.y;
      out.weights = class_weights(out.y);
      break;
    case BalanceMode::Smote: {
      auto res = smote_oversample(subset.x, subset.y, balance);
      out.x = std::move(res.x);
      out.y = std::move(res.y);
      out.replicated_classes = res.replicated_classes;
      break;
    }
  }
  return out;
}

EvalReport run_cv(const Dataset& data, const ForestParams& model, const CvSpec& spec, unsigned jobs) {
  if (data.x.rows() != data.y.size()) fail(ErrorKind::Data, "labels do not align with rows");
  if (data.x.rows() == 0) fail(ErrorKind::Data, "empty dataset");
  const std::size_t n_classes = data.n_classes();
  const auto assignment = stratified_kfold(data.y, spec.k, spec.seed);

  std::vector<bool> present(n_classes, false);
  for (int y : data.y) present.at(static_cast<std::size_t>(y)) = true;

  struct FoldOutcome {
    ConfusionMatrix cm;
    bool flagged = false;
    std::size_t replicated = 0;
  };
  std::vector<FoldOutcome> outcomes(spec.k);
  parallel_for(spec.k, jobs, [&](std::size_t f) {
    const auto& fold = assignment.folds[f];
    auto& outcome = outcomes[f];
    outcome.cm = ConfusionMatrix(n_classes);
    std::vector<bool> in_train(n_classes, false);
    for (std::size_t r : fold.train) in_train[static_cast<std::size_t>(data.y[r])] = true;
    if (fold.train.empty() || fold.test.empty() || in_train != present) {
      outcome.flagged = true;
      return;
    }
    BalanceSpec balance = spec.balance;
    balance.seed = mix_seed(spec.balance.seed, f, 0xba1);
    const auto training = prepare_training(data, fold.train, balance);
    ForestParams params = model;
    params.seed = mix_seed(model.seed, f, 0xf0e5);
    if (training.weights) params.class_weights = training.weights;
    const auto forest = fit_forest(training.x, training.y, n_classes, params, 1);
    for (std::size_t r : fold.test) outcome.cm.add(data.y[r], forest.predict(data.x.row(r)));
    outcome.replicated = training.replicated_classes;
  });

  EvalReport report;
  report.class_names = data.class_names;
  report.model = describe_model(model);
  report.balance = describe_balance(spec.balance);
  report.k = spec.k;
  report.seed = spec.seed;
  report.classes_below_k = assignment.classes_below_k;
  report.imputed_values = data.x.imputed();
  report.confusion = ConfusionMatrix(n_classes);
  std::vector<double> weighted, macro;
  for (std::size_t f = 0; f < spec.k; ++f) {
    const auto& o = outcomes[f];
    report.smote_replications += o.replicated;
    if (o.flagged) {
      report.flagged_folds.push_back(f);
      report.per_fold_f1.push_back(0.0);
      report.per_fold_macro_f1.push_back(0.0);
      continue;
    }
    const auto scores = f1_scores(o.cm);
    report.per_fold_f1.push_back(scores.weighted);
    report.per_fold_macro_f1.push_back(scores.macro);
    weighted.push_back(scores.weighted);
    macro.push_back(scores.macro);
    report.confusion += o.cm;
  }
  std::tie(report.mean_f1, report.sd_f1) = mean_and_sample_sd(weighted);
  std::tie(report.mean_macro_f1, report.sd_macro_f1) = mean_and_sample_sd(macro);
  report.row_normalized = report.confusion.row_normalized();
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (report.confusion.support(c) == 0) report.zero_support_classes.push_back(static_cast<int>(c));
  }
  report.pooled = f1_scores(report.confusion);
  return report;
}

ImportanceReport permutation_importance(const Dataset& data, const ForestParams& model,
                                        const BalanceSpec& balance, double holdout_fraction,
                                        std::size_t repeats, std::uint64_t seed, unsigned jobs) {
  if (repeats < 1) fail(ErrorKind::Config, "permutation repeats must be >= 1");
  const std::size_t n_classes = data.n_classes();
  const auto split = stratified_holdout(data.y, holdout_fraction, seed);
  if (split.test.empty() || split.train.empty())
    fail(ErrorKind::Data, "holdout split left one side empty");

  BalanceSpec b = balance;
  b.seed = mix_seed(balance.seed, 0x1a9);
  const auto training = prepare_training(data, split.train, b);
  ForestParams params = model;
  if (training.weights) params.class_weights = training.weights;
  const auto forest = fit_forest(training.x, training.y, n_classes, params, jobs);

  const Dataset holdout = data.select_rows(split.test);
  const double baseline = weighted_f1(holdout.y, forest.predict(holdout.x), n_classes);

  const std::size_t width = data.x.cols();
  ImportanceReport report;
  report.feature_names = data.x.column_names();
  report.mean_drop.assign(width, 0.0);
  report.sd_drop.assign(width, 0.0);
  report.baseline_f1 = baseline;
  report.repeats = repeats;
  report.holdout_fraction = holdout_fraction;
  report.holdout_size = holdout.x.rows();

  parallel_for(width, jobs, [&](std::size_t f) {
    FeatureMatrix permuted = holdout.x;
    std::vector<double> column(permuted.rows());
    for (std::size_t r = 0; r < permuted.rows(); ++r) column[r] = holdout.x(r, f);
    // keyed by column name so reordering columns reorders the result
    const std::uint64_t key = stable_hash(report.feature_names[f]);
    std::vector<double> drops;
    std::vector<std::size_t> perm(permuted.rows());
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::mt19937_64 rng(mix_seed(seed, key, rep));
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t r = 0; r < permuted.rows(); ++r) permuted(r, f) = column[perm[r]];
      drops.push_back(baseline - weighted_f1(holdout.y, forest.predict(permuted), n_classes));
    }
    std::tie(report.mean_drop[f], report.sd_drop[f]) = mean_and_sample_sd(drops);
  });

  report.ranking.resize(width);
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (report.mean_drop[a] != report.mean_drop[b]) return report.mean_drop[a] > report.mean_drop[b];
    return report.feature_names[a] < report.feature_names[b];
  });
  return report;
}

std::vector<AblationEntry> modality_ablation(const Dataset& data, const ForestParams& model,
                                             const CvSpec& spec,
                                             std::span<const std::vector<ChannelKind>> groups,
                                             unsigned jobs) {
  if (groups.empty()) fail(ErrorKind::Config, "ablation needs at least one channel group");
  std::vector<AblationEntry> out;
  std::vector<ChannelKind> cumulative;
  for (const auto& group : groups) {
    if (group.empty()) fail(ErrorKind::Config, "empty channel group in ablation order");
    for (ChannelKind k : group) {
      if (std::find(cumulative.begin(), cumulative.end(), k) == cumulative.end()) cumulative.push_back(k);
    }
    const auto cols = columns_for_channels(data.x, cumulative);
    if (cols.empty()) fail(ErrorKind::Data, "no feature columns for the ablation channel set");
    Dataset subset;
    subset.x = data.x.select_columns(cols);
    subset.y = data.y;
    subset.class_names = data.class_names;
    const auto report = run_cv(subset, model, spec, jobs);
    out.push_back({cumulative, cols.size(), report.mean_f1, report.sd_f1, report.per_fold_f1});
  }
  return out;
}

namespace {

constexpr int kReportVersion = 1;

ordered_json confusion_json(const ConfusionMatrix& cm) {
  ordered_json rows = ordered_json::array();
  for (std::size_t t = 0; t < cm.size(); ++t) {
    ordered_json row = ordered_json::array();
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> channel_names(const std::vector<ChannelKind>& channels) {
  std::vector<std::string> out;
  for (ChannelKind k : channels) out.emplace_back(channel_name(k));
  return out;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ordered_json j;
  j["schema"] = "drivesense.eval_report";
  j["version"] = kReportVersion;
  j["class_names"] = r.class_names;
  j["model"] = r.model;
  j["balance"] = r.balance;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["mean_f1"] = r.mean_f1;
  j["sd_f1"] = r.sd_f1;
  j["mean_macro_f1"] = r.mean_macro_f1;
  j["sd_macro_f1"] = r.sd_macro_f1;
  j["per_fold_f1"] = r.per_fold_f1;
  j["per_fold_macro_f1"] = r.per_fold_macro_f1;
  j["flagged_folds"] = r.flagged_folds;
  j["pooled_f1"] = {{"per_class", r.pooled.per_class},
                    {"macro", r.pooled.macro},
                    {"weighted", r.pooled.weighted}};
  j["confusion"] = confusion_json(r.confusion);
  j["row_normalized"] = r.row_normalized;
  j["zero_support_classes"] = r.zero_support_classes;
  j["classes_below_k"] = r.classes_below_k;
  j["tallies"] = {{"imputed_values", r.imputed_values}, {"smote_replications", r.smote_replications}};
  return j.dump(2) + "\n";
}

std::string importance_to_json(const ImportanceReport& r) {
  ordered_json j;
  j["schema"] = "drivesense.importance_report";
  j["version"] = kReportVersion;
  j["baseline_f1"] = r.baseline_f1;
  j["repeats"] = r.repeats;
  j["holdout_fraction"] = r.holdout_fraction;
  j["holdout_size"] = r.holdout_size;
  ordered_json ranking = ordered_json::array();
  for (std::size_t rank = 0; rank < r.ranking.size(); ++rank) {
    const std::size_t f = r.ranking[rank];
    ordered_json e;
    e["rank"] = rank + 1;
    e["feature"] = r.feature_names[f];
    e["mean_drop"] = r.mean_drop[f];
    e["sd_drop"] = r.sd_drop[f];
    ranking.push_back(e);
  }
  j["ranking"] = ranking;
  return j.dump(2) + "\n";
}

std::string ablation_to_json(std::span<const AblationEntry> entries) {
  ordered_json j;
  j["schema"] = "drivesense.ablation_report";
  j["version"] = kReportVersion;
  ordered_json steps = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json s;
    s["channels"] = channel_names(e.channels);
    s["n_columns"] = e.n_columns;
    s["mean_f1"] = e.mean_f1;
    s["sd_f1"] = e.sd_f1;
    s["per_fold_f1"] = e.per_fold_f1;
    steps.push_back(s);
  }
  j["steps"] = steps;
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& name : r.class_names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < r.row_normalized.size(); ++t) {
    out << r.class_names[t];
    for (double v : r.row_normalized[t]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::string render_report(std::string_view report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid report JSON: ") + e.what());
  }
  if (j.value("schema", "") != "drivesense.eval_report")
    fail(ErrorKind::Parse, "not an evaluation report");
  const auto names = j.at("class_names").get<std::vector<std::string>>();
  const auto per_class = j.at("pooled_f1").at("per_class").get<std::vector<double>>();
  const auto rows = j.at("row_normalized").get<std::vector<std::vector<double>>>();
  std::ostringstream out;
  char buf[128];
  out << "model:    " << j.at("model").get<std::string>() << '\n';
  out << "balance:  " << j.at("balance").get<std::string>() << '\n';
  std::snprintf(buf, sizeof buf, "weighted F1: %.2f %% (SD %.2f) over %zu folds\n",
                100.0 * j.at("mean_f1").get<double>(), 100.0 * j.at("sd_f1").get<double>(),
                j.at("k").get<std::size_t>() - j.at("flagged_folds").size());
  out << buf;
  std::snprintf(buf, sizeof buf, "macro F1:    %.2f %% (SD %.2f)\n",
                100.0 * j.at("mean_macro_f1").get<double>(), 100.0 * j.at("sd_macro_f1").get<double>());
  out << buf;
  out << "\nper-class F1 and recall:\n";
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::snprintf(buf, sizeof buf, "  %-28s F1 %6.2f %%  recall %6.2f %%\n", names[c].c_str(),
                  100.0 * per_class[c], 100.0 * rows[c][c]);
    out << buf;
  }
  return out.str();
}

}  // namespace drivesense
