#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivesense/balance.hpp"
#include "drivesense/features.hpp"
#include "drivesense/forest.hpp"

namespace drivesense {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldAssignment {
  std::vector<Fold> folds;
  /// Classes with fewer samples than folds; they are still distributed.
  std::vector<int> classes_below_k;
};

/// Per-class counts across folds differ by at most one; the folds partition
/// all indices. Index lists are sorted.
FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Stratified train/holdout split; every class with two or more samples keeps
/// at least one sample on each side.
Fold stratified_holdout(std::span<const int> labels, double holdout_fraction, std::uint64_t seed);

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n_classes)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const noexcept {
    return counts_[truth * n_ + predicted];
  }
  void add(int truth, int predicted, std::size_t count = 1);
  std::size_t total() const noexcept;
  std::size_t support(std::size_t cls) const noexcept;
  std::size_t predicted(std::size_t cls) const noexcept;
  /// Each row divided by its support; zero-support rows stay all zero.
  std::vector<std::vector<double>> row_normalized() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t n_classes);

struct F1Scores {
  std::vector<double> per_class;
  /// Mean over classes that occur in the truth or in the predictions.
  double macro = 0.0;
  /// Support-weighted mean.
  double weighted = 0.0;
};

F1Scores f1_scores(const ConfusionMatrix& cm);

struct CvSpec {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  BalanceSpec balance;
};

/// Training rows after balancing. Built from the training indices only.
struct TrainingSet {
  FeatureMatrix x;
  std::vector<int> y;
  std::optional<ClassWeights> weights;
  std::size_t replicated_classes = 0;
};

TrainingSet prepare_training(const Dataset& data, std::span<const std::size_t> train,
                             const BalanceSpec& balance);

struct EvalReport {
  std::vector<std::string> class_names;
  std::string model;
  std::string balance;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_fold_f1;        // weighted F1 of every fold
  std::vector<double> per_fold_macro_f1;
  std::vector<std::size_t> flagged_folds;  // excluded from mean/sd and confusion
  double mean_f1 = 0.0;                   // weighted F1, headline
  double sd_f1 = 0.0;                     // sample SD over unflagged folds
  double mean_macro_f1 = 0.0;
  double sd_macro_f1 = 0.0;
  ConfusionMatrix confusion;
  std::vector<std::vector<double>> row_normalized;
  std::vector<int> zero_support_classes;
  F1Scores pooled;
  std::vector<int> classes_below_k;
  std::size_t imputed_values = 0;
  std::size_t smote_replications = 0;
};

EvalReport run_cv(const Dataset& data, const ForestParams& model, const CvSpec& spec,
                  unsigned jobs = 1);

struct ImportanceReport {
  std::vector<std::string> feature_names;
  std::vector<double> mean_drop;
  std::vector<double> sd_drop;
  std::vector<std::size_t> ranking;  // feature indices, largest mean drop first
  double baseline_f1 = 0.0;
  std::size_t repeats = 0;
  double holdout_fraction = 0.0;
  std::size_t holdout_size = 0;
};

ImportanceReport permutation_importance(const Dataset& data, const ForestParams& model,
                                        const BalanceSpec& balance, double holdout_fraction,
                                        std::size_t repeats, std::uint64_t seed,
                                        unsigned jobs = 1);

struct AblationEntry {
  std::vector<ChannelKind> channels;
  std::size_t n_columns = 0;
  double mean_f1 = 0.0;
  double sd_f1 = 0.0;
  std::vector<double> per_fold_f1;
};

/// run_cv on the cumulative channel sets groups[0], groups[0..1], ...
std::vector<AblationEntry> modality_ablation(const Dataset& data, const ForestParams& model,
                                             const CvSpec& spec,
                                             std::span<const std::vector<ChannelKind>> groups,
                                             unsigned jobs = 1);

std::string report_to_json(const EvalReport& report);
std::string importance_to_json(const ImportanceReport& report);
std::string ablation_to_json(std::span<const AblationEntry> entries);
/// Row-normalized confusion as CSV with class-name header and row labels.
std::string confusion_to_csv(const EvalReport& report);
/// Plain-text summary of a serialized EvalReport.
std::string render_report(std::string_view report_json);

}  // namespace drivesense
