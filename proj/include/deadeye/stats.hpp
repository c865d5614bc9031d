#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deadeye/error.hpp"
#include "deadeye/session.hpp"

namespace deadeye::stats {

class StatsError : public Error {
 public:
  using Error::Error;
};

// Rows are subjects, columns are conditions.
using Matrix = std::vector<std::vector<double>>;

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // undefined for n < 2
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

struct AccuracyRow {
  int set_size = 0;
  double mean = 0.0;
  std::optional<double> sd;
  std::size_t n_subjects = 0;
};

struct AccuracyTable {
  std::vector<AccuracyRow> rows;
  std::size_t n_subjects = 0;
};

// Per-subject, per-set-size accuracy over recorded trials with a response.
// Throws StatsError when no recorded log is given.
AccuracyTable accuracy_by_setsize(std::span<const SessionLog> logs);

struct SubjectMatrix {
  std::vector<int> set_sizes;
  Matrix values;
};

// Subjects x set sizes; subjects missing any set size are dropped.
SubjectMatrix accuracy_matrix(std::span<const SessionLog> logs);
SubjectMatrix rt_matrix(std::span<const SessionLog> logs, bool correct_only = false);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
  double mean_diff = 0.0;
};

struct ErrorSplit {
  double fn_share = 0.0;
  double fp_share = 0.0;
  std::vector<double> fn_per_subject;
  std::vector<double> fp_per_subject;
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
};

// Share of each subject's errors that are misses (fn) vs false alarms (fp),
// averaged over subjects with at least one error.
ErrorSplit fn_fp_split(std::span<const SessionLog> logs);

struct AnovaResult {
  double f = 0.0;
  bool f_infinite = false;
  int df_effect = 0;
  int df_error = 0;
  double p = 1.0;
  std::vector<double> means;
  double ss_effect = 0.0;
  double ss_subjects = 0.0;
  double ss_error = 0.0;
  double ss_total = 0.0;
};

// One-way repeated-measures ANOVA, uncorrected degrees of freedom
// (k-1, (k-1)(n-1)).
AnovaResult rm_anova(const Matrix& m);

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

struct PairwiseResult {
  std::size_t first = 0;
  std::size_t second = 0;
  TTestResult test;
  double p_corrected = 1.0;
};

// Every pair of columns, Bonferroni-corrected for k(k-1)/2 comparisons.
std::vector<PairwiseResult> bonferroni_pairwise(const Matrix& m);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// One-sample KS against a normal with the sample's own mean and SD. The p
// value uses the asymptotic Kolmogorov law and is therefore conservative
// (no Lilliefors correction for the estimated parameters).
KsResult ks_normality(std::span<const double> sample);

struct SpatialCell {
  int hits = 0;
  int opportunities = 0;
  std::optional<double> rate;
};

struct SpatialMatrix {
  int rows = 5;
  int cols = 6;
  std::vector<SpatialCell> cells;

  const SpatialCell& at(int row, int col) const { return cells[static_cast<std::size_t>(row * cols + col)]; }
};

// Hit rate per target cell over target-present trials.
SpatialMatrix spatial_matrix(std::span<const SessionLog> logs, int rows = 5, int cols = 6);

struct RtRow {
  int set_size = 0;
  Summary all_trials;
  std::optional<Summary> correct_trials;
};

// Across-subject summary of per-subject mean reaction times (ms).
std::vector<RtRow> rt_summary(std::span<const SessionLog> logs);

struct EyeDominanceResult {
  Eye dominant = Eye::Right;
  std::size_t n_subjects = 0;
  Summary dominant_eye;
  Summary non_dominant_eye;
  TTestResult test;
};

// Paired comparison of target accuracy when the target is shown to the
// dominant vs non-dominant eye, over subjects whose dominant eye matches.
EyeDominanceResult eye_dominance_compare(std::span<const SessionLog> logs, Eye dominant = Eye::Right);

struct KindComparison {
  Summary magenta;
  Summary yellow;
  TTestResult test;
};

// Conjunction search only: target accuracy per target kind.
KindComparison target_kind_compare(std::span<const SessionLog> logs);

struct TlxSummary {
  std::size_t n = 0;
  std::array<Summary, 6> tlx;
  Summary clearness;
  Summary decision_making;
  Summary focus;
  std::size_t headache_count = 0;
};

TlxSummary tlx_summary(std::span<const QuestionnaireResponse> responses);

}  // namespace deadeye::stats
