#include "deadeye/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "deadeye/distributions.hpp"

namespace deadeye::stats {

namespace {

constexpr double kZeroTolerance = 1e-12;

std::vector<const SessionLog*> recorded(std::span<const SessionLog> logs) {
  std::vector<const SessionLog*> out;
  for (const SessionLog& log : logs) {
    if (log.mode == SessionMode::Recorded) out.push_back(&log);
  }
  if (out.empty()) throw StatsError("no recorded session logs");
  return out;
}

struct Tally {
  int hits = 0;
  int total = 0;
  double rate() const { return static_cast<double>(hits) / total; }
};

std::map<int, Tally> accuracy_per_set(const SessionLog& log) {
  std::map<int, Tally> out;
  for (const TrialRecord& r : log.trials) {
    if (!r.correct) continue;
    Tally& t = out[r.condition.set_size];
    ++t.total;
    t.hits += *r.correct;
  }
  return out;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_rectangular(const Matrix& m, std::size_t min_rows, std::size_t min_cols) {
  if (m.size() < min_rows) throw StatsError("need at least " + std::to_string(min_rows) + " subjects");
  const std::size_t k = m.front().size();
  if (k < min_cols) throw StatsError("need at least " + std::to_string(min_cols) + " conditions");
  for (const auto& row : m) {
    if (row.size() != k) throw StatsError("missing cells: rows differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw StatsError("missing cells: non-finite value");
    }
  }
}

}  // namespace

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw StatsError("summary of an empty group");
  Summary s;
  s.n = values.size();
  s.mean = mean_of(values);
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

AccuracyTable accuracy_by_setsize(std::span<const SessionLog> logs) {
  const auto subjects = recorded(logs);
  std::map<int, std::vector<double>> per_set;
  for (const SessionLog* log : subjects) {
    for (const auto& [set_size, tally] : accuracy_per_set(*log)) per_set[set_size].push_back(tally.rate());
  }
  AccuracyTable table;
  table.n_subjects = subjects.size();
  for (const auto& [set_size, values] : per_set) {
    const Summary s = summarize(values);
    table.rows.push_back({set_size, s.mean, s.sd, s.n});
  }
  return table;
}

SubjectMatrix accuracy_matrix(std::span<const SessionLog> logs) {
  const auto subjects = recorded(logs);
  std::vector<std::map<int, Tally>> tallies;
  std::map<int, int> seen;
  for (const SessionLog* log : subjects) {
    tallies.push_back(accuracy_per_set(*log));
    for (const auto& entry : tallies.back()) ++seen[entry.first];
  }
  SubjectMatrix out;
  for (const auto& entry : seen) out.set_sizes.push_back(entry.first);
  for (const auto& t : tallies) {
    if (t.size() != out.set_sizes.size()) continue;
    std::vector<double> row;
    for (int s : out.set_sizes) row.push_back(t.at(s).rate());
    out.values.push_back(std::move(row));
  }
  return out;
}

SubjectMatrix rt_matrix(std::span<const SessionLog> logs, bool correct_only) {
  const auto subjects = recorded(logs);
  std::vector<std::map<int, std::vector<double>>> per_subject;
  std::map<int, int> seen;
  for (const SessionLog* log : subjects) {
    std::map<int, std::vector<double>> rts;
    for (const TrialRecord& r : log->trials) {
      if (!r.reaction_ms) continue;
      if (correct_only && !r.correct.value_or(false)) continue;
      rts[r.condition.set_size].push_back(*r.reaction_ms);
    }
    for (const auto& entry : rts) ++seen[entry.first];
    per_subject.push_back(std::move(rts));
  }
  SubjectMatrix out;
  for (const auto& entry : seen) out.set_sizes.push_back(entry.first);
  for (const auto& rts : per_subject) {
    if (rts.size() != out.set_sizes.size()) continue;
    std::vector<double> row;
    for (int s : out.set_sizes) row.push_back(mean_of(rts.at(s)));
    out.values.push_back(std::move(row));
  }
  return out;
}

ErrorSplit fn_fp_split(std::span<const SessionLog> logs) {
  const auto subjects = recorded(logs);
  ErrorSplit out;
  for (const SessionLog* log : subjects) {
    int misses = 0;
    int false_alarms = 0;
    for (const TrialRecord& r : log->trials) {
      if (!r.response || *r.correct) continue;
      (r.condition.target_present ? misses : false_alarms)++;
    }
    if (misses + false_alarms == 0) {
      ++out.excluded;
      out.warnings.push_back("subject " + log->participant.id + " made no errors; excluded from error split");
      continue;
    }
    const double fn = static_cast<double>(misses) / (misses + false_alarms);
    out.fn_per_subject.push_back(fn);
    out.fp_per_subject.push_back(1.0 - fn);
  }
  if (out.fn_per_subject.empty()) throw StatsError("error split: no subject made any error");
  out.fn_share = mean_of(out.fn_per_subject);
  out.fp_share = 1.0 - out.fn_share;
  return out;
}

AnovaResult rm_anova(const Matrix& m) {
  check_rectangular(m, 2, 2);
  const std::size_t n = m.size();
  const std::size_t k = m.front().size();
  const double nk = static_cast<double>(n * k);

  double grand = 0.0;
  for (const auto& row : m) grand += std::accumulate(row.begin(), row.end(), 0.0);
  grand /= nk;

  AnovaResult r;
  r.means.assign(k, 0.0);
  for (const auto& row : m) {
    for (std::size_t j = 0; j < k; ++j) r.means[j] += row[j];
  }
  for (double& v : r.means) v /= static_cast<double>(n);

  for (const auto& row : m) {
    const double row_mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(k);
    r.ss_subjects += static_cast<double>(k) * (row_mean - grand) * (row_mean - grand);
    for (double v : row) r.ss_total += (v - grand) * (v - grand);
  }
  for (double mj : r.means) r.ss_effect += static_cast<double>(n) * (mj - grand) * (mj - grand);
  r.ss_error = std::max(0.0, r.ss_total - r.ss_subjects - r.ss_effect);

  r.df_effect = static_cast<int>(k - 1);
  r.df_error = static_cast<int>((k - 1) * (n - 1));
  const double scale = std::max(r.ss_total, std::numeric_limits<double>::min());
  if (r.ss_effect <= kZeroTolerance * scale) {
    r.f = 0.0;
    r.p = 1.0;
    return r;
  }
  if (r.ss_error <= kZeroTolerance * scale) {
    r.f = std::numeric_limits<double>::infinity();
    r.f_infinite = true;
    r.p = 0.0;
    return r;
  }
  r.f = (r.ss_effect / r.df_effect) / (r.ss_error / r.df_error);
  r.p = f_upper_tail(r.f, r.df_effect, r.df_error);
  return r;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StatsError("paired t-test: samples differ in length");
  if (a.size() < 2) throw StatsError("paired t-test: need at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = mean_of(d);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  TTestResult r;
  r.df = static_cast<int>(n - 1);
  r.mean_diff = mean;
  const bool all_zero = std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    r.t = 0.0;
    r.p = 1.0;
    return r;
  }
  const double var = ss / r.df;
  if (var <= kZeroTolerance * std::max(1.0, mean * mean)) {
    throw StatsError("paired t-test: differences have zero variance");
  }
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  r.p = student_t_two_tailed(r.t, r.df);
  return r;
}

std::vector<PairwiseResult> bonferroni_pairwise(const Matrix& m) {
  check_rectangular(m, 2, 2);
  const std::size_t k = m.front().size();
  const double comparisons = static_cast<double>(k * (k - 1) / 2);
  std::vector<PairwiseResult> out;
  std::vector<double> a(m.size());
  std::vector<double> b(m.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      for (std::size_t s = 0; s < m.size(); ++s) {
        a[s] = m[s][i];
        b[s] = m[s][j];
      }
      PairwiseResult r;
      r.first = i;
      r.second = j;
      r.test = paired_ttest(a, b);
      r.p_corrected = std::min(1.0, r.test.p * comparisons);
      out.push_back(r);
    }
  }
  return out;
}

KsResult ks_normality(std::span<const double> sample) {
  if (sample.size() < 5) throw StatsError("KS test: need at least 5 observations");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const Summary s = summarize(x);
  if (!s.sd || *s.sd <= 0.0) throw StatsError("KS test: degenerate sample (zero variance)");
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf((x[i] - s.mean) / *s.sd);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_upper_tail(std::sqrt(n) * d), x.size()};
}

SpatialMatrix spatial_matrix(std::span<const SessionLog> logs, int rows, int cols) {
  SpatialMatrix out;
  out.rows = rows;
  out.cols = cols;
  out.cells.assign(static_cast<std::size_t>(rows * cols), {});
  for (const SessionLog* log : recorded(logs)) {
    for (const TrialRecord& r : log->trials) {
      if (!r.condition.target_present || !r.target_cell || !r.correct) continue;
      const GridCell c = *r.target_cell;
      if (c.row < 0 || c.row >= rows || c.col < 0 || c.col >= cols) {
        throw StatsError("spatial matrix: target cell outside the grid");
      }
      SpatialCell& cell = out.cells[static_cast<std::size_t>(c.row * cols + c.col)];
      ++cell.opportunities;
      cell.hits += *r.correct;
    }
  }
  for (SpatialCell& cell : out.cells) {
    if (cell.opportunities > 0) cell.rate = static_cast<double>(cell.hits) / cell.opportunities;
  }
  return out;
}

std::vector<RtRow> rt_summary(std::span<const SessionLog> logs) {
  const auto subjects = recorded(logs);
  std::map<int, std::vector<double>> all;
  std::map<int, std::vector<double>> correct;
  for (const SessionLog* log : subjects) {
    std::map<int, std::vector<double>> a;
    std::map<int, std::vector<double>> c;
    for (const TrialRecord& r : log->trials) {
      if (!r.reaction_ms) continue;
      a[r.condition.set_size].push_back(*r.reaction_ms);
      if (*r.correct) c[r.condition.set_size].push_back(*r.reaction_ms);
    }
    for (const auto& [size, v] : a) all[size].push_back(mean_of(v));
    for (const auto& [size, v] : c) correct[size].push_back(mean_of(v));
  }
  if (all.empty()) throw StatsError("reaction times: no responses");
  std::vector<RtRow> out;
  for (const auto& [size, v] : all) {
    RtRow row;
    row.set_size = size;
    row.all_trials = summarize(v);
    if (auto it = correct.find(size); it != correct.end()) row.correct_trials = summarize(it->second);
    out.push_back(row);
  }
  return out;
}

EyeDominanceResult eye_dominance_compare(std::span<const SessionLog> logs, Eye dominant) {
  EyeDominanceResult out;
  out.dominant = dominant;
  std::vector<double> dom;
  std::vector<double> non;
  for (const SessionLog* log : recorded(logs)) {
    if (log->participant.dominant_eye != dominant) continue;
    Tally same;
    Tally opposite;
    for (const TrialRecord& r : log->trials) {
      if (!r.condition.target_present || !r.condition.target_eye || !r.correct) continue;
      Tally& t = *r.condition.target_eye == dominant ? same : opposite;
      ++t.total;
      t.hits += *r.correct;
    }
    if (same.total == 0 || opposite.total == 0) continue;
    dom.push_back(same.rate());
    non.push_back(opposite.rate());
  }
  if (dom.size() < 2) throw StatsError("eye dominance: fewer than 2 subjects share the dominant eye");
  out.n_subjects = dom.size();
  out.dominant_eye = summarize(dom);
  out.non_dominant_eye = summarize(non);
  out.test = paired_ttest(dom, non);
  return out;
}

KindComparison target_kind_compare(std::span<const SessionLog> logs) {
  std::vector<double> magenta;
  std::vector<double> yellow;
  for (const SessionLog* log : recorded(logs)) {
    Tally m;
    Tally y;
    for (const TrialRecord& r : log->trials) {
      if (!r.condition.conjunction_target_kind || !r.correct) continue;
      Tally& t = *r.condition.conjunction_target_kind == ConjunctionTarget::MagentaPopout ? m : y;
      ++t.total;
      t.hits += *r.correct;
    }
    if (m.total == 0 || y.total == 0) continue;
    magenta.push_back(m.rate());
    yellow.push_back(y.rate());
  }
  if (magenta.size() < 2) throw StatsError("target kinds: fewer than 2 conjunction subjects");
  return {summarize(magenta), summarize(yellow), paired_ttest(magenta, yellow)};
}

TlxSummary tlx_summary(std::span<const QuestionnaireResponse> responses) {
  if (responses.empty()) throw StatsError("questionnaire: no responses");
  TlxSummary out;
  out.n = responses.size();
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const QuestionnaireResponse& q : responses) v.push_back(get(q));
    return summarize(v);
  };
  for (std::size_t i = 0; i < kTlxScales.size(); ++i) {
    out.tlx[i] = column([i](const QuestionnaireResponse& q) { return q.nasa_tlx[i]; });
  }
  out.clearness = column([](const QuestionnaireResponse& q) { return q.clearness; });
  out.decision_making = column([](const QuestionnaireResponse& q) { return q.decision_making; });
  out.focus = column([](const QuestionnaireResponse& q) { return q.focus; });
  for (const QuestionnaireResponse& q : responses) out.headache_count += q.headache;
  return out;
}

}  // namespace deadeye::stats
