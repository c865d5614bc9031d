#include "deadeye/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "deadeye/stats.hpp"

namespace deadeye::report {

namespace {

using io::Json;

Json summary_json(const stats::Summary& s) {
  return Json{{"n", s.n},
              {"mean", s.mean},
              {"sd", s.sd ? Json(*s.sd) : Json(nullptr)},
              {"min", s.min},
              {"max", s.max}};
}

Json ttest_json(const stats::TTestResult& t) {
  return Json{{"t", t.t}, {"df", t.df}, {"p", t.p}, {"mean_diff", t.mean_diff}};
}

Json anova_json(const stats::AnovaResult& a, const std::vector<int>& set_sizes) {
  Json means = Json::array();
  for (std::size_t i = 0; i < a.means.size(); ++i) means.push_back(Json{{"set_size", set_sizes[i]}, {"mean", a.means[i]}});
  return Json{{"f", a.f_infinite ? Json(nullptr) : Json(a.f)},
              {"f_infinite", a.f_infinite},
              {"df_effect", a.df_effect},
              {"df_error", a.df_error},
              {"p", a.p},
              {"means", means},
              {"ss_effect", a.ss_effect},
              {"ss_subjects", a.ss_subjects},
              {"ss_error", a.ss_error}};
}

Json posthoc_json(const stats::Matrix& m, const std::vector<int>& set_sizes) {
  Json out = Json::array();
  for (const auto& r : stats::bonferroni_pairwise(m)) {
    Json row = ttest_json(r.test);
    row["a"] = set_sizes[r.first];
    row["b"] = set_sizes[r.second];
    row["p_corrected"] = r.p_corrected;
    out.push_back(row);
  }
  return out;
}

// Runs one analysis; a StatsError becomes an {"error": ...} entry.
Json attempt(const std::function<Json()>& fn) {
  try {
    return fn();
  } catch (const stats::StatsError& e) {
    return Json{{"error", e.what()}};
  }
}

std::vector<double> column(const stats::Matrix& m, std::size_t c) {
  std::vector<double> out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(row[c]);
  return out;
}

Json normality_json(const stats::SubjectMatrix& sm) {
  Json out = Json::array();
  for (std::size_t c = 0; c < sm.set_sizes.size(); ++c) {
    const std::vector<double> col = column(sm.values, c);
    Json entry = attempt([&] {
      const stats::KsResult ks = stats::ks_normality(col);
      return Json{{"d", ks.d}, {"p", ks.p}, {"n", ks.n}};
    });
    entry["set_size"] = sm.set_sizes[c];
    out.push_back(entry);
  }
  return out;
}

Json matrix_tests(const stats::SubjectMatrix& sm) {
  return Json{{"anova", attempt([&] { return anova_json(stats::rm_anova(sm.values), sm.set_sizes); })},
              {"posthoc", attempt([&] { return posthoc_json(sm.values, sm.set_sizes); })},
              {"normality", normality_json(sm)}};
}

std::vector<QuestionnaireResponse> questionnaires(std::span<const SessionLog> logs) {
  std::vector<QuestionnaireResponse> out;
  for (const SessionLog& l : logs) {
    if (l.mode == SessionMode::Recorded && l.questionnaire) out.push_back(*l.questionnaire);
  }
  return out;
}

Json tlx_json(const stats::TlxSummary& s) {
  Json tlx = Json::object();
  for (std::size_t i = 0; i < kTlxScales.size(); ++i) tlx[to_string(kTlxScales[i])] = summary_json(s.tlx[i]);
  return Json{{"n", s.n},
              {"nasa_tlx", tlx},
              {"clearness", summary_json(s.clearness)},
              {"decision_making", summary_json(s.decision_making)},
              {"focus", summary_json(s.focus)},
              {"headache_count", s.headache_count}};
}

Json experiment_section(Experiment experiment, std::span<const SessionLog> logs) {
  Json section;
  Json participants = Json::array();
  for (const SessionLog& l : logs) participants.push_back(l.participant.id);
  section["n_logs"] = logs.size();
  section["participants"] = participants;
  section["incomplete_logs"] =
      std::count_if(logs.begin(), logs.end(), [](const SessionLog& l) { return !l.complete; });
  std::size_t flagged = 0;
  for (const SessionLog& l : logs) {
    flagged += std::count_if(l.trials.begin(), l.trials.end(), [](const TrialRecord& r) { return !r.flags.empty(); });
  }
  section["flagged_trials"] = flagged;

  section["accuracy"] = attempt([&] {
    const stats::AccuracyTable t = stats::accuracy_by_setsize(logs);
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      rows.push_back(Json{{"set_size", r.set_size},
                          {"mean", r.mean},
                          {"sd", r.sd ? Json(*r.sd) : Json(nullptr)},
                          {"n_subjects", r.n_subjects}});
    }
    return Json{{"n_subjects", t.n_subjects}, {"rows", rows}};
  });
  section["accuracy_tests"] = attempt([&] { return matrix_tests(stats::accuracy_matrix(logs)); });

  section["errors"] = attempt([&] {
    const stats::ErrorSplit s = stats::fn_fp_split(logs);
    Json out{{"fn_share", s.fn_share},
             {"fp_share", s.fp_share},
             {"fn_summary", summary_json(stats::summarize(s.fn_per_subject))},
             {"fp_summary", summary_json(stats::summarize(s.fp_per_subject))},
             {"excluded_subjects", s.excluded},
             {"warnings", s.warnings}};
    out["fp_vs_fn"] = attempt([&] { return ttest_json(stats::paired_ttest(s.fp_per_subject, s.fn_per_subject)); });
    return out;
  });

  section["reaction_time"] = attempt([&] {
    Json all = Json::array();
    Json correct = Json::array();
    for (const auto& r : stats::rt_summary(logs)) {
      all.push_back(Json{{"set_size", r.set_size}, {"summary", summary_json(r.all_trials)}});
      correct.push_back(Json{{"set_size", r.set_size},
                             {"summary", r.correct_trials ? summary_json(*r.correct_trials) : Json(nullptr)}});
    }
    return Json{{"all_trials", all}, {"correct_trials", correct}};
  });
  section["reaction_time_tests"] = attempt([&] { return matrix_tests(stats::rt_matrix(logs, false)); });

  section["spatial"] = attempt([&] {
    const stats::SpatialMatrix m = stats::spatial_matrix(logs);
    Json rows = Json::array();
    for (int r = 0; r < m.rows; ++r) {
      Json row = Json::array();
      for (int c = 0; c < m.cols; ++c) {
        const stats::SpatialCell& cell = m.at(r, c);
        row.push_back(Json{{"hits", cell.hits},
                           {"opportunities", cell.opportunities},
                           {"rate", cell.rate ? Json(*cell.rate) : Json(nullptr)}});
      }
      rows.push_back(row);
    }
    return Json{{"rows", m.rows}, {"cols", m.cols}, {"cells", rows}};
  });

  section["eye_dominance"] = attempt([&] {
    const stats::EyeDominanceResult r = stats::eye_dominance_compare(logs, Eye::Right);
    return Json{{"dominant", io::to_string(r.dominant)},
                {"n_subjects", r.n_subjects},
                {"dominant_eye", summary_json(r.dominant_eye)},
                {"non_dominant_eye", summary_json(r.non_dominant_eye)},
                {"test", attempt([&] { return ttest_json(r.test); })}};
  });

  if (experiment == Experiment::Conjunction) {
    section["target_kinds"] = attempt([&] {
      const stats::KindComparison k = stats::target_kind_compare(logs);
      return Json{{"magenta_popout", summary_json(k.magenta)},
                  {"yellow_non_popout", summary_json(k.yellow)},
                  {"test", ttest_json(k.test)}};
    });
  }

  const std::vector<QuestionnaireResponse> q = questionnaires(logs);
  section["questionnaire"] = attempt([&] { return tlx_json(stats::tlx_summary(q)); });
  return section;
}

// Paired comparison of questionnaire items between the two experiments over
// participants who answered both.
Json questionnaire_comparison(std::span<const SessionLog> pre, std::span<const SessionLog> conj) {
  std::map<std::string, QuestionnaireResponse> a;
  for (const SessionLog& l : pre) {
    if (l.questionnaire) a.emplace(l.participant.id, *l.questionnaire);
  }
  std::vector<std::pair<QuestionnaireResponse, QuestionnaireResponse>> pairs;
  for (const SessionLog& l : conj) {
    auto it = a.find(l.participant.id);
    if (l.questionnaire && it != a.end()) pairs.emplace_back(it->second, *l.questionnaire);
  }
  Json out{{"n_pairs", pairs.size()}};
  auto item = [&](const std::string& name, const std::function<double(const QuestionnaireResponse&)>& get) {
    std::vector<double> x, y;
    for (const auto& [p, c] : pairs) {
      x.push_back(get(p));
      y.push_back(get(c));
    }
    out[name] = attempt([&] { return ttest_json(stats::paired_ttest(x, y)); });
  };
  for (TlxScale s : kTlxScales) item(to_string(s), [s](const QuestionnaireResponse& q) { return q.tlx(s); });
  item("clearness", [](const QuestionnaireResponse& q) { return q.clearness; });
  item("decision_making", [](const QuestionnaireResponse& q) { return q.decision_making; });
  item("focus", [](const QuestionnaireResponse& q) { return q.focus; });
  return out;
}

}  // namespace

io::Json build(std::span<const SessionLog> logs) {
  std::vector<const SessionLog*> sorted;
  for (const SessionLog& l : logs) sorted.push_back(&l);
  // Matrix row order changes floating-point summation, so fix it.
  std::map<const SessionLog*, std::string> key_of;
  for (const SessionLog* l : sorted) key_of[l] = io::to_jsonl(*l);
  std::stable_sort(sorted.begin(), sorted.end(), [&](const SessionLog* a, const SessionLog* b) {
    if (a->participant.id != b->participant.id) return a->participant.id < b->participant.id;
    return key_of[a] < key_of[b];
  });

  std::map<Experiment, std::vector<SessionLog>> by_experiment;
  std::size_t training = 0;
  for (const SessionLog* l : sorted) {
    if (l->mode != SessionMode::Recorded) {
      ++training;
      continue;
    }
    by_experiment[l->experiment].push_back(*l);
  }

  Json report{{"schema_version", io::kSchemaVersion},
              {"kind", "deadeye.report"},
              {"n_logs", logs.size()},
              {"training_logs_skipped", training}};
  Json sections = Json::object();
  for (Experiment e : {Experiment::Preattentive, Experiment::Conjunction}) {
    auto it = by_experiment.find(e);
    if (it != by_experiment.end()) sections[io::to_string(e)] = experiment_section(e, it->second);
  }
  report["experiments"] = sections;
  if (by_experiment.count(Experiment::Preattentive) && by_experiment.count(Experiment::Conjunction)) {
    report["questionnaire_comparison"] =
        questionnaire_comparison(by_experiment[Experiment::Preattentive], by_experiment[Experiment::Conjunction]);
  }
  return report;
}

std::string dump(const io::Json& report) { return report.dump(2) + "\n"; }

namespace {

std::string num(const Json& j, int decimals = 3) {
  if (!j.is_number()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, j.get<double>());
  return buf;
}

std::string pval(const Json& j) {
  if (!j.is_number()) return "-";
  const double p = j.get<double>();
  if (p < 0.001) return "<.001";
  return num(j, 3);
}

void write_tests(std::ostringstream& out, const Json& tests) {
  if (tests.contains("error")) {
    out << "  tests: " << tests["error"].get<std::string>() << "\n";
    return;
  }
  const Json& a = tests["anova"];
  if (a.contains("error")) {
    out << "  RM-ANOVA: " << a["error"].get<std::string>() << "\n";
  } else {
    out << "  RM-ANOVA: F(" << a["df_effect"] << "," << a["df_error"]
        << ") = " << (a["f_infinite"].get<bool>() ? std::string("inf") : num(a["f"], 2)) << ", p = " << pval(a["p"])
        << "\n";
  }
  const Json& ph = tests["posthoc"];
  if (ph.is_array()) {
    for (const Json& r : ph) {
      out << "  Bonferroni " << r["a"] << " vs " << r["b"] << ": t(" << r["df"] << ") = " << num(r["t"], 2)
          << ", p = " << pval(r["p_corrected"]) << "\n";
    }
  }
  for (const Json& k : tests["normality"]) {
    out << "  KS set " << k["set_size"] << ": ";
    if (k.contains("error")) {
      out << k["error"].get<std::string>() << "\n";
    } else {
      out << "D = " << num(k["d"]) << ", p = " << pval(k["p"]) << "\n";
    }
  }
}

}  // namespace

std::string text(const io::Json& report) {
  std::ostringstream out;
  out << "Deadeye analysis (" << report["n_logs"] << " logs, " << report["training_logs_skipped"]
      << " training logs skipped)\n";
  for (const auto& [name, s] : report["experiments"].items()) {
    out << "\n== " << name << " ==\n";
    out << "participants: " << s["participants"].size() << "\n";
    out << "\nAccuracy\n";
    if (s["accuracy"].contains("error")) {
      out << "  " << s["accuracy"]["error"].get<std::string>() << "\n";
    } else {
      out << "  set   mean     sd     n\n";
      for (const Json& r : s["accuracy"]["rows"]) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %3d  %s  %s  %3d\n", r["set_size"].get<int>(), num(r["mean"]).c_str(),
                      num(r["sd"]).c_str(), r["n_subjects"].get<int>());
        out << buf;
      }
    }
    write_tests(out, s["accuracy_tests"]);

    out << "\nErrors\n";
    const Json& e = s["errors"];
    if (e.contains("error")) {
      out << "  " << e["error"].get<std::string>() << "\n";
    } else {
      out << "  false negatives " << num(e["fn_share"]) << " (sd " << num(e["fn_summary"]["sd"]) << "), "
          << "false positives " << num(e["fp_share"]) << "\n";
      const Json& t = e["fp_vs_fn"];
      if (!t.contains("error")) out << "  paired t(" << t["df"] << ") = " << num(t["t"], 2) << ", p = " << pval(t["p"]) << "\n";
    }

    out << "\nReaction time (ms, all trials / correct trials)\n";
    const Json& rt = s["reaction_time"];
    if (rt.contains("error")) {
      out << "  " << rt["error"].get<std::string>() << "\n";
    } else {
      for (std::size_t i = 0; i < rt["all_trials"].size(); ++i) {
        const Json& a = rt["all_trials"][i];
        const Json& c = rt["correct_trials"][i]["summary"];
        out << "  set " << a["set_size"] << ": " << num(a["summary"]["mean"], 0) << " (sd "
            << num(a["summary"]["sd"], 0) << ") / " << (c.is_null() ? std::string("-") : num(c["mean"], 0)) << "\n";
      }
    }
    write_tests(out, s["reaction_time_tests"]);

    out << "\nSpatial hit rate (target-present trials)\n";
    const Json& sp = s["spatial"];
    if (sp.contains("error")) {
      out << "  " << sp["error"].get<std::string>() << "\n";
    } else {
      for (const Json& row : sp["cells"]) {
        out << " ";
        for (const Json& cell : row) {
          const std::string v = cell["rate"].is_null() ? "  -  " : num(cell["rate"], 2);
          out << " " << std::string(5 - std::min<std::size_t>(5, v.size()), ' ') << v;
        }
        out << "\n";
      }
    }

    out << "\nEye dominance\n";
    const Json& d = s["eye_dominance"];
    if (d.contains("error")) {
      out << "  " << d["error"].get<std::string>() << "\n";
    } else {
      out << "  dominant " << num(d["dominant_eye"]["mean"]) << ", non-dominant " << num(d["non_dominant_eye"]["mean"]);
      if (!d["test"].contains("error")) out << ", t(" << d["test"]["df"] << ") = " << num(d["test"]["t"], 2) << ", p = " << pval(d["test"]["p"]);
      out << "\n";
    }

    if (s.contains("target_kinds")) {
      out << "\nTarget kinds\n";
      const Json& k = s["target_kinds"];
      if (k.contains("error")) {
        out << "  " << k["error"].get<std::string>() << "\n";
      } else {
        out << "  magenta " << num(k["magenta_popout"]["mean"]) << ", yellow " << num(k["yellow_non_popout"]["mean"])
            << ", t(" << k["test"]["df"] << ") = " << num(k["test"]["t"], 2) << ", p = " << pval(k["test"]["p"]) << "\n";
      }
    }

    out << "\nQuestionnaire\n";
    const Json& q = s["questionnaire"];
    if (q.contains("error")) {
      out << "  " << q["error"].get<std::string>() << "\n";
    } else {
      for (const auto& [scale, sum] : q["nasa_tlx"].items()) {
        out << "  " << scale << ": " << num(sum["mean"], 2) << " (sd " << num(sum["sd"], 2) << ")\n";
      }
      for (const char* item : {"clearness", "decision_making", "focus"}) {
        out << "  " << item << ": " << num(q[item]["mean"], 2) << " (sd " << num(q[item]["sd"], 2) << ")\n";
      }
      out << "  headache: " << q["headache_count"] << "\n";
    }
  }
  return out.str();
}

namespace {

std::string svg_bars(const std::string& title, const Json& labels, const std::vector<double>& means,
                     const std::vector<double>& sds, double y_max) {
  const int w = 480, h = 320, left = 50, bottom = 40, top = 30;
  const int plot_h = h - bottom - top;
  const int n = static_cast<int>(means.size());
  const int slot = n > 0 ? (w - left - 20) / n : 0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  auto y_of = [&](double v) { return top + plot_h - plot_h * std::clamp(v / y_max, 0.0, 1.0); };
  for (int i = 0; i < n; ++i) {
    const double x = left + slot * i + slot * 0.2;
    const double bw = slot * 0.6;
    out << "<rect x=\"" << x << "\" y=\"" << y_of(means[i]) << "\" width=\"" << bw << "\" height=\""
        << (top + plot_h - y_of(means[i])) << "\" fill=\"#00549f\"/>\n";
    if (sds[i] > 0) {
      const double cx = x + bw / 2;
      out << "<line x1=\"" << cx << "\" y1=\"" << y_of(means[i] - sds[i]) << "\" x2=\"" << cx << "\" y2=\""
          << y_of(means[i] + sds[i]) << "\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << x + bw / 2 << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << labels[static_cast<std::size_t>(i)].dump() << "</text>\n";
  }
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << y_max
      << "</text>\n";
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + plot_h << "\" text-anchor=\"end\" font-size=\"10\">0</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string svg_matrix(const std::string& title, const Json& spatial) {
  const int cell = 60, top = 30, left = 10;
  const int rows = spatial["rows"].get<int>(), cols = spatial["cols"].get<int>();
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left * 2 + cols * cell << "\" height=\""
      << top + rows * cell + 10 << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Json& v = spatial["cells"][static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]["rate"];
      const int x = left + c * cell, y = top + r * cell;
      std::string fill = "#dddddd";
      std::string label = "-";
      if (v.is_number()) {
        const int shade = static_cast<int>(std::lround(255 * (1.0 - v.get<double>())));
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02xff", shade, shade);
        fill = buf;
        label = num(v, 2);
      }
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << fill << "\" stroke=\"white\"/>\n";
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
          << "\" text-anchor=\"middle\" font-size=\"12\">" << label << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> svg_plots(const io::Json& report) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, s] : report["experiments"].items()) {
    if (!s["accuracy"].contains("error")) {
      Json labels = Json::array();
      std::vector<double> means, sds;
      for (const Json& r : s["accuracy"]["rows"]) {
        labels.push_back(r["set_size"]);
        means.push_back(r["mean"].get<double>());
        sds.push_back(r["sd"].is_number() ? r["sd"].get<double>() : 0.0);
      }
      out.emplace_back(name + "_accuracy.svg", svg_bars(name + ": accuracy by set size", labels, means, sds, 1.0));
    }
    if (!s["reaction_time"].contains("error")) {
      Json labels = Json::array();
      std::vector<double> means, sds;
      double top = 0.0;
      for (const Json& r : s["reaction_time"]["all_trials"]) {
        labels.push_back(r["set_size"]);
        means.push_back(r["summary"]["mean"].get<double>());
        sds.push_back(r["summary"]["sd"].is_number() ? r["summary"]["sd"].get<double>() : 0.0);
        top = std::max(top, means.back() + sds.back());
      }
      const double y_max = std::max(500.0, std::ceil(top / 500.0) * 500.0);
      out.emplace_back(name + "_reaction_time.svg",
                       svg_bars(name + ": reaction time (ms)", labels, means, sds, y_max));
    }
    if (!s["spatial"].contains("error")) {
      out.emplace_back(name + "_spatial.svg", svg_matrix(name + ": hit rate per cell", s["spatial"]));
    }
  }
  return out;
}

}  // namespace deadeye::report
