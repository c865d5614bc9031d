#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deadeye/chart.hpp"
#include "deadeye/observer.hpp"
#include "deadeye/png_io.hpp"
#include "deadeye/render.hpp"
#include "deadeye/report.hpp"
#include "deadeye/serialize.hpp"
#include "deadeye/service.hpp"
#include "deadeye/stimgen.hpp"

namespace fs = std::filesystem;
using namespace deadeye;

namespace {

io::Config load_config(const std::string& path) {
  if (path.empty()) return {};
  return io::config_from_json(io::read_json(path), path);
}

TrialPlan load_plan(const std::string& path) { return io::plan_from_json(io::read_json(path), path); }

std::string trial_name(std::size_t trial, const char* suffix) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04zu_%s.png", trial, suffix);
  return buf;
}

// Writes the composites of the selected trials and returns the manifest.
service::AssetManifest render_trials(const TrialPlan& plan, const io::Config& cfg, CompositeMode mode,
                                     const fs::path& out_dir, std::optional<std::size_t> block,
                                     const fs::path& relative_to) {
  fs::create_directories(out_dir);
  service::AssetManifest manifest{mode, {}};
  const std::vector<std::size_t> starts = plan.block_starts();
  if (block && *block >= plan.blocks.size()) {
    throw Error("block " + std::to_string(*block) + " does not exist (plan has " + std::to_string(plan.blocks.size()) +
                ")");
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (block && plan.block_of(i) != *block) continue;
    const StereoPair pair = render_pair(instantiate_trial(plan, i), cfg.geometry);
    const std::vector<Raster> images = compose(pair, mode);
    std::vector<std::string> names;
    switch (mode) {
      case CompositeMode::Anaglyph: names = {trial_name(i, "ana")}; break;
      case CompositeMode::SideBySide: names = {trial_name(i, "sbs")}; break;
      case CompositeMode::PerEyeFiles: names = {trial_name(i, "L"), trial_name(i, "R")}; break;
    }
    for (std::size_t k = 0; k < images.size(); ++k) {
      const fs::path file = out_dir / names[k];
      write_png(file, images[k]);
      manifest.files.push_back({i, fs::relative(file, relative_to).generic_string()});
    }
  }
  return manifest;
}

ObserverModel load_observer(const std::string& spec, Experiment experiment) {
  if (spec.empty()) {
    return experiment == Experiment::Preattentive ? ObserverModel{PreattentiveObserver{}}
                                                  : ObserverModel{SerialObserver{}};
  }
  if (spec == "preattentive") return PreattentiveObserver{};
  if (spec == "serial") return SerialObserver{};
  return io::observer_from_json(io::read_json(spec), spec);
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used, 0);
  if (used != s.size()) throw Error("invalid seed '" + s + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadeye workbench: stimuli, simulation, analysis and the experiment service"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a balanced trial plan");
  std::string gen_experiment = "preattentive", gen_seed = std::to_string(kCanonicalSeed), gen_out, gen_config;
  std::vector<int> gen_order;
  gen->add_option("--experiment", gen_experiment, "preattentive or conjunction")
      ->check(CLI::IsMember({"preattentive", "conjunction"}));
  gen->add_option("--seed", gen_seed, "Plan seed");
  gen->add_option("--out", gen_out, "Plan JSON file")->required();
  gen->add_option("--config", gen_config, "Geometry/layout/colour config JSON");
  gen->add_option("--block-order", gen_order, "Set sizes in presentation order")->delimiter(',');

  // render
  auto* rnd = app.add_subcommand("render", "Render the stimuli of a plan to PNG");
  std::string rnd_plan, rnd_mode = "anaglyph", rnd_out, rnd_config;
  std::optional<std::size_t> rnd_block;
  rnd->add_option("--plan", rnd_plan)->required();
  rnd->add_option("--mode", rnd_mode, "anaglyph, sbs or per-eye");
  rnd->add_option("--out", rnd_out, "Output directory")->required();
  rnd->add_option("--block", rnd_block, "Only this block (0-based)");
  rnd->add_option("--config", rnd_config);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run simulated observers through a plan");
  std::string sim_plan, sim_observer, sim_out, sim_seed = "1", sim_config;
  int sim_subjects = 21;
  bool sim_csv = false;
  sim->add_option("--plan", sim_plan)->required();
  sim->add_option("--observer", sim_observer, "Observer JSON, or 'preattentive' / 'serial'");
  sim->add_option("--subjects", sim_subjects)->check(CLI::Range(2, 100000));
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", sim_out, "Directory for session logs")->required();
  sim->add_option("--config", sim_config, "Timing config");
  sim->add_flag("--csv", sim_csv, "Also write one CSV per subject");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Analyse a directory of session logs");
  std::string ana_logs, ana_out, ana_text, ana_svg;
  ana->add_option("--logs", ana_logs)->required();
  ana->add_option("--out", ana_out, "Report JSON")->required();
  ana->add_option("--text", ana_text, "Also write a text report");
  ana->add_option("--svg", ana_svg, "Also write SVG plots to this directory");

  // chart
  auto* cht = app.add_subcommand("chart", "Render a line chart with Deadeye-highlighted series");
  std::string cht_csv, cht_eye = "right", cht_out;
  std::vector<std::string> cht_highlight;
  chart::ChartSpec cht_spec;
  cht->add_option("--csv", cht_csv)->required();
  cht->add_option("--highlight", cht_highlight, "Series to highlight (repeatable)");
  cht->add_option("--eye", cht_eye, "Eye that sees the highlighted series")->check(CLI::IsMember({"left", "right"}));
  cht->add_option("--out", cht_out, "Output directory")->required();
  cht->add_option("--width", cht_spec.width_px);
  cht->add_option("--height", cht_spec.height_px);
  cht->add_option("--stroke", cht_spec.stroke_px);

  // compare
  auto* cmp = app.add_subcommand("compare", "Show two images dichoptically so differences pop out");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("--a", cmp_a, "Left-eye image")->required();
  cmp->add_option("--b", cmp_b, "Right-eye image")->required();
  cmp->add_option("--out", cmp_out, "Output directory")->required();

  // bundle
  auto* bnd = app.add_subcommand("bundle", "Package a plan for the runner UI");
  std::string bnd_plan, bnd_out, bnd_config, bnd_assets;
  std::size_t bnd_training = 10;
  bnd->add_option("--plan", bnd_plan)->required();
  bnd->add_option("--out", bnd_out, "Bundle JSON file")->required();
  bnd->add_option("--config", bnd_config);
  bnd->add_option("--assets", bnd_assets, "Also pre-render images: anaglyph, sbs or per-eye");
  bnd->add_option("--training-trials", bnd_training);

  // serve
  auto* srv = app.add_subcommand("serve", "Serve a bundle and collect session logs");
  std::string srv_bundle, srv_host = "127.0.0.1", srv_data;
  int srv_port = 8080;
  srv->add_option("--bundle", srv_bundle)->required();
  srv->add_option("--host", srv_host);
  srv->add_option("--port", srv_port);
  srv->add_option("--data-dir", srv_data, "Session log directory (default: $DEADEYE_DATA_DIR or ./data)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const io::Config cfg = load_config(gen_config);
      PlanOptions opts;
      opts.grid = default_grid(cfg.geometry, cfg.layout);
      opts.palette = cfg.palette;
      opts.block_order = gen_order;
      const TrialPlan plan =
          generate_plan(io::experiment_from_string(gen_experiment, "--experiment"), parse_seed(gen_seed), opts);
      io::write_text(gen_out, io::to_json(plan).dump(2) + "\n");
      std::cout << "wrote " << plan.size() << " trials to " << gen_out << "\n";
    } else if (*rnd) {
      const TrialPlan plan = load_plan(rnd_plan);
      const CompositeMode mode = io::composite_mode_from_string(rnd_mode, "--mode");
      const auto m = render_trials(plan, load_config(rnd_config), mode, rnd_out, rnd_block, rnd_out);
      std::cout << "wrote " << m.files.size() << " images to " << rnd_out << "\n";
    } else if (*sim) {
      const TrialPlan plan = load_plan(sim_plan);
      const ObserverModel model = load_observer(sim_observer, plan.experiment);
      CohortOptions opts;
      opts.timing = load_config(sim_config).timing;
      const auto logs = simulate_cohort(model, plan, sim_subjects, parse_seed(sim_seed), opts);
      fs::create_directories(sim_out);
      for (const SessionLog& log : logs) {
        io::write_text(fs::path(sim_out) / (log.participant.id + ".jsonl"), io::to_jsonl(log));
        if (sim_csv) io::write_text(fs::path(sim_out) / (log.participant.id + ".csv"), io::to_csv(log));
      }
      std::cout << "wrote " << logs.size() << " session logs to " << sim_out << "\n";
    } else if (*ana) {
      const auto logs = io::read_log_dir(ana_logs);
      const io::Json report = report::build(logs);
      io::write_text(ana_out, report::dump(report));
      if (!ana_text.empty()) io::write_text(ana_text, report::text(report));
      if (!ana_svg.empty()) {
        fs::create_directories(ana_svg);
        for (const auto& [name, svg] : report::svg_plots(report)) io::write_text(fs::path(ana_svg) / name, svg);
      }
      std::cout << "analysed " << logs.size() << " logs into " << ana_out << "\n";
    } else if (*cht) {
      cht_spec.series = chart::parse_csv(io::read_text(cht_csv));
      cht_spec.highlight = {cht_highlight.begin(), cht_highlight.end()};
      cht_spec.hidden_eye = other(io::eye_from_string(cht_eye, "--eye"));
      const StereoPair pair = chart::render_chart_pair(cht_spec);
      fs::create_directories(cht_out);
      write_png(fs::path(cht_out) / "left.png", pair.left);
      write_png(fs::path(cht_out) / "right.png", pair.right);
      write_png(fs::path(cht_out) / "anaglyph.png", anaglyph(pair));
      std::cout << "wrote chart pair to " << cht_out << "\n";
    } else if (*cmp) {
      const StereoPair pair = chart::compare_composite(read_png(cmp_a), read_png(cmp_b));
      fs::create_directories(cmp_out);
      write_png(fs::path(cmp_out) / "left.png", pair.left);
      write_png(fs::path(cmp_out) / "right.png", pair.right);
      write_png(fs::path(cmp_out) / "anaglyph.png", anaglyph(pair));
      std::cout << "wrote comparison pair to " << cmp_out << "\n";
    } else if (*bnd) {
      const TrialPlan plan = load_plan(bnd_plan);
      const io::Config cfg = load_config(bnd_config);
      std::optional<service::AssetManifest> assets;
      const fs::path base = fs::absolute(bnd_out).parent_path();
      if (!bnd_assets.empty()) {
        const CompositeMode mode = io::composite_mode_from_string(bnd_assets, "--assets");
        assets = render_trials(plan, cfg, mode, base / "assets", std::nullopt, base);
      }
      const io::Json bundle = service::make_bundle(plan, cfg, assets, bnd_training);
      io::write_text(bnd_out, bundle.dump() + "\n");
      std::cout << "wrote bundle with " << plan.size() << " trials to " << bnd_out << "\n";
    } else if (*srv) {
      if (srv_data.empty()) {
        const char* env = std::getenv("DEADEYE_DATA_DIR");
        srv_data = env && *env ? env : "data";
      }
      const fs::path base = fs::absolute(srv_bundle).parent_path();
      service::Bundle bundle = service::bundle_from_json(io::read_json(srv_bundle), base);
      service::SessionStore store(srv_data, bundle.plan);
      const bool has_assets = bundle.assets.has_value();
      service::Server server(std::move(bundle), store, has_assets ? std::optional<fs::path>(base) : std::nullopt);
      std::cout << "serving on http://" << srv_host << ":" << srv_port << " (data in " << srv_data << ")"
                << std::endl;
      if (!server.listen(srv_host, srv_port)) throw Error("cannot listen on " + srv_host + ":" + std::to_string(srv_port));
    }
  } catch (const std::exception& e) {
    std::cerr << "deadeye: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
