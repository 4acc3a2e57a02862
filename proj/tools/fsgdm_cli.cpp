// fsgdm: response tables, signal demo, training runs, sweeps and checks.
//
//   fsgdm <response|demo|train|sweep|check> [--config PATH] [--out DIR]
//         [--seed N]... [--set section.key=value]... [--stages LIST] [--jobs N]
//
// Exit status: 0 ok, 1 check failure or runtime error, 2 bad configuration.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsgdm/config.hpp"
#include "fsgdm/frequency.hpp"
#include "fsgdm/harness.hpp"
#include "fsgdm/optimizer.hpp"
#include "fsgdm/output.hpp"
#include "fsgdm/problems.hpp"
#include "fsgdm/schedule.hpp"
#include "fsgdm/signal_demo.hpp"

namespace fs = std::filesystem;
using namespace fsgdm;

namespace {

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::int64_t> seeds;
  std::vector<std::string> overrides;
  std::string stages;
  std::size_t jobs = 1;
};

const std::set<std::string> kSignalKeys{"length", "amplitude", "omega", "noise_std",
                                        "tail_fraction", "presets", "num_stages"};
const std::set<std::string> kSweepKeys{"c_values", "v_values", "zone_constant"};
const std::set<std::string> kResponseKeys{"stages", "points", "total_steps", "num_stages"};
const std::set<std::string> kCheckKeys{"c", "num_stages", "sigmas", "u_values",
                                       "v_values", "points", "tolerance"};

ConfigDocument load_config(const Invocation& inv) {
  ConfigDocument doc;
  if (!inv.config_path.empty()) doc = ConfigDocument::load(inv.config_path);
  for (const auto& o : inv.overrides) doc.apply_override(o);
  doc.require_known_sections({"schedule", "optimizer", "problem", "signal", "sweep", "response",
                              "check"});
  const std::pair<const char*, const std::set<std::string>*> checks[] = {
      {"schedule", &schedule_keys()}, {"optimizer", &optimizer_keys()},
      {"problem", &problem_keys()},   {"signal", &kSignalKeys},
      {"sweep", &kSweepKeys},         {"response", &kResponseKeys},
      {"check", &kCheckKeys}};
  for (const auto& [section, keys] : checks) {
    if (doc.has_section(section)) doc.require_known_keys(section, *keys);
  }
  return doc;
}

std::vector<std::uint64_t> seeds_or(const Invocation& inv, std::vector<std::uint64_t> fallback) {
  if (inv.seeds.empty()) return fallback;
  std::vector<std::uint64_t> out;
  for (auto s : inv.seeds) {
    if (s < 0) throw ConfigError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

std::string csv_of(auto&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

// Writes the artifact and its manifest.
void emit(const fs::path& path, const std::string& content, Json manifest) {
  manifest["artifact"] = path.filename().string();
  write_text(path, content);
  write_json(manifest_path(path), manifest);
}

// ---------------------------------------------------------------- response

int cmd_response(const Invocation& inv, const ConfigDocument& doc) {
  const StagePlan fallback(doc.get_int("response", "total_steps", 3000),
                           doc.get_int("response", "num_stages", 300));
  std::optional<CoefficientSchedule> schedule;
  if (doc.has_section("schedule")) {
    schedule = schedule_from_config(doc, "schedule", fallback);
  } else {
    schedule = make_fsgdm_schedule(0.033, 1.0, fallback);
  }
  const auto n = schedule->plan().num_stages();
  std::vector<std::int64_t> stages;
  if (!inv.stages.empty()) {
    ConfigDocument tmp;
    tmp.set("x", "stages", inv.stages);
    stages = tmp.get_ints("x", "stages", {});
  } else {
    stages = doc.get_ints("response", "stages", {1, std::max<std::int64_t>(1, n / 2), n});
  }
  if (stages.empty()) throw ConfigError("no stages requested");
  for (auto k : stages) {
    if (k < 1 || k > n) {
      throw ConfigError("stage " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
  }
  const auto points = doc.get_int("response", "points", FrequencyGrid::kDefaultPoints);
  if (points < 2) throw ConfigError("[response] points must be at least 2");
  const auto grid = FrequencyGrid::uniform(static_cast<std::size_t>(points));
  const auto responses = dynamic_response(*schedule, grid, stages);

  ConfigDocument resolved;
  schedule_to_config(*schedule, resolved, "schedule");
  Json manifest = make_manifest("response", doc, {});
  manifest["resolved"] = config_json(resolved);
  manifest["stages"] = stages;
  manifest["points"] = points;
  Json summary = Json::array();
  for (const auto& r : responses) {
    const auto cls = classify(r.u, r.v);
    std::cout << "stage " << r.stage << ": u=" << format_double(r.u) << " v=" << format_double(r.v)
              << " " << to_string(cls.pass_band) << " " << to_string(cls.regime)
              << " peak_gain=" << format_double(cls.peak_gain) << "\n";
    summary.push_back({{"k", r.stage},
                       {"u", r.u},
                       {"v", r.v},
                       {"pass_band", to_string(cls.pass_band)},
                       {"regime", to_string(cls.regime)},
                       {"peak_gain", cls.peak_gain}});
  }
  manifest["classes"] = summary;
  emit(fs::path(inv.out_dir) / "response.csv",
       csv_of([&](std::ostream& os) { write_response_csv(os, responses, grid); }), manifest);
  return 0;
}

// -------------------------------------------------------------------- demo

int cmd_demo(const Invocation& inv, const ConfigDocument& doc) {
  SignalSpec base;
  base.length = doc.get_int("signal", "length", base.length);
  base.amplitude = doc.get_double("signal", "amplitude", base.amplitude);
  base.omega = doc.get_double("signal", "omega", base.omega);
  base.noise_std = doc.get_double("signal", "noise_std", base.noise_std);
  const double tail = doc.get_double("signal", "tail_fraction", 0.25);
  const auto num_stages = doc.get_int("signal", "num_stages", 300);
  try {
    validate(base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[signal] ") + e.what());
  }
  if (!(tail > 0.0 && tail <= 1.0)) throw ConfigError("[signal] tail_fraction must lie in (0, 1]");

  std::vector<std::string> presets;
  {
    std::string list = doc.get_string(
        "signal", "presets", "dynamic_lowpass,dynamic_highpass,lowpass_gain,highpass_gain");
    for (char& ch : list) if (ch == ',') ch = ' ';
    std::istringstream is(list);
    for (std::string p; is >> p;) presets.push_back(p);
  }
  if (presets.empty()) throw ConfigError("[signal] presets is empty");

  const StagePlan plan(base.length, std::min<std::int64_t>(num_stages, base.length));
  std::vector<std::pair<std::string, CoefficientSchedule>> schedules;
  for (const auto& name : presets) {
    if (name == "schedule") {
      if (!doc.has_section("schedule")) throw ConfigError("preset 'schedule' needs a [schedule] section");
      schedules.emplace_back(name, schedule_from_config(doc, "schedule", plan));
    } else {
      try {
        schedules.emplace_back(name, demo_schedule(parse_demo_preset(name), plan));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[signal] ") + e.what());
      }
    }
  }

  const auto seeds = seeds_or(inv, {0});
  Json results = Json::array();
  for (auto seed : seeds) {
    SignalSpec spec = base;
    spec.seed = seed;
    const auto signal = generate(spec);
    for (const auto& [name, schedule] : schedules) {
      const auto filtered = filter_signal(signal.noisy, schedule);
      const auto m = demo_metrics(signal.clean, signal.noisy, filtered, tail, spec.omega);
      ConfigDocument resolved;
      schedule_to_config(schedule, resolved, "schedule");
      Json manifest = make_manifest("demo", doc, std::vector<std::uint64_t>{seed});
      manifest["preset"] = name;
      manifest["resolved"] = config_json(resolved);
      manifest["signal"] = {{"length", spec.length},       {"amplitude", spec.amplitude},
                            {"omega", spec.omega},         {"noise_std", spec.noise_std},
                            {"tail_fraction", tail},       {"seed", seed}};
      const std::string file = "demo_" + name + "_seed" + std::to_string(seed) + ".csv";
      emit(fs::path(inv.out_dir) / file,
           csv_of([&](std::ostream& os) { write_demo_csv(os, signal, filtered); }), manifest);
      results.push_back({{"preset", name},
                         {"seed", seed},
                         {"rmse_noisy", m.rmse_noisy},
                         {"rmse_filtered", m.rmse_filtered},
                         {"amplitude_ratio", m.amplitude_ratio},
                         {"tail_start", m.tail_start},
                         {"csv", file}});
      std::cout << name << " seed " << seed << ": rmse noisy " << format_double(m.rmse_noisy)
                << " filtered " << format_double(m.rmse_filtered) << " amplitude ratio "
                << format_double(m.amplitude_ratio) << "\n";
    }
  }
  Json metrics = make_manifest("demo", doc, seeds);
  metrics["results"] = results;
  write_json(fs::path(inv.out_dir) / "demo_metrics.json", metrics);
  return 0;
}

// ------------------------------------------------------------ train/sweep

struct TrainingSetup {
  ProblemSpec spec;
  std::unique_ptr<Problem> problem;
  OptimizerConfig config;
  ConfigDocument effective;  // doc with total_steps filled in
  ConfigDocument resolved;
};

TrainingSetup training_setup(const ConfigDocument& doc, std::string_view default_kind) {
  TrainingSetup s;
  s.effective = doc;
  if (!s.effective.has("problem", "kind")) s.effective.set("problem", "kind", std::string(default_kind));
  s.spec = problem_spec_from(s.effective, "problem");
  try {
    s.problem = make_problem(s.spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[problem] ") + e.what());
  }
  const std::int64_t sigma =
      s.spec.epochs * static_cast<std::int64_t>(s.problem->batches_per_epoch());
  if (s.effective.has("optimizer", "total_steps")) {
    if (s.effective.get_int("optimizer", "total_steps", 0) != sigma) {
      throw ConfigError("[optimizer] total_steps must equal epochs * batches per epoch = " +
                        std::to_string(sigma));
    }
  } else {
    s.effective.set("optimizer", "total_steps", std::to_string(sigma));
  }
  s.config = optimizer_config_from(s.effective, "optimizer", "schedule");
  try {
    (void)resolve_schedule(s.config);
    (void)lr_at(s.config, 1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[optimizer] ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("[optimizer] ") + e.what());
  }
  problem_spec_to(s.spec, s.resolved, "problem");
  optimizer_config_to(s.config, s.resolved, "optimizer", "schedule");
  return s;
}

int cmd_train(const Invocation& inv, const ConfigDocument& doc) {
  const auto setup = training_setup(doc, "quadratic");
  const auto seeds = seeds_or(inv, {0});
  std::vector<RunRecord> runs;
  Json per_seed = Json::array();
  for (auto seed : seeds) {
    auto record = run_training(*setup.problem, setup.config, seed);
    Json manifest = make_manifest("train", setup.effective, std::vector<std::uint64_t>{seed});
    manifest["resolved"] = config_json(setup.resolved);
    manifest["problem"] = {{"kind", to_string(setup.problem->kind())},
                           {"activation", std::string(setup.problem->activation())},
                           {"dimension", setup.problem->dimension()}};
    manifest["diverged"] = record.diverged;
    manifest["diverged_at"] = record.diverged_at;
    const std::string stem = "train_seed" + std::to_string(seed);
    emit(fs::path(inv.out_dir) / (stem + ".csv"),
         csv_of([&](std::ostream& os) { write_run_csv(os, record); }), manifest);
    if (setup.problem->is_classifier()) {
      emit(fs::path(inv.out_dir) / (stem + "_epochs.csv"),
           csv_of([&](std::ostream& os) { write_epoch_csv(os, record); }), manifest);
    }
    if (record.diverged) {
      std::cerr << "warning: seed " << seed << " diverged at step " << record.diverged_at << "\n";
    }
    std::cout << "seed " << seed << ": " << record.metric_name << " "
              << format_double(record.final_metric) << "\n";
    per_seed.push_back({{"seed", seed},
                        {"diverged", record.diverged},
                        {"final_loss", record.final_loss},
                        {"final_metric", record.final_metric}});
    runs.push_back(std::move(record));
  }
  Json summary = make_manifest("train", setup.effective, seeds);
  summary["resolved"] = config_json(setup.resolved);
  summary["metric"] = runs.front().metric_name;
  summary["runs"] = per_seed;
  if (runs.size() >= 2) {
    const auto agg = aggregate(std::string(to_string(setup.config.variant)), runs);
    summary["mean"] = agg.mean;
    summary["stderr"] = agg.stderr_;
    summary["diverged_count"] = agg.diverged_count;
  }
  write_json(fs::path(inv.out_dir) / "train_summary.json", summary);
  return 0;
}

int cmd_sweep(const Invocation& inv, const ConfigDocument& doc) {
  const auto setup = training_setup(doc, "mlp");
  const auto cs = doc.get_doubles("sweep", "c_values", {0.01, 0.033, 0.1, 0.3});
  const auto vs = doc.get_doubles("sweep", "v_values", {0.5, 1.0, 2.0, 3.0});
  const double zone = doc.get_double("sweep", "zone_constant", kOptimalZoneConstant);
  const auto seeds = seeds_or(inv, {0, 1, 2});
  if (!(zone > 0.0)) throw ConfigError("[sweep] zone_constant must be positive");
  SweepResult result;
  try {
    result = sweep(*setup.problem, cs, vs, seeds, setup.config, inv.jobs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[sweep] ") + e.what());
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    result.zone_c[i] = vs[i] < zone ? optimal_zone_curve(vs[i], zone)
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  Json manifest = make_manifest("sweep", setup.effective, seeds);
  manifest["resolved"] = config_json(setup.resolved);
  manifest["metric"] = setup.problem->is_classifier() ? "test_accuracy" : "final_loss";
  manifest["zone_constant"] = zone;
  for (const auto& cell : result.cells) {
    if (cell.result.diverged_count > 0) {
      std::cerr << "warning: c=" << format_double(cell.c) << " v=" << format_double(cell.v) << ": "
                << cell.result.diverged_count << " diverged run(s)\n";
    }
  }
  emit(fs::path(inv.out_dir) / "sweep.csv",
       csv_of([&](std::ostream& os) { write_sweep_csv(os, result); }), manifest);
  emit(fs::path(inv.out_dir) / "optimal_zone.csv",
       csv_of([&](std::ostream& os) { write_zone_csv(os, result); }), manifest);
  std::cout << result.cells.size() << " cells, " << seeds.size() << " seeds each\n";
  return 0;
}

// ------------------------------------------------------------------- check

int cmd_check(const Invocation& inv, const ConfigDocument& doc) {
  const double c = doc.get_double("check", "c", 0.033);
  const auto sigmas = doc.get_ints("check", "sigmas", {3000, 30000});
  const auto ns = doc.get_ints("check", "num_stages", {300});
  if (sigmas.empty()) throw ConfigError("[check] sigmas is empty");
  if (ns.size() != 1 && ns.size() != sigmas.size()) {
    throw ConfigError("[check] num_stages needs one value or one per sigma");
  }
  std::vector<double> us;
  for (int k = -99; k <= 99; ++k) us.push_back(k / 100.0);
  us = doc.get_doubles("check", "u_values", us);
  const auto vs = doc.get_doubles("check", "v_values", {0.1, 0.5, 1.0, 2.0, 3.0});
  const auto points = doc.get_int("check", "points", 1000);
  const double tol = doc.get_double("check", "tolerance", 1e-12);
  if (points < 2) throw ConfigError("[check] points must be at least 2");

  std::vector<StagePlan> plans;
  StageInvarianceReport inv_report;
  OracleAgreement oracle;
  try {
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      plans.emplace_back(sigmas[i], ns.size() == 1 ? ns[0] : ns[i]);
    }
    inv_report = check_stage_invariance(c, plans);
    oracle = closed_form_agreement(us, vs, FrequencyGrid::uniform(static_cast<std::size_t>(points)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[check] ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("[check] ") + e.what());
  }
  const bool oracle_pass = oracle.max_magnitude_error < tol && oracle.max_phase_error < tol;
  const bool pass = inv_report.pass && oracle_pass;

  Json verdict = make_manifest("check", doc, {});
  verdict["pass"] = pass;
  Json stage_inv = {{"pass", inv_report.pass},
                    {"c", c},
                    {"sigmas", sigmas},
                    {"num_stages", ns},
                    {"max_cross_run_error", inv_report.max_cross_run_error},
                    {"max_closed_form_error", inv_report.max_closed_form_error},
                    {"message", inv_report.message}};
  if (inv_report.first_mismatch_run) stage_inv["first_mismatch_run"] = *inv_report.first_mismatch_run;
  if (inv_report.first_mismatch_stage) {
    stage_inv["first_mismatch_stage"] = *inv_report.first_mismatch_stage;
  }
  verdict["stage_invariance"] = stage_inv;
  verdict["oracle"] = {{"pass", oracle_pass},
                       {"tolerance", tol},
                       {"evaluations", oracle.evaluations},
                       {"max_magnitude_error", oracle.max_magnitude_error},
                       {"max_phase_error", oracle.max_phase_error}};
  write_json(fs::path(inv.out_dir) / "check.json", verdict);

  std::cout << "stage invariance: " << (inv_report.pass ? "pass" : "FAIL") << "\n"
            << "closed form vs oracle: " << (oracle_pass ? "pass" : "FAIL")
            << " (max magnitude error " << format_double(oracle.max_magnitude_error)
            << ", max phase error " << format_double(oracle.max_phase_error) << ")\n";
  if (!pass) {
    if (!inv_report.pass) std::cerr << "stage invariance: " << inv_report.message << "\n";
    if (!oracle_pass) std::cerr << "oracle errors exceed tolerance " << format_double(tol) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain momentum experiments"};
  app.require_subcommand(1);
  Invocation inv;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Config file")->check(CLI::ExistingFile);
    sub->add_option("--out", inv.out_dir, "Output directory (created if absent)");
    sub->add_option("--seed", inv.seeds, "Seed, repeatable")->take_all();
    sub->add_option("--set", inv.overrides, "Override section.key=value, repeatable")->take_all();
    sub->add_option("--jobs", inv.jobs, "Parallel runs for sweep")->check(CLI::PositiveNumber);
  };
  auto* response = app.add_subcommand("response", "Per-stage magnitude and phase response");
  add_common(response);
  response->add_option("--stages", inv.stages, "Comma-separated stage indices");
  for (auto [name, help] : {std::pair{"demo", "Filter a noisy sinusoid through each regime"},
                            std::pair{"train", "Train on a desk problem"},
                            std::pair{"sweep", "Sweep FSGDM over (c, v)"},
                            std::pair{"check", "Stage invariance and closed-form checks"}}) {
    add_common(app.add_subcommand(name, help));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  inv.command = app.get_subcommands().front()->get_name();

  try {
    const auto doc = load_config(inv);
    ensure_directory(inv.out_dir);
    if (inv.command == "response") return cmd_response(inv, doc);
    if (inv.command == "demo") return cmd_demo(inv, doc);
    if (inv.command == "train") return cmd_train(inv, doc);
    if (inv.command == "sweep") return cmd_sweep(inv, doc);
    return cmd_check(inv, doc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
