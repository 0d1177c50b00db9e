#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <omp.h>

#include "phaseless/config.hpp"
#include "phaseless/error.hpp"
#include "phaseless/pipeline.hpp"
#include "phaseless/validation.hpp"

namespace fs = std::filesystem;
using namespace phaseless;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Geometry:
    case ErrorKind::Domain:
      return kExitUsage;
    case ErrorKind::Data:
    case ErrorKind::Ambiguous:
      return kExitData;
    case ErrorKind::Numerical:
      return kExitNumerical;
  }
  return kExitData;
}

struct Options {
  std::string config;
  std::string out;
  std::string suite = "fast";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

ExperimentConfig load(const Options& o, const std::string& verb) {
  if (o.config.empty()) fail(ErrorKind::Config, verb + " needs --config PATH");
  if (!fs::exists(o.config)) fail(ErrorKind::Config, "config file not found: " + o.config);
  ExperimentConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output = o.out;
  if (o.seed_set) cfg.seed = o.seed;
  if (!cfg.scene.ball)
    std::cerr << "warning: scene has no reference ball; phase recovery is not possible\n";
  return cfg;
}

void report(const StageOutcome& s) {
  std::cout << to_string(s.stage) << ": " << (s.skipped ? "up to date" : "done");
  if (!s.skipped) std::cout << " in " << s.seconds << " s";
  std::cout << '\n';
  for (const auto& f : s.files) std::cout << "  " << f << '\n';
  for (const auto& n : s.notes) std::cout << "  note: " << n << '\n';
}

int run_stage_verb(const Options& o, Stage stage) {
  const ExperimentConfig cfg = load(o, to_string(stage));
  if (!cfg.has_stage(stage))
    fail(ErrorKind::Config, "stage '" + to_string(stage) + "' is not listed in the config's stages");
  std::cout << "config_hash " << cfg.hash() << '\n';
  report(run_stage(cfg, stage));
  return 0;
}

int run_all(const Options& o) {
  const ExperimentConfig cfg = load(o, "run");
  std::cout << "config_hash " << cfg.hash() << '\n';
  for (Stage s : cfg.stages) report(run_stage(cfg, s));
  return 0;
}

int validate(const Options& o) {
  const SuiteReport r = run_validation(o.suite);
  std::cout << r.table();
  std::cerr << r.summary();
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path base = fs::path(o.out) / ("validate_" + o.suite);
    std::ofstream(base.string() + ".tsv") << r.table();
    std::ofstream(base.string() + ".json") << r.to_json().dump(2) << '\n';
  }
  return r.passed() ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phaseless inverse scattering experiments"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)");
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--seed", o.seed, "noise seed (overrides the config)")
        ->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--threads", o.threads, "worker threads, 0 for the default")
        ->check(CLI::NonNegativeNumber);
  };

  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {{"forward", "compute the far-field matrix"},
                        {"phaseless", "synthesize phaseless data from the far field"},
                        {"recover", "recover the far field from phaseless data"},
                        {"invert", "linear sampling indicator"},
                        {"run", "all stages listed in the config, in order"},
                        {"validate", "invariant and distinctness checks"}};
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_common(sub);
    if (std::string(v.name) == "validate")
      sub->add_option("--suite", o.suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (o.threads > 0) {
    omp_set_num_threads(o.threads);
    Eigen::setNbThreads(o.threads);
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "forward") return run_stage_verb(o, Stage::Forward);
    if (verb == "phaseless") return run_stage_verb(o, Stage::Phaseless);
    if (verb == "recover") return run_stage_verb(o, Stage::Recover);
    if (verb == "invert") return run_stage_verb(o, Stage::Invert);
    if (verb == "run") return run_all(o);
    return validate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
