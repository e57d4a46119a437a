#include "qwork/config.hpp"
#include "qwork/output.hpp"
#include "qwork/parallel.hpp"
#include "qwork/scenarios.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>

namespace {

struct Options {
  std::string config;
  std::string out = "runs";
  int jobs = qwork::default_jobs();
  int checkpoints = 0;
  bool strict = false;
  std::string run_id;
  bool quiet = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Run configuration (JSON, or a manifest.json to replay)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output root directory")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads for independent runs")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--checkpoints", o.checkpoints, "Override the checkpoint count")->check(CLI::PositiveNumber);
  sub->add_flag("--strict", o.strict, "Treat warnings as failures");
  sub->add_option("--run-id", o.run_id, "Output subdirectory name (default: UTC timestamp)");
  sub->add_flag("-q,--quiet", o.quiet, "Suppress progress messages");
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void print_checks(const qwork::RunOutput& out, const std::string& prefix = "") {
  for (const auto& c : out.checks) {
    std::cout << (c.pass ? "ok    " : (c.advisory ? "warn  " : "FAIL  ")) << prefix << c.name << " = "
              << qwork::format_number(c.value) << " (limit " << qwork::format_number(c.threshold) << ")\n";
  }
  for (const auto& w : out.warnings) std::cout << "warn  " << prefix << w << "\n";
  if (!out.error.empty()) std::cout << "error " << prefix << out.error << "\n";
  for (const auto& child : out.children) print_checks(child, prefix + child.label + "/");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum work agent simulations"};
  app.set_version_flag("--version", qwork::tool_version());
  app.require_subcommand(1);
  Options opts;
  const qwork::Scenario all[] = {qwork::Scenario::design,       qwork::Scenario::simulate,
                                 qwork::Scenario::sweep_x0,     qwork::Scenario::sweep_omega,
                                 qwork::Scenario::interference, qwork::Scenario::fidelity,
                                 qwork::Scenario::ideal_agent};
  for (qwork::Scenario s : all) add_common(app.add_subcommand(std::string(qwork::to_string(s))), opts);
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const qwork::Scenario scenario = qwork::parse_scenario(name);

  qwork::RunConfig config;
  try {
    config = qwork::load_config(opts.config);
  } catch (const std::exception& e) {
    std::cerr << "qwork: " << e.what() << "\n";
    return 2;
  }

  std::mutex log_mu;
  qwork::RunContext ctx;
  ctx.jobs = opts.jobs;
  if (opts.checkpoints > 0) ctx.checkpoints = opts.checkpoints;
  if (!opts.quiet) {
    ctx.log = [&](const std::string& msg) {
      const std::lock_guard lock(log_mu);
      std::cerr << "[" << name << "] " << msg << "\n";
    };
  }

  qwork::ManifestInfo info;
  info.command = join_args(argc, argv);
  info.started_utc = qwork::utc_timestamp();
  info.strict = opts.strict;
  qwork::RunConfig echoed = config;
  if (ctx.checkpoints) echoed.numerics.checkpoints = *ctx.checkpoints;
  info.config_json = qwork::to_json(echoed);

  const auto t0 = std::chrono::steady_clock::now();
  const qwork::RunOutput out = qwork::run_scenario(scenario, config, ctx);
  info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto dir = qwork::run_directory(opts.out, config.name, opts.run_id.empty() ? info.started_utc : opts.run_id);
  try {
    qwork::write_run(dir, out, info);
  } catch (const std::exception& e) {
    std::cerr << "qwork: cannot write output: " << e.what() << "\n";
    return 2;
  }
  print_checks(out);
  const int status = qwork::exit_status(out, opts.strict);
  std::cout << (status == 0 ? "PASS " : "FAIL ") << name << " -> " << dir.string() << "\n";
  return status;
}
