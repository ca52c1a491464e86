// samlab command line: run / sweep / audit / presets.
//
// Exit codes: 0 success, 1 certificate or audit failure, 2 invalid config,
// 3 run ended with a nonfinite iterate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "samlab/samlab.hpp"

namespace {

struct Source {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool no_svg = false;
};

void add_source_options(CLI::App* cmd, Source& src) {
  cmd->add_option("--config", src.config_path, "config file");
  cmd->add_option("--preset", src.preset, "built-in preset name (see `samlab presets`)");
  cmd->add_option("--seed", src.seed, "override optimizer.seed");
  cmd->add_option("--out", src.out, "output directory (default: $SAMLAB_OUT or ./samlab_out)");
}

samlab::ExperimentConfig load(const Source& src) {
  if (src.config_path.empty() == src.preset.empty())
    throw samlab::ConfigError("", "pass exactly one of --config or --preset");
  samlab::ExperimentConfig cfg;
  if (!src.preset.empty()) {
    cfg = samlab::load_preset(src.preset);
  } else {
    std::ifstream in(src.config_path);
    if (!in) throw samlab::ConfigError("", "cannot read " + src.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = samlab::parse_config(buf.str());
  }
  if (src.seed) cfg.optimizer.seed = *src.seed;
  return cfg;
}

std::optional<std::string> out_override(const Source& src) {
  if (src.out.empty()) return std::nullopt;
  return src.out;
}

int cmd_run(const Source& src) {
  const auto cfg = load(src);
  const auto result = samlab::run_experiment(cfg);
  const auto dir = samlab::output_dir(cfg, out_override(src));
  samlab::write_run_artifacts(result, cfg, dir, !src.no_svg);
  std::cout << samlab::run_summary_text(result, cfg);
  std::cout << "artifacts in " << dir.string() << "\n";
  if (result.trace.terminated == samlab::Termination::Nonfinite) {
    std::cerr << "run ended with a nonfinite iterate at k = " << result.trace.final_record().k << "\n";
    return 3;
  }
  if (!samlab::certificates_passed(result)) return 1;
  if (result.audit && !result.audit->all_passed()) return 1;
  return 0;
}

int cmd_sweep(const Source& src, int parallel) {
  const auto cfg = load(src);
  const auto cells = samlab::expand_sweep(cfg);
  const auto rows = samlab::run_sweep(cells, parallel);
  const auto csv = samlab::sweep_csv(rows);
  const auto dir = samlab::output_dir(cfg, out_override(src));
  std::filesystem::create_directories(dir);
  samlab::write_file(dir / "summary.csv", csv);
  std::cout << csv;
  std::cout << rows.size() << " cells, summary in " << (dir / "summary.csv").string() << "\n";
  for (const auto& r : rows)
    if (r.status == "nonfinite") return 3;
  return 0;
}

int cmd_audit(const Source& src, const std::string& theorem, std::int64_t horizon) {
  const auto cfg = load(src);
  std::optional<samlab::TheoremTag> tag = cfg.run.audit;
  if (!theorem.empty()) {
    tag = samlab::parse_theorem(theorem);
    if (!tag) throw samlab::ConfigError("--theorem", "expected T1, C1, T3 or T4");
  }
  if (!tag) throw samlab::ConfigError("run.audit", "no theorem given; pass --theorem");
  const auto report = samlab::run_audit(cfg, *tag, horizon);
  std::cout << samlab::audit_text(report);
  return report.all_passed() ? 0 : 1;
}

int cmd_presets(const std::string& show) {
  if (!show.empty()) {
    const auto* p = samlab::find_preset(show);
    if (!p) throw samlab::ConfigError("preset", "unknown preset '" + show + "'");
    std::cout << p->text;
    return 0;
  }
  for (const auto& p : samlab::kPresets) std::printf("%-16s %s\n", std::string(p.name).c_str(), std::string(p.summary).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"samlab: SAM-family optimizers, convergence diagnostics and counterexamples"};
  app.require_subcommand(1);

  Source run_src, sweep_src, audit_src;
  int parallel = 1;
  std::string theorem, show;
  std::int64_t audit_horizon = samlab::kDefaultHorizon;

  auto* run = app.add_subcommand("run", "run one experiment and write trace/report artifacts");
  add_source_options(run, run_src);
  run->add_flag("--no-svg", run_src.no_svg, "skip trace.svg");

  auto* sweep = app.add_subcommand("sweep", "run every cell of the config's [sweep] section");
  add_source_options(sweep, sweep_src);
  sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-svg", sweep_src.no_svg, "accepted for symmetry; sweeps write no plots");

  auto* audit = app.add_subcommand("audit", "check the stepsize/radius hypotheses of a theorem");
  add_source_options(audit, audit_src);
  audit->add_option("--theorem", theorem, "T1, C1, T3 or T4 (default: run.audit)");
  audit->add_option("--horizon", audit_horizon, "partial-sum horizon K")->check(CLI::PositiveNumber);

  auto* presets = app.add_subcommand("presets", "list built-in presets");
  presets->add_option("--show", show, "print one preset's config text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_src);
    if (sweep->parsed()) return cmd_sweep(sweep_src, parallel);
    if (audit->parsed()) return cmd_audit(audit_src, theorem, audit_horizon);
    return cmd_presets(show);
  } catch (const samlab::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.message() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
