#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "samlab/samlab.hpp"

using namespace samlab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string config_error_key(const std::string& text) {
  try {
    const auto cfg = parse_config(text);
    (void)resolve(cfg);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmall = R"(
[problem]
kind = quadratic
generator = inline
A = 2, 0; 0, 1
b = 1, 1

[optimizer]
variant = sam
stepsize = harmonic(0.5/L)
radius = constant(0.01)

[run]
x1 = 1, -1
horizon = 200
)";

}  // namespace

TEST_CASE("scalar expressions and schedule templates") {
  const auto e = parse_scalar_expr("0.5/L*n/n");
  REQUIRE(e);
  CHECK(e->l_power == -1);
  CHECK(e->n_power == 0);
  CHECK_THAT(e->resolve(4.0, 3), WithinAbs(0.125, 1e-16));
  CHECK_FALSE(parse_scalar_expr("0.5/x"));
  CHECK_FALSE(parse_scalar_expr(""));
  CHECK(parse_scalar_expr("1e-3")->value == 1e-3);
  CHECK_THROWS(e->resolve(std::nullopt, 3));

  const auto t = parse_schedule_template("powerlaw(0.1/n, 0.5001)");
  REQUIRE(t);
  CHECK(format_schedule_template(*t) == "powerlaw(0.1/n, 0.5001)");
  const auto spec = t->resolve(std::nullopt, 10);
  CHECK_THAT(spec.scale, WithinAbs(0.01, 1e-17));
  CHECK_FALSE(parse_schedule_template("cosine(1)"));
  CHECK_FALSE(parse_schedule_template("harmonic()"));
  CHECK_THROWS(parse_schedule_template("harmonic(1, 2, 3)")->resolve(1.0, 1));
}

TEST_CASE("initial points") {
  const auto p = parse_initial_point("minimizer + 0.1/n/n");
  REQUIRE(p);
  CHECK(p->base == InitialPoint::Base::Minimizer);
  CHECK(format_initial_point(*p) == "minimizer + 0.1/n/n");
  CHECK(parse_initial_point("1, 2, 3")->coords.size() == 3);
  CHECK(parse_initial_point("zeros")->base == InitialPoint::Base::Zeros);
  CHECK_FALSE(parse_initial_point("minimizer - 1"));
  CHECK_FALSE(parse_initial_point("1, x"));
}

TEST_CASE("config errors name the offending key") {
  const std::string no_radius = R"(
[problem]
kind = quadratic
A = 1, 0; 0, 1
[optimizer]
variant = sam
stepsize = constant(0.1)
[run]
x1 = 1, 1
)";
  CHECK(config_error_key(no_radius) == "optimizer.radius");
  CHECK(config_error_key("[problem]\nkind = cubic\n") == "problem.kind");
  CHECK(config_error_key("[problem]\ncolour = red\n") == "problem.colour");
  CHECK(config_error_key("[nonsense]\n") == "nonsense");
  CHECK(config_error_key("[run]\nhorizon = 10\nhorizon = 20\n") == "run.horizon");
  CHECK(config_error_key("[run]\nhorizon = 10*L\n") == "run.horizon");
  CHECK(config_error_key("[optimizer]\nvariant = adam\n") == "optimizer.variant");
  CHECK(config_error_key("[problem]\nkind = square-1d\n[optimizer]\nvariant = igdr\nnu = 1.5\n[run]\nx1 = 1\n") == "optimizer.nu");
  CHECK(config_error_key("[sweep]\naxis.a = optimizer.bogus=1\n") == "optimizer.bogus");
  CHECK(config_error_key("[problem]\nkind = quadratic\nA = 1, 2; 2, 1\n[run]\nx1 = 1, 1\n") == "problem");
  CHECK(config_error_key(std::string(kSmall) + "\n[output]\nsvg = maybe\n") == "output.svg");
  CHECK(config_error_key(std::string(kSmall)) == "<none>");
}

TEST_CASE("preset round trip and resolution") {
  for (const auto& preset : kPresets) {
    INFO(preset.name);
    const auto cfg = load_preset(preset.name);
    CHECK(cfg.preset == std::string(preset.name));
    const auto text = serialize_config(cfg);
    CHECK(parse_config(text) == cfg);
    CHECK(serialize_config(parse_config(text)) == text);
    for (const auto& cell : expand_sweep(cfg)) CHECK_NOTHROW(resolve(cell.config));
  }
  CHECK_THROWS_AS(load_preset("nope"), ConfigError);
}

TEST_CASE("resolve builds what the config says") {
  const auto rx = resolve(parse_config(kSmall));
  CHECK(rx.problem.dim == 2);
  CHECK(*rx.problem.lipschitz_L == 2.0);
  CHECK(rx.spec.stepsize.family == ScheduleFamily::Harmonic);
  CHECK(rx.spec.stepsize.scale == 0.25);
  CHECK(rx.x1 == Vector::LinSpaced(2, 1, -1));
  CHECK(rx.horizon == 200);

  const auto af = resolve(load_preset("appendixF"));
  CHECK(af.problem.dim == 20);
  CHECK(af.horizon == 2000);
  CHECK_THAT(af.spec.stepsize.scale, WithinAbs(0.005, 1e-18));
  CHECK(((af.x1 - *af.problem.minimizer).array() - 0.1 / 400).abs().maxCoeff() < 1e-15);
}

TEST_CASE("overrides") {
  auto cfg = parse_config(kSmall);
  apply_override(cfg, "optimizer.radius", "");
  CHECK_FALSE(cfg.optimizer.radius);
  apply_override(cfg, "optimizer.variant", "gd");
  CHECK_NOTHROW(resolve(cfg));
  CHECK_THROWS_AS(apply_override(cfg, "optimizer", "gd"), ConfigError);
}

TEST_CASE("CSV schema") {
  const auto cfg = parse_config(kSmall);
  const auto r = run_experiment(cfg);
  const auto trace = trace_csv(r.trace);
  CHECK(trace.substr(0, trace.find('\n')) == "k,f,grad_norm,t_k,rho_or_eps,step_norm,inexactness");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 202);
  const auto report = report_csv(*r.report);
  CHECK(report.substr(0, report.find('\n')) ==
        "liminf_grad,final_grad_window,f_limit_gap,iterate_cauchy,dist_to_minimizer,"
        "verdict_1,verdict_2,verdict_3,verdict_4,verdict_5");
  CHECK(std::count(report.begin(), report.end(), ',') == 18);
  const auto svg = trace_svg(r.trace, r.resolved.problem);
  CHECK_THAT(svg, ContainsSubstring("viewBox=\"0 0 800 600\""));
  CHECK_THAT(svg, ContainsSubstring("<polyline"));
}

TEST_CASE("artifacts and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "samlab_test_harness";
  std::filesystem::remove_all(dir);
  auto cfg = load_preset("example2");
  const auto a = run_experiment(cfg);
  write_run_artifacts(a, cfg, dir / "a", true);
  const auto b = run_experiment(cfg);
  write_run_artifacts(b, cfg, dir / "b", true);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "report.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "certificate.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "trace.svg"));
  CHECK(a.example2->final_gap <= 1e-3);
  CHECK(certificates_passed(a));

  // Randomized variant: same seed, same bytes; different seed, different bytes.
  auto igd = parse_config(kSmall);
  apply_override(igd, "optimizer.variant", "igd");
  apply_override(igd, "optimizer.error", "harmonic(0.1)");
  apply_override(igd, "optimizer.seed", "17");
  const auto t1 = trace_csv(run_experiment(igd).trace);
  CHECK(t1 == trace_csv(run_experiment(igd).trace));
  apply_override(igd, "optimizer.seed", "18");
  CHECK(t1 != trace_csv(run_experiment(igd).trace));
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep ordering and parallelism") {
  const auto cells = expand_sweep(load_preset("appendixF"));
  REQUIRE(cells.size() == 20);
  CHECK(cells[0].label == "n2/gd");
  CHECK(cells[19].label == "n100/sam-p0.001");
  const auto serial = sweep_csv(run_sweep(cells, 1));
  const auto parallel = sweep_csv(run_sweep(cells, 8));
  CHECK(serial == parallel);
  CHECK(std::count(serial.begin(), serial.end(), '\n') == 21);
  CHECK(serial.find("error") == std::string::npos);
}

TEST_CASE("single-cell sweep matches a plain run") {
  auto cfg = parse_config(kSmall);
  const auto cells = expand_sweep(cfg);
  REQUIRE(cells.size() == 1);
  const auto row = run_sweep(cells, 4).front();
  const auto r = run_experiment(cfg);
  CHECK(*row.final_f == r.trace.final_record().f);
  CHECK(*row.final_grad_norm == r.trace.final_record().grad_norm);
  CHECK(*row.dist_to_minimizer == *r.report->dist_to_minimizer);
}

TEST_CASE("failing sweep cells are recorded, not fatal") {
  auto cfg = parse_config(std::string(kSmall) + "\n[sweep]\nm.ok = optimizer.variant=gd\nm.bad = optimizer.variant=igd\n");
  const auto rows = run_sweep(expand_sweep(cfg), 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "ok");
  CHECK_THAT(rows[1].status, ContainsSubstring("optimizer.error"));
}

TEST_CASE("cli audit wrapper") {
  const auto rep = run_audit(load_preset("schedule-audit"), TheoremTag::C1);
  CHECK(rep.all_passed());
  const auto txt = audit_text(rep);
  CHECK_THAT(txt, ContainsSubstring("PASS"));
  CHECK_THAT(txt, ContainsSubstring("all hypotheses pass"));
}
