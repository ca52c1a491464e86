#pragma once

// Turns an ExperimentConfig into runs, certificates, audits and on-disk
// artifacts (CSV tables and SVG plots), and runs parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "samlab/analysis.hpp"
#include "samlab/config.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/problems.hpp"

namespace samlab {

/// Everything a config resolves to before running.
struct ResolvedExperiment {
  Problem problem;
  OptimizerSpec spec;
  Vector x1;
  std::int64_t horizon = 0;
  int thin = 0;
};

namespace detail {

inline Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, const std::string& key) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw ConfigError(key, "matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline Problem build_problem(const ProblemSection& ps) {
  try {
    if (ps.kind == "square-1d") return make_square_1d();

    Matrix a;
    Vector b;
    if (ps.generator == "inline") {
      if (ps.A.empty()) throw ConfigError("problem.A", "required for generator = inline");
      a = detail::rows_to_matrix(ps.A, "problem.A");
      if (ps.b.empty()) {
        b = Vector::Zero(a.rows());
      } else {
        b = detail::to_vector(ps.b);
        if (b.size() != a.rows()) throw ConfigError("problem.b", "length does not match A");
      }
    } else {
      Xoshiro256 rng(ps.seed);
      if (ps.generator == "spd") {
        if (ps.kind != "quadratic") throw ConfigError("problem.generator", "spd applies to quadratic problems");
        a = random_spd_matrix(ps.dim, ps.eig_min, ps.eig_max, rng);
        b = rng.normal_vector(ps.dim);
      } else {
        auto sys = random_invertible_system(ps.dim, rng);
        a = std::move(sys.first);
        b = std::move(sys.second);
        if (ps.kind == "quadratic") {
          a = a.transpose() * a;
          a = 0.5 * (a + a.transpose());
        }
      }
    }
    if (ps.kind == "quadratic") return make_quadratic(a, b);
    return make_log_quadratic(a, b);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
}

inline Vector build_initial_point(const InitialPoint& ip, const Problem& p) {
  const auto L = p.lipschitz_L;
  const int n = p.dim;
  Vector base = Vector::Zero(n);
  if (ip.base == InitialPoint::Base::Minimizer) {
    if (!p.minimizer) throw ConfigError("run.x1", "problem has no known minimizer");
    base = *p.minimizer;
  }
  std::vector<double> c;
  try {
    for (const auto& e : ip.coords) c.push_back(e.resolve(L, n));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("run.x1", e.what());
  }
  if (ip.base == InitialPoint::Base::Explicit) {
    if (static_cast<int>(c.size()) != n) throw ConfigError("run.x1", "expected " + std::to_string(n) + " coordinates");
    return detail::to_vector(c);
  }
  if (c.empty()) return base;
  if (c.size() == 1) return base + Vector::Constant(n, c[0]);
  if (static_cast<int>(c.size()) != n) throw ConfigError("run.x1", "offset must be a scalar or have " + std::to_string(n) + " entries");
  return base + detail::to_vector(c);
}

inline OptimizerSpec build_optimizer_spec(const OptimizerSection& os, const Problem& p) {
  OptimizerSpec s;
  s.variant = os.variant;
  auto resolve = [&](const ScheduleTemplate& t, const char* key, ScheduleRole role) {
    try {
      return t.resolve(p.lipschitz_L, p.dim).with_role(role);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  };
  s.stepsize = resolve(os.stepsize, "optimizer.stepsize", ScheduleRole::Stepsize);
  if (os.radius) s.radius = resolve(*os.radius, "optimizer.radius", ScheduleRole::Radius);
  if (os.error) s.error = resolve(*os.error, "optimizer.error", ScheduleRole::Error);
  s.nu = os.nu;
  s.theta = os.theta;
  s.sigma = os.sigma;
  s.lambda = os.lambda;
  s.rng_seed = os.seed;
  s.grad_zero_tol = os.grad_zero_tol;
  s.igd_mode = os.igd_mode;
  try {
    validate(s);
  } catch (const SpecError& e) {
    throw ConfigError(e.key(), e.message());
  }
  return s;
}

inline ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  ResolvedExperiment r{build_problem(cfg.problem), {}, {}, 0, cfg.run.thin};
  r.spec = build_optimizer_spec(cfg.optimizer, r.problem);
  r.x1 = build_initial_point(cfg.run.x1, r.problem);
  const double h = cfg.run.horizon.resolve(std::nullopt, r.problem.dim);
  if (!(h >= 1.0) || h != std::floor(h) || h > 1e9) throw ConfigError("run.horizon", "must resolve to a positive integer");
  r.horizon = static_cast<std::int64_t>(h);
  if (!(cfg.run.tol_grad > 0.0)) throw ConfigError("run.tol_grad", "must be positive");
  if (!(cfg.run.tol_cauchy > 0.0)) throw ConfigError("run.tol_cauchy", "must be positive");
  if (!(cfg.run.fit_window > 0.0 && cfg.run.fit_window <= 1.0)) throw ConfigError("run.fit_window", "must lie in (0, 1]");
  return r;
}

// ---------------------------------------------------------------------------
// CSV and SVG

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kTraceColumns = "k,f,grad_norm,t_k,rho_or_eps,step_norm,inexactness";
inline const char* kReportColumns =
    "liminf_grad,final_grad_window,f_limit_gap,iterate_cauchy,dist_to_minimizer,"
    "verdict_1,verdict_2,verdict_3,verdict_4,verdict_5";

inline std::string trace_csv(const Trace& trace) {
  std::string out = kTraceColumns;
  out += '\n';
  for (const auto& r : trace.records) {
    out += std::to_string(r.k);
    for (double v : {r.f, r.grad_norm, r.t_k, r.rho_or_eps, r.step_norm, r.inexactness}) {
      out += ',';
      out += csv_number(v);
    }
    out += '\n';
  }
  return out;
}

inline std::string report_csv(const ConvergenceReport& r) {
  std::string out = kReportColumns;
  out += '\n';
  out += csv_number(r.liminf_grad) + ',' + csv_number(r.final_grad_window) + ',' + csv_number(r.f_limit_gap) + ',' +
         csv_number(r.iterate_cauchy) + ',' + (r.dist_to_minimizer ? csv_number(*r.dist_to_minimizer) : std::string());
  for (bool v : r.verdicts) out += v ? ",true" : ",false";
  out += '\n';
  return out;
}

inline std::string report_text(const ConvergenceReport& r, double tol_grad, double tol_cauchy) {
  static const char* names[] = {"liminf ||grad f|| = 0", "stationary accumulation points", "||grad f|| -> 0",
                                "f(x^k) converges", "iterates converge"};
  std::ostringstream s;
  s << "liminf_grad        " << csv_number(r.liminf_grad) << "\n";
  s << "final_grad_window  " << csv_number(r.final_grad_window) << "\n";
  s << "f_limit_gap        " << csv_number(r.f_limit_gap) << "\n";
  s << "iterate_cauchy     " << csv_number(r.iterate_cauchy) << "\n";
  if (r.dist_to_minimizer) s << "dist_to_minimizer  " << csv_number(*r.dist_to_minimizer) << "\n";
  s << "tolerances         grad " << csv_number(tol_grad) << ", cauchy " << csv_number(tol_cauchy) << "\n";
  for (int i = 0; i < 5; ++i) s << "(" << i + 1 << ") " << names[i] << ": " << (r.verdicts[static_cast<std::size_t>(i)] ? "yes" : "no") << "\n";
  return s.str();
}

/// Log10 plot of ||grad f|| and the f-gap against k on an 800x600 canvas.
inline std::string trace_svg(const Trace& trace, const Problem& problem) {
  const double f_ref = [&] {
    if (problem.optimal_value) return *problem.optimal_value;
    double m = trace.records.front().f;
    for (const auto& r : trace.records) m = std::min(m, r.f);
    return m;
  }();
  struct Series {
    std::vector<std::pair<double, double>> pts;
    const char* color;
    const char* label;
  };
  Series grad{{}, "#1f77b4", "log10 ||grad f||"};
  Series gap{{}, "#d62728", "log10 (f - f*)"};
  for (const auto& r : trace.records) {
    if (r.grad_norm > 0.0 && std::isfinite(r.grad_norm)) grad.pts.emplace_back(static_cast<double>(r.k), std::log10(r.grad_norm));
    const double g = r.f - f_ref;
    if (g > 0.0 && std::isfinite(g)) gap.pts.emplace_back(static_cast<double>(r.k), std::log10(g));
  }
  double kmin = static_cast<double>(trace.records.front().k), kmax = static_cast<double>(trace.records.back().k);
  if (kmax <= kmin) kmax = kmin + 1.0;
  double ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto* s : {&grad, &gap})
    for (const auto& [k, y] : s->pts) {
      if (first) {
        ymin = ymax = y;
        first = false;
      }
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double left = 70, right = 780, top = 40, bottom = 560;
  auto px = [&](double k) { return left + (k - kmin) / (kmax - kmin) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  s << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << trace.problem_name
    << " / " << variant_name(trace.spec.variant) << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left << "\" y=\"580\" font-family=\"sans-serif\" font-size=\"12\">k = " << kmin << "</text>\n";
  s << "<text x=\"" << right << "\" y=\"580\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">k = " << kmax << "</text>\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", ymax);
  s << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", ymin);
  s << "<text x=\"" << left - 6 << "\" y=\"" << bottom << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << buf << "</text>\n";
  int legend = 0;
  for (const auto* series : {&grad, &gap}) {
    if (series->pts.empty()) continue;
    s << "<polyline fill=\"none\" stroke=\"" << series->color << "\" stroke-width=\"1.5\" points=\"";
    // At most ~2000 vertices per curve.
    const std::size_t stride = std::max<std::size_t>(1, series->pts.size() / 2000);
    for (std::size_t i = 0; i < series->pts.size(); i += stride) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(series->pts[i].first), py(series->pts[i].second));
      s << buf;
    }
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(series->pts.back().first), py(series->pts.back().second));
    s << buf << "\"/>\n";
    s << "<text x=\"" << right - 150 << "\" y=\"" << top + 16 + 16 * legend << "\" fill=\"" << series->color
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << series->label << "</text>\n";
    ++legend;
  }
  s << "</svg>\n";
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Single run

struct RunResult {
  ResolvedExperiment resolved;
  Trace trace;
  std::optional<ConvergenceReport> report;  // absent when the run ended nonfinite
  std::optional<RateFit> fit;
  std::optional<Example1Certificate> example1;
  std::optional<double> example1_gd_final_dist;
  std::optional<Example2Certificate> example2;
  std::optional<AuditReport> audit;
  std::optional<std::string> fit_error;
};

inline std::string example1_csv(const Example1Certificate& c, std::optional<double> gd_dist) {
  std::string out =
      "lambda_min,lambda_max,t_lower,t_upper,trap_radius,iterations,min_dist,max_dist,min_lower_bound,"
      "min_lower_bound_slack,gd_final_dist,passed\n";
  out += csv_number(c.lambda_min) + ',' + csv_number(c.lambda_max) + ',' + csv_number(c.t_lower) + ',' +
         csv_number(c.t_upper) + ',' + csv_number(c.trap_radius) + ',' + std::to_string(c.iterations) + ',' +
         csv_number(c.min_dist) + ',' + csv_number(c.max_dist) + ',' + csv_number(c.min_lower_bound) + ',' +
         csv_number(c.min_lower_bound_slack) + ',' + (gd_dist ? csv_number(*gd_dist) : std::string()) + ',' +
         (c.passed ? "true" : "false") + '\n';
  return out;
}

inline std::string example2_csv(const Example2Certificate& c) {
  std::string out = "horizon,final_x,final_gap,product_bound,max_recursion_error,min_excess,limit_gradient,passed\n";
  out += std::to_string(c.horizon) + ',' + csv_number(c.final_x) + ',' + csv_number(c.final_gap) + ',' +
         csv_number(c.product_bound) + ',' + csv_number(c.max_recursion_error) + ',' + csv_number(c.min_excess) + ',' +
         csv_number(c.limit_gradient) + ',' + (c.passed ? "true" : "false") + '\n';
  return out;
}

inline std::string audit_text(const AuditReport& a) {
  std::ostringstream s;
  s << "theorem " << theorem_name(a.theorem) << ", horizon " << a.horizon << "\n";
  for (const auto& h : a.hypotheses) {
    char line[256];
    std::snprintf(line, sizeof line, "%-40s %-4s value %-14.6g threshold %-12.6g %s\n", h.name.c_str(),
                  h.passed ? "PASS" : "FAIL", h.value, h.threshold, h.detail.c_str());
    s << line;
  }
  s << (a.all_passed() ? "all hypotheses pass\n" : "some hypotheses fail\n");
  return s.str();
}

inline AuditReport run_audit(const ExperimentConfig& cfg, TheoremTag theorem, std::int64_t horizon = kDefaultHorizon) {
  const ResolvedExperiment r = resolve(cfg);
  try {
    return audit_theorem_conditions(r.spec, r.problem, theorem, horizon);
  } catch (const MissingMetadata& e) {
    throw ConfigError("optimizer", e.what());
  }
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult out{resolve(cfg), {}, {}, {}, {}, {}, {}, {}, {}};
  const auto& rx = out.resolved;
  out.trace = run(rx.problem, rx.spec, rx.x1, rx.horizon, rx.thin);
  if (out.trace.terminated != Termination::Nonfinite) {
    out.report = assess_convergence(out.trace, rx.problem, cfg.run.tol_grad, cfg.run.tol_cauchy);
    if (cfg.run.fit) {
      try {
        out.fit = fit_rate(out.trace, rx.problem, *cfg.run.fit, cfg.run.fit_model, cfg.run.fit_window);
      } catch (const AnalysisError& e) {
        out.fit_error = e.what();
      }
    }
  }

  if (cfg.run.certificate == "example1") {
    if (cfg.problem.kind != "quadratic") throw ConfigError("run.certificate", "example1 needs a quadratic problem");
    if (rx.spec.stepsize.family != ScheduleFamily::Constant || !rx.spec.radius ||
        rx.spec.radius->family != ScheduleFamily::Constant)
      throw ConfigError("run.certificate", "example1 needs constant stepsize and radius");
    const double t = rx.spec.stepsize.scale;
    const double rho = rx.spec.radius->scale;
    // Rebuild A and b from the problem: grad f(x) = A x - b.
    const int n = rx.problem.dim;
    const Vector b = -rx.problem.grad(Vector::Zero(n));
    Matrix a(n, n);
    for (int j = 0; j < n; ++j) a.col(j) = rx.problem.grad(Vector::Unit(n, j)) + b;
    try {
      out.example1 = certify_example1(a, b, t, rho, rx.x1, rx.horizon);
    } catch (const ParameterOutsideWindow& e) {
      throw ConfigError("run.certificate", e.what());
    }
    OptimizerSpec gd = rx.spec;
    gd.variant = Variant::GD;
    const Trace gd_trace = run(rx.problem, gd, rx.x1, rx.horizon, rx.thin);
    out.example1_gd_final_dist = (gd_trace.final_x() - *rx.problem.minimizer).norm();
  } else if (cfg.run.certificate == "example2") {
    if (cfg.problem.kind != "square-1d") throw ConfigError("run.certificate", "example2 needs the square-1d problem");
    if (!rx.spec.radius || rx.spec.radius->family != ScheduleFamily::Constant)
      throw ConfigError("run.certificate", "example2 needs a constant radius");
    try {
      out.example2 = certify_example2(rx.spec.radius->scale, rx.x1[0], rx.spec.stepsize, rx.horizon);
    } catch (const AnalysisError& e) {
      throw ConfigError("run.certificate", e.what());
    }
  }
  if (cfg.run.audit) out.audit = run_audit(cfg, *cfg.run.audit);
  return out;
}

inline bool certificates_passed(const RunResult& r) {
  if (r.example1 && !(r.example1->passed && r.example1_gd_final_dist && *r.example1_gd_final_dist <= 1e-8)) return false;
  if (r.example2 && !r.example2->passed) return false;
  return true;
}

inline std::filesystem::path output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& cli_override) {
  if (cli_override && !cli_override->empty()) return *cli_override;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  if (const char* env = std::getenv("SAMLAB_OUT"); env && *env) return env;
  return "samlab_out";
}

inline std::string run_summary_text(const RunResult& r, const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "problem " << r.trace.problem_name << " (n = " << r.resolved.problem.dim << "), variant "
    << variant_name(r.trace.spec.variant) << ", " << r.trace.records.size() << " records, terminated "
    << termination_name(r.trace.terminated) << "\n";
  if (r.report) s << report_text(*r.report, cfg.run.tol_grad, cfg.run.tol_cauchy);
  if (r.fit) {
    s << "rate fit (" << rate_model_name(r.fit->model) << ")";
    if (r.fit->exact) {
      s << ": residual reached zero, no fit\n";
    } else {
      s << ": slope " << csv_number(r.fit->slope) << ", R^2 " << csv_number(r.fit->r_squared);
      if (r.fit->implied_q) s << ", implied q " << csv_number(*r.fit->implied_q);
      s << "\n";
    }
  }
  if (r.fit_error) s << "rate fit unavailable: " << *r.fit_error << "\n";
  if (r.example1) {
    s << "example1 certificate: " << (r.example1->passed ? "PASS" : "FAIL") << ", trap radius "
      << csv_number(r.example1->trap_radius) << ", min distance " << csv_number(r.example1->min_dist)
      << ", max distance " << csv_number(r.example1->max_dist) << "\n";
    if (r.example1_gd_final_dist) s << "gd contrast: final distance " << csv_number(*r.example1_gd_final_dist) << "\n";
  }
  if (r.example2) {
    s << "example2 certificate: " << (r.example2->passed ? "PASS" : "FAIL") << ", |x^K - rho| "
      << csv_number(r.example2->final_gap) << ", |f'(rho)| " << csv_number(r.example2->limit_gradient) << "\n";
  }
  if (r.audit) s << audit_text(*r.audit);
  return s.str();
}

/// Writes trace.csv, report.csv, report.txt, certificate.csv and trace.svg
/// as configured.
inline void write_run_artifacts(const RunResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                bool svg) {
  std::filesystem::create_directories(dir);
  if (cfg.output.csv) {
    write_file(dir / "trace.csv", trace_csv(r.trace));
    if (r.report) write_file(dir / "report.csv", report_csv(*r.report));
    if (r.example1) write_file(dir / "certificate.csv", example1_csv(*r.example1, r.example1_gd_final_dist));
    if (r.example2) write_file(dir / "certificate.csv", example2_csv(*r.example2));
  }
  write_file(dir / "report.txt", run_summary_text(r, cfg));
  if (svg && cfg.output.svg) write_file(dir / "trace.svg", trace_svg(r.trace, r.resolved.problem));
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCellConfig {
  std::string label;
  ExperimentConfig config;
};

/// Cartesian product of the sweep axes, first axis outermost.  With no
/// axes the base config is the single cell.
inline std::vector<SweepCellConfig> expand_sweep(const ExperimentConfig& base) {
  std::vector<SweepCellConfig> cells{{"", base}};
  cells.front().config.sweep.clear();
  for (const auto& axis : base.sweep) {
    std::vector<SweepCellConfig> next;
    for (const auto& partial : cells)
      for (const auto& cell : axis.cells) {
        SweepCellConfig c = partial;
        c.label = c.label.empty() ? cell.label : c.label + "/" + cell.label;
        for (const auto& [k, v] : cell.overrides) apply_override(c.config, k, v);
        next.push_back(std::move(c));
      }
    cells = std::move(next);
  }
  return cells;
}

struct SweepRow {
  std::size_t index = 0;
  std::string label;
  std::string status = "ok";
  std::optional<double> final_f;
  std::optional<double> final_grad_norm;
  std::optional<double> dist_to_minimizer;
  std::optional<double> rate_slope;
};

inline SweepRow run_sweep_cell(std::size_t index, const SweepCellConfig& cell) {
  SweepRow row;
  row.index = index;
  row.label = cell.label;
  try {
    const ResolvedExperiment rx = resolve(cell.config);
    const Trace trace = run(rx.problem, rx.spec, rx.x1, rx.horizon, rx.thin);
    const auto& last = trace.final_record();
    row.final_f = last.f;
    row.final_grad_norm = last.grad_norm;
    if (rx.problem.minimizer) row.dist_to_minimizer = (trace.final_x() - *rx.problem.minimizer).norm();
    if (trace.terminated == Termination::Nonfinite) {
      row.status = "nonfinite";
      return row;
    }
    const RateReference ref = cell.config.run.fit.value_or(RateReference::Grad);
    try {
      const RateFit fit = fit_rate(trace, rx.problem, ref, cell.config.run.fit_model, cell.config.run.fit_window);
      if (!fit.exact) row.rate_slope = fit.slope;
    } catch (const AnalysisError&) {
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

/// Runs every cell with up to `parallel` worker threads.  Rows come back in
/// cell order regardless of completion order.
inline std::vector<SweepRow> run_sweep(const std::vector<SweepCellConfig>& cells, int parallel) {
  std::vector<SweepRow> rows(cells.size());
  const auto workers = static_cast<std::size_t>(std::clamp<int>(parallel, 1, 256));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) rows[i] = run_sweep_cell(i, cells[i]);
  };
  if (workers == 1 || cells.size() <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, cells.size()); ++w) pool.emplace_back(work);
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
  std::string out = "cell,label,status,final_f,final_grad_norm,dist_to_minimizer,rate_slope\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += std::to_string(r.index) + ',' + r.label + ',' + status + ',' + opt(r.final_f) + ',' + opt(r.final_grad_norm) +
           ',' + opt(r.dist_to_minimizer) + ',' + opt(r.rate_slope) + '\n';
  }
  return out;
}

}  // namespace samlab
