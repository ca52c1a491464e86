#pragma once

// Finite-horizon diagnostics: convergence-property verdicts, certificates for
// the two non-convergence counterexamples, log-linear rate fits and audits of
// the stepsize/radius hypotheses behind the convergence theorems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "samlab/optimizers.hpp"
#include "samlab/problems.hpp"
#include "samlab/schedules.hpp"

namespace samlab {

class AnalysisError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Convergence properties

/// Verdicts for the five fundamental properties:
///   (1) liminf ||grad f(x^k)|| = 0
///   (2) accumulation points are stationary
///   (3) ||grad f(x^k)|| -> 0
///   (4) f(x^k) -> f(xbar)
///   (5) x^k converges
/// Limits are approximated on the final 10% of the trace; liminf by the
/// running minimum over the whole trace.
struct ConvergenceReport {
  double liminf_grad = 0.0;
  double final_grad_window = 0.0;
  double f_limit_gap = 0.0;
  double iterate_cauchy = 0.0;
  std::optional<double> dist_to_minimizer;
  std::array<bool, 5> verdicts{};

  bool verdict(int property) const { return verdicts.at(static_cast<std::size_t>(property - 1)); }
};

inline constexpr double kFinalWindowFraction = 0.1;
inline constexpr std::size_t kMaxCauchyPoints = 2048;

/// Index of the first record in the final window (at least one record).
inline std::size_t final_window_start(std::size_t n, double fraction = kFinalWindowFraction) {
  const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  return n - std::min(len, n);
}

inline ConvergenceReport assess_convergence(const Trace& trace, const Problem& problem, double tol_grad,
                                            double tol_cauchy) {
  if (trace.records.empty()) throw AnalysisError("assess_convergence: empty trace");
  if (trace.terminated == Termination::Nonfinite) throw AnalysisError("assess_convergence: trace ended nonfinite");

  const auto& recs = trace.records;
  const std::size_t n = recs.size();
  const std::size_t w0 = final_window_start(n);
  ConvergenceReport r;

  r.liminf_grad = std::numeric_limits<double>::infinity();
  for (const auto& rec : recs) r.liminf_grad = std::min(r.liminf_grad, rec.grad_norm);
  for (std::size_t i = w0; i < n; ++i) r.final_grad_window = std::max(r.final_grad_window, recs[i].grad_norm);

  if (problem.optimal_value) {
    r.f_limit_gap = std::abs(recs.back().f - *problem.optimal_value);
  } else {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = w0; i < n; ++i) {
      lo = std::min(lo, recs[i].f);
      hi = std::max(hi, recs[i].f);
    }
    r.f_limit_gap = hi - lo;
  }

  // Diameter of the stored iterates inside the window.  Long windows are
  // subsampled evenly (endpoints kept) to bound the quadratic cost.
  const std::int64_t k_window = recs[w0].k;
  std::vector<const Vector*> pts;
  for (const auto& it : trace.iterates)
    if (it.k >= k_window) pts.push_back(&it.x);
  if (pts.size() > kMaxCauchyPoints) {
    std::vector<const Vector*> sub;
    sub.reserve(kMaxCauchyPoints);
    for (std::size_t i = 0; i < kMaxCauchyPoints; ++i)
      sub.push_back(pts[i * (pts.size() - 1) / (kMaxCauchyPoints - 1)]);
    pts.swap(sub);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) r.iterate_cauchy = std::max(r.iterate_cauchy, (*pts[i] - *pts[j]).norm());

  if (problem.minimizer && !trace.iterates.empty()) r.dist_to_minimizer = (trace.final_x() - *problem.minimizer).norm();

  const double gap_tol = problem.lipschitz_L ? std::max(1e-10, *problem.lipschitz_L * tol_grad * tol_grad)
                                             : std::max(1e-10, tol_grad * tol_grad);
  const bool p1 = r.liminf_grad <= tol_grad;
  const bool p3 = r.final_grad_window <= tol_grad;
  const bool p2 = p3 || recs.back().grad_norm <= tol_grad;
  const bool p4 = r.f_limit_gap <= gap_tol;
  const bool p5 = r.iterate_cauchy <= tol_cauchy && p3 && p4;
  r.verdicts = {p1, p2, p3, p4, p5};
  return r;
}

// ---------------------------------------------------------------------------
// Constant-stepsize SAM trap on a strongly convex quadratic

class ParameterOutsideWindow : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Example1Certificate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double t_lower = 0.0;       // 1/lambda_min - 1/(lambda_max + lambda_min)
  double t_upper = 0.0;       // 1/lambda_min
  double trap_radius = 0.0;   // t rho lambda_min / (1 - t lambda_min)
  std::int64_t iterations = 0;
  double min_dist = std::numeric_limits<double>::infinity();
  double max_dist = 0.0;
  double min_lower_bound_slack = std::numeric_limits<double>::infinity();  // dist_{k+1} - (t rho lmin - (1 - t lmin) dist_k)
  double min_lower_bound = std::numeric_limits<double>::infinity();        // min_k of that lower bound
  bool trapped = false;        // 0 < dist < trap_radius for every iterate
  bool lower_bound_holds = false;
  bool passed = false;
};

inline Example1Certificate certify_example1(const Matrix& a, const Vector& b, double t, double rho, const Vector& x1,
                                            std::int64_t iterations) {
  const QuadraticSpec spec(a, b);
  Example1Certificate c;
  c.lambda_min = spec.lambda_min();
  c.lambda_max = spec.lambda_max();
  c.t_lower = 1.0 / c.lambda_min - 1.0 / (c.lambda_max + c.lambda_min);
  c.t_upper = 1.0 / c.lambda_min;
  if (!(t > c.t_lower && t < c.t_upper)) throw ParameterOutsideWindow("example1: stepsize outside the trap window");
  if (!(rho > 0.0)) throw ParameterOutsideWindow("example1: radius must be positive");
  c.trap_radius = t * rho * c.lambda_min / (1.0 - t * c.lambda_min);

  const Problem p = make_quadratic(spec, "example1");
  const Vector& xs = *p.minimizer;
  double dist = (x1 - xs).norm();
  if (!(dist > 0.0 && dist < c.trap_radius)) throw ParameterOutsideWindow("example1: initial point outside the trap");

  c.iterations = iterations;
  c.trapped = true;
  c.lower_bound_holds = true;
  c.min_dist = c.max_dist = dist;
  Vector x = x1;
  for (std::int64_t k = 1; k <= iterations; ++k) {
    x = step_sam(p, x, t, rho, 0.0).x;
    const double next = (x - xs).norm();
    const double lower = t * rho * c.lambda_min - (1.0 - t * c.lambda_min) * dist;
    c.min_lower_bound = std::min(c.min_lower_bound, lower);
    c.min_lower_bound_slack = std::min(c.min_lower_bound_slack, next - lower);
    if (next < lower - 1e-12 || !(lower > 0.0)) c.lower_bound_holds = false;
    if (!(next > 0.0 && next < c.trap_radius)) c.trapped = false;
    c.min_dist = std::min(c.min_dist, next);
    c.max_dist = std::max(c.max_dist, next);
    dist = next;
  }
  c.passed = c.trapped && c.lower_bound_holds && c.min_dist > 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Constant-error IGD on f(x) = x^2 converging to the nonstationary point rho

struct Example2Certificate {
  std::int64_t horizon = 0;
  double final_x = 0.0;         // x^{K+1}
  double final_gap = 0.0;       // |x^{K+1} - rho|
  double product_bound = 0.0;   // (x1 - rho) prod_k (1 - 2 t_k)
  double max_recursion_error = 0.0;  // max_k |(x^{k+1} - rho) - (1 - 2t_k)(x^k - rho)|
  double min_excess = 0.0;      // min_k (x^k - rho)
  double limit_gradient = 0.0;  // |f'(rho)| = 2 rho
  bool stays_above = false;
  bool recursion_exact = false;
  bool within_product_bound = false;
  bool passed = false;
};

inline Example2Certificate certify_example2(double rho, double x1, const ScheduleSpec& t, std::int64_t horizon) {
  if (!(rho > 0.0)) throw AnalysisError("example2: rho must be positive");
  if (!(x1 >= rho)) throw AnalysisError("example2: need x1 >= rho");
  if (horizon < 1) throw AnalysisError("example2: horizon must be >= 1");
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double tk = eval_schedule(t, k);
    if (!(tk >= 0.0 && tk <= 0.5)) throw AnalysisError("example2: stepsizes must lie in [0, 1/2]");
    if (tk > prev) throw AnalysisError("example2: stepsizes must be nonincreasing");
    prev = tk;
  }
  if (!certify_divergence(t, horizon).diverges) throw AnalysisError("example2: stepsizes must not be summable");

  const Problem p = make_square_1d();
  Example2Certificate c;
  c.horizon = horizon;
  c.limit_gradient = std::abs(p.grad(Vector::Constant(1, rho))[0]);
  c.stays_above = true;
  c.min_excess = x1 - rho;
  const bool strict = x1 > rho;
  double product = x1 - rho;
  Vector x = Vector::Constant(1, x1);
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double tk = eval_schedule(t, k);
    const double xk = x[0];
    // Inexact gradient with error ||g - f'(x)|| = 2 rho (the constant error).
    const double eps = 2.0 * rho;
    Vector g = counterexample_gradient(p, x, rho);
    x = step_igd_oracle(p, x, tk, eps, std::move(g)).x;
    product *= 1.0 - 2.0 * tk;
    c.max_recursion_error = std::max(c.max_recursion_error, std::abs((x[0] - rho) - (1.0 - 2.0 * tk) * (xk - rho)));
    c.min_excess = std::min(c.min_excess, x[0] - rho);
    if (strict ? !(x[0] > rho) : !(x[0] >= rho)) c.stays_above = false;
  }
  c.final_x = x[0];
  c.final_gap = std::abs(x[0] - rho);
  c.product_bound = product;
  c.recursion_exact = c.max_recursion_error <= 1e-12;
  c.within_product_bound = (x[0] - rho) <= product + 1e-12;
  c.passed = c.stays_above && c.recursion_exact && c.within_product_bound && c.limit_gradient > 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Rate fitting

enum class RateModel { Linear, Power };
enum class RateReference { Minimizer, FStar, Grad };

inline std::string_view rate_model_name(RateModel m) { return m == RateModel::Linear ? "linear" : "power"; }
inline std::string_view rate_reference_name(RateReference r) {
  switch (r) {
    case RateReference::Minimizer: return "minimizer";
    case RateReference::FStar: return "f_star";
    case RateReference::Grad: return "grad";
  }
  return "?";
}

struct RateFit {
  RateModel model = RateModel::Linear;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::optional<double> implied_q;
  std::size_t points = 0;
  bool exact = false;  // the residual reached zero; no fit performed
};

/// q such that the power exponent -(1-q)/(2q-1) equals `exponent`.
inline std::optional<double> implied_kl_exponent(double exponent) {
  if (!(exponent < 0.0)) return std::nullopt;
  return (exponent - 1.0) / (2.0 * exponent - 1.0);
}

/// Least squares of log(residual) against k (linear model) or log k (power
/// model) over the last `window` fraction of the samples.
inline RateFit fit_rate_series(std::span<const double> ks, std::span<const double> residuals, RateModel model,
                               double window = 0.5) {
  if (ks.size() != residuals.size()) throw AnalysisError("fit_rate: mismatched series");
  if (!(window > 0.0 && window <= 1.0)) throw AnalysisError("fit_rate: window must lie in (0, 1]");
  RateFit fit;
  fit.model = model;
  const std::size_t n = ks.size();
  const std::size_t start = final_window_start(n, window);
  if (n - start < 2) throw AnalysisError("fit_rate: need at least two samples in the window");
  for (std::size_t i = start; i < n; ++i) {
    if (!(residuals[i] > 0.0)) {
      fit.exact = true;
      return fit;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const auto m = static_cast<double>(n - start);
  for (std::size_t i = start; i < n; ++i) {
    const double xv = model == RateModel::Linear ? ks[i] : std::log(ks[i]);
    const double yv = std::log(residuals[i]);
    sx += xv;
    sy += yv;
  }
  const double mx = sx / m, my = sy / m;
  for (std::size_t i = start; i < n; ++i) {
    const double xv = (model == RateModel::Linear ? ks[i] : std::log(ks[i])) - mx;
    const double yv = std::log(residuals[i]) - my;
    sxx += xv * xv;
    sxy += xv * yv;
    syy += yv * yv;
  }
  if (!(sxx > 0.0)) throw AnalysisError("fit_rate: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.points = n - start;
  return fit;
}

inline RateFit fit_rate(const Trace& trace, const Problem& problem, RateReference reference, RateModel model,
                        double window = 0.5) {
  std::vector<double> ks, res;
  switch (reference) {
    case RateReference::Minimizer:
      if (!problem.minimizer) throw AnalysisError("fit_rate: problem has no known minimizer");
      for (const auto& it : trace.iterates) {
        ks.push_back(static_cast<double>(it.k));
        res.push_back((it.x - *problem.minimizer).norm());
      }
      break;
    case RateReference::FStar:
      if (!problem.optimal_value) throw AnalysisError("fit_rate: problem has no known optimal value");
      for (const auto& rec : trace.records) {
        ks.push_back(static_cast<double>(rec.k));
        res.push_back(rec.f - *problem.optimal_value);
      }
      break;
    case RateReference::Grad:
      for (const auto& rec : trace.records) {
        ks.push_back(static_cast<double>(rec.k));
        res.push_back(rec.grad_norm);
      }
      break;
  }
  RateFit fit = fit_rate_series(ks, res, model, window);
  if (!fit.exact && model == RateModel::Power) {
    // f-gaps decay with twice the iterate exponent.
    fit.implied_q = implied_kl_exponent(reference == RateReference::FStar ? fit.slope / 2.0 : fit.slope);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Theorem hypothesis audits

enum class TheoremTag { T1, C1, T3, T4 };

inline std::string_view theorem_name(TheoremTag t) {
  switch (t) {
    case TheoremTag::T1: return "T1";
    case TheoremTag::C1: return "C1";
    case TheoremTag::T3: return "T3";
    case TheoremTag::T4: return "T4";
  }
  return "?";
}

inline std::optional<TheoremTag> parse_theorem(std::string_view s) {
  if (s == "T1") return TheoremTag::T1;
  if (s == "C1" || s == "T2" || s == "T2/C1") return TheoremTag::C1;
  if (s == "T3") return TheoremTag::T3;
  if (s == "T4") return TheoremTag::T4;
  return std::nullopt;
}

class MissingMetadata : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Hypothesis {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct AuditReport {
  TheoremTag theorem = TheoremTag::T1;
  std::int64_t horizon = 0;
  std::vector<Hypothesis> hypotheses;

  bool all_passed() const {
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) { return h.passed; });
  }
  const Hypothesis* find(std::string_view name) const {
    for (const auto& h : hypotheses)
      if (h.name == name) return &h;
    return nullptr;
  }
};

inline constexpr double kAuditDeltaMin = 0.01;
inline constexpr double kVanishingRatio = 0.01;

inline AuditReport audit_theorem_conditions(const OptimizerSpec& spec, const Problem& problem, TheoremTag theorem,
                                            std::int64_t horizon = kDefaultHorizon) {
  AuditReport rep;
  rep.theorem = theorem;
  rep.horizon = horizon;
  auto add = [&](std::string name, bool ok, double value, double threshold, std::string detail) {
    rep.hypotheses.push_back({std::move(name), ok, value, threshold, std::move(detail)});
  };
  const ScheduleSpec& t = spec.stepsize;

  auto divergence = [&] {
    const auto cert = certify_divergence(t, horizon);
    add("sum t_k = inf", cert.diverges, cert.increment, kDivergenceTol, "S(10K) - S(K) > tol");
  };

  switch (theorem) {
    case TheoremTag::T1: {
      if (!problem.lipschitz_L) throw MissingMetadata("T1 audit needs a Lipschitz constant");
      if (!spec.radius) throw MissingMetadata("T1 audit needs a radius schedule");
      const auto d = diagnose_series(t, spec.radius, horizon);
      add("sum t_k^2 < inf", d.square_summable(), d.tail_sum_sq, kTailCauchyTol, "tail over (K/2, K]");
      divergence();
      double sup_rho = 0.0;
      for (std::int64_t k = 1; k <= horizon; ++k) sup_rho = std::max(sup_rho, eval_schedule(*spec.radius, k));
      add("sup rho_k < inf", std::isfinite(sup_rho), sup_rho, std::numeric_limits<double>::infinity(), "max over k <= K");
      break;
    }
    case TheoremTag::C1: {
      const bool absolute_error = spec.variant == Variant::IGD;
      const auto& second = absolute_error ? spec.error : spec.radius;
      if (!second) throw MissingMetadata(absolute_error ? "C1 audit needs an error schedule" : "C1 audit needs a radius schedule");
      std::optional<double> cap;
      if (absolute_error) {
        cap = 2.0;
      } else {
        if (!problem.lipschitz_L) throw MissingMetadata("C1 audit needs a Lipschitz constant");
        cap = 2.0 / *problem.lipschitz_L;
      }
      divergence();
      const auto d = diagnose_series(t, second, horizon);
      const double ratio = d.first_value > 0.0 ? d.last_value / d.first_value : 0.0;
      add("t_k decreasing to 0", d.monotone_decreasing && ratio <= kVanishingRatio, ratio, kVanishingRatio,
          "monotone and t_K / t_1 small");
      add(absolute_error ? "sum t_k eps_k < inf" : "sum t_k rho_k < inf", d.product_summable(), d.tail_sum_product,
          kTailCauchyTol, "tail over (K/2, K]");
      add(absolute_error ? "limsup eps_k < 2" : "limsup rho_k < 2/L", d.tail_sup < *cap, d.tail_sup, *cap,
          "max over [K/2, K]");
      break;
    }
    case TheoremTag::T3:
    case TheoremTag::T4: {
      const auto L = problem.smoothness();
      if (!L) throw MissingMetadata("T3/T4 audit needs a descent constant");
      double nu = 0.0;
      if (spec.nu) {
        nu = *spec.nu;
      } else if (theorem == TheoremTag::T4 && spec.radius) {
        double sup_rho = 0.0;
        for (std::int64_t k = 1; k <= horizon; ++k) sup_rho = std::max(sup_rho, eval_schedule(*spec.radius, k));
        nu = *L * sup_rho;
      } else {
        throw MissingMetadata("T3 audit needs optimizer.nu");
      }
      add("nu in [0, 1)", nu >= 0.0 && nu < 1.0, nu, 1.0, "relative error level");
      const auto d = diagnose_series(t, std::nullopt, horizon);
      const double delta = 2.0 - 2.0 * nu - *L * (1.0 + nu) * (1.0 + nu) * d.tail_sup;
      add("t_k <= (2 - 2nu - delta)/(L(1+nu)^2)", delta > kAuditDeltaMin, delta, kAuditDeltaMin,
          "implied delta from sup of t_k over [K/2, K]");
      divergence();
      if (theorem == TheoremTag::T4) {
        if (!spec.radius) throw MissingMetadata("T4 audit needs a radius schedule");
        double worst = -std::numeric_limits<double>::infinity();
        for (std::int64_t k = 1; k <= horizon; ++k) worst = std::max(worst, eval_schedule(*spec.radius, k));
        const double cap = nu / *L;
        add("rho_k <= nu/L", worst <= cap * (1.0 + 1e-12), worst, cap, "max over k <= K");
      }
      break;
    }
  }
  return rep;
}

/// Implied slack delta = 2 - 2nu - L (1+nu)^2 t for a stepsize t.
inline double implied_delta(double L, double nu, double t) { return 2.0 - 2.0 * nu - L * (1.0 + nu) * (1.0 + nu) * t; }

// ---------------------------------------------------------------------------
// Three-sequences probe

struct ThreeSequencesReport {
  double max_recursion_violation = 0.0;  // max over the second half of alpha_{k+1} - alpha_k - beta_k alpha_k - gamma_k
  bool recursion_holds = false;          // (a)
  double beta_sup = 0.0;
  double beta_increment = 0.0;           // sum over (K/10, K] of beta_k
  double gamma_tail = 0.0;               // sum over (K/2, K] of gamma_k
  double beta_alpha_sq_tail = 0.0;       // sum over (K/2, K] of beta_k alpha_k^2
  bool summability_holds = false;        // (b)
  double alpha_final = 0.0;
  bool alpha_vanishes = false;
};

inline ThreeSequencesReport check_three_sequences(std::span<const double> alpha, std::span<const double> beta,
                                                  std::span<const double> gamma, double alpha_tol = 1e-3) {
  const std::size_t n = alpha.size();
  if (n < 10 || beta.size() != n || gamma.size() != n) throw AnalysisError("three sequences: need equal lengths >= 10");
  auto nonneg = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return v >= 0.0 && std::isfinite(v); });
  };
  if (!nonneg(alpha) || !nonneg(beta) || !nonneg(gamma)) throw AnalysisError("three sequences: entries must be nonnegative");

  ThreeSequencesReport r;
  r.max_recursion_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = n / 2; i + 1 < n; ++i)
    r.max_recursion_violation = std::max(r.max_recursion_violation, alpha[i + 1] - alpha[i] - beta[i] * alpha[i] - gamma[i]);
  r.recursion_holds = r.max_recursion_violation <= 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    r.beta_sup = std::max(r.beta_sup, beta[i]);
    if (i >= n / 10) r.beta_increment += beta[i];
    if (i >= n / 2) {
      r.gamma_tail += gamma[i];
      r.beta_alpha_sq_tail += beta[i] * alpha[i] * alpha[i];
    }
  }
  r.summability_holds = std::isfinite(r.beta_sup) && r.beta_increment > kDivergenceTol &&
                        r.gamma_tail < kTailCauchyTol && r.beta_alpha_sq_tail < kTailCauchyTol;
  r.alpha_final = alpha[n - 1];
  r.alpha_vanishes = r.alpha_final < alpha_tol;
  return r;
}

}  // namespace samlab
