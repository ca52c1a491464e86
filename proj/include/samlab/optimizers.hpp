#pragma once

// Update rules for gradient descent, SAM and its normalized variants
// (RSAM, VaSSO, F-SAM), the unnormalized variants (USAM, extragradient) and
// the two inexact-gradient abstractions (absolute error IGD, relative error
// IGDr), plus the deterministic iteration runner that records a Trace.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samlab/problems.hpp"
#include "samlab/random.hpp"
#include "samlab/schedules.hpp"

namespace samlab {

enum class Variant { GD, SAM, USAM, EG, RSAM, VaSSO, FSAM, IGD, IGDr };

/// How IGD produces its inexact gradient.
enum class IgdMode {
  RandomDirection,  // g = grad f(x) + eta u, eta ~ U[0, eps_k], u uniform on the sphere
  Counterexample,   // g = grad f(x - rho_k grad f(x)/||grad f(x)||)
};

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::GD: return "gd";
    case Variant::SAM: return "sam";
    case Variant::USAM: return "usam";
    case Variant::EG: return "eg";
    case Variant::RSAM: return "rsam";
    case Variant::VaSSO: return "vasso";
    case Variant::FSAM: return "fsam";
    case Variant::IGD: return "igd";
    case Variant::IGDr: return "igdr";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::GD, Variant::SAM, Variant::USAM, Variant::EG, Variant::RSAM, Variant::VaSSO, Variant::FSAM,
                 Variant::IGD, Variant::IGDr}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

inline bool is_normalized(Variant v) {
  return v == Variant::SAM || v == Variant::RSAM || v == Variant::VaSSO || v == Variant::FSAM;
}

/// Invalid or incomplete optimizer configuration.  `key()` names the
/// offending configuration entry, e.g. "optimizer.radius".
class SpecError : public std::invalid_argument {
public:
  SpecError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)), message_(what) {}
  const std::string& key() const { return key_; }
  const std::string& message() const { return message_; }  // without the key prefix

private:
  std::string key_;
  std::string message_;
};

/// Gradient vanished where a normalized direction was required.
class StationaryPoint : public std::domain_error {
public:
  StationaryPoint() : std::domain_error("gradient vanishes at the current iterate") {}
};

/// The perturbation direction d has (numerically) zero length.
class ZeroDirection : public std::domain_error {
public:
  ZeroDirection() : std::domain_error("perturbation direction vanishes") {}
};

/// A recorded inexactness exceeded its variant's bound.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

inline constexpr double kDefaultGradZeroTol = 1e-14;

struct OptimizerSpec {
  Variant variant = Variant::GD;
  ScheduleSpec stepsize = ScheduleSpec::constant(0.1);
  std::optional<ScheduleSpec> radius;  // rho_k
  std::optional<ScheduleSpec> error;   // eps_k (IGD)
  std::optional<double> nu;            // relative error (IGDr), radius bound nu/L (USAM/EG audits)
  std::optional<double> theta;         // averaging weight (VaSSO, F-SAM)
  std::optional<double> sigma;         // F-SAM
  std::optional<double> lambda;        // RSAM mixing weight, defaults to 1
  std::uint64_t rng_seed = 0;
  double grad_zero_tol = kDefaultGradZeroTol;
  IgdMode igd_mode = IgdMode::RandomDirection;

  bool operator==(const OptimizerSpec&) const = default;
};

inline void validate(const OptimizerSpec& spec) {
  const Variant v = spec.variant;
  const bool needs_radius = is_normalized(v) || v == Variant::USAM || v == Variant::EG ||
                            (v == Variant::IGD && spec.igd_mode == IgdMode::Counterexample);
  if (needs_radius && !spec.radius) throw SpecError("optimizer.radius", "required for this variant");
  if (v == Variant::IGD && !spec.error) throw SpecError("optimizer.error", "required for igd");
  if (v == Variant::IGDr) {
    if (!spec.nu) throw SpecError("optimizer.nu", "required for igdr");
  }
  if (spec.nu && !(*spec.nu >= 0.0 && *spec.nu < 1.0)) throw SpecError("optimizer.nu", "must lie in [0, 1)");
  if (v == Variant::VaSSO || v == Variant::FSAM) {
    if (!spec.theta) throw SpecError("optimizer.theta", "required for vasso and fsam");
  }
  if (spec.theta && !(*spec.theta > 0.0 && *spec.theta <= 1.0)) throw SpecError("optimizer.theta", "must lie in (0, 1]");
  if (v == Variant::FSAM && !spec.sigma) throw SpecError("optimizer.sigma", "required for fsam");
  if (spec.sigma && !std::isfinite(*spec.sigma)) throw SpecError("optimizer.sigma", "must be finite");
  if (spec.lambda && !std::isfinite(*spec.lambda)) throw SpecError("optimizer.lambda", "must be finite");
  if (!(spec.grad_zero_tol >= 0.0) || !std::isfinite(spec.grad_zero_tol))
    throw SpecError("optimizer.grad_zero_tol", "must be finite and nonnegative");
}

/// Result of one update: the next iterate and the gradient surrogate g^k
/// that produced it (x^{k+1} = x^k - t_k g^k).
struct StepOutcome {
  Vector x;
  Vector g;
};

inline bool is_stationary(double grad_norm, const Vector& x, double tol) {
  return grad_norm <= tol * (x.norm() + 1.0);
}

namespace detail {

// grad f(x + rho d/||d||); every normalized variant goes through this path.
inline Vector normalized_probe_gradient(const Problem& p, const Vector& x, double rho, const Vector& d,
                                        double d_norm) {
  return p.grad(x + rho * (d / d_norm));
}

inline StepOutcome normalized_step(const Problem& p, const Vector& x, double t, double rho, const Vector& d,
                                   double d_norm) {
  Vector g = normalized_probe_gradient(p, x, rho, d, d_norm);
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

// Degrades to a plain gradient step when d vanishes off-stationarity.
inline StepOutcome normalized_step_or_fallback(const Problem& p, const Vector& x, const Vector& grad_x, double t,
                                               double rho, const Vector& d, double tol) {
  const double d_norm = d.norm();
  if (is_stationary(d_norm, x, tol)) return {x - t * grad_x, grad_x};
  return normalized_step(p, x, t, rho, d, d_norm);
}

}  // namespace detail

/// x - t grad f(x + rho grad f(x)/||grad f(x)||).  Two gradient evaluations.
inline StepOutcome step_sam(const Problem& p, const Vector& x, double t, double rho,
                            double tol = kDefaultGradZeroTol) {
  const Vector g0 = p.grad(x);
  const double n0 = g0.norm();
  if (is_stationary(n0, x, tol)) throw StationaryPoint();
  return detail::normalized_step(p, x, t, rho, g0, n0);
}

/// x - t grad f(x + rho d/||d||) for an arbitrary nonzero direction d.
inline StepOutcome step_general_normalized(const Problem& p, const Vector& x, double t, double rho, const Vector& d,
                                           double tol = kDefaultGradZeroTol) {
  const double d_norm = d.norm();
  if (is_stationary(d_norm, x, tol)) throw ZeroDirection();
  return detail::normalized_step(p, x, t, rho, d, d_norm);
}

/// RSAM search direction Delta + lambda grad f(x + Delta).
inline Vector rsam_direction(const Vector& delta, const Vector& g_random, double lambda) {
  return delta + lambda * g_random;
}

/// Isotropic Gaussian RSAM perturbation with per-coordinate std rho/sqrt(n).
inline Vector draw_rsam_delta(Xoshiro256& rng, Eigen::Index n, double rho) {
  return (rho / std::sqrt(static_cast<double>(n))) * rng.normal_vector(n);
}

/// RSAM step for a given random vector Delta (falls back to a gradient step
/// if the direction vanishes).
inline StepOutcome step_rsam(const Problem& p, const Vector& x, double t, double rho, double lambda,
                             const Vector& delta, double tol = kDefaultGradZeroTol) {
  const Vector g0 = p.grad(x);
  const Vector d = rsam_direction(delta, p.grad(x + delta), lambda);
  return detail::normalized_step_or_fallback(p, x, g0, t, rho, d, tol);
}

/// VaSSO direction update d^k = (1 - theta) d^{k-1} + theta grad f(x^k).
inline Vector vasso_direction(const Vector& d_prev, const Vector& grad_x, double theta) {
  return (1.0 - theta) * d_prev + theta * grad_x;
}

/// F-SAM average m^k = (1 - theta) m^{k-1} + theta grad f(x^k).
inline Vector fsam_average(const Vector& m_prev, const Vector& grad_x, double theta) {
  return (1.0 - theta) * m_prev + theta * grad_x;
}

/// F-SAM direction d^k = grad f(x^k) - sigma m^k.
inline Vector fsam_direction(const Vector& grad_x, const Vector& m, double sigma) { return grad_x - sigma * m; }

/// x - t grad f(x + rho grad f(x)).  Accepts any real rho.
inline StepOutcome step_usam(const Problem& p, const Vector& x, double t, double rho) {
  const Vector g0 = p.grad(x);
  Vector g = p.grad(x + rho * g0);
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

/// x - t grad f(x - rho grad f(x)).
inline StepOutcome step_eg(const Problem& p, const Vector& x, double t, double rho) {
  const Vector g0 = p.grad(x);
  Vector g = p.grad(x - rho * g0);
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

/// IGD with g = grad f(x) + eta u, where 0 <= eta <= eps and ||u|| = 1.
inline StepOutcome step_igd(const Problem& p, const Vector& x, double t, double eps, const Vector& noise_direction,
                            double eta) {
  if (std::abs(noise_direction.norm() - 1.0) > 1e-12) throw std::invalid_argument("igd: noise direction must be a unit vector");
  if (!(eta >= 0.0 && eta <= eps)) throw std::invalid_argument("igd: error magnitude must lie in [0, eps]");
  Vector g = p.grad(x) + eta * noise_direction;
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

/// IGD with a caller-supplied inexact gradient g; enforces ||g - grad f(x)|| <= eps.
inline StepOutcome step_igd_oracle(const Problem& p, const Vector& x, double t, double eps, Vector g) {
  const double err = (g - p.grad(x)).norm();
  if (err > eps * (1.0 + 1e-12) + 1e-300) throw ContractViolation("igd: supplied gradient violates the error bound");
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

/// The inexact gradient of the constant-radius counterexample,
/// grad f(x - rho grad f(x)/||grad f(x)||).
inline Vector counterexample_gradient(const Problem& p, const Vector& x, double rho) {
  const Vector g0 = p.grad(x);
  const double n0 = g0.norm();
  if (n0 == 0.0) return g0;
  return p.grad(x - rho * (g0 / n0));
}

/// IGDr with g = grad f(x) + eta u, 0 <= eta <= nu ||grad f(x)||.  Verifies
/// (1 - nu)||grad f|| <= ||g|| <= (1 + nu)||grad f||.
inline StepOutcome step_igdr(const Problem& p, const Vector& x, double t, double nu, const Vector& noise_direction,
                             double eta) {
  if (!(nu >= 0.0 && nu < 1.0)) throw std::invalid_argument("igdr: nu must lie in [0, 1)");
  const Vector g0 = p.grad(x);
  const double n0 = g0.norm();
  if (!(eta >= 0.0 && eta <= nu * n0)) throw std::invalid_argument("igdr: error magnitude must lie in [0, nu ||grad||]");
  Vector g = g0 + eta * noise_direction;
  const double ng = g.norm();
  const double slack = 1e-12 * n0;
  if (ng < (1.0 - nu) * n0 - slack || ng > (1.0 + nu) * n0 + slack)
    throw ContractViolation("igdr: gradient sandwich violated");
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

/// x - t grad f(x).
inline StepOutcome step_gd(const Problem& p, const Vector& x, double t) {
  Vector g = p.grad(x);
  Vector next = x - t * g;
  return {std::move(next), std::move(g)};
}

// ---------------------------------------------------------------------------
// Runner

struct RunnerState {
  Vector x;
  std::int64_t k = 1;
  std::optional<Vector> d_prev;  // VaSSO
  std::optional<Vector> m_prev;  // F-SAM
  Xoshiro256 rng;
};

enum class Termination { Horizon, Stationary, Nonfinite };

inline std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Horizon: return "horizon";
    case Termination::Stationary: return "stationary";
    case Termination::Nonfinite: return "nonfinite";
  }
  return "?";
}

/// One row per iterate.  Step fields describe the move from x^k to x^{k+1};
/// the terminal row (no step taken) carries zeros in them.
struct TraceRecord {
  std::int64_t k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double t_k = 0.0;
  double rho_or_eps = 0.0;
  double step_norm = 0.0;
  double inexactness = 0.0;  // ||g^k - grad f(x^k)||

  bool operator==(const TraceRecord&) const = default;
};

struct StoredIterate {
  std::int64_t k = 0;
  Vector x;
};

struct Trace {
  std::string problem_name;
  OptimizerSpec spec;
  std::vector<TraceRecord> records;
  std::vector<StoredIterate> iterates;  // every `thin`-th iterate plus the last
  int thin = 1;
  Termination terminated = Termination::Horizon;

  const TraceRecord& final_record() const { return records.back(); }
  const Vector& final_x() const { return iterates.back().x; }
};

inline int default_thin(int dim) { return dim <= 100 ? 1 : 10; }

namespace detail {

inline bool finite_all(double a, double b, const Vector& x) {
  return std::isfinite(a) && std::isfinite(b) && x.allFinite();
}

inline void check_bound(double value, double bound, const char* what) {
  if (value > bound * (1.0 + 1e-9) + 1e-12) throw ContractViolation(std::string(what) + ": recorded inexactness exceeds its bound");
}

}  // namespace detail

/// Applies one iteration of the configured variant at state.x with the
/// precomputed gradient.  Updates VaSSO/F-SAM memory and the RNG in place.
inline StepOutcome advance(const Problem& p, const OptimizerSpec& spec, RunnerState& state, const Vector& g0,
                           double t, double rho_or_eps) {
  const Vector& x = state.x;
  const double tol = spec.grad_zero_tol;
  switch (spec.variant) {
    case Variant::GD: return {x - t * g0, g0};
    case Variant::SAM: return detail::normalized_step(p, x, t, rho_or_eps, g0, g0.norm());
    case Variant::USAM: {
      Vector g = p.grad(x + rho_or_eps * g0);
      return {x - t * g, std::move(g)};
    }
    case Variant::EG: {
      Vector g = p.grad(x - rho_or_eps * g0);
      return {x - t * g, std::move(g)};
    }
    case Variant::RSAM: {
      const Vector delta = draw_rsam_delta(state.rng, x.size(), rho_or_eps);
      const Vector d = rsam_direction(delta, p.grad(x + delta), spec.lambda.value_or(1.0));
      return detail::normalized_step_or_fallback(p, x, g0, t, rho_or_eps, d, tol);
    }
    case Variant::VaSSO: {
      Vector d = state.d_prev ? vasso_direction(*state.d_prev, g0, *spec.theta) : g0;
      StepOutcome out = detail::normalized_step_or_fallback(p, x, g0, t, rho_or_eps, d, tol);
      state.d_prev = std::move(d);
      return out;
    }
    case Variant::FSAM: {
      Vector m = state.m_prev ? fsam_average(*state.m_prev, g0, *spec.theta) : g0;
      const Vector d = fsam_direction(g0, m, *spec.sigma);
      StepOutcome out = detail::normalized_step_or_fallback(p, x, g0, t, rho_or_eps, d, tol);
      state.m_prev = std::move(m);
      return out;
    }
    case Variant::IGD: {
      if (spec.igd_mode == IgdMode::Counterexample) {
        const double rho = eval_schedule(*spec.radius, state.k);
        const double n0 = g0.norm();
        Vector g = n0 == 0.0 ? g0 : Vector(p.grad(x - rho * (g0 / n0)));
        return {x - t * g, std::move(g)};
      }
      const Vector u = state.rng.unit_vector(x.size());
      const double eta = state.rng.uniform(0.0, rho_or_eps);
      Vector g = g0 + eta * u;
      return {x - t * g, std::move(g)};
    }
    case Variant::IGDr: {
      const Vector u = state.rng.unit_vector(x.size());
      const double eta = state.rng.uniform(0.0, *spec.nu * g0.norm());
      Vector g = g0 + eta * u;
      return {x - t * g, std::move(g)};
    }
  }
  throw std::logic_error("unknown variant");
}

/// Iterates the configured variant from x1 for up to `horizon` steps.
/// Deterministic given spec.rng_seed.  Nonfinite values end the run with
/// Termination::Nonfinite; a vanishing gradient ends it with
/// Termination::Stationary.  thin = 0 selects default_thin(dim).
inline Trace run(const Problem& p, const OptimizerSpec& spec, const Vector& x1, std::int64_t horizon, int thin = 0) {
  validate(spec);
  if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
  if (x1.size() != p.dim) throw std::invalid_argument("run: initial point has wrong dimension");
  if (thin < 0) throw std::invalid_argument("run: thin must be >= 0");

  Trace trace;
  trace.problem_name = p.name;
  trace.spec = spec;
  trace.thin = thin == 0 ? default_thin(p.dim) : thin;
  trace.records.reserve(static_cast<std::size_t>(horizon) + 1);

  RunnerState state{x1, 1, std::nullopt, std::nullopt, Xoshiro256(spec.rng_seed)};
  const auto L = p.lipschitz_L;

  auto terminal = [&](double fx, double gn) {
    trace.records.push_back({state.k, fx, gn, 0.0, 0.0, 0.0, 0.0});
    if (trace.iterates.empty() || trace.iterates.back().k != state.k) trace.iterates.push_back({state.k, state.x});
  };

  for (;;) {
    const Vector g0 = p.grad(state.x);
    const double fx = p.f(state.x);
    const double gn = g0.norm();
    if (!detail::finite_all(fx, gn, state.x) || !g0.allFinite()) {
      trace.terminated = Termination::Nonfinite;
      terminal(fx, gn);
      break;
    }
    if (is_stationary(gn, state.x, spec.grad_zero_tol)) {
      trace.terminated = Termination::Stationary;
      terminal(fx, gn);
      break;
    }
    if (state.k > horizon) {
      trace.terminated = Termination::Horizon;
      terminal(fx, gn);
      break;
    }

    const double t = eval_schedule(spec.stepsize, state.k);
    double bound_param = 0.0;
    switch (spec.variant) {
      case Variant::GD: break;
      case Variant::IGD: bound_param = eval_schedule(*spec.error, state.k); break;
      case Variant::IGDr: bound_param = *spec.nu * gn; break;
      default: bound_param = eval_schedule(*spec.radius, state.k); break;
    }
    const double rho_or_eps = spec.variant == Variant::IGDr ? 0.0 : bound_param;

    if ((state.k - 1) % trace.thin == 0) trace.iterates.push_back({state.k, state.x});

    StepOutcome out = advance(p, spec, state, g0, t, rho_or_eps);
    const double inexactness = (out.g - g0).norm();
    const double step_norm = (out.x - state.x).norm();

    if (is_normalized(spec.variant) && L) detail::check_bound(inexactness, *L * bound_param, "normalized step");
    if (spec.variant == Variant::IGD) detail::check_bound(inexactness, bound_param, "igd");
    if (spec.variant == Variant::IGDr) {
      const double ng = out.g.norm();
      const double slack = 1e-12 * gn;
      if (ng < (1.0 - *spec.nu) * gn - slack || ng > (1.0 + *spec.nu) * gn + slack)
        throw ContractViolation("igdr: gradient sandwich violated");
    }

    trace.records.push_back({state.k, fx, gn, t, bound_param, step_norm, inexactness});
    state.x = std::move(out.x);
    ++state.k;
  }
  return trace;
}

}  // namespace samlab
