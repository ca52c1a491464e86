#pragma once

// Stepsize / radius / error sequences and the partial-sum diagnostics used to
// audit summability hypotheses on finite horizons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace samlab {

enum class ScheduleFamily { Constant, Harmonic, PowerLaw, EpochLog, PerfectSquareSpike, Custom };
enum class ScheduleRole { Stepsize, Radius, Error };

class ScheduleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline std::string_view family_name(ScheduleFamily f) {
  switch (f) {
    case ScheduleFamily::Constant: return "constant";
    case ScheduleFamily::Harmonic: return "harmonic";
    case ScheduleFamily::PowerLaw: return "powerlaw";
    case ScheduleFamily::EpochLog: return "epochlog";
    case ScheduleFamily::PerfectSquareSpike: return "square-spike";
    case ScheduleFamily::Custom: return "custom";
  }
  return "?";
}

inline std::optional<ScheduleFamily> parse_family(std::string_view name) {
  for (auto f : {ScheduleFamily::Constant, ScheduleFamily::Harmonic, ScheduleFamily::PowerLaw,
                 ScheduleFamily::EpochLog, ScheduleFamily::PerfectSquareSpike, ScheduleFamily::Custom}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

/// A named sequence family.  Values for k >= 1:
///   Constant(c)            c
///   Harmonic(c, s)         c / (k + s)            (s = 0 by default)
///   PowerLaw(c, p)         c / k^p
///   EpochLog(c)            c / (m ln m),  m = floor(k/5) + 2
///   PerfectSquareSpike(C,p) C if k is a perfect square, else C / k^p
///   Custom(v)              v[k-1], holding the last entry past the end
struct ScheduleSpec {
  ScheduleFamily family = ScheduleFamily::Constant;
  double scale = 0.0;
  double exponent = 0.0;  // PowerLaw / PerfectSquareSpike
  double shift = 0.0;     // Harmonic
  std::vector<double> values;
  ScheduleRole role = ScheduleRole::Stepsize;

  static ScheduleSpec constant(double c) { return checked({ScheduleFamily::Constant, c, 0.0, 0.0, {}}); }
  static ScheduleSpec harmonic(double c, double shift = 0.0) {
    return checked({ScheduleFamily::Harmonic, c, 1.0, shift, {}});
  }
  static ScheduleSpec power_law(double c, double p) { return checked({ScheduleFamily::PowerLaw, c, p, 0.0, {}}); }
  static ScheduleSpec epoch_log(double c) { return checked({ScheduleFamily::EpochLog, c, 0.0, 0.0, {}}); }
  static ScheduleSpec square_spike(double c, double p) {
    return checked({ScheduleFamily::PerfectSquareSpike, c, p, 0.0, {}});
  }
  static ScheduleSpec custom(std::vector<double> v) {
    return checked({ScheduleFamily::Custom, 0.0, 0.0, 0.0, std::move(v)});
  }

  ScheduleSpec with_role(ScheduleRole r) const {
    ScheduleSpec s = *this;
    s.role = r;
    return s;
  }

  /// If the sequence is exactly c / k^p for all k, returns (c, p).
  std::optional<std::pair<double, double>> power_envelope() const {
    switch (family) {
      case ScheduleFamily::Constant: return std::pair{scale, 0.0};
      case ScheduleFamily::Harmonic:
        if (shift == 0.0) return std::pair{scale, 1.0};
        return std::nullopt;
      case ScheduleFamily::PowerLaw: return std::pair{scale, exponent};
      default: return std::nullopt;
    }
  }

  bool operator==(const ScheduleSpec&) const = default;

private:
  static ScheduleSpec checked(ScheduleSpec s) {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (s.family == ScheduleFamily::Custom) {
      if (s.values.empty()) throw ScheduleError("custom schedule needs at least one value");
      if (std::any_of(s.values.begin(), s.values.end(), bad))
        throw ScheduleError("custom schedule values must be finite and nonnegative");
      return s;
    }
    if (bad(s.scale)) throw ScheduleError("schedule scale must be finite and nonnegative");
    if (!std::isfinite(s.exponent) || s.exponent < 0.0) throw ScheduleError("schedule exponent must be nonnegative");
    if (!std::isfinite(s.shift) || s.shift <= -1.0) throw ScheduleError("harmonic shift must exceed -1");
    return s;
  }
};

inline bool is_perfect_square(std::int64_t k) {
  if (k < 0) return false;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(k)));
  while (r * r > k) --r;
  while ((r + 1) * (r + 1) <= k) ++r;
  return r * r == k;
}

/// k-th value of the sequence (k >= 1).
inline double eval_schedule(const ScheduleSpec& s, std::int64_t k) {
  if (k < 1) throw ScheduleError("schedule index must be >= 1");
  const double kd = static_cast<double>(k);
  switch (s.family) {
    case ScheduleFamily::Constant: return s.scale;
    case ScheduleFamily::Harmonic: return s.scale / (kd + s.shift);
    case ScheduleFamily::PowerLaw: return s.scale / std::pow(kd, s.exponent);
    case ScheduleFamily::EpochLog: {
      const double m = static_cast<double>(k / 5 + 2);
      return s.scale / (m * std::log(m));
    }
    case ScheduleFamily::PerfectSquareSpike:
      return is_perfect_square(k) ? s.scale : s.scale / std::pow(kd, s.exponent);
    case ScheduleFamily::Custom: {
      const auto idx = static_cast<std::size_t>(std::min<std::int64_t>(k, static_cast<std::int64_t>(s.values.size())));
      return s.values[idx - 1];
    }
  }
  return 0.0;
}

inline constexpr double kTailCauchyTol = 1e-2;
inline constexpr double kDivergenceTol = 0.1;
inline constexpr std::int64_t kDefaultHorizon = 100000;

/// Partial sums up to K = horizon and their tails over the window (K/2, K].
struct SeriesDiagnostics {
  double partial_sum = 0.0;          // sum t_k
  double partial_sum_sq = 0.0;       // sum t_k^2
  double partial_sum_product = 0.0;  // sum t_k * other_k
  double tail_sup = 0.0;             // max of other_k (or t_k) over [K/2, K]
  bool monotone_decreasing = true;   // t_{k+1} <= t_k throughout
  std::int64_t horizon = 0;

  double tail_sum = 0.0;
  double tail_sum_sq = 0.0;
  double tail_sum_product = 0.0;
  double last_value = 0.0;  // t_K
  double first_value = 0.0; // t_1

  bool square_summable(double tol = kTailCauchyTol) const { return tail_sum_sq < tol; }
  bool product_summable(double tol = kTailCauchyTol) const { return tail_sum_product < tol; }
};

inline SeriesDiagnostics diagnose_series(const ScheduleSpec& t, const std::optional<ScheduleSpec>& other,
                                         std::int64_t horizon) {
  if (horizon < 1) throw ScheduleError("horizon must be >= 1");
  SeriesDiagnostics d;
  d.horizon = horizon;
  const std::int64_t half = horizon / 2;
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double tk = eval_schedule(t, k);
    const double ok = other ? eval_schedule(*other, k) : tk;
    if (tk > prev) d.monotone_decreasing = false;
    prev = tk;
    d.partial_sum += tk;
    d.partial_sum_sq += tk * tk;
    d.partial_sum_product += tk * ok;
    if (k > half) {
      d.tail_sum += tk;
      d.tail_sum_sq += tk * tk;
      d.tail_sum_product += tk * ok;
    }
    if (k >= std::max<std::int64_t>(half, 1)) d.tail_sup = std::max(d.tail_sup, ok);
    if (k == 1) d.first_value = tk;
  }
  d.last_value = prev;
  return d;
}

/// Heuristic certificate that sum_k s_k diverges: the partial sums at K and
/// 10K differ by more than `tol`.  A finite computation cannot prove
/// divergence; this only separates slowly growing from converging sums.
struct DivergenceCertificate {
  double sum_at_K = 0.0;
  double sum_at_10K = 0.0;
  double increment = 0.0;
  bool diverges = false;
};

inline DivergenceCertificate certify_divergence(const ScheduleSpec& s, std::int64_t horizon,
                                                double tol = kDivergenceTol) {
  if (horizon < 1) throw ScheduleError("horizon must be >= 1");
  DivergenceCertificate c;
  double sum = 0.0;
  for (std::int64_t k = 1; k <= 10 * horizon; ++k) {
    sum += eval_schedule(s, k);
    if (k == horizon) c.sum_at_K = sum;
  }
  c.sum_at_10K = sum;
  c.increment = c.sum_at_10K - c.sum_at_K;
  c.diverges = c.increment > tol;
  return c;
}

/// Result of the desingularizing-series check with phi(s) = M s^(1-q).
struct DesingularizingDiagnostics {
  SeriesDiagnostics series;       // partial sums of the summand t_k (phi'(T_k))^{-1}
  bool inner_tail_finite = false; // sum_i t_i eps_i converges
  bool tail_truncated = false;    // remainder past the horizon was not bounded analytically
  double remainder_bound = 0.0;   // analytic bound on sum_{i > K} t_i eps_i
  double summand_tail_sum = 0.0;  // sum of summands over (K/2, K]
  double domination_exponent = 0.0;  // 1 + p q when an envelope is known
  double domination_ratio = 0.0;     // max_k summand_k * k^{1 + p q}
  bool passed = false;
};

/// (phi'(s))^{-1} for phi(s) = M s^{1-q}.
inline double inverse_desingularizing_derivative(double s, double M, double q) {
  return std::pow(s, q) / (M * (1.0 - q));
}

/// Evaluates sum_k t_k (phi'(sum_{i>=k} t_i eps_i))^{-1} up to the horizon.
/// Inner tails past the horizon use the bound sum_{i>K} c/i^{1+p} <= c/(p K^p)
/// when both sequences are exact power laws.
inline DesingularizingDiagnostics check_desingularizing_condition(const ScheduleSpec& t, const ScheduleSpec& eps,
                                                                   double M, double q, std::int64_t horizon,
                                                                   double tol = kTailCauchyTol) {
  if (!(q > 0.0 && q < 1.0)) throw ScheduleError("desingularizing exponent q must lie in (0, 1)");
  if (!(M > 0.0)) throw ScheduleError("desingularizing constant M must be positive");
  if (horizon < 2) throw ScheduleError("horizon must be >= 2");

  DesingularizingDiagnostics out;
  const auto te = t.power_envelope();
  const auto ee = eps.power_envelope();
  double product_exponent = 0.0;
  double product_scale = 0.0;
  if (te && ee) {
    product_scale = te->first * ee->first;
    product_exponent = te->second + ee->second;
    if (product_exponent <= 1.0 && product_scale > 0.0) {
      // sum_i c / i^a with a <= 1 diverges: the inner tails are infinite.
      out.inner_tail_finite = false;
      out.passed = false;
      return out;
    }
    const double p = product_exponent - 1.0;
    out.remainder_bound = p > 0.0 ? product_scale / (p * std::pow(static_cast<double>(horizon), p)) : 0.0;
    out.domination_exponent = 1.0 + p * q;
  } else {
    // No envelope: rely on the numerical divergence certificate of t*eps.
    double s_k = 0.0, s_10k = 0.0;
    for (std::int64_t k = 1; k <= 10 * horizon; ++k) {
      s_10k += eval_schedule(t, k) * eval_schedule(eps, k);
      if (k == horizon) s_k = s_10k;
    }
    if (s_10k - s_k > kDivergenceTol) {
      out.inner_tail_finite = false;
      out.passed = false;
      return out;
    }
    out.tail_truncated = true;
    out.remainder_bound = s_10k - s_k;
  }
  out.inner_tail_finite = true;

  const auto n = static_cast<std::size_t>(horizon);
  std::vector<double> tail(n + 1, 0.0);
  double acc = out.remainder_bound;
  for (std::int64_t k = horizon; k >= 1; --k) {
    acc += eval_schedule(t, k) * eval_schedule(eps, k);
    tail[static_cast<std::size_t>(k)] = acc;
  }

  std::vector<double> summand(n + 1, 0.0);
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double s = eval_schedule(t, k) * inverse_desingularizing_derivative(tail[static_cast<std::size_t>(k)], M, q);
    summand[static_cast<std::size_t>(k)] = s;
    if (out.domination_exponent > 0.0)
      out.domination_ratio = std::max(out.domination_ratio, s * std::pow(static_cast<double>(k), out.domination_exponent));
  }
  ScheduleSpec as_custom = ScheduleSpec::custom(std::vector<double>(summand.begin() + 1, summand.end()));
  out.series = diagnose_series(as_custom, std::nullopt, horizon);
  out.summand_tail_sum = out.series.tail_sum;
  out.passed = out.summand_tail_sum < tol;
  return out;
}

/// Grid check of C (phi'(x+y))^{-1} <= (phi'(x))^{-1} + (phi'(y))^{-1} for
/// x, y in (0, eta) with x + y < eta.  Returns the smallest slack found.
struct AssumptionGridResult {
  double worst_slack = std::numeric_limits<double>::infinity();
  int points_checked = 0;
  bool passed = false;
};

inline AssumptionGridResult check_desingularizing_assumption(double M, double q, double C, double eta, int grid) {
  if (!(q >= 0.0 && q < 1.0)) throw ScheduleError("desingularizing exponent q must lie in [0, 1)");
  if (grid < 1 || !(eta > 0.0) || !(M > 0.0)) throw ScheduleError("invalid grid parameters");
  AssumptionGridResult r;
  for (int i = 1; i <= grid; ++i) {
    for (int j = 1; j <= grid; ++j) {
      const double x = eta * i / (grid + 1.0);
      const double y = eta * j / (grid + 1.0);
      if (x + y >= eta) continue;
      const double lhs = C * inverse_desingularizing_derivative(x + y, M, q);
      const double rhs = inverse_desingularizing_derivative(x, M, q) + inverse_desingularizing_derivative(y, M, q);
      r.worst_slack = std::min(r.worst_slack, rhs - lhs);
      ++r.points_checked;
    }
  }
  r.passed = r.points_checked > 0 && r.worst_slack >= 0.0;
  return r;
}

}  // namespace samlab
