#pragma once

// Experiment configuration: a plain-text format with `[section]` headers and
// `key = value` lines ('#' starts a comment).  Numeric parameters may be
// written relative to the problem as `<number>` followed by any sequence of
// `/L`, `*L`, `/n`, `*n` (L = Lipschitz constant, n = dimension), e.g.
// `harmonic(0.5/L)` or `horizon = 100*n`.
//
//   [problem]    kind, generator, dim, seed, eig_min, eig_max, A, b
//   [optimizer]  variant, stepsize, radius, error, nu, theta, sigma, lambda,
//                seed, grad_zero_tol, igd_mode
//   [run]        x1, horizon, thin, tol_grad, tol_cauchy, fit, fit_model,
//                fit_window, certificate, audit
//   [output]     dir, csv, svg
//   [sweep]      <axis>.<label> = key=value | key=value ...

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "samlab/analysis.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/schedules.hpp"

namespace samlab {

/// Configuration problem tied to a specific key such as "optimizer.radius".
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)), message_(what) {}
  const std::string& key() const { return key_; }
  const std::string& message() const { return message_; }  // without the key prefix

private:
  std::string key_;
  std::string message_;
};

namespace text {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_i64(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace text

/// value * L^l_power * n^n_power, resolved once the problem is known.
struct ScalarExpr {
  double value = 0.0;
  int l_power = 0;
  int n_power = 0;

  double resolve(std::optional<double> L, int n) const {
    if (l_power != 0 && !L) throw std::invalid_argument("expression uses L but the problem has no Lipschitz constant");
    double v = value;
    if (l_power != 0) v *= std::pow(*L, l_power);
    if (n_power != 0) v *= std::pow(static_cast<double>(n), n_power);
    return v;
  }

  bool operator==(const ScalarExpr&) const = default;
};

inline std::optional<ScalarExpr> parse_scalar_expr(std::string_view s) {
  s = text::trim(s);
  std::size_t cut = s.find_first_of("*/");
  ScalarExpr e;
  const auto num = text::to_double(s.substr(0, cut));
  if (!num) return std::nullopt;
  e.value = *num;
  while (cut != std::string_view::npos) {
    const char op = s[cut];
    const auto next = s.find_first_of("*/", cut + 1);
    const auto sym = text::trim(s.substr(cut + 1, next == std::string_view::npos ? std::string_view::npos : next - cut - 1));
    const int sign = op == '*' ? 1 : -1;
    if (sym == "L") {
      e.l_power += sign;
    } else if (sym == "n") {
      e.n_power += sign;
    } else {
      return std::nullopt;
    }
    cut = next;
  }
  return e;
}

inline std::string format_scalar_expr(const ScalarExpr& e) {
  std::string s = text::format_double(e.value);
  auto emit = [&](int power, const char* sym) {
    for (int i = 0; i < std::abs(power); ++i) {
      s += power > 0 ? '*' : '/';
      s += sym;
    }
  };
  emit(e.l_power, "L");
  emit(e.n_power, "n");
  return s;
}

/// Schedule written as `family(arg, ...)`.
struct ScheduleTemplate {
  ScheduleFamily family = ScheduleFamily::Constant;
  std::vector<ScalarExpr> args;

  ScheduleSpec resolve(std::optional<double> L, int n) const {
    std::vector<double> v;
    v.reserve(args.size());
    for (const auto& a : args) v.push_back(a.resolve(L, n));
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (v.size() < lo || v.size() > hi) throw std::invalid_argument("wrong number of schedule arguments");
    };
    switch (family) {
      case ScheduleFamily::Constant: need(1, 1); return ScheduleSpec::constant(v[0]);
      case ScheduleFamily::Harmonic: need(1, 2); return ScheduleSpec::harmonic(v[0], v.size() > 1 ? v[1] : 0.0);
      case ScheduleFamily::PowerLaw: need(2, 2); return ScheduleSpec::power_law(v[0], v[1]);
      case ScheduleFamily::EpochLog: need(1, 1); return ScheduleSpec::epoch_log(v[0]);
      case ScheduleFamily::PerfectSquareSpike: need(2, 2); return ScheduleSpec::square_spike(v[0], v[1]);
      case ScheduleFamily::Custom: need(1, static_cast<std::size_t>(-1)); return ScheduleSpec::custom(std::move(v));
    }
    throw std::invalid_argument("unknown schedule family");
  }

  bool operator==(const ScheduleTemplate&) const = default;
};

inline std::optional<ScheduleTemplate> parse_schedule_template(std::string_view s) {
  s = text::trim(s);
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') return std::nullopt;
  const auto fam = parse_family(text::trim(s.substr(0, open)));
  if (!fam) return std::nullopt;
  ScheduleTemplate t;
  t.family = *fam;
  const auto inner = text::trim(s.substr(open + 1, s.size() - open - 2));
  if (inner.empty()) return std::nullopt;
  for (auto piece : text::split(inner, ',')) {
    const auto e = parse_scalar_expr(piece);
    if (!e) return std::nullopt;
    t.args.push_back(*e);
  }
  return t;
}

inline std::string format_schedule_template(const ScheduleTemplate& t) {
  std::string s(family_name(t.family));
  s += '(';
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) s += ", ";
    s += format_scalar_expr(t.args[i]);
  }
  s += ')';
  return s;
}

/// Initial point: explicit coordinates, zeros, or the minimizer, plus an
/// offset that is either one scalar (broadcast) or a full vector.
struct InitialPoint {
  enum class Base { Explicit, Zeros, Minimizer };
  Base base = Base::Zeros;
  std::vector<ScalarExpr> coords;  // explicit coordinates or offset

  bool operator==(const InitialPoint&) const = default;
};

inline std::optional<InitialPoint> parse_initial_point(std::string_view s) {
  s = text::trim(s);
  InitialPoint p;
  std::string_view rest;
  if (s.starts_with("minimizer")) {
    p.base = InitialPoint::Base::Minimizer;
    rest = text::trim(s.substr(9));
    if (!rest.empty()) {
      if (rest.front() != '+') return std::nullopt;
      rest = text::trim(rest.substr(1));
      if (rest.empty()) return std::nullopt;
    }
  } else if (s.starts_with("zeros")) {
    p.base = InitialPoint::Base::Zeros;
    rest = text::trim(s.substr(5));
    if (!rest.empty()) {
      if (rest.front() != '+') return std::nullopt;
      rest = text::trim(rest.substr(1));
      if (rest.empty()) return std::nullopt;
    }
  } else {
    p.base = InitialPoint::Base::Explicit;
    rest = s;
    if (rest.empty()) return std::nullopt;
  }
  if (!rest.empty()) {
    for (auto piece : text::split(rest, ',')) {
      const auto e = parse_scalar_expr(piece);
      if (!e) return std::nullopt;
      p.coords.push_back(*e);
    }
  }
  return p;
}

inline std::string format_initial_point(const InitialPoint& p) {
  std::string s;
  if (p.base == InitialPoint::Base::Minimizer) s = "minimizer";
  if (p.base == InitialPoint::Base::Zeros) s = "zeros";
  for (std::size_t i = 0; i < p.coords.size(); ++i) {
    if (i == 0 && p.base != InitialPoint::Base::Explicit) s += " + ";
    if (i) s += ", ";
    s += format_scalar_expr(p.coords[i]);
  }
  return s;
}

struct ProblemSection {
  std::string kind = "quadratic";    // quadratic | log-quadratic | square-1d
  std::string generator = "inline";  // inline | spd | normal
  int dim = 2;
  std::uint64_t seed = 0;
  double eig_min = 1.0;
  double eig_max = 10.0;
  std::vector<std::vector<double>> A;  // rows
  std::vector<double> b;

  bool operator==(const ProblemSection&) const = default;
};

struct OptimizerSection {
  Variant variant = Variant::GD;
  ScheduleTemplate stepsize{ScheduleFamily::Constant, {ScalarExpr{0.1, 0, 0}}};
  std::optional<ScheduleTemplate> radius;
  std::optional<ScheduleTemplate> error;
  std::optional<double> nu, theta, sigma, lambda;
  std::uint64_t seed = 0;
  double grad_zero_tol = kDefaultGradZeroTol;
  IgdMode igd_mode = IgdMode::RandomDirection;

  bool operator==(const OptimizerSection&) const = default;
};

struct RunSection {
  InitialPoint x1;
  ScalarExpr horizon{1000.0, 0, 0};
  int thin = 0;  // 0: automatic
  double tol_grad = 1e-6;
  double tol_cauchy = 1e-6;
  std::optional<RateReference> fit;
  RateModel fit_model = RateModel::Linear;
  double fit_window = 0.5;
  std::string certificate = "none";  // none | example1 | example2
  std::optional<TheoremTag> audit;

  bool operator==(const RunSection&) const = default;
};

struct OutputSection {
  std::string dir;  // empty: $SAMLAB_OUT or ./samlab_out
  bool csv = true;
  bool svg = true;

  bool operator==(const OutputSection&) const = default;
};

struct SweepCell {
  std::string label;
  std::vector<std::pair<std::string, std::string>> overrides;  // "section.key" -> value

  bool operator==(const SweepCell&) const = default;
};

struct SweepAxis {
  std::string name;
  std::vector<SweepCell> cells;

  bool operator==(const SweepAxis&) const = default;
};

struct ExperimentConfig {
  std::optional<std::string> preset;
  ProblemSection problem;
  OptimizerSection optimizer;
  RunSection run;
  OutputSection output;
  std::vector<SweepAxis> sweep;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::vector<double> parse_number_list(std::string_view v, const std::string& key) {
  std::vector<double> out;
  for (auto piece : text::split(v, ',')) {
    const auto d = text::to_double(piece);
    if (!d) throw ConfigError(key, "expected a comma-separated list of numbers");
    out.push_back(*d);
  }
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
  v = text::trim(v);
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError(key, "expected true or false");
}

inline double parse_number(std::string_view v, const std::string& key) {
  const auto d = text::to_double(v);
  if (!d) throw ConfigError(key, "expected a number");
  return *d;
}

inline std::optional<double> parse_optional_number(std::string_view v, const std::string& key) {
  if (text::trim(v).empty()) return std::nullopt;
  return parse_number(v, key);
}

inline std::optional<ScheduleTemplate> parse_optional_schedule(std::string_view v, const std::string& key) {
  if (text::trim(v).empty()) return std::nullopt;
  auto t = parse_schedule_template(v);
  if (!t) throw ConfigError(key, "expected a schedule such as harmonic(0.1) or powerlaw(0.1, 0.5)");
  return t;
}

inline void set_problem(ProblemSection& p, std::string_view key, std::string_view v, const std::string& full) {
  if (key == "kind") {
    const std::string kind(text::trim(v));
    if (kind != "quadratic" && kind != "log-quadratic" && kind != "square-1d")
      throw ConfigError(full, "expected quadratic, log-quadratic or square-1d");
    p.kind = kind;
  } else if (key == "generator") {
    const std::string g(text::trim(v));
    if (g != "inline" && g != "spd" && g != "normal") throw ConfigError(full, "expected inline, spd or normal");
    p.generator = g;
  } else if (key == "dim") {
    const auto d = text::to_i64(v);
    if (!d || *d < 1 || *d > 100000) throw ConfigError(full, "expected a positive integer");
    p.dim = static_cast<int>(*d);
  } else if (key == "seed") {
    const auto s = text::to_u64(v);
    if (!s) throw ConfigError(full, "expected an unsigned 64-bit integer");
    p.seed = *s;
  } else if (key == "eig_min") {
    p.eig_min = parse_number(v, full);
  } else if (key == "eig_max") {
    p.eig_max = parse_number(v, full);
  } else if (key == "A") {
    p.A.clear();
    if (text::trim(v).empty()) return;
    for (auto row : text::split(v, ';')) p.A.push_back(parse_number_list(row, full));
  } else if (key == "b") {
    p.b.clear();
    if (text::trim(v).empty()) return;
    p.b = parse_number_list(v, full);
  } else {
    throw ConfigError(full, "unknown key");
  }
}

inline void set_optimizer(OptimizerSection& o, std::string_view key, std::string_view v, const std::string& full) {
  if (key == "variant") {
    const auto var = parse_variant(text::trim(v));
    if (!var) throw ConfigError(full, "unknown variant");
    o.variant = *var;
  } else if (key == "stepsize") {
    auto t = parse_optional_schedule(v, full);
    if (!t) throw ConfigError(full, "stepsize is required");
    o.stepsize = *t;
  } else if (key == "radius") {
    o.radius = parse_optional_schedule(v, full);
  } else if (key == "error") {
    o.error = parse_optional_schedule(v, full);
  } else if (key == "nu") {
    o.nu = parse_optional_number(v, full);
  } else if (key == "theta") {
    o.theta = parse_optional_number(v, full);
  } else if (key == "sigma") {
    o.sigma = parse_optional_number(v, full);
  } else if (key == "lambda") {
    o.lambda = parse_optional_number(v, full);
  } else if (key == "seed") {
    const auto s = text::to_u64(v);
    if (!s) throw ConfigError(full, "expected an unsigned 64-bit integer");
    o.seed = *s;
  } else if (key == "grad_zero_tol") {
    o.grad_zero_tol = parse_number(v, full);
  } else if (key == "igd_mode") {
    const auto m = text::trim(v);
    if (m == "random") {
      o.igd_mode = IgdMode::RandomDirection;
    } else if (m == "counterexample") {
      o.igd_mode = IgdMode::Counterexample;
    } else {
      throw ConfigError(full, "expected random or counterexample");
    }
  } else {
    throw ConfigError(full, "unknown key");
  }
}

inline void set_run(RunSection& r, std::string_view key, std::string_view v, const std::string& full) {
  if (key == "x1") {
    const auto p = parse_initial_point(v);
    if (!p) throw ConfigError(full, "expected coordinates, zeros, or minimizer [+ offset]");
    r.x1 = *p;
  } else if (key == "horizon") {
    const auto e = parse_scalar_expr(v);
    if (!e || e->l_power != 0) throw ConfigError(full, "expected an iteration count such as 1000 or 100*n");
    r.horizon = *e;
  } else if (key == "thin") {
    const auto t = text::to_i64(v);
    if (!t || *t < 0) throw ConfigError(full, "expected a nonnegative integer");
    r.thin = static_cast<int>(*t);
  } else if (key == "tol_grad") {
    r.tol_grad = parse_number(v, full);
  } else if (key == "tol_cauchy") {
    r.tol_cauchy = parse_number(v, full);
  } else if (key == "fit") {
    const auto f = text::trim(v);
    if (f == "none" || f.empty()) {
      r.fit.reset();
    } else if (f == "minimizer") {
      r.fit = RateReference::Minimizer;
    } else if (f == "f_star") {
      r.fit = RateReference::FStar;
    } else if (f == "grad") {
      r.fit = RateReference::Grad;
    } else {
      throw ConfigError(full, "expected none, minimizer, f_star or grad");
    }
  } else if (key == "fit_model") {
    const auto m = text::trim(v);
    if (m == "linear") {
      r.fit_model = RateModel::Linear;
    } else if (m == "power") {
      r.fit_model = RateModel::Power;
    } else {
      throw ConfigError(full, "expected linear or power");
    }
  } else if (key == "fit_window") {
    r.fit_window = parse_number(v, full);
  } else if (key == "certificate") {
    const std::string c(text::trim(v));
    if (c != "none" && c != "example1" && c != "example2") throw ConfigError(full, "expected none, example1 or example2");
    r.certificate = c;
  } else if (key == "audit") {
    const auto a = text::trim(v);
    if (a == "none" || a.empty()) {
      r.audit.reset();
    } else {
      const auto t = parse_theorem(a);
      if (!t) throw ConfigError(full, "expected none, T1, C1, T3 or T4");
      r.audit = *t;
    }
  } else {
    throw ConfigError(full, "unknown key");
  }
}

inline void set_output(OutputSection& o, std::string_view key, std::string_view v, const std::string& full) {
  if (key == "dir") {
    o.dir = std::string(text::trim(v));
  } else if (key == "csv") {
    o.csv = parse_bool(v, full);
  } else if (key == "svg") {
    o.svg = parse_bool(v, full);
  } else {
    throw ConfigError(full, "unknown key");
  }
}

}  // namespace detail

/// Sets one `section.key` entry.  An empty value clears optional entries.
inline void apply_override(ExperimentConfig& cfg, std::string_view dotted_key, std::string_view value) {
  const std::string full(text::trim(dotted_key));
  const auto dot = full.find('.');
  if (dot == std::string::npos) throw ConfigError(full, "expected section.key");
  const std::string_view section = std::string_view(full).substr(0, dot);
  const std::string_view key = std::string_view(full).substr(dot + 1);
  if (section == "problem") {
    detail::set_problem(cfg.problem, key, value, full);
  } else if (section == "optimizer") {
    detail::set_optimizer(cfg.optimizer, key, value, full);
  } else if (section == "run") {
    detail::set_run(cfg.run, key, value, full);
  } else if (section == "output") {
    detail::set_output(cfg.output, key, value, full);
  } else {
    throw ConfigError(full, "unknown section");
  }
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> parse_overrides(std::string_view v, const std::string& key) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto piece : text::split(v, '|')) {
    const auto eq = piece.find('=');
    if (eq == std::string_view::npos) throw ConfigError(key, "expected section.key=value entries separated by '|'");
    out.emplace_back(std::string(text::trim(piece.substr(0, eq))), std::string(text::trim(piece.substr(eq + 1))));
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view source) {
  ExperimentConfig cfg;
  std::string section;
  std::vector<std::string> seen;
  std::istringstream in{std::string(source)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      if (section != "problem" && section != "optimizer" && section != "run" && section != "output" && section != "sweep")
        throw ConfigError(section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string_view value = text::trim(line.substr(eq + 1));
    if (section.empty()) {
      if (key != "preset") throw ConfigError(key, "unknown top-level key");
      cfg.preset = std::string(value);
      continue;
    }
    const std::string full = section + "." + key;
    if (std::find(seen.begin(), seen.end(), full) != seen.end()) throw ConfigError(full, "duplicate key");
    seen.push_back(full);
    if (section == "sweep") {
      const auto dot = key.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw ConfigError(full, "sweep entries are written axis.label = overrides");
      const std::string axis = key.substr(0, dot);
      const std::string label = key.substr(dot + 1);
      auto it = std::find_if(cfg.sweep.begin(), cfg.sweep.end(), [&](const SweepAxis& a) { return a.name == axis; });
      if (it == cfg.sweep.end()) {
        cfg.sweep.push_back({axis, {}});
        it = cfg.sweep.end() - 1;
      }
      it->cells.push_back({label, detail::parse_overrides(value, full)});
      continue;
    }
    apply_override(cfg, full, value);
  }
  // Overrides are checked against a scratch copy so bad keys fail at parse time.
  for (const auto& axis : cfg.sweep)
    for (const auto& cell : axis.cells) {
      ExperimentConfig scratch = cfg;
      for (const auto& [k, v] : cell.overrides) apply_override(scratch, k, v);
    }
  return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using text::format_double;
  std::ostringstream out;
  if (cfg.preset) out << "preset = " << *cfg.preset << "\n\n";

  const auto& p = cfg.problem;
  out << "[problem]\n";
  out << "kind = " << p.kind << "\n";
  out << "generator = " << p.generator << "\n";
  out << "dim = " << p.dim << "\n";
  out << "seed = " << p.seed << "\n";
  out << "eig_min = " << format_double(p.eig_min) << "\n";
  out << "eig_max = " << format_double(p.eig_max) << "\n";
  if (!p.A.empty()) {
    out << "A = ";
    for (std::size_t i = 0; i < p.A.size(); ++i) {
      if (i) out << "; ";
      for (std::size_t j = 0; j < p.A[i].size(); ++j) out << (j ? ", " : "") << format_double(p.A[i][j]);
    }
    out << "\n";
  }
  if (!p.b.empty()) {
    out << "b = ";
    for (std::size_t i = 0; i < p.b.size(); ++i) out << (i ? ", " : "") << format_double(p.b[i]);
    out << "\n";
  }

  const auto& o = cfg.optimizer;
  out << "\n[optimizer]\n";
  out << "variant = " << variant_name(o.variant) << "\n";
  out << "stepsize = " << format_schedule_template(o.stepsize) << "\n";
  if (o.radius) out << "radius = " << format_schedule_template(*o.radius) << "\n";
  if (o.error) out << "error = " << format_schedule_template(*o.error) << "\n";
  if (o.nu) out << "nu = " << format_double(*o.nu) << "\n";
  if (o.theta) out << "theta = " << format_double(*o.theta) << "\n";
  if (o.sigma) out << "sigma = " << format_double(*o.sigma) << "\n";
  if (o.lambda) out << "lambda = " << format_double(*o.lambda) << "\n";
  out << "seed = " << o.seed << "\n";
  out << "grad_zero_tol = " << format_double(o.grad_zero_tol) << "\n";
  out << "igd_mode = " << (o.igd_mode == IgdMode::Counterexample ? "counterexample" : "random") << "\n";

  const auto& r = cfg.run;
  out << "\n[run]\n";
  const std::string x1 = format_initial_point(r.x1);
  if (!x1.empty()) out << "x1 = " << x1 << "\n";
  out << "horizon = " << format_scalar_expr(r.horizon) << "\n";
  out << "thin = " << r.thin << "\n";
  out << "tol_grad = " << format_double(r.tol_grad) << "\n";
  out << "tol_cauchy = " << format_double(r.tol_cauchy) << "\n";
  out << "fit = " << (r.fit ? rate_reference_name(*r.fit) : "none") << "\n";
  out << "fit_model = " << rate_model_name(r.fit_model) << "\n";
  out << "fit_window = " << format_double(r.fit_window) << "\n";
  out << "certificate = " << r.certificate << "\n";
  out << "audit = " << (r.audit ? theorem_name(*r.audit) : "none") << "\n";

  const auto& w = cfg.output;
  out << "\n[output]\n";
  if (!w.dir.empty()) out << "dir = " << w.dir << "\n";
  out << "csv = " << (w.csv ? "true" : "false") << "\n";
  out << "svg = " << (w.svg ? "true" : "false") << "\n";

  if (!cfg.sweep.empty()) {
    out << "\n[sweep]\n";
    for (const auto& axis : cfg.sweep)
      for (const auto& cell : axis.cells) {
        out << axis.name << "." << cell.label << " = ";
        for (std::size_t i = 0; i < cell.overrides.size(); ++i)
          out << (i ? " | " : "") << cell.overrides[i].first << "=" << cell.overrides[i].second;
        out << "\n";
      }
  }
  return out.str();
}

}  // namespace samlab
