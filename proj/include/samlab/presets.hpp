#pragma once

// Built-in experiment configs, stored as config text so they exercise the
// same parser as user files.

#include <array>
#include <optional>
#include <string_view>

#include "samlab/config.hpp"

namespace samlab {

struct Preset {
  std::string_view name;
  std::string_view summary;
  std::string_view text;
};

inline constexpr std::array<Preset, 6> kPresets{{
    {"example1", "constant-stepsize SAM trapped near the minimizer of diag(1, 2)",
     R"(preset = example1

[problem]
kind = quadratic
generator = inline
A = 1, 0; 0, 2
b = 0, 0

[optimizer]
variant = sam
stepsize = constant(0.8)
radius = constant(0.1)

[run]
x1 = minimizer + 0.2, 0
horizon = 10000
certificate = example1
)"},
    {"example2", "constant-error IGD on x^2 converging to the nonstationary point 1",
     R"(preset = example2

[problem]
kind = square-1d

[optimizer]
variant = igd
igd_mode = counterexample
stepsize = harmonic(0.5, 1)
error = constant(2)
radius = constant(1)

[run]
x1 = 2
horizon = 10000
certificate = example2
)"},
    {"appendixF", "SAM radius sweep on random log-quadratics, n in {2, 20, 50, 100}",
     R"(preset = appendixF

[problem]
kind = log-quadratic
generator = normal
dim = 20
seed = 2024

[optimizer]
variant = sam
stepsize = harmonic(0.1/n)
radius = constant(0.1)

[run]
x1 = minimizer + 0.1/n/n
horizon = 100*n

[sweep]
dim.n2 = problem.dim=2
dim.n20 = problem.dim=20
dim.n50 = problem.dim=50
dim.n100 = problem.dim=100
method.gd = optimizer.variant=gd | optimizer.radius=
method.sam-const = optimizer.variant=sam | optimizer.radius=constant(0.1)
method.sam-p1 = optimizer.variant=sam | optimizer.radius=powerlaw(0.1, 1)
method.sam-p0.1 = optimizer.variant=sam | optimizer.radius=powerlaw(0.1, 0.1)
method.sam-p0.001 = optimizer.variant=sam | optimizer.radius=powerlaw(0.1, 0.001)
)"},
    {"convex-T1", "SAM with harmonic stepsize and constant radius on a random strongly convex quadratic",
     R"(preset = convex-T1

[problem]
kind = quadratic
generator = spd
dim = 20
seed = 7
eig_min = 1
eig_max = 2

[optimizer]
variant = sam
stepsize = harmonic(0.5/L)
radius = constant(0.05)

[run]
x1 = minimizer + 0.01
horizon = 100000
tol_grad = 1e-3
audit = T1
)"},
    {"usam-rate-q12", "USAM at the relative-error boundary, linear rate on a quadratic",
     R"(preset = usam-rate-q12

[problem]
kind = quadratic
generator = spd
dim = 10
seed = 11
eig_min = 1
eig_max = 10

[optimizer]
variant = usam
stepsize = constant(0.864/L)
radius = constant(0.25/L)
nu = 0.25

[run]
x1 = minimizer + 1
horizon = 150
fit = minimizer
fit_model = linear
audit = T4
)"},
    {"schedule-audit", "harmonic stepsize with an almost-constant radius under the nonconvex hypotheses",
     R"(preset = schedule-audit

[problem]
kind = quadratic
generator = spd
dim = 10
seed = 3
eig_min = 1
eig_max = 5

[optimizer]
variant = sam
stepsize = harmonic(0.1)
radius = powerlaw(0.1, 0.001)

[run]
x1 = minimizer + 0.1
horizon = 2000
audit = C1
)"},
}};

inline const Preset* find_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return &p;
  return nullptr;
}

inline ExperimentConfig load_preset(std::string_view name) {
  const Preset* p = find_preset(name);
  if (!p) throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
  return parse_config(p->text);
}

}  // namespace samlab
