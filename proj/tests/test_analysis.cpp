#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "samlab/analysis.hpp"
#include "support/oracles.hpp"

using namespace samlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

Matrix diag12() {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 2;
  return a;
}

void check_implications(const ConvergenceReport& r) {
  if (r.verdict(5)) CHECK(r.verdict(3));
  if (r.verdict(3)) CHECK(r.verdict(2));
  if (r.verdict(5)) CHECK(r.verdict(4));
  if (r.verdict(2)) CHECK(r.verdict(1));
}

}  // namespace

TEST_CASE("GD with diminishing steps satisfies all five properties") {
  // Eigenvalues in [1, 1.3] and t_k = 1.5/(k+1): the error contracts like
  // k^(-1.5 lambda), about 3e-8 at k = 1e5.
  Xoshiro256 rng(8);
  const Problem p = make_quadratic(random_spd_matrix(5, 1, 1.3, rng), rng.normal_vector(5));
  OptimizerSpec s;
  s.stepsize = ScheduleSpec::harmonic(1.5, 1.0);
  s.grad_zero_tol = 0.0;
  const Trace tr = run(p, s, Vector::Zero(5), 100000);
  const auto r = assess_convergence(tr, p, 1e-6, 1e-6);
  for (int i = 1; i <= 5; ++i) CHECK(r.verdict(i));
  check_implications(r);
}

TEST_CASE("Constant-step SAM trap fails property (5)") {
  const Problem p = make_quadratic(diag12(), Vector::Zero(2));
  OptimizerSpec s;
  s.variant = Variant::SAM;
  s.stepsize = ScheduleSpec::constant(0.8);
  s.radius = ScheduleSpec::constant(0.1);
  const Trace tr = run(p, s, vec({0.2, 0}), 10000);
  const auto r = assess_convergence(tr, p, 1e-6, 1e-6);
  CHECK_FALSE(r.verdict(5));
  CHECK_FALSE(r.verdict(1));
  // The iterates settle on the 2-cycle +-0.08/1.2 along e1.
  CHECK_THAT(*r.dist_to_minimizer, WithinAbs(0.08 / 1.2, 1e-12));
  check_implications(r);
}

TEST_CASE("single stationary point trace") {
  const Problem p = make_square_1d();
  const Trace tr = run(p, OptimizerSpec{}, vec({0}), 10);
  const auto r = assess_convergence(tr, p, 1e-6, 1e-6);
  for (int i = 1; i <= 5; ++i) CHECK(r.verdict(i));
}

TEST_CASE("verdicts unaffected by iterate thinning except (5)") {
  Xoshiro256 rng(9);
  const Problem p = make_quadratic(random_spd_matrix(4, 1, 3, rng), rng.normal_vector(4));
  OptimizerSpec s;
  s.variant = Variant::SAM;
  s.stepsize = ScheduleSpec::harmonic(0.3);
  s.radius = ScheduleSpec::constant(0.01);
  const Trace a = run(p, s, Vector::Ones(4), 5000, 1);
  const Trace b = run(p, s, Vector::Ones(4), 5000, 13);
  const auto ra = assess_convergence(a, p, 1e-3, 1e-3), rb = assess_convergence(b, p, 1e-3, 1e-3);
  for (int i = 1; i <= 4; ++i) CHECK(ra.verdict(i) == rb.verdict(i));
  CHECK(ra.liminf_grad == rb.liminf_grad);
  CHECK(ra.f_limit_gap == rb.f_limit_gap);
  CHECK(rb.iterate_cauchy <= ra.iterate_cauchy);
}

TEST_CASE("assess_convergence rejects nonfinite traces") {
  OptimizerSpec g;
  g.stepsize = ScheduleSpec::constant(10.0);
  const Problem p = make_square_1d();
  const Trace tr = run(p, g, vec({1}), 100000);
  CHECK_THROWS_AS(assess_convergence(tr, p, 1e-6, 1e-6), AnalysisError);
}

TEST_CASE("certify_example1") {
  const Vector b = Vector::Zero(2);
  const auto c = certify_example1(diag12(), b, 0.8, 0.1, vec({0.2, 0}), 10000);
  CHECK_THAT(c.t_lower, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(c.t_upper, WithinAbs(1.0, 1e-15));
  CHECK_THAT(c.trap_radius, WithinAbs(0.4, 1e-14));
  CHECK(c.trapped);
  CHECK(c.lower_bound_holds);
  CHECK(c.passed);
  CHECK(c.min_dist > 0.0);
  // First step: 0.2 * 0.2 - 0.08 = -0.04 along e1.
  CHECK_THAT(c.min_dist, WithinAbs(0.04, 1e-15));
  CHECK(c.min_lower_bound_slack >= -1e-12);

  CHECK_THROWS_AS(certify_example1(diag12(), b, 0.5, 0.1, vec({0.2, 0}), 10), ParameterOutsideWindow);
  CHECK_THROWS_AS(certify_example1(diag12(), b, 0.8, 0.1, vec({0.5, 0}), 10), ParameterOutsideWindow);

  // Doubling rho doubles the per-step floor t rho lambda_min.
  const auto c2 = certify_example1(diag12(), b, 0.8, 0.2, vec({0.2, 0}), 1000);
  CHECK_THAT(c2.trap_radius, WithinAbs(2 * c.trap_radius, 1e-14));
  const double floor1 = 0.8 * 0.1 * c.lambda_min, floor2 = 0.8 * 0.2 * c2.lambda_min;
  CHECK_THAT(floor2, WithinAbs(2 * floor1, 1e-15));
}

TEST_CASE("certify_example2 telescopes") {
  const auto t = ScheduleSpec::harmonic(0.5, 1.0);
  for (std::int64_t K : {1, 10, 1000, 10000}) {
    const auto c = certify_example2(1.0, 2.0, t, K);
    CHECK_THAT(c.final_gap, WithinAbs(1.0 / static_cast<double>(K + 1), 1e-12));
    CHECK(c.stays_above);
    CHECK(c.passed);
    CHECK(c.limit_gradient == 2.0);
  }
  const auto fixed = certify_example2(1.0, 1.0, t, 100);
  CHECK(fixed.final_x == 1.0);
  CHECK(fixed.final_gap == 0.0);
  CHECK_THROWS_AS(certify_example2(1.0, 2.0, ScheduleSpec::constant(0.7), 10), AnalysisError);
  CHECK_THROWS_AS(certify_example2(1.0, 2.0, ScheduleSpec::power_law(0.5, 2), 10), AnalysisError);
}

TEST_CASE("fit_rate") {
  const Problem p = make_quadratic(Matrix::Identity(3, 3), Vector::Zero(3));
  OptimizerSpec s;
  s.stepsize = ScheduleSpec::constant(0.5);
  const Trace tr = run(p, s, Vector::Ones(3), 60);
  const auto fit = fit_rate(tr, p, RateReference::Minimizer, RateModel::Linear);
  CHECK_THAT(fit.slope, WithinAbs(-std::numbers::ln2, 1e-12));
  CHECK(fit.r_squared > 0.9999);

  // Synthetic power law k^-2 and exact geometric data.
  std::vector<double> ks, pw, geo;
  for (int k = 1; k <= 1000; ++k) {
    ks.push_back(k);
    pw.push_back(1.0 / (static_cast<double>(k) * k));
    geo.push_back(3.0 * std::pow(0.9, k));
  }
  const auto pf = fit_rate_series(ks, pw, RateModel::Power);
  CHECK_THAT(pf.slope, WithinAbs(-2.0, 1e-10));
  const auto gf = fit_rate_series(ks, geo, RateModel::Linear);
  CHECK_THAT(std::exp(gf.slope), WithinAbs(0.9, 1e-6));

  // q = (s - 1)/(2 s - 1): s = -1 -> 2/3.
  CHECK_THAT(*implied_kl_exponent(-1.0), WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_FALSE(implied_kl_exponent(0.5));

  std::vector<double> zeros(10, 0.0), ks10(ks.begin(), ks.begin() + 10);
  CHECK(fit_rate_series(ks10, zeros, RateModel::Linear).exact);
  CHECK_THROWS_AS(fit_rate_series(ks10, zeros, RateModel::Linear, 0.0), AnalysisError);
}

TEST_CASE("audit: almost-constant radius under C1") {
  Xoshiro256 rng(10);
  const Problem p = make_quadratic(random_spd_matrix(4, 1, 5, rng), rng.normal_vector(4));
  OptimizerSpec s;
  s.variant = Variant::SAM;
  s.stepsize = ScheduleSpec::harmonic(1.0);
  // The tail test on sum t_k rho_k needs C ln 2 < 1e-2 with t = 1/k.
  s.radius = ScheduleSpec::power_law(0.01, 0.001);
  const auto rep = audit_theorem_conditions(s, p, TheoremTag::C1);
  INFO(rep.hypotheses.size());
  CHECK(rep.all_passed());

  s.stepsize = ScheduleSpec::constant(0.1);
  const auto t1 = audit_theorem_conditions(s, p, TheoremTag::T1);
  CHECK_FALSE(t1.find("sum t_k^2 < inf")->passed);
}

TEST_CASE("audit: perfect-square spike radius") {
  const Problem p = make_square_1d();
  OptimizerSpec s;
  s.variant = Variant::SAM;
  s.stepsize = ScheduleSpec::harmonic(0.1);
  s.radius = ScheduleSpec::square_spike(0.1, 1.0);
  const auto rep = audit_theorem_conditions(s, p, TheoremTag::C1);
  CHECK(rep.find("sum t_k rho_k < inf")->passed);
  CHECK(rep.find("limsup rho_k < 2/L")->value == 0.1);
}

TEST_CASE("audit: USAM radius above nu/L fails T4") {
  const Problem p = make_quadratic(Matrix::Identity(2, 2) * 4.0, Vector::Zero(2));
  OptimizerSpec s;
  s.variant = Variant::USAM;
  s.nu = 0.25;
  s.stepsize = ScheduleSpec::constant(0.864 / 4.0);
  s.radius = ScheduleSpec::constant(0.25 / 4.0);
  auto rep = audit_theorem_conditions(s, p, TheoremTag::T4);
  CHECK(rep.all_passed());
  CHECK_THAT(rep.find("t_k <= (2 - 2nu - delta)/(L(1+nu)^2)")->value, WithinAbs(0.15, 1e-12));
  s.radius = ScheduleSpec::constant(0.3 / 4.0);
  rep = audit_theorem_conditions(s, p, TheoremTag::T4);
  CHECK_FALSE(rep.find("rho_k <= nu/L")->passed);
  CHECK_THAT(implied_delta(4.0, 0.25, 0.864 / 4.0), WithinAbs(0.15, 1e-12));
}

TEST_CASE("three sequences") {
  std::vector<double> a, b, g;
  for (int k = 1; k <= 100000; ++k) {
    a.push_back(1.0 / k);
    b.push_back(1.0 / k);
    g.push_back(1.0 / (static_cast<double>(k) * k));
  }
  const auto ok = check_three_sequences(a, b, g);
  CHECK(ok.recursion_holds);
  CHECK(ok.summability_holds);
  CHECK(ok.alpha_vanishes);

  std::vector<double> ones(a.size(), 1.0), zeros(a.size(), 0.0);
  const auto bad = check_three_sequences(ones, b, zeros);
  CHECK_FALSE(bad.summability_holds);
  CHECK_FALSE(bad.alpha_vanishes);
}

TEST_CASE("three sequences on an IGD trace over the log-quadratic") {
  Xoshiro256 rng(2);
  auto [a, b] = random_invertible_system(5, rng);
  const Problem p = make_log_quadratic(a, b);
  const double L = *p.lipschitz_L;
  OptimizerSpec s;
  s.variant = Variant::IGD;
  // 1/k is too slow on this landscape (the local curvature is far below L);
  // 1/k^0.6 still sums to infinity.
  s.stepsize = ScheduleSpec::power_law(1.0 / L, 0.6);
  s.error = ScheduleSpec::power_law(0.01, 1.0);
  s.rng_seed = 4;
  const Trace tr = run(p, s, *p.minimizer + Vector::Constant(5, 0.05), 100000);
  std::vector<double> alpha, beta, gamma;
  for (const auto& r : tr.records) {
    if (r.t_k == 0.0) break;  // terminal row
    alpha.push_back(r.grad_norm);
    beta.push_back(L * r.t_k);
    gamma.push_back(L * r.t_k * r.rho_or_eps);
  }
  const auto rep = check_three_sequences(alpha, beta, gamma);
  CHECK(rep.recursion_holds);
  CHECK(rep.summability_holds);
  CHECK(rep.alpha_final < 1e-3);
}
