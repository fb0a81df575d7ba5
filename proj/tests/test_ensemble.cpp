#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stochagg/ensemble.hpp"

using namespace stochagg;

namespace {

RunConfig run_for(const ModelSpec& s, const Grid2D& g, int steps, double fraction = 0.5) {
  RunConfig c;
  c.dt = fraction * stability_bound(s, g);
  c.T = steps * c.dt;
  c.record_times = {0.0, 0.5 * c.T, c.T};
  c.seed = 21;
  return c;
}

void check_same(const EnsembleStats& a, const EnsembleStats& b) {
  REQUIRE(a.per_time.size() == b.per_time.size());
  for (std::size_t k = 0; k < a.per_time.size(); ++k) {
    const auto &x = a.per_time[k], &y = b.per_time[k];
    CHECK(x.t == y.t);
    CHECK(x.mass.mean == y.mass.mean);
    CHECK(x.mass.variance == y.mass.variance);
    CHECK(x.l2_sq.mean == y.l2_sq.mean);
    CHECK(x.min_u.min == y.min_u.min);
    CHECK(x.max_u.max == y.max_u.max);
  }
  CHECK(a.sup_l2_sq_mean == b.sup_l2_sq_mean);
  CHECK(a.sup_l2_q0_moment == b.sup_l2_q0_moment);
  CHECK(a.grad_A_q0_moment == b.grad_A_q0_moment);
  CHECK(a.bound_violations == b.bound_violations);
}

}  // namespace

TEST_CASE("sample statistics") {
  const SampleStats s = sample_stats({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  const SampleStats same = sample_stats({0.1, 0.1, 0.1});
  CHECK(same.variance == 0.0);
  CHECK(same.mean == 0.1);
  CHECK(sample_stats({7.0}).variance == 0.0);
}

TEST_CASE("noise-free paths are identical") {
  const Grid2D g = Grid2D::square(16);
  ModelSpec s;
  const Field u0 = initial_condition(g, s);
  EnsembleOptions o;
  o.n_paths = 5;
  const EnsembleResult r = run_ensemble(s, u0, run_for(s, g, 100), o);
  CHECK(r.stats.path_count == 5);
  CHECK(r.stats.failed_count == 0);
  for (const auto& pt : r.stats.per_time) {
    CHECK(pt.mass.variance == 0.0);
    CHECK(pt.l2_sq.variance == 0.0);
    CHECK(pt.min_u.variance == 0.0);
    CHECK(pt.max_u.variance == 0.0);
  }
}

TEST_CASE("single path statistics equal its diagnostics") {
  const Grid2D g = Grid2D::square(16);
  ModelSpec s;
  s.noise = NoiseKind::PropShifted;
  const Field u0 = initial_condition(g, s);
  const RunConfig c = run_for(s, g, 100);
  EnsembleOptions o;
  o.n_paths = 1;
  const EnsembleResult r = run_ensemble(s, u0, c, o);
  RngStream st = derive_stream(c.seed, 0);
  const PathResult p = run_path(u0, s, c, st);
  REQUIRE(r.stats.per_time.size() == p.records.size());
  for (std::size_t k = 0; k < p.records.size(); ++k) {
    CHECK(r.stats.per_time[k].mass.mean == p.records[k].mass);
    CHECK(r.stats.per_time[k].l2_sq.mean == p.records[k].l2_sq);
    CHECK(r.stats.per_time[k].min_u.mean == p.records[k].min_u);
    CHECK(r.stats.per_time[k].max_u.mean == p.records[k].max_u);
  }
  CHECK(r.stats.sup_l2_sq_mean == p.sup_l2_sq_records);
  CHECK(r.stats.sup_l2_sq_mean >= r.stats.per_time.back().l2_sq.mean);
}

TEST_CASE("results do not depend on the worker count") {
  const Grid2D g = Grid2D::square(16);
  ModelSpec s;
  s.noise = NoiseKind::PropShifted;
  const Field u0 = initial_condition(g, s);
  RunConfig c = run_for(s, g, 60);
  c.perturb_delta = 0.1;
  EnsembleOptions o;
  o.n_paths = 20;
  o.keep_paths = true;
  o.workers = 1;
  const EnsembleResult r1 = run_ensemble(s, u0, c, o);
  for (unsigned w : {4u, 16u}) {
    o.workers = w;
    const EnsembleResult rw = run_ensemble(s, u0, c, o);
    check_same(r1.stats, rw.stats);
    for (std::size_t p = 0; p < r1.paths.size(); ++p) {
      REQUIRE(rw.paths[p].full.has_value());
      CHECK(rw.paths[p].full->final_field == r1.paths[p].full->final_field);
    }
  }
  CHECK_FALSE(r1.paths[0].full->final_field == r1.paths[1].full->final_field);
}

TEST_CASE("mass curve comparison") {
  const Grid2D g = Grid2D::square(16);
  ModelSpec s;
  const Field u0 = initial_condition(g, s);
  EnsembleOptions o;
  o.n_paths = 2;
  const RunConfig c = run_for(s, g, 40);
  const EnsembleResult a = run_ensemble(s, u0, c, o);
  const auto rows = mass_curve_compare(a.stats, a.stats);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.diff == 0.0);
  const std::string csv = mass_curve_csv(rows);
  CHECK(csv.rfind("t,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  RunConfig other = c;
  other.record_times = {0.0, c.T};
  const EnsembleResult b = run_ensemble(s, u0, other, o);
  CHECK_THROWS_AS(mass_curve_compare(a.stats, b.stats), std::invalid_argument);

  const std::string multi = mass_curves_csv({{"det", &a.stats}, {"noisy", &a.stats}});
  CHECK(multi.rfind("t,det_mean,det_std,noisy_mean,noisy_std", 0) == 0);
}

TEST_CASE("uniform logistic mass follows the scalar ODE") {
  const Grid2D g = Grid2D::square(32);
  ModelSpec s;
  s.diffusion = DiffusionKind::Constant;
  s.diffusion_a0 = 1.0;
  s.kernel = KernelKind::Disabled;
  s.init.kind = InitKind::Constant;
  s.init.value = 0.5;
  RunConfig c;
  c.T = 12.0;
  c.record_times = {0.0, 4.0, 8.0, 12.0};
  c.dt = 12.0 / 1200;
  EnsembleOptions o;
  o.n_paths = 1;
  const EnsembleResult r = run_ensemble(s, initial_condition(g, s), c, o);
  const double a = s.alpha, m = s.mu, c0 = 0.5;
  for (const auto& pt : r.stats.per_time) {
    const double e = std::exp(a * pt.t);
    const double exact = a * c0 * e / (a - m * c0 + m * c0 * e) * quadrature_area(g);
    CHECK(std::abs(pt.mass.mean - exact) <= 0.005 * exact);
  }
}

TEST_CASE("ensemble failure threshold") {
  EnsembleStats s;
  s.path_count = 20;
  s.failed_count = 2;
  CHECK_FALSE(s.failed());
  s.failed_count = 3;
  CHECK(s.failed());
  CHECK(s.success_count() == 17);
}

TEST_CASE("refined sup estimate dominates the record sup") {
  const Grid2D g = Grid2D::square(16);
  ModelSpec s;
  s.noise = NoiseKind::PropShifted;
  const Field u0 = initial_condition(g, s);
  EnsembleOptions o;
  o.n_paths = 4;
  const RunConfig c = run_for(s, g, 80);
  const EnsembleResult coarse = run_ensemble(s, u0, c, o);
  o.sup_every_step = true;
  const EnsembleResult fine = run_ensemble(s, u0, c, o);
  CHECK(fine.stats.sup_l2_sq_mean >= coarse.stats.sup_l2_sq_mean);
  CHECK(std::isfinite(fine.stats.sup_l2_q0_moment));
}
