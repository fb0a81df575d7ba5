#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"

namespace stochagg {

inline constexpr double kDefaultNu = 1e-3;

// Regularized squared negative part:
//   u^2 - nu^2/6               u < -nu
//   -u^4/(2nu^2) - 4u^3/(3nu)  -nu <= u < 0
//   0                          u >= 0
double stampacchia_R(double u, double nu);

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double l2_sq = 0.0;
  double energy_A_l1 = 0.0;   // || AA(u) ||_L1
  double grad_A_l2_sq = 0.0;  // || grad A(u) ||^2_L2 on faces
  double stamp_neg = 0.0;     // int R_nu(u)
  double stamp_upper = 0.0;   // int R_nu(ubar - u)
  std::uint64_t clamp_count = 0;
};

// Column order of the series CSV; bump kSeriesVersion when it changes.
inline constexpr int kSeriesVersion = 1;
std::string series_header();
std::string series_line(const DiagnosticsRow& row);

DiagnosticsRow evaluate_row(const Field& u, const ModelSpec& spec, double nu, double t = 0.0,
                            std::uint64_t clamp_count = 0);

// Discrete || grad A(u) ||^2 from face differences, nodal-sum weights.
double grad_A_l2_sq(const Field& u, const ModelSpec& spec);

struct BoundExcursion {
  double value = 0.0;
  double t = 0.0;
  int i = -1;
  int j = -1;
};

struct BoundViolationSummary {
  double tol = 0.0;
  std::uint64_t node_steps = 0;
  std::uint64_t below = 0;  // u < -tol
  std::uint64_t above = 0;  // u > ubar + tol
  BoundExcursion worst_below;  // most negative value seen (if below > 0)
  BoundExcursion worst_above;  // largest value seen (if above > 0)

  std::uint64_t violations() const { return below + above; }
  double fraction() const { return node_steps ? static_cast<double>(violations()) / node_steps : 0.0; }
};

// Streaming counter of node-steps outside [-tol, ubar + tol].
class BoundMonitor {
 public:
  BoundMonitor(double ubar, double tol);
  void observe(const Field& u, double t);
  const BoundViolationSummary& summary() const { return s_; }

 private:
  double ubar_;
  BoundViolationSummary s_;
};

struct TimedField {
  double t = 0.0;
  Field u;
};

BoundViolationSummary bound_violation_report(std::span<const TimedField> trajectory, double ubar, double tol);

}  // namespace stochagg
