#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace clockmag {

// Dimensionless working point: B_tilde = mu B_f tau_clk / hbar, T_tilde =
// T / tau_clk, with the time budget T + T_pi = tau_clk (T_pi = 1/Omega1).
struct DimensionlessPoint {
  double B_tilde_f = 0.0;
  double Omega_ratio = 0.0;
  double T_tilde = 0.0;
  int N = 1;
};

// Optimal-settings relations in tau_clk = 1 units.
struct SensitivitySettings {
  double Omega1_tau = 0.0;  // Omega1 * tau_clk = 1/(1 - T_tilde)
  double Omega2_tau = 0.0;  // Omega2 * tau_clk = B_tilde / sqrt(2)
  double Omega_ratio = 0.0;
  double B_tilde_f = 0.0;
  double T_tilde = 0.0;
};

struct SensitivityResult {
  double delta_tilde = 0.0;  // dimensionless smallest resolvable signal
  double eps_pb = 0.0;
  double eps_d = 0.0;
  SensitivitySettings settings;
};

// Bernoulli Fisher information (dP/ddelta)^2 / (P(1-P)) with a
// Richardson-refined central difference of step h.
double fisher_information(const std::function<double(double)>& P2_fn, double delta, double h);

double cramer_rao_delta(double fisher, int N);

// P2(delta) at the theta = pi/2 working point (the sensitivity fringe).
double p2_sensitivity_fringe(double delta, double B_f, double Omega_ratio);

// Delta = Delta0 sqrt((1+eps)/(1-eps)) for a generic leak error.
double generic_leak_correction(double delta0, double eps);

// eps_PB = 1 / (1 + (B_tilde (1 - T_tilde))^2 / (1 + ratio^2)).
double power_broadening_error(const DimensionlessPoint& point);

// Stringent diabatic bound evaluated at the measurement range delta_max =
// B_f / Omega_ratio.
double diabatic_error_at_range(const DimensionlessPoint& point);

// Delta_tilde = (B_tilde / (sqrt(N) ratio)) sqrt((1+eD)/(1-eD)) (1+ePB)/(1-ePB);
// the power-broadening factor enters squared for the two pulses. Throws
// outside the independent-error regime (either eps >= 0.9).
SensitivityResult full_sensitivity(const DimensionlessPoint& point);

// Expanded optimum along Omega_ratio = (1 - T_tilde) B_tilde / sqrt(2):
// Delta_tilde = (2 sqrt(2)/sqrt(N)) (1 + T_tilde + (1 + 3 T_tilde)/B_tilde^2).
SensitivityResult analytic_optimum(double B_tilde_f, double T_tilde, int N);

struct OptimizedPoint {
  double delta_tilde = 0.0;
  double T_opt = 0.0;
  double Omega_opt = 0.0;  // the ratio the point was evaluated at
  double eps_pb = 0.0;
  double eps_d = 0.0;
  bool masked = true;  // excluded where the errors are not small/independent
};

struct OptimizationGrid {
  std::vector<double> B_grid;
  std::vector<double> Omega_grid;
  std::vector<OptimizedPoint> points;  // row-major over (B, Omega)
  const OptimizedPoint& at(int bi, int oi) const;
};

// Per-point golden-section minimization of full_sensitivity over
// T_tilde in [0, 0.9] (tolerance 1e-6). Points with eps_D + eps_PB > 0.5 at
// the optimum are masked.
OptimizationGrid numeric_optimize(const std::vector<double>& B_grid,
                                  const std::vector<double>& Omega_grid, int N,
                                  int threads = 1);

// 1-D continuous optimum over Omega_ratio (and T_tilde) at fixed B_tilde.
OptimizedPoint optimize_at_B(double B_tilde_f, int N);

// Self-consistent solution with delta -> Delta delta inside eps_D, at the
// analytic Omega_ratio optimum sqrt(1 + (1-T_tilde)^2 B_tilde^2 / 2).
SensitivityResult self_consistent_sensitivity(double B_tilde_f, double T_tilde, int N);

// Zeeman-Ramsey baseline fringe P = 1/2 + cos(delta T)/2 (mu = hbar = 1).
double zeeman_ramsey_population(double delta, double T);

// Baseline 2/(sqrt(N) tau_Z): Fisher information of the fringe at its
// quadrature working point with the half-window interrogation convention
// behind that constant.
double zeeman_ramsey_sensitivity(int N, double tau_Z);

struct MLEResult {
  double sigma = 0.0;      // sample std of the estimator
  double predicted = 0.0;  // Cramer-Rao value B_f / (sqrt(N) ratio)
};

// Seeded Monte-Carlo maximum-likelihood check of the Cramer-Rao bound:
// replicas of N Bernoulli draws from the sensitivity fringe at delta = 0,
// inverted on the monotone branch.
MLEResult mle_monte_carlo(double B_f, double Omega_ratio, int N_samples, int replicas,
                          std::uint64_t seed);

}  // namespace clockmag
