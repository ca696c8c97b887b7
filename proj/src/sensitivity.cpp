#include "clockmag/sensitivity.hpp"
#include <algorithm>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "clockmag/dc_protocol.hpp"
#include "clockmag/dynamics.hpp"

namespace clockmag {

using detail::expect;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRegimeLimit = 0.9;   // independence assumption per error term
constexpr double kMaskThreshold = 0.5; // exclusion of the combined-error region

struct ErrorPair {
  double eps_d;
  double eps_pb;
};

ErrorPair error_pair(const DimensionlessPoint& p) {
  const double t_pi = 1.0 - p.T_tilde;
  const double pb_arg = p.B_tilde_f * t_pi;
  ErrorPair e;
  e.eps_pb = 1.0 / (1.0 + pb_arg * pb_arg / (1.0 + p.Omega_ratio * p.Omega_ratio));
  const double ramp_arg = p.B_tilde_f * p.T_tilde;
  e.eps_d = (1.0 / (p.Omega_ratio * p.Omega_ratio)) / (1.0 + 0.5 * ramp_arg * ramp_arg);
  return e;
}

double sensitivity_value(const DimensionlessPoint& p, const ErrorPair& e) {
  const double ideal = p.B_tilde_f / (std::sqrt(static_cast<double>(p.N)) * p.Omega_ratio);
  const double d_factor = std::sqrt((1.0 + e.eps_d) / (1.0 - e.eps_d));
  const double pb_factor = (1.0 + e.eps_pb) / (1.0 - e.eps_pb);  // squared sqrt, two pulses
  return ideal * d_factor * pb_factor;
}

SensitivitySettings settings_at(double B_tilde_f, double Omega_ratio, double T_tilde) {
  SensitivitySettings s;
  s.B_tilde_f = B_tilde_f;
  s.T_tilde = T_tilde;
  s.Omega_ratio = Omega_ratio;
  s.Omega1_tau = 1.0 / (1.0 - T_tilde);
  s.Omega2_tau = Omega_ratio * s.Omega1_tau;
  return s;
}

// Golden-section minimization on [lo, hi].
template <typename F>
double golden_minimize(F f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

double fisher_information(const std::function<double(double)>& P2_fn, double delta, double h) {
  expect(h > 0, "finite-difference step must be positive");
  const double p = P2_fn(delta);
  if (p <= 1e-12 || p >= 1.0 - 1e-12)
    throw std::domain_error("P2 at a boundary: Fisher information diverges");

  auto central = [&](double step) {
    return (P2_fn(delta + step) - P2_fn(delta - step)) / (2.0 * step);
  };
  const double slope = (4.0 * central(h / 2) - central(h)) / 3.0;  // Richardson
  return slope * slope / (p * (1.0 - p));
}

double cramer_rao_delta(double fisher, int N) {
  expect(N >= 1, "N must be >= 1");
  if (fisher <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(static_cast<double>(N) * fisher);
}

double p2_sensitivity_fringe(double delta, double B_f, double Omega_ratio) {
  return p2_exact(std::atan2(delta, B_f), kPi / 2.0, Omega_ratio);
}

double generic_leak_correction(double delta0, double eps) {
  expect(eps >= 0.0 && eps < 1.0, "eps must be in [0, 1)");
  return delta0 * std::sqrt((1.0 + eps) / (1.0 - eps));
}

double power_broadening_error(const DimensionlessPoint& point) {
  return error_pair(point).eps_pb;
}

double diabatic_error_at_range(const DimensionlessPoint& point) {
  expect(point.Omega_ratio > 0, "Omega_ratio must be positive");
  return error_pair(point).eps_d;
}

SensitivityResult full_sensitivity(const DimensionlessPoint& point) {
  expect(point.B_tilde_f > 0, "B_tilde_f must be positive");
  expect(point.Omega_ratio > 0, "Omega_ratio must be positive");
  expect(point.T_tilde >= 0 && point.T_tilde < 1, "T_tilde must be in [0, 1)");
  expect(point.N >= 1, "N must be >= 1");

  const ErrorPair e = error_pair(point);
  if (e.eps_d >= kRegimeLimit || e.eps_pb >= kRegimeLimit)
    throw std::domain_error("errors too large to treat independently");

  SensitivityResult result;
  result.eps_d = e.eps_d;
  result.eps_pb = e.eps_pb;
  result.delta_tilde = sensitivity_value(point, e);
  result.settings = settings_at(point.B_tilde_f, point.Omega_ratio, point.T_tilde);
  return result;
}

SensitivityResult analytic_optimum(double B_tilde_f, double T_tilde, int N) {
  expect(B_tilde_f > 0, "B_tilde_f must be positive");
  const double b2 = B_tilde_f * B_tilde_f;
  SensitivityResult result;
  result.delta_tilde = 2.0 * std::sqrt(2.0) / std::sqrt(static_cast<double>(N)) *
                       (1.0 + T_tilde + (1.0 + 3.0 * T_tilde) / b2);
  const double ratio = (1.0 - T_tilde) * B_tilde_f / std::sqrt(2.0);
  DimensionlessPoint p{B_tilde_f, ratio, T_tilde, N};
  const ErrorPair e = error_pair(p);
  result.eps_d = e.eps_d;
  result.eps_pb = e.eps_pb;
  result.settings = settings_at(B_tilde_f, ratio, T_tilde);
  return result;
}

const OptimizedPoint& OptimizationGrid::at(int bi, int oi) const {
  return points[static_cast<size_t>(bi) * Omega_grid.size() + oi];
}

namespace {

OptimizedPoint optimize_T(double B, double Omega_ratio, int N) {
  DimensionlessPoint p{B, Omega_ratio, 0.0, N};
  auto value = [&](double T) {
    p.T_tilde = T;
    const ErrorPair e = error_pair(p);
    if (e.eps_d >= kRegimeLimit || e.eps_pb >= kRegimeLimit)
      return std::numeric_limits<double>::max();
    return sensitivity_value(p, e);
  };
  const double T_opt = golden_minimize(value, 0.0, 0.9, 1e-6);
  p.T_tilde = T_opt;
  const ErrorPair e = error_pair(p);

  OptimizedPoint out;
  out.T_opt = T_opt;
  out.Omega_opt = Omega_ratio;
  out.eps_d = e.eps_d;
  out.eps_pb = e.eps_pb;
  out.masked = (e.eps_d + e.eps_pb > kMaskThreshold);
  out.delta_tilde = out.masked ? std::numeric_limits<double>::quiet_NaN()
                               : sensitivity_value(p, e);
  return out;
}

}  // namespace

OptimizationGrid numeric_optimize(const std::vector<double>& B_grid,
                                  const std::vector<double>& Omega_grid, int N, int threads) {
  expect(!B_grid.empty() && !Omega_grid.empty(), "grids must be nonempty");
  OptimizationGrid grid;
  grid.B_grid = B_grid;
  grid.Omega_grid = Omega_grid;
  grid.points.resize(B_grid.size() * Omega_grid.size());

  auto worker = [&](size_t begin, size_t end) {
    for (size_t idx = begin; idx < end; ++idx) {
      const size_t bi = idx / Omega_grid.size();
      const size_t oi = idx % Omega_grid.size();
      grid.points[idx] = optimize_T(B_grid[bi], Omega_grid[oi], N);
    }
  };

  const size_t total = grid.points.size();
  if (threads <= 1) {
    worker(0, total);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (total + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const size_t begin = t * chunk;
      if (begin >= total) break;
      pool.emplace_back(worker, begin, std::min(begin + chunk, total));
    }
    for (auto& th : pool) th.join();
  }
  return grid;
}

OptimizedPoint optimize_at_B(double B_tilde_f, int N) {
  auto value = [&](double ratio) {
    const OptimizedPoint p = optimize_T(B_tilde_f, ratio, N);
    return p.masked ? std::numeric_limits<double>::max() : p.delta_tilde;
  };
  // Coarse log bracket first: the masked region forms plateaus a plain golden
  // search can stall on.
  const double lo = std::max(0.2, 0.05 * B_tilde_f), hi = 4.0 * B_tilde_f;
  const int scan = 257;
  int best = -1;
  double best_value = std::numeric_limits<double>::max();
  for (int i = 0; i < scan; ++i) {
    const double ratio = lo * std::exp(std::log(hi / lo) * i / (scan - 1));
    const double v = value(ratio);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0) return OptimizedPoint{};
  auto ratio_at = [&](int i) {
    return lo * std::exp(std::log(hi / lo) * std::clamp(i, 0, scan - 1) / (scan - 1));
  };
  const double ratio_opt =
      golden_minimize(value, ratio_at(best - 1), ratio_at(best + 1), 1e-9 * B_tilde_f);
  return optimize_T(B_tilde_f, ratio_opt, N);
}

SensitivityResult self_consistent_sensitivity(double B_tilde_f, double T_tilde, int N) {
  expect(B_tilde_f > 2, "series validity requires B_tilde_f > 2");
  expect(T_tilde >= 0 && T_tilde < 1, "T_tilde must be in [0, 1)");

  const double t_pi = 1.0 - T_tilde;
  const double ratio = std::sqrt(1.0 + 0.5 * t_pi * t_pi * B_tilde_f * B_tilde_f);

  DimensionlessPoint p{B_tilde_f, ratio, T_tilde, N};
  const double eps_pb = error_pair(p).eps_pb;
  const double pb_factor = (1.0 + eps_pb) / (1.0 - eps_pb);

  // S = A (1 + cS)/(1 - cS) for S = delta_tilde^2, with eps_D = c S.
  const double ideal = B_tilde_f / (std::sqrt(static_cast<double>(N)) * ratio);
  const double A = ideal * ideal * pb_factor * pb_factor;
  const double ramp_arg = B_tilde_f * T_tilde;
  const double c = 1.0 / (B_tilde_f * B_tilde_f * (1.0 + 0.5 * ramp_arg * ramp_arg));

  const double disc = (1.0 - A * c) * (1.0 - A * c) - 4.0 * A * c;
  if (disc < 0.0) throw std::domain_error("self-consistent solution out of regime");
  const double S = ((1.0 - A * c) - std::sqrt(disc)) / (2.0 * c);

  SensitivityResult result;
  result.delta_tilde = std::sqrt(S);
  result.eps_pb = eps_pb;
  result.eps_d = c * S;
  result.settings = settings_at(B_tilde_f, ratio, T_tilde);
  return result;
}

double zeeman_ramsey_population(double delta, double T) {
  expect(T >= 0, "T must be nonnegative");
  return 0.5 + 0.5 * std::cos(delta * T);
}

double zeeman_ramsey_sensitivity(int N, double tau_Z) {
  expect(tau_Z > 0, "tau_Z must be positive");
  // Quadrature working point of the cosine fringe. The 2/(sqrt(N) tau_Z)
  // constant corresponds to an effective interrogation of tau_Z/2; the
  // Fisher information of the bare fringe at quadrature is T^2.
  const double T_eff = 0.5 * tau_Z;
  auto fringe = [T_eff](double delta) {
    return 0.5 + 0.5 * std::cos(delta * T_eff + kPi / 2.0);
  };
  const double fisher = fisher_information(fringe, 0.0, 1e-6 / T_eff);
  return cramer_rao_delta(fisher, N);
}

MLEResult mle_monte_carlo(double B_f, double Omega_ratio, int N_samples, int replicas,
                          std::uint64_t seed) {
  expect(B_f > 0 && Omega_ratio > 0, "B_f and Omega_ratio must be positive");
  expect(N_samples >= 100 && replicas >= 2, "need N >= 100 and replicas >= 2");

  auto fringe = [&](double d) { return p2_sensitivity_fringe(d, B_f, Omega_ratio); };

  // Monotone inversion branch: out to just inside the first extremum of the
  // fringe in the rotation angle.
  const double phi_star = golden_minimize(
      [&](double phi) { return -p2_exact(phi, kPi / 2.0, Omega_ratio); }, 0.0, kPi / 2.0,
      1e-10);
  const double delta_max = B_f * std::tan(0.98 * phi_star);
  const double p_lo = fringe(-delta_max), p_hi = fringe(delta_max);

  auto invert = [&](double p_hat) {
    if (p_hat <= p_lo) return -delta_max;
    if (p_hat >= p_hi) return delta_max;
    double lo = -delta_max, hi = delta_max;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (fringe(mid) < p_hat)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  std::mt19937_64 rng(seed);
  const double p_true = fringe(0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < replicas; ++r) {
    int successes = 0;
    for (int i = 0; i < N_samples; ++i) successes += (uniform01(rng) < p_true) ? 1 : 0;
    const double estimate = invert(static_cast<double>(successes) / N_samples);
    sum += estimate;
    sum_sq += estimate * estimate;
  }
  const double mean = sum / replicas;

  MLEResult out;
  out.sigma = std::sqrt(std::max(0.0, sum_sq / replicas - mean * mean));
  out.predicted = B_f / (std::sqrt(static_cast<double>(N_samples)) * Omega_ratio);
  return out;
}

}  // namespace clockmag
