#pragma once

#include <Eigen/Dense>
#include <vector>

#include "clockmag/dynamics.hpp"
#include "clockmag/hyperfine.hpp"

namespace clockmag {

// Two-pulse Ramsey-style DC magnetometry in the clock subspace. The field
// starts aligned with the ellipse major axis, the signal rotates it by phi
// inside the ellipse plane (positive phi towards +Omega2), and the second
// pulse is phase shifted by theta2.
struct DCProtocolSpec {
  PolarizationEllipse ellipse;
  double B_i = 0.0;
  double B_f = 0.0;
  double phi = 0.0;
  double theta2 = 0.0;
  double pulse1_area = 1.5707963267948966;  // Omega1 * T1, rad
  double pulse2_area = 1.5707963267948966;
  bool echo = false;  // calibrated pi-pulse between the two pi/2-pulses
};

struct FringeResult {
  std::vector<double> theta_grid;
  std::vector<double> P2_values;
  double theta_f = 0.0;
  double visibility = 0.0;
};

struct LinearizedP2 {
  double value = 0.0;
  bool regime_ok = true;  // ratio * |delta| / B_f <= 0.2
};

// P2 = 1/2 + (1/2) sin(Omega_eff T2) * ratio * (|delta|/B_f) * (O2_hat . delta_hat)
// for the aligned pi/2 / theta = pi/2 configuration.
LinearizedP2 p2_linearized(const Eigen::Vector3d& delta, double B_f,
                           const PolarizationEllipse& ellipse, double T2);

// Exact two-pulse probability for calibrated pi/2 pulses:
// P2 = 1/2 - sin(pi beta / 2) (cos(theta) cos(phi) - ratio sin(theta) sin(phi)) / (2 beta).
double p2_exact(double phi, double theta, double Omega_ratio);

struct FringePhase {
  double theta_f = 0.0;   // in [0, 2pi)
  bool clamped = false;   // arccos argument clipped to [-1, 1]
};

// theta_f = pi - sgn(phi) arccos(cos(phi)/beta), with sgn(0) = +1.
FringePhase fringe_phase(double phi, double Omega_ratio);

// Scan the second-pulse phase over theta_grid; theta_f from the argmax with
// 3-point quadratic refinement, visibility = max - min.
FringeResult ramsey_scan(const DCProtocolSpec& spec, const std::vector<double>& theta_grid,
                         bool use_simulation = false,
                         const IntegratorConfig& config = IntegratorConfig{});

// Schrodinger-integration oracle for the same sequence, in the rotating
// frame: pulse 1, optional echo, field rotation by phi, pulse 2 at theta2.
double simulate_dc_protocol(const DCProtocolSpec& spec, const IntegratorConfig& config);

}  // namespace clockmag
