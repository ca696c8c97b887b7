#include "clockmag/dc_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clockmag {

using detail::expect;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

// In-plane drive projections after a field rotation by phi towards Omega2.
struct RotatedDrive {
  double Omega_eff;  // Omega1 * beta
  double axis_angle; // atan2(ratio sin phi, cos phi), added to the RF phase
};

RotatedDrive rotated_drive(double Omega1_mag, double Omega_ratio, double phi) {
  const double o1 = Omega1_mag * std::cos(phi);
  const double o2 = Omega1_mag * Omega_ratio * std::sin(phi);
  return RotatedDrive{std::hypot(o1, o2), std::atan2(o2, o1)};
}

CVector apply_pulse(const CVector& psi, double Omega_eff, double xi, double duration,
                    const IntegratorConfig& config) {
  ClockHamiltonianParams params;
  params.Omega_eff = Omega_eff;
  params.xi = xi;
  params.eta = 0.0;
  StateVector state{psi, {}};
  return evolve(state, constant_schedule(clock_rotating_hamiltonian(params), duration), config)
      .amplitudes;
}

}  // namespace

LinearizedP2 p2_linearized(const Eigen::Vector3d& delta, double B_f,
                           const PolarizationEllipse& ellipse, double T2) {
  expect(B_f > 0, "B_f must be positive");
  ellipse.validate();
  const double ratio = ellipse.ratio();
  const double Omega_eff = ellipse.Omega1.norm();

  LinearizedP2 out;
  const double dnorm = delta.norm();
  if (dnorm == 0.0) {
    out.value = 0.5;
    return out;
  }
  const Eigen::Vector3d o2_hat =
      ellipse.Omega2.norm() > 0 ? ellipse.Omega2.normalized() : Eigen::Vector3d::Zero();
  out.value = 0.5 + 0.5 * std::sin(Omega_eff * T2) * ratio * (dnorm / B_f) *
                        o2_hat.dot(delta.normalized());
  out.regime_ok = ratio * dnorm / B_f <= 0.2;
  return out;
}

double p2_exact(double phi, double theta, double Omega_ratio) {
  const double beta = beta_factor(phi, Omega_ratio);
  const double bracket =
      std::cos(theta) * std::cos(phi) - Omega_ratio * std::sin(theta) * std::sin(phi);
  return 0.5 - bracket / (2.0 * beta) * std::sin(kPi * beta / 2.0);
}

FringePhase fringe_phase(double phi, double Omega_ratio) {
  const double beta = beta_factor(phi, Omega_ratio);
  expect(beta > 0, "beta must be positive");
  double x = std::cos(phi) / beta;
  FringePhase out;
  if (std::abs(x) > 1.0) {
    // Only reachable through round-off; report the nearest extremum.
    x = std::clamp(x, -1.0, 1.0);
    out.clamped = true;
  }
  const double sgn = phi >= 0.0 ? 1.0 : -1.0;  // sgn(0) = +1 by convention
  out.theta_f = wrap_2pi(kPi - sgn * std::acos(x));
  return out;
}

FringeResult ramsey_scan(const DCProtocolSpec& spec, const std::vector<double>& theta_grid,
                         bool use_simulation, const IntegratorConfig& config) {
  expect(theta_grid.size() >= 8, "theta grid must have at least 8 points");
  const double ratio = spec.ellipse.ratio();

  FringeResult result;
  result.theta_grid = theta_grid;
  result.P2_values.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    if (use_simulation) {
      DCProtocolSpec point = spec;
      point.theta2 = theta;
      result.P2_values.push_back(simulate_dc_protocol(point, config));
    } else {
      result.P2_values.push_back(p2_exact(spec.phi, theta, ratio));
    }
  }

  const auto [min_it, max_it] =
      std::minmax_element(result.P2_values.begin(), result.P2_values.end());
  result.visibility = *max_it - *min_it;

  // Quadratic refinement around the sampled argmax; the grid is treated as
  // periodic when it spans a full turn.
  const int n = static_cast<int>(theta_grid.size());
  const int i = static_cast<int>(max_it - result.P2_values.begin());
  const double span = theta_grid.back() - theta_grid.front();
  const bool periodic = std::abs(span + (theta_grid[1] - theta_grid[0]) - kTwoPi) < 1e-9;

  auto value_at = [&](int k) { return result.P2_values[(k % n + n) % n]; };
  auto theta_at = [&](int k) {
    const int wrapped = (k % n + n) % n;
    double offset = 0.0;
    if (k < 0) offset = -kTwoPi;
    if (k >= n) offset = kTwoPi;
    return theta_grid[wrapped] + offset;
  };

  double theta_f = theta_grid[i];
  if (periodic || (i > 0 && i < n - 1)) {
    const double y0 = value_at(i - 1), y1 = value_at(i), y2 = value_at(i + 1);
    const double x0 = theta_at(i - 1), x1 = theta_at(i), x2 = theta_at(i + 1);
    const double d1 = (y1 - y0) / (x1 - x0);
    const double d2 = (y2 - y1) / (x2 - x1);
    const double curvature = (d2 - d1) / (0.5 * (x2 - x0));
    if (curvature < 0) theta_f = 0.5 * (x0 + x1) + (x2 - x0) * 0.5 * (-d1 / (d2 - d1));
  }
  result.theta_f = wrap_2pi(theta_f);
  return result;
}

double simulate_dc_protocol(const DCProtocolSpec& spec, const IntegratorConfig& config) {
  spec.ellipse.validate();
  const double Omega1 = spec.ellipse.Omega1.norm();
  expect(Omega1 > 0, "drive amplitude must be positive");
  const double ratio = spec.ellipse.ratio();
  const double theta1 = spec.ellipse.theta;

  // |2,0> is the tau_z = +1 pole.
  CVector psi = CVector::Zero(2);
  psi(0) = 1.0;

  // Pulse 1 with the field along the major axis.
  psi = apply_pulse(psi, Omega1, theta1, spec.pulse1_area / Omega1, config);

  // Field rotation by phi inside the ellipse plane (no clock-subspace
  // dynamics of its own), after which the drive projections change.
  const RotatedDrive drive = rotated_drive(Omega1, ratio, spec.phi);

  if (spec.echo) {
    // Echo pulse calibrated to an exact pi rotation about the axis a quarter
    // turn from pulse 1, which leaves the ideal superposition untouched and
    // keeps the fringe phase unchanged.
    const double xi_echo = theta1 + kPi / 2.0;
    psi = apply_pulse(psi, drive.Omega_eff, xi_echo, kPi / drive.Omega_eff, config);
  }

  // Pulse 2 at RF phase theta2; duration set by the Omega1 pulse area.
  const double xi2 = spec.theta2 + drive.axis_angle;
  psi = apply_pulse(psi, drive.Omega_eff, xi2, spec.pulse2_area / Omega1, config);

  return std::norm(psi(0));
}

}  // namespace clockmag
