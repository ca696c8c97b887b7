#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clockmag/dynamics.hpp"

namespace clockmag {

// AC magnetometry: the second pulse is replaced by an amplitude-modulated
// drive Omega(t) = Omega1 cos(omega_m t) acting as a spectral filter on a
// weak field rotation phi(t) = phi0 cos(omega0 t + alpha).
struct ACSignal {
  double phi0 = 0.0;    // rotation amplitude, rad
  double omega0 = 0.0;  // signal angular frequency
  std::optional<double> alpha = 0.0;  // nullopt = unlocked (random per shot)
};

struct ACDriveSpec {
  double Omega1_mag = 0.0;  // modulated drive amplitude, rad/s
  double Omega_ratio = 0.0;
  double omega_m = 0.0;     // modulation angular frequency
  int n = 1;                // stroboscopic period count, t = 2 pi n / omega_m

  double Omega2() const { return Omega_ratio * Omega1_mag; }
  double duration() const;
};

struct FilterResponse {
  double value = 0.0;          // P2 at the stroboscopic time
  double deviation = 0.0;      // P2 - 1/2
  bool linear_regime_ok = true;
};

// First-order filter for a locked signal:
// P2 = 1/2 + phi0 (Omega2/2) omega0 sin(2 pi n omega0/omega_m) / (omega0^2 - omega_m^2),
// with the analytic limit 1/2 + pi n phi0 Omega2 / (2 omega_m) on resonance.
FilterResponse filter_response(const ACSignal& signal, const ACDriveSpec& drive);

// Dyson weight F(omega) such that the first-order propagator is
// exp(i (Omega2 phi0 / 2) F tau_x); F = omega (sin(alpha + 2 pi n omega/omega_m)
// - sin(alpha)) / (omega^2 - omega_m^2).
double filter_weight(double omega0, double alpha, const ACDriveSpec& drive);

Matrix first_order_unitary(const ACSignal& signal, const ACDriveSpec& drive);

// Phase-averaged spectrometer: rms of (p_i - 1/2) over uniformly random
// alpha, with the analytic value
// (phi0 Omega2 / sqrt(2)) |omega sin(pi n omega/omega_m)| / |omega^2 - omega_m^2|.
double unlocked_spectrometer_analytic(const ACSignal& signal, const ACDriveSpec& drive);

double unlocked_spectrometer_rms(const std::vector<double>& probabilities);

// Seeded Monte-Carlo sampling of the unlocked filter through the linear
// model; set use_simulation to draw each shot from the full integrator.
double unlocked_spectrometer_sampled(const ACSignal& signal, const ACDriveSpec& drive,
                                     int num_samples, std::uint64_t seed,
                                     bool use_simulation = false,
                                     const IntegratorConfig& config = IntegratorConfig{});

// Magnitude of the second-order (commutator) term of the modulated-drive
// expansion. It generates only a tau_z rotation, which z-basis populations
// cannot see, and it vanishes on resonance; exposed as an off-resonance
// diagnostic for the first-order treatment.
double second_order_z_angle(const ACSignal& signal, const ACDriveSpec& drive,
                            int quad_points = 20000);

struct ACTrace {
  std::vector<double> times;
  std::vector<double> P2;
  // P2 at the stroboscopic instants t = 2 pi k / omega_m, k = 1..n.
  std::vector<double> stroboscopic;
};

// Brute-force integration of H(t) = (Omega1/2) cos(omega_m t)
// (tau_y - ratio phi(t) tau_x) from the post-pi/2 superposition.
// config.step_count is the total step budget; at least 50 steps per period
// of max(omega0, omega_m) are required.
ACTrace simulate_ac(const ACSignal& signal, const ACDriveSpec& drive,
                    const IntegratorConfig& config, int samples_per_period = 1);

}  // namespace clockmag
