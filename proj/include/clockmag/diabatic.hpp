#pragma once

#include <functional>

#include "clockmag/dynamics.hpp"

namespace clockmag {

// Ramp-down diabatic transition between a clock state and a nearby Zeeman
// state, H = (B/2)(sigma_z + 1) + delta sigma_x in natural units
// (mu = hbar = 1, so B and delta are angular frequencies).
enum class RampProfile { LinearB, LinearGamma, Custom };

struct RampSpec {
  double B_i = 0.0;
  double B_f = 0.0;
  double delta = 0.0;  // signal along x
  double T = 0.0;      // ramp duration
  RampProfile profile = RampProfile::LinearGamma;
  std::function<double(double)> custom_B;  // B(t) for Custom
};

Matrix lzs_hamiltonian(double B, double delta);

// Instantaneous mixing angle and gap: tan(2 gamma) = 2 delta / B with
// gamma in (0, pi/4] for B >= 0, Delta E = sqrt(B^2 + (2 delta)^2).
struct InstantaneousFrame {
  double gamma = 0.0;
  double deltaE = 0.0;
};

InstantaneousFrame instantaneous_frame(double B, double delta);

double gamma_of(double B, double delta);
double B_of_gamma(double gamma, double delta);

// B(t) evaluator with gamma varying linearly from gamma(B_i) to gamma(B_f).
std::function<double(double)> gamma_linear_schedule(const RampSpec& ramp);

// First-order Dyson estimate |int gamma_dot e^{i Phi(t)} dt|^2 by composite
// Simpson quadrature. small_angle_phase replaces sin(2 gamma) by 2 gamma in
// the gap, the approximation behind the linear-gamma closed form.
double epsilon_d_dyson(const RampSpec& ramp, int quad_points, bool small_angle_phase = false);

struct LinearGammaEpsilon {
  double exact_approx = 0.0;  // closed form for a linearly varying gamma
  double bound = 0.0;         // stringent bound (delta/B_f)^2 / (1 + (B_f T)^2 / 2)
};

LinearGammaEpsilon epsilon_d_linear_gamma(const RampSpec& ramp);

double epsilon_d_bound(const RampSpec& ramp);

// Brute-force oracle: start in the lower instantaneous eigenstate at B_i,
// integrate the lab Hamiltonian across the ramp, project on the upper
// instantaneous eigenstate at B_f.
double simulate_ramp(const RampSpec& ramp, const IntegratorConfig& config);

// Step count that resolves the largest instantaneous gap with
// steps_per_period steps per 2pi/deltaE cycle.
int ramp_steps_required(const RampSpec& ramp, int steps_per_period = 50);

}  // namespace clockmag
