#include "clockmag/diabatic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace clockmag {

using detail::expect;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_ramp(const RampSpec& ramp) {
  expect(ramp.B_i > ramp.B_f && ramp.B_f > 0, "ramp requires B_i > B_f > 0");
  expect(ramp.delta > 0, "delta must be positive");
  expect(ramp.T >= 0, "ramp duration must be nonnegative");
}

std::function<double(double)> field_profile(const RampSpec& ramp) {
  switch (ramp.profile) {
    case RampProfile::LinearB: {
      const double slope = (ramp.B_f - ramp.B_i) / ramp.T;
      const double b0 = ramp.B_i;
      return [b0, slope](double t) { return b0 + slope * t; };
    }
    case RampProfile::LinearGamma:
      return gamma_linear_schedule(ramp);
    case RampProfile::Custom:
      expect(static_cast<bool>(ramp.custom_B), "custom profile needs an evaluator");
      return ramp.custom_B;
  }
  throw std::logic_error("unknown ramp profile");
}

// gamma(t) and d(gamma)/dt for the supported profiles.
struct GammaPath {
  std::function<double(double)> gamma;
  std::function<double(double)> gamma_dot;
};

GammaPath gamma_path(const RampSpec& ramp) {
  if (ramp.profile == RampProfile::LinearGamma) {
    const double gi = gamma_of(ramp.B_i, ramp.delta);
    const double gf = gamma_of(ramp.B_f, ramp.delta);
    const double rate = (gf - gi) / ramp.T;
    return GammaPath{[gi, rate](double t) { return gi + rate * t; },
                     [rate](double) { return rate; }};
  }
  const auto B = field_profile(ramp);
  const double delta = ramp.delta;
  std::function<double(double)> gamma = [B, delta](double t) { return gamma_of(B(t), delta); };
  if (ramp.profile == RampProfile::LinearB) {
    const double slope = (ramp.B_f - ramp.B_i) / ramp.T;
    return GammaPath{gamma, [B, delta, slope](double t) {
                       const double b = B(t);
                       return -delta * slope / (b * b + 4.0 * delta * delta);
                     }};
  }
  return GammaPath{gamma, [gamma](double t) {
                     const double h = 1e-7;
                     return (gamma(t + h) - gamma(t - h)) / (2.0 * h);
                   }};
}

}  // namespace

Matrix lzs_hamiltonian(double B, double delta) {
  expect(std::isfinite(B) && std::isfinite(delta), "inputs must be finite");
  Matrix h(2, 2);
  h << B, delta, delta, 0.0;
  return h;
}

InstantaneousFrame instantaneous_frame(double B, double delta) {
  InstantaneousFrame frame;
  frame.gamma = gamma_of(B, delta);
  frame.deltaE = std::sqrt(B * B + 4.0 * delta * delta);
  return frame;
}

double gamma_of(double B, double delta) { return 0.5 * std::atan2(2.0 * delta, B); }

double B_of_gamma(double gamma, double delta) { return 2.0 * delta / std::tan(2.0 * gamma); }

std::function<double(double)> gamma_linear_schedule(const RampSpec& ramp) {
  check_ramp(ramp);
  expect(ramp.T > 0, "gamma-linear schedule needs T > 0");
  const double gi = gamma_of(ramp.B_i, ramp.delta);
  const double gf = gamma_of(ramp.B_f, ramp.delta);
  const double T = ramp.T;
  const double delta = ramp.delta;
  return [gi, gf, T, delta](double t) {
    const double g = gi + (gf - gi) * (t / T);
    return B_of_gamma(g, delta);
  };
}

double epsilon_d_dyson(const RampSpec& ramp, int quad_points, bool small_angle_phase) {
  check_ramp(ramp);
  expect(quad_points >= 64, "quad_points must be >= 64");
  if (ramp.T == 0.0) {
    // Abrupt limit: no phase accumulates, the amplitude is the full gamma swing.
    const double swing = gamma_of(ramp.B_f, ramp.delta) - gamma_of(ramp.B_i, ramp.delta);
    return swing * swing;
  }

  const GammaPath path = gamma_path(ramp);
  int n = quad_points;
  if (n % 2) ++n;
  const double h = ramp.T / n;

  // Cumulative phase Phi(t) = int Delta E dt' on the same grid (trapezoid),
  // gap 2 delta / sin(2 gamma), or delta/gamma in the small-angle variant.
  std::vector<double> phase(n + 1, 0.0);
  auto gap = [&](double t) {
    const double g = path.gamma(t);
    expect(g > 0 && g < std::numbers::pi / 2, "gamma must stay in (0, pi/2)");
    return small_angle_phase ? ramp.delta / g : 2.0 * ramp.delta / std::sin(2.0 * g);
  };
  double prev = gap(0.0);
  for (int i = 1; i <= n; ++i) {
    const double cur = gap(i * h);
    phase[i] = phase[i - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }

  Complex amplitude = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    amplitude += w * path.gamma_dot(i * h) * std::exp(Complex(0, phase[i]));
  }
  amplitude *= h / 3.0;
  return std::norm(amplitude);
}

LinearGammaEpsilon epsilon_d_linear_gamma(const RampSpec& ramp) {
  check_ramp(ramp);
  const double gi = gamma_of(ramp.B_i, ramp.delta);
  const double gf = gamma_of(ramp.B_f, ramp.delta);

  LinearGammaEpsilon out;
  out.bound = epsilon_d_bound(ramp);
  if (ramp.T == 0.0) {
    // Abrupt limit of the closed form: |gf - gi|^2 with no phase averaging.
    out.exact_approx = (gf - gi) * (gf - gi);
    return out;
  }
  const double a = ramp.delta * ramp.T / (gf - gi);
  const double c = std::cos(a * std::log(gi / gf));
  out.exact_approx = (gf * gf + gi * gi - 2.0 * gf * gi * c) / (1.0 + a * a);
  return out;
}

double epsilon_d_bound(const RampSpec& ramp) {
  check_ramp(ramp);
  const double r = ramp.delta / ramp.B_f;
  const double bt = ramp.B_f * ramp.T;
  return r * r / (1.0 + 0.5 * bt * bt);
}

double simulate_ramp(const RampSpec& ramp, const IntegratorConfig& config) {
  check_ramp(ramp);
  const double gi = gamma_of(ramp.B_i, ramp.delta);
  const double gf = gamma_of(ramp.B_f, ramp.delta);

  // Lower eigenstate (the clock branch) is (-sin g, cos g); upper (cos g, sin g).
  CVector lower_i(2), upper_f(2);
  lower_i << -std::sin(gi), std::cos(gi);
  upper_f << std::cos(gf), std::sin(gf);

  if (ramp.T == 0.0) {
    const Complex overlap = (upper_f.adjoint() * lower_i)(0);
    return std::norm(overlap);  // = sin^2(gf - gi)
  }

  const auto B = field_profile(ramp);
  const double delta = ramp.delta;
  HamiltonianSchedule schedule{
      [B, delta](double t) { return lzs_hamiltonian(B(t), delta); }, 0.0, ramp.T, 2};

  const StateVector out = evolve(StateVector{lower_i, {}}, schedule, config);
  const Complex amp = (upper_f.adjoint() * out.amplitudes)(0);
  return std::norm(amp);
}

int ramp_steps_required(const RampSpec& ramp, int steps_per_period) {
  const double gap_max = instantaneous_frame(ramp.B_i, ramp.delta).deltaE;
  const double cycles = gap_max * ramp.T / kTwoPi;
  return std::max(1000, static_cast<int>(std::ceil(cycles * steps_per_period)));
}

}  // namespace clockmag
