#include "clockmag/ac_protocol.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace clockmag {

using detail::expect;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_drive(const ACDriveSpec& drive) {
  expect(drive.n >= 1, "n must be >= 1");
  expect(drive.omega_m > 0, "omega_m must be positive");
  expect(drive.Omega1_mag > 0, "drive amplitude must be positive");
  expect(drive.Omega_ratio >= 0, "Omega_ratio must be nonnegative");
}

double uniform_angle(std::mt19937_64& rng) {
  // Stable 53-bit mapping, independent of the stdlib distribution.
  return kTwoPi * ((rng() >> 11) * 0x1.0p-53);
}

}  // namespace

double ACDriveSpec::duration() const { return kTwoPi * n / omega_m; }

double second_order_z_angle(const ACSignal& signal, const ACDriveSpec& drive,
                            int quad_points) {
  check_drive(drive);
  expect(quad_points >= 100, "quad_points must be >= 100");
  const double alpha = signal.alpha.value_or(0.0);
  const double T = drive.duration();
  const double dt = T / quad_points;
  auto h_y = [&](double t) { return drive.Omega1_mag * std::cos(drive.omega_m * t); };
  auto h_x = [&](double t) {
    return -drive.Omega2() * signal.phi0 * std::cos(signal.omega0 * t + alpha) *
           std::cos(drive.omega_m * t);
  };
  // -(1/4) int dt1 [h_y(t1) X(t1) - h_x(t1) Y(t1)], X and Y running prefixes.
  double X = 0, Y = 0, angle = 0;
  double prev_x = h_x(0), prev_y = h_y(0);
  double prev_f = 0;  // integrand at t = 0
  for (int i = 1; i <= quad_points; ++i) {
    const double t = i * dt;
    const double cur_x = h_x(t), cur_y = h_y(t);
    X += 0.5 * dt * (prev_x + cur_x);
    Y += 0.5 * dt * (prev_y + cur_y);
    const double f = cur_y * X - cur_x * Y;
    angle += 0.5 * dt * (prev_f + f);
    prev_f = f;
    prev_x = cur_x;
    prev_y = cur_y;
  }
  return -0.25 * angle;
}

double filter_weight(double omega0, double alpha, const ACDriveSpec& drive) {
  const double wm = drive.omega_m;
  const double cycles = kTwoPi * drive.n * omega0 / wm;
  if (std::abs(omega0 - wm) < 1e-6 * wm) {
    // Removable 0/0 at resonance; the closed form is unstable there.
    return kPi * drive.n / wm * std::cos(alpha);
  }
  return omega0 * (std::sin(alpha + cycles) - std::sin(alpha)) /
         (omega0 * omega0 - wm * wm);
}

FilterResponse filter_response(const ACSignal& signal, const ACDriveSpec& drive) {
  check_drive(drive);
  expect(signal.phi0 >= 0, "phi0 must be nonnegative");
  const double alpha = signal.alpha.value_or(0.0);

  FilterResponse out;
  out.deviation = 0.5 * signal.phi0 * drive.Omega2() * filter_weight(signal.omega0, alpha, drive);
  out.value = 0.5 + out.deviation;
  // Linearity budget: the accumulated resonant rotation must stay small.
  out.linear_regime_ok =
      signal.phi0 * drive.Omega2() * kPi * drive.n / drive.omega_m <= 0.5;
  return out;
}

Matrix first_order_unitary(const ACSignal& signal, const ACDriveSpec& drive) {
  check_drive(drive);
  const double alpha = signal.alpha.value_or(0.0);
  const double angle =
      0.5 * signal.phi0 * drive.Omega2() * filter_weight(signal.omega0, alpha, drive);
  // exp(i angle tau_x)
  return unitary_of_step(pauli_x(), -angle);
}

double unlocked_spectrometer_analytic(const ACSignal& signal, const ACDriveSpec& drive) {
  check_drive(drive);
  const double w = signal.omega0, wm = drive.omega_m;
  double envelope;
  if (std::abs(w - wm) < 1e-6 * wm) {
    envelope = kPi * drive.n / (2.0 * wm);
  } else {
    envelope = std::abs(w * std::sin(kPi * drive.n * w / wm) / (w * w - wm * wm));
  }
  return signal.phi0 * drive.Omega2() * envelope / std::sqrt(2.0);
}

double unlocked_spectrometer_rms(const std::vector<double>& probabilities) {
  expect(probabilities.size() >= 2, "need at least 2 samples");
  double sum = 0.0;
  for (double p : probabilities) sum += (p - 0.5) * (p - 0.5);
  return std::sqrt(sum / probabilities.size());
}

double unlocked_spectrometer_sampled(const ACSignal& signal, const ACDriveSpec& drive,
                                     int num_samples, std::uint64_t seed, bool use_simulation,
                                     const IntegratorConfig& config) {
  expect(num_samples >= 2, "need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::vector<double> probabilities;
  probabilities.reserve(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    ACSignal shot = signal;
    shot.alpha = uniform_angle(rng);
    if (use_simulation) {
      probabilities.push_back(simulate_ac(shot, drive, config).stroboscopic.back());
    } else {
      probabilities.push_back(filter_response(shot, drive).value);
    }
  }
  return unlocked_spectrometer_rms(probabilities);
}

ACTrace simulate_ac(const ACSignal& signal, const ACDriveSpec& drive,
                    const IntegratorConfig& config, int samples_per_period) {
  check_drive(drive);
  expect(samples_per_period >= 1, "samples_per_period must be >= 1");
  expect(signal.alpha.has_value(), "resolve the signal phase before simulating");

  const double period = kTwoPi / drive.omega_m;
  int steps_per_period = config.step_count / drive.n;
  const double fastest = std::max(signal.omega0, drive.omega_m);
  if (steps_per_period < 50.0 * fastest / drive.omega_m)
    throw std::runtime_error("under-resolved integration: need >= 50 steps per period");
  steps_per_period = samples_per_period * ((steps_per_period + samples_per_period - 1) /
                                           samples_per_period);

  const double phi0 = signal.phi0, w0 = signal.omega0, alpha = signal.alpha.value();
  const double O1 = drive.Omega1_mag, ratio = drive.Omega_ratio, wm = drive.omega_m;
  const Matrix tx = pauli_x(), ty = pauli_y();
  auto hamiltonian = [&](double t) -> Matrix {
    const double envelope = 0.5 * O1 * std::cos(wm * t);
    const double phi = phi0 * std::cos(w0 * t + alpha);
    return envelope * (ty - ratio * phi * tx);
  };

  // Post-pi/2 superposition pointing along -y; the unperturbed drive is a
  // pure tau_y rotation and leaves it fixed.
  CVector psi(2);
  psi << 1.0 / std::sqrt(2.0), Complex(0, -1) / std::sqrt(2.0);

  ACTrace trace;
  const double dt = period / steps_per_period;
  const int sample_stride = steps_per_period / samples_per_period;
  for (int k = 0; k < drive.n; ++k) {
    for (int s = 0; s < steps_per_period; ++s) {
      const double t_mid = (k * steps_per_period + s + 0.5) * dt;
      psi = unitary_of_step(hamiltonian(t_mid), dt) * psi;
      if ((s + 1) % sample_stride == 0) {
        trace.times.push_back((k * steps_per_period + s + 1) * dt);
        trace.P2.push_back(std::norm(psi(0)));
      }
    }
    trace.stroboscopic.push_back(std::norm(psi(0)));
  }
  return trace;
}

}  // namespace clockmag
