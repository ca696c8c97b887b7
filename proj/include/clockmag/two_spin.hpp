#pragma once

#include <Eigen/Dense>

#include "clockmag/dynamics.hpp"

namespace clockmag {

// Two spin-1/2 toy model. Product basis ordering is |uu>, |ud>, |du>, |dd>
// with the first spin as the left tensor factor. The singlet/triplet clock
// pair lives in the middle block.
struct TwoSpinConfig {
  double B_i = 0.0;            // quantization field before the ramp (mu*B/hbar units)
  double B_f = 0.0;            // after the ramp
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();  // signal field
  Eigen::Vector3d b_hat_f = Eigen::Vector3d::UnitZ();
  double chi = 0.0;            // drive angle from z, in the x-z plane
  double pulse_area = 0.0;     // Omega*T in rad
};

// Singlet/triplet basis for a quantization direction in the x-z plane at
// angle alpha from z. |S> is rotation invariant; |T(alpha)> follows the field.
struct SingletTripletBasis {
  double alpha = 0.0;
  CVector up_up() const;    // |uu(alpha)>
  CVector singlet() const;  // |S>
  CVector triplet() const;  // |T(alpha)>
  CVector down_down() const;
  Matrix to_st_matrix() const;  // columns (uu, S, T, dd)
  std::vector<std::string> labels() const { return {"uu", "S", "T", "dd"}; }
};

// H = B.(sigma1 + sigma2) + Omega.sigma1 in natural units.
Matrix two_spin_hamiltonian_lab(const Eigen::Vector3d& B_vec,
                                const Eigen::Vector3d& Omega_vec);

// Total-spin y rotation exp(-i alpha Jy), Jy = (sigma1y + sigma2y)/2.
Matrix total_spin_y_rotation(double alpha);

// Projected adiabatic pulse for a field at angle alpha: the generator is
// P(alpha) [cos(chi) sigma1z + sin(chi) sigma1x] P(alpha) with P projecting
// on the instantaneous {|S>, |T(alpha)>} pair, so the pulse cannot leak out
// of the clock subspace. pulse_area * cos(chi) is the clock-subspace Bloch
// rotation angle (pulse_area*cos(chi) = pi/2 is a pi/2-pulse).
Matrix adiabatic_pulse_unitary(double alpha, double chi, double pulse_area);

// Full lab-frame two-pulse sequence: pulse at alpha = 0, field rotation by
// chi + pi/2 + phi, identical second pulse; returns the |S> population.
// Requires the pi/2 calibration pulse_area*cos(chi) = pi/2.
double sequence_prob_S_lab(double chi, double phi, double pulse_area);

// Closed form Pr(S) = sin^2(pi/4 (1 + sin(phi)/cos(chi))).
double prob_S_closed(double chi, double phi);

struct ApproxProbability {
  double value = 0.0;
  bool regime_ok = true;  // |delta|/B_f < 0.1
};

// Linearized two-pulse probability from the small-rotation field expansion.
ApproxProbability prob_S_approx(const TwoSpinConfig& config);

// Static-field variant with pi/4-pulses (field stays along z).
double prob_S_static(double chi, double phi);

}  // namespace clockmag
