#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "clockmag/dynamics.hpp"

namespace clockmag {

// Ground-manifold hyperfine system with I = 3/2, J = 1/2 (Rb-87-like, 8
// levels). Magneton couplings are given as angular frequency per Gauss so
// that mu * B is directly an angular frequency.
struct HyperfineConstants {
  double A_HF;   // hyperfine splitting, rad/s
  double g_I;    // nuclear Lande factor
  double g_J;    // electronic Lande factor
  double mu_N;   // nuclear magneton / hbar, rad/s/G
  double mu_B;   // Bohr magneton / hbar, rad/s/G

  // Clock-pair coupling mu = g_I mu_N - g_J mu_B (rad/s/G).
  double mu_clock() const { return g_I * mu_N - g_J * mu_B; }
};

HyperfineConstants rb87_constants();

// Elliptically polarized RF drive Omega = e^{i theta} (Omega1 + i Omega2).
// Amplitudes are clock-transition Rabi rates (rad/s); the ratio
// Omega2/Omega1 is the sensitivity knob of the protocols.
struct PolarizationEllipse {
  Eigen::Vector3d Omega1 = Eigen::Vector3d::Zero();  // major axis
  Eigen::Vector3d Omega2 = Eigen::Vector3d::Zero();  // minor axis
  double theta = 0.0;                                // RF phase, rad

  double ratio() const;  // |Omega2| / |Omega1|
  void validate() const; // axes must be orthogonal
};

// On-resonance rotating-frame parameters of the clock-subspace drive.
struct ClockHamiltonianParams {
  double Omega_eff = 0.0;  // rad/s
  double xi = 0.0;         // Ramsey-pulse phase, rad
  double eta = 0.0;        // RF detuning A_HF - omega_RF, rad/s
  bool degenerate_direction = false;  // drive fully perpendicular to b_hat
};

// |F, mF> basis from Clebsch-Gordan composition of I = 3/2 with J = 1/2
// (Condon-Shortley phases). Columns ordered F=1 (mF=-1..1), then F=2
// (mF=-2..2); the product basis is |m_I> x |m_J> with m_I descending and
// m_J in (up, down).
struct FBasis {
  Matrix vectors;                    // 8x8, column k = |F,mF>
  std::vector<std::string> labels;
  std::vector<int> F;
  std::vector<double> mF;
  int index_of(int F_val, double mF_val) const;
};

FBasis f_basis();

// Static lab Hamiltonian H_HF + H_Z (8x8). H_HF is shifted so the F = 2 and
// F = 1 manifolds sit at +A_HF/2 and -A_HF/2.
Matrix hyperfine_hamiltonian_lab(const HyperfineConstants& constants,
                                 const Eigen::Vector3d& B_vec);

// Full lab Hamiltonian including the RF Zeeman coupling at time t. Pass
// rf = nullptr for the static part only.
Matrix full_hamiltonian_lab(const HyperfineConstants& constants, const Eigen::Vector3d& B_vec,
                            const PolarizationEllipse* rf, double omega_RF, double t);

// Two-level reduction: (A_HF/2) tau_z + (mu B + Omega_z e^{i w t} + c.c.)/2 tau_x.
Matrix clock_hamiltonian_lab(const HyperfineConstants& constants, double B, Complex Omega_z,
                             double omega_RF, double t);

// Rotating-wave reduction for a general drive ellipse and field direction:
// Omega_eff = sqrt((O1.b)^2 + (O2.b)^2), xi = theta + atan2(O2.b, O1.b).
ClockHamiltonianParams effective_clock_hamiltonian(const PolarizationEllipse& ellipse,
                                                   const Eigen::Vector3d& b_hat, double eta);

// (eta/2) tau_z + (Omega_eff/2)(cos xi tau_x + sin xi tau_y).
Matrix clock_rotating_hamiltonian(const ClockHamiltonianParams& params);

// beta(phi) = sqrt(cos^2 phi + ratio^2 sin^2 phi).
double beta_factor(double phi, double Omega_ratio);

// Rabi nutation P2 = sin^2(Omega1 T beta / 2) for a field at angle phi
// to the ellipse major axis; independent of the RF phase theta. Despite the
// "remain" wording that sometimes accompanies this sin^2 form, it vanishes at
// T = 0 and so counts the transferred population; the two accessors below
// name the populations unambiguously.
double rabi_probability(double Omega1_mag, double T, double phi, double Omega_ratio);

// Population moved into the target state after the pulse (= rabi_probability).
double rabi_transferred_population(double Omega1_mag, double T, double phi,
                                   double Omega_ratio);

// Population left in the initial state after the pulse.
double rabi_remaining_population(double Omega1_mag, double T, double phi,
                                 double Omega_ratio);

}  // namespace clockmag
