#include "clockmag/two_spin.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clockmag {

using detail::expect;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix kron2(const Matrix& a, const Matrix& b) {
  Matrix out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Matrix id2() { return Matrix::Identity(2, 2); }

// Single-spin rotation exp(-i alpha sigma_y / 2).
Matrix spin_half_y_rotation(double alpha) {
  Matrix r(2, 2);
  const double c = std::cos(alpha / 2), s = std::sin(alpha / 2);
  r << c, -s, s, c;
  return r;
}

Matrix sigma1(const Matrix& s) { return kron2(s, id2()); }
Matrix sigma2(const Matrix& s) { return kron2(id2(), s); }

void check_cos_chi(double chi) {
  if (std::abs(std::cos(chi)) < 1e-12)
    throw std::domain_error("chi = pi/2 is singular: the pi/2-pulse amplitude diverges");
}

}  // namespace

CVector SingletTripletBasis::up_up() const {
  const Matrix r = kron2(spin_half_y_rotation(alpha), spin_half_y_rotation(alpha));
  CVector e = CVector::Zero(4);
  e(0) = 1;
  return r * e;
}

CVector SingletTripletBasis::singlet() const {
  CVector s = CVector::Zero(4);
  s(1) = 1.0 / std::sqrt(2.0);
  s(2) = -1.0 / std::sqrt(2.0);
  return s;  // invariant under global rotations
}

CVector SingletTripletBasis::triplet() const {
  const Matrix r = kron2(spin_half_y_rotation(alpha), spin_half_y_rotation(alpha));
  CVector t = CVector::Zero(4);
  t(1) = 1.0 / std::sqrt(2.0);
  t(2) = 1.0 / std::sqrt(2.0);
  return r * t;
}

CVector SingletTripletBasis::down_down() const {
  const Matrix r = kron2(spin_half_y_rotation(alpha), spin_half_y_rotation(alpha));
  CVector e = CVector::Zero(4);
  e(3) = 1;
  return r * e;
}

Matrix SingletTripletBasis::to_st_matrix() const {
  Matrix m(4, 4);
  m.col(0) = up_up();
  m.col(1) = singlet();
  m.col(2) = triplet();
  m.col(3) = down_down();
  return m;
}

Matrix two_spin_hamiltonian_lab(const Eigen::Vector3d& B_vec,
                                const Eigen::Vector3d& Omega_vec) {
  expect(B_vec.allFinite() && Omega_vec.allFinite(), "field vectors must be finite");
  const Matrix sx = pauli_x(), sy = pauli_y(), sz = pauli_z();
  Matrix h = B_vec.x() * (sigma1(sx) + sigma2(sx)) + B_vec.y() * (sigma1(sy) + sigma2(sy)) +
             B_vec.z() * (sigma1(sz) + sigma2(sz)) + Omega_vec.x() * sigma1(sx) +
             Omega_vec.y() * sigma1(sy) + Omega_vec.z() * sigma1(sz);
  return 0.5 * (h + Matrix(h.adjoint()));
}

Matrix total_spin_y_rotation(double alpha) {
  const Matrix r = spin_half_y_rotation(alpha);
  return kron2(r, r);
}

Matrix adiabatic_pulse_unitary(double alpha, double chi, double pulse_area) {
  expect(std::isfinite(pulse_area), "pulse_area must be finite");
  SingletTripletBasis basis{alpha};
  const CVector s = basis.singlet();
  const CVector t = basis.triplet();
  const Matrix projector = s * s.adjoint() + t * t.adjoint();
  const Matrix generator =
      projector * (std::cos(chi) * sigma1(pauli_z()) + std::sin(chi) * sigma1(pauli_x())) *
      projector;
  // exp(+i (area/2) G); the half makes area*cos(chi) the Bloch rotation angle,
  // matching the rotating-frame pulse convention of the hyperfine system.
  return unitary_of_step(0.5 * (generator + Matrix(generator.adjoint())), -0.5 * pulse_area);
}

double sequence_prob_S_lab(double chi, double phi, double pulse_area) {
  check_cos_chi(chi);
  expect(std::abs(pulse_area * std::cos(chi) - kPi / 2) < 1e-9,
         "sequence requires the pi/2 calibration pulse_area*cos(chi) = pi/2");

  const double alpha_tot = chi + kPi / 2 + phi;
  const Matrix u1 = adiabatic_pulse_unitary(0.0, chi, pulse_area);
  const Matrix rot = total_spin_y_rotation(alpha_tot);
  const Matrix u2 = adiabatic_pulse_unitary(alpha_tot, chi, pulse_area);

  const CVector s = SingletTripletBasis{0.0}.singlet();
  const Complex amp = (s.adjoint() * (u2 * (rot * (u1 * s))))(0);
  return std::norm(amp);
}

double prob_S_closed(double chi, double phi) {
  check_cos_chi(chi);
  const double arg = kPi / 4.0 * (1.0 + std::sin(phi) / std::cos(chi));
  const double s = std::sin(arg);
  return s * s;
}

ApproxProbability prob_S_approx(const TwoSpinConfig& config) {
  expect(config.B_f > 0, "B_f must be positive");
  expect(std::abs(config.b_hat_f.norm() - 1.0) < 1e-12, "b_hat_f must be unit norm");

  const Eigen::Vector3d omega_hat(std::sin(config.chi), 0.0, std::cos(config.chi));
  // Field-direction expansion: delta enters only through its component
  // transverse to b_hat_f.
  const Eigen::Vector3d delta_perp =
      config.delta - config.delta.dot(config.b_hat_f) * config.b_hat_f;

  const double area = config.pulse_area;
  const double z_area = area * std::cos(config.chi);  // z.Omega T
  const double value = std::cos(z_area / 2) * std::cos(z_area / 2) -
                       2.0 * std::sin(z_area) * delta_perp.dot(omega_hat) * area /
                           (2.0 * config.B_f);

  ApproxProbability out;
  out.value = value;
  out.regime_ok = config.delta.norm() / config.B_f < 0.1;
  return out;
}

double prob_S_static(double chi, double phi) {
  check_cos_chi(chi);
  const double arg = (1.0 + std::cos(chi - phi) / std::cos(chi)) * kPi / 8.0;
  const double c = std::cos(arg);
  return c * c;
}

}  // namespace clockmag
