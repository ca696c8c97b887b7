#include "clockmag/hyperfine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clockmag {

using detail::expect;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Spin matrices for total spin j in the |j, m> basis, m descending.
struct SpinOps {
  Matrix x, y, z, plus, minus;
};

SpinOps spin_ops(double j) {
  const int dim = static_cast<int>(std::lround(2 * j + 1));
  Matrix z = Matrix::Zero(dim, dim);
  Matrix plus = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = j - k;
    z(k, k) = m;
    if (k > 0) plus(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  Matrix minus = plus.adjoint();
  SpinOps ops;
  ops.z = z;
  ops.plus = plus;
  ops.minus = minus;
  ops.x = 0.5 * (plus + minus);
  ops.y = Complex(0, -0.5) * (plus - minus);
  return ops;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct Operators8 {
  Matrix Ix, Iy, Iz, Jx, Jy, Jz, IdotJ;
};

const Operators8& operators8() {
  static const Operators8 ops = [] {
    const SpinOps i_ops = spin_ops(1.5);
    const SpinOps j_ops = spin_ops(0.5);
    const Matrix id_i = Matrix::Identity(4, 4);
    const Matrix id_j = Matrix::Identity(2, 2);
    Operators8 o;
    o.Ix = kron(i_ops.x, id_j);
    o.Iy = kron(i_ops.y, id_j);
    o.Iz = kron(i_ops.z, id_j);
    o.Jx = kron(id_i, j_ops.x);
    o.Jy = kron(id_i, j_ops.y);
    o.Jz = kron(id_i, j_ops.z);
    o.IdotJ = o.Ix * o.Jx + o.Iy * o.Jy + o.Iz * o.Jz;
    return o;
  }();
  return ops;
}

Matrix zeeman_coupling(const HyperfineConstants& c, const Eigen::Vector3d& field) {
  const Operators8& o = operators8();
  Matrix h = c.g_I * c.mu_N * (field.x() * o.Ix + field.y() * o.Iy + field.z() * o.Iz) +
             c.g_J * c.mu_B * (field.x() * o.Jx + field.y() * o.Jy + field.z() * o.Jz);
  return h;
}

int product_index(double m_I, int j_up) {
  // m_I descending 3/2..-3/2, j index 0 = up.
  const int i_I = static_cast<int>(std::lround(1.5 - m_I));
  return 2 * i_I + j_up;
}

}  // namespace

HyperfineConstants rb87_constants() {
  HyperfineConstants c;
  c.A_HF = kTwoPi * 6.834682610904290e9;  // rad/s
  c.g_I = -0.0009951414;
  c.g_J = 2.00233113;
  c.mu_B = kTwoPi * 1.3996245042e6;  // rad/s/G
  c.mu_N = c.mu_B / 1836.15267389;
  return c;
}

double PolarizationEllipse::ratio() const {
  const double major = Omega1.norm();
  expect(major > 0, "ellipse major axis must be nonzero");
  return Omega2.norm() / major;
}

void PolarizationEllipse::validate() const {
  const double scale = std::max(1.0, Omega1.norm() * Omega2.norm());
  expect(std::abs(Omega1.dot(Omega2)) <= 1e-12 * scale,
         "ellipse axes must be orthogonal");
}

FBasis f_basis() {
  FBasis basis;
  basis.vectors = Matrix::Zero(8, 8);
  int col = 0;
  // |F = j1 +- 1/2, m> from the standard CG formulas for j2 = 1/2.
  for (int F_val : {1, 2}) {
    for (double m = -F_val; m <= F_val; m += 1.0) {
      const double cp = std::sqrt((1.5 + m + 0.5) / 4.0);  // |m-1/2, up>
      const double cm = std::sqrt((1.5 - m + 0.5) / 4.0);  // |m+1/2, down>
      CVector v = CVector::Zero(8);
      if (F_val == 2) {
        if (std::abs(m - 0.5) <= 1.5) v(product_index(m - 0.5, 0)) += cp;
        if (std::abs(m + 0.5) <= 1.5) v(product_index(m + 0.5, 1)) += cm;
      } else {
        if (std::abs(m - 0.5) <= 1.5) v(product_index(m - 0.5, 0)) -= cm;
        if (std::abs(m + 0.5) <= 1.5) v(product_index(m + 0.5, 1)) += cp;
      }
      basis.vectors.col(col) = v;
      basis.labels.push_back("F=" + std::to_string(F_val) +
                             ",mF=" + std::to_string(static_cast<int>(std::lround(m))));
      basis.F.push_back(F_val);
      basis.mF.push_back(m);
      ++col;
    }
  }
  return basis;
}

int FBasis::index_of(int F_val, double mF_val) const {
  for (size_t k = 0; k < F.size(); ++k)
    if (F[k] == F_val && std::abs(mF[k] - mF_val) < 1e-9) return static_cast<int>(k);
  throw std::invalid_argument("no such |F, mF> level");
}

Matrix hyperfine_hamiltonian_lab(const HyperfineConstants& constants,
                                 const Eigen::Vector3d& B_vec) {
  const Operators8& o = operators8();
  // (A/2)(I.J + 1/4) has eigenvalues +A/2 on F=2 and -A/2 on F=1.
  Matrix h = 0.5 * constants.A_HF * (o.IdotJ + 0.25 * Matrix::Identity(8, 8)) +
             zeeman_coupling(constants, B_vec);
  return 0.5 * (h + Matrix(h.adjoint()));
}

Matrix full_hamiltonian_lab(const HyperfineConstants& constants, const Eigen::Vector3d& B_vec,
                            const PolarizationEllipse* rf, double omega_RF, double t) {
  Matrix h = hyperfine_hamiltonian_lab(constants, B_vec);
  if (rf) {
    rf->validate();
    // Drive amplitudes are given as clock Rabi rates. The clock matrix
    // element of a field f is mu f_z / 2, so the equivalent field carries a
    // factor 2: f(t) = 2 Re[e^{i theta}(O1 + i O2) e^{i w t}] / mu_clock.
    const double phase = omega_RF * t + rf->theta;
    const Eigen::Vector3d field = 2.0 *
        (rf->Omega1 * std::cos(phase) - rf->Omega2 * std::sin(phase)) / constants.mu_clock();
    h += zeeman_coupling(constants, field);
  }
  return 0.5 * (h + Matrix(h.adjoint()));
}

Matrix clock_hamiltonian_lab(const HyperfineConstants& constants, double B, Complex Omega_z,
                             double omega_RF, double t) {
  const Complex drive = Omega_z * std::exp(Complex(0, omega_RF * t));
  const double coupling = constants.mu_clock() * B + 2.0 * drive.real();
  Matrix h(2, 2);
  h << 0.5 * constants.A_HF, 0.5 * coupling, 0.5 * coupling, -0.5 * constants.A_HF;
  return h;
}

ClockHamiltonianParams effective_clock_hamiltonian(const PolarizationEllipse& ellipse,
                                                   const Eigen::Vector3d& b_hat, double eta) {
  expect(std::abs(b_hat.norm() - 1.0) < 1e-12, "b_hat must be unit norm");
  ellipse.validate();
  const double o1 = ellipse.Omega1.dot(b_hat);
  const double o2 = ellipse.Omega2.dot(b_hat);

  ClockHamiltonianParams params;
  params.eta = eta;
  params.Omega_eff = std::hypot(o1, o2);
  const double scale = ellipse.Omega1.norm() + ellipse.Omega2.norm();
  if (params.Omega_eff < 1e-14 * scale) {
    params.Omega_eff = 0.0;
    params.xi = ellipse.theta;
    params.degenerate_direction = true;
  } else {
    params.xi = ellipse.theta + std::atan2(o2, o1);
  }
  return params;
}

Matrix clock_rotating_hamiltonian(const ClockHamiltonianParams& params) {
  Matrix h(2, 2);
  const Complex off =
      0.5 * params.Omega_eff * Complex(std::cos(params.xi), -std::sin(params.xi));
  h << 0.5 * params.eta, off, std::conj(off), -0.5 * params.eta;
  return h;
}

double beta_factor(double phi, double Omega_ratio) {
  const double c = std::cos(phi), s = std::sin(phi);
  return std::sqrt(c * c + Omega_ratio * Omega_ratio * s * s);
}

double rabi_probability(double Omega1_mag, double T, double phi, double Omega_ratio) {
  expect(T >= 0, "pulse duration must be nonnegative");
  const double s = std::sin(0.5 * Omega1_mag * T * beta_factor(phi, Omega_ratio));
  return s * s;
}

double rabi_transferred_population(double Omega1_mag, double T, double phi,
                                   double Omega_ratio) {
  return rabi_probability(Omega1_mag, T, phi, Omega_ratio);
}

double rabi_remaining_population(double Omega1_mag, double T, double phi,
                                 double Omega_ratio) {
  return 1.0 - rabi_probability(Omega1_mag, T, phi, Omega_ratio);
}

}  // namespace clockmag
