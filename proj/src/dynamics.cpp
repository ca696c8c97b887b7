#include "clockmag/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace clockmag {

namespace detail {
void expect(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}
}  // namespace detail

using detail::expect;

StateVector make_state(CVector amplitudes, std::vector<std::string> labels) {
  expect(amplitudes.size() >= 2, "state dimension must be >= 2");
  expect(!labels.size() || labels.size() == static_cast<size_t>(amplitudes.size()),
         "label count must match state dimension");
  expect(std::abs(amplitudes.squaredNorm() - 1.0) < 1e-10, "state must be normalized");
  return StateVector{std::move(amplitudes), std::move(labels)};
}

HamiltonianSchedule constant_schedule(const Matrix& H, double duration) {
  Matrix copy = H;
  return HamiltonianSchedule{[copy](double) { return copy; }, 0.0, duration,
                             static_cast<int>(H.rows())};
}

Matrix pauli_x() {
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

Matrix pauli_y() {
  Matrix s(2, 2);
  s << 0, Complex(0, -1), Complex(0, 1), 0;
  return s;
}

Matrix pauli_z() {
  Matrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

bool is_hermitian(const Matrix& H, double rel_tol) {
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  return (H - H.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double unitarity_defect(const Matrix& U) {
  Matrix d = U.adjoint() * U;
  d -= Matrix::Identity(U.rows(), U.cols());
  return d.cwiseAbs().maxCoeff();
}

namespace {

// Closed-form exp(-i H dt) for a Hermitian 2x2 via Pauli decomposition.
Matrix exp_2x2(const Matrix& H, double dt) {
  const double a0 = 0.5 * (H(0, 0).real() + H(1, 1).real());
  const double az = 0.5 * (H(0, 0).real() - H(1, 1).real());
  const double ax = H(1, 0).real();
  const double ay = H(1, 0).imag();
  const double r = std::sqrt(ax * ax + ay * ay + az * az);
  const Complex phase = std::exp(Complex(0, -a0 * dt));

  Matrix u(2, 2);
  if (r == 0.0) {
    u << phase, 0, 0, phase;
    return u;
  }
  const double c = std::cos(r * dt);
  const double s = std::sin(r * dt);
  const Complex mis(0, -s);
  u(0, 0) = phase * (c + mis * (az / r));
  u(1, 1) = phase * (c - mis * (az / r));
  u(0, 1) = phase * mis * Complex(ax, -ay) / r;
  u(1, 0) = phase * mis * Complex(ax, ay) / r;
  return u;
}

void check_finite(const Matrix& H) {
  if (!H.allFinite()) throw std::domain_error("non-finite Hamiltonian entries");
}

}  // namespace

Matrix unitary_of_step(const Matrix& H, double dt) {
  expect(H.rows() == H.cols(), "Hamiltonian must be square");
  expect(std::isfinite(dt), "dt must be finite");
  check_finite(H);
  if (!is_hermitian(H)) throw std::invalid_argument("Hamiltonian must be Hermitian");

  if (H.rows() == 2) return exp_2x2(H, dt);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
  const auto& evals = solver.eigenvalues();
  const Matrix& vecs = solver.eigenvectors();
  CVector phases(evals.size());
  for (int i = 0; i < evals.size(); ++i) phases(i) = std::exp(Complex(0, -evals(i) * dt));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

StateVector evolve(const StateVector& state, const HamiltonianSchedule& schedule,
                   const IntegratorConfig& config) {
  expect(config.step_count >= 1, "step_count must be >= 1");
  expect(state.dim() == schedule.dim, "state/schedule dimension mismatch");
  expect(std::abs(state.norm_sq() - 1.0) < 1e-6, "input state must be normalized");

  const double duration = schedule.t1 - schedule.t0;
  const int n = config.step_count;
  const double dt = duration / n;

  CVector psi = state.amplitudes;
  if (config.scheme == IntegrationScheme::MidpointExponential) {
    for (int k = 0; k < n; ++k) {
      const double t_mid = schedule.t0 + (k + 0.5) * dt;
      psi = unitary_of_step(schedule.evaluator(t_mid), dt) * psi;
    }
  } else {
    // Classic RK4 on d(psi)/dt = -i H(t) psi.
    const Complex mi(0, -1);
    for (int k = 0; k < n; ++k) {
      const double t = schedule.t0 + k * dt;
      Matrix h1 = schedule.evaluator(t);
      Matrix h2 = schedule.evaluator(t + 0.5 * dt);
      Matrix h3 = schedule.evaluator(t + dt);
      check_finite(h1);
      CVector k1 = mi * (h1 * psi);
      CVector k2 = mi * (h2 * (psi + 0.5 * dt * k1));
      CVector k3 = mi * (h2 * (psi + 0.5 * dt * k2));
      CVector k4 = mi * (h3 * (psi + dt * k3));
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  if (config.renormalize) psi.normalize();
  return StateVector{std::move(psi), state.basis_labels};
}

Matrix dyson_first_order(const HamiltonianSchedule& schedule, double t0, double t1,
                         int quad_points) {
  expect(quad_points >= 2, "quad_points must be >= 2");
  if (t1 < t0) throw std::invalid_argument("t1 must be >= t0");

  int n = quad_points;
  if (n % 2) ++n;  // Simpson needs an even subinterval count
  const double h = (t1 - t0) / n;

  Matrix integral = Matrix::Zero(schedule.dim, schedule.dim);
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * schedule.evaluator(t0 + i * h);
  }
  integral *= h / 3.0;

  return Matrix::Identity(schedule.dim, schedule.dim) - Complex(0, 1) * integral;
}

}  // namespace clockmag
