#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clockmag {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Quantum state over a labeled basis. Everything downstream works in natural
// units (hbar = mu = 1), so Hamiltonian entries are angular frequencies.
struct StateVector {
  CVector amplitudes;
  std::vector<std::string> basis_labels;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm_sq() const { return amplitudes.squaredNorm(); }
  double population(int i) const { return std::norm(amplitudes(i)); }
};

// Validates dimension >= 2 and unit norm (tolerance 1e-10).
StateVector make_state(CVector amplitudes, std::vector<std::string> labels = {});

// Time-dependent Hamiltonian H(t) on [t0, t1].
struct HamiltonianSchedule {
  std::function<Matrix(double)> evaluator;
  double t0 = 0.0;
  double t1 = 0.0;
  int dim = 0;
};

HamiltonianSchedule constant_schedule(const Matrix& H, double duration);

enum class IntegrationScheme { MidpointExponential, Rk4Amplitudes };

struct IntegratorConfig {
  int step_count = 1000;
  IntegrationScheme scheme = IntegrationScheme::MidpointExponential;
  bool renormalize = false;
};

// exp(-i H dt) for Hermitian H. The 2x2 case uses the Pauli closed form,
// larger dimensions a self-adjoint eigendecomposition; both keep the result
// unitary to round-off at any step size.
Matrix unitary_of_step(const Matrix& H, double dt);

// Fixed-step propagation of the Schrodinger equation. The default scheme
// exponentiates H(t + dt/2) per step (exponential midpoint rule, second
// order, exactly norm-preserving).
StateVector evolve(const StateVector& state, const HamiltonianSchedule& schedule,
                   const IntegratorConfig& config);

// First-order Dyson term 1 - i * integral of H(t) dt over [t0, t1], composite
// Simpson quadrature with quad_points subintervals (rounded up to even).
Matrix dyson_first_order(const HamiltonianSchedule& schedule, double t0, double t1,
                         int quad_points);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

bool is_hermitian(const Matrix& H, double rel_tol = 1e-12);
double unitarity_defect(const Matrix& U);  // max |U^dag U - 1|

namespace detail {
void expect(bool condition, const char* message);
}

}  // namespace clockmag
