#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clockmag/two_spin.hpp"

using namespace clockmag;

namespace {
constexpr double kPi = std::numbers::pi;

double calibrated_area(double chi) { return kPi / (2.0 * std::cos(chi)); }

// Central-difference slope in phi.
double slope(const std::function<double(double)>& f, double h = 1e-6) {
  return (f(h) - f(-h)) / (2 * h);
}
}  // namespace

TEST_CASE("hamiltonian_lab: field along z is diagonal in the S/T basis") {
  const double b = 1.3;
  const Matrix h = two_spin_hamiltonian_lab({0, 0, b}, {0, 0, 0});
  const SingletTripletBasis st{0.0};
  const Matrix m = st.to_st_matrix();
  const Matrix h_st = m.adjoint() * h * m;
  CHECK(h_st(0, 0).real() == doctest::Approx(2 * b));
  CHECK(std::abs(h_st(1, 1)) < 1e-12);
  CHECK(std::abs(h_st(2, 2)) < 1e-12);
  CHECK(h_st(3, 3).real() == doctest::Approx(-2 * b));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(h_st(i, j)) < 1e-12);
}

TEST_CASE("hamiltonian_lab: z drive couples S and T with unit matrix element") {
  const double w = 0.7;
  const Matrix h = two_spin_hamiltonian_lab({0, 0, 0}, {0, 0, w});
  const SingletTripletBasis st{0.0};
  const Complex st_elem = (st.singlet().adjoint() * h * st.triplet())(0);
  CHECK(st_elem.real() == doctest::Approx(w));
  CHECK(std::abs((st.singlet().adjoint() * h * st.singlet())(0)) < 1e-12);
  CHECK(std::abs((st.triplet().adjoint() * h * st.triplet())(0)) < 1e-12);
}

TEST_CASE("hamiltonian_lab: clock coupling is the drive projection on the field") {
  // Drive at angle chi, field at angle alpha: <S|Omega.sigma1|T(alpha)> = w cos(alpha - chi).
  const double w = 1.0;
  for (double chi : {0.0, kPi / 5, kPi / 3}) {
    const Eigen::Vector3d omega(w * std::sin(chi), 0, w * std::cos(chi));
    for (double alpha : {0.0, 0.4, 1.2}) {
      const Matrix h = two_spin_hamiltonian_lab({0, 0, 0}, omega);
      const SingletTripletBasis st{alpha};
      const Complex coupling = (st.singlet().adjoint() * h * st.triplet())(0);
      CHECK(std::abs(coupling - Complex(w * std::cos(alpha - chi), 0)) < 1e-12);
    }
  }
}

TEST_CASE("adiabatic_pulse_unitary: calibrated pulse makes an equal superposition") {
  const double chi = kPi / 6;
  const Matrix u = adiabatic_pulse_unitary(0.0, chi, calibrated_area(chi));
  const SingletTripletBasis st{0.0};
  const CVector out = u * st.singlet();
  CHECK(std::norm((st.singlet().adjoint() * out)(0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::norm((st.triplet().adjoint() * out)(0)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("adiabatic_pulse_unitary: zero area gives the identity") {
  const Matrix u = adiabatic_pulse_unitary(0.3, kPi / 4, 0.0);
  CHECK((u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("adiabatic_pulse_unitary: no leakage out of the clock subspace") {
  const double chi = kPi / 3, alpha = 0.8;
  const Matrix u = adiabatic_pulse_unitary(alpha, chi, calibrated_area(chi));
  const SingletTripletBasis st{alpha};
  for (const CVector& in : {st.singlet(), st.triplet()}) {
    const CVector out = u * in;
    const double leak = std::norm((st.up_up().adjoint() * out)(0)) +
                        std::norm((st.down_down().adjoint() * out)(0));
    CHECK(leak < 1e-13);
  }
}

TEST_CASE("sequence_prob_S_lab: phi = 0 gives 1/2 for any chi") {
  for (double chi : {0.0, kPi / 6, kPi / 3, 1.2}) {
    CHECK(sequence_prob_S_lab(chi, 0.0, calibrated_area(chi)) ==
          doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("sequence_prob_S_lab: chi = 0, phi = pi/2 gives certainty") {
  CHECK(sequence_prob_S_lab(0.0, kPi / 2, kPi / 2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sequence_prob_S_lab: rejects an uncalibrated pulse") {
  CHECK_THROWS_AS(sequence_prob_S_lab(0.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("sequence_prob_S_lab agrees with prob_S_closed on a dense grid") {
  for (double chi : {0.0, kPi / 6, kPi / 3}) {
    for (int i = 0; i <= 60; ++i) {
      const double phi = -kPi + 2 * kPi * i / 60.0;
      const double lab = sequence_prob_S_lab(chi, phi, calibrated_area(chi));
      CHECK(std::abs(lab - prob_S_closed(chi, phi)) < 1e-8);
    }
  }
}

TEST_CASE("sequence keeps the polarized states empty") {
  const double chi = kPi / 3, phi = 0.7;
  const Matrix u1 = adiabatic_pulse_unitary(0.0, chi, calibrated_area(chi));
  const double alpha = chi + kPi / 2 + phi;
  const Matrix u2 = adiabatic_pulse_unitary(alpha, chi, calibrated_area(chi));
  const CVector out = u2 * (total_spin_y_rotation(alpha) * (u1 * SingletTripletBasis{}.singlet()));
  const SingletTripletBasis st{alpha};
  const double leak = std::norm((st.up_up().adjoint() * out)(0)) +
                      std::norm((st.down_down().adjoint() * out)(0));
  CHECK(leak < 1e-13);
}

TEST_CASE("prob_S_closed: anchors and slope") {
  CHECK(prob_S_closed(0.7, 0.0) == doctest::Approx(0.5));
  CHECK(prob_S_closed(0.0, kPi / 2) == doctest::Approx(1.0));
  for (double chi : {0.0, kPi / 6, kPi / 3}) {
    const double fd = slope([chi](double phi) { return prob_S_closed(chi, phi); });
    CHECK(fd == doctest::Approx(kPi / (4 * std::cos(chi))).epsilon(1e-8));
  }
  CHECK_THROWS_AS(prob_S_closed(kPi / 2, 0.1), std::domain_error);
}

TEST_CASE("prob_S_closed: slope magnitude grows with chi") {
  double prev = 0.0;
  for (double chi : {0.0, 0.3, 0.6, 0.9, 1.2, 1.5}) {
    const double s = std::abs(slope([chi](double phi) { return prob_S_closed(chi, phi); }));
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("prob_S_closed: extremum spacing shrinks towards phi = 0 as chi grows") {
  // First maximum at phi = arcsin(cos chi), first minimum at -arcsin(cos chi).
  auto spacing = [](double chi) {
    // First local maximum above phi = 0.
    double prev = prob_S_closed(chi, 0.0);
    for (int i = 1; i <= 40000; ++i) {
      const double phi = kPi * i / 40000.0;
      const double p = prob_S_closed(chi, phi);
      if (p < prev) return 2 * kPi * (i - 1) / 40000.0;
      prev = p;
    }
    return kPi;
  };
  CHECK(spacing(0.0) > spacing(kPi / 6));
  CHECK(spacing(kPi / 6) > spacing(kPi / 3));
  CHECK(spacing(kPi / 3) > spacing(1.4));
  CHECK(spacing(kPi / 6) == doctest::Approx(2 * std::asin(std::cos(kPi / 6))).epsilon(1e-3));
}

TEST_CASE("prob_S_approx: anchors") {
  TwoSpinConfig config;
  config.B_i = 100.0;
  config.B_f = 10.0;
  config.b_hat_f = Eigen::Vector3d::UnitX();  // perpendicular to the chi = 0 drive
  config.chi = 0.0;
  config.pulse_area = kPi / 2;

  SUBCASE("zero signal gives 1/2") {
    config.delta = Eigen::Vector3d::Zero();
    const auto out = prob_S_approx(config);
    CHECK(out.value == doctest::Approx(0.5));
    CHECK(out.regime_ok);
  }

  SUBCASE("signal along the drive: linear coefficient -area/B_f") {
    const double eps = 1e-4;
    config.delta = Eigen::Vector3d(0, 0, eps);  // parallel to the drive (z), perp to b_f
    const double p = prob_S_approx(config).value;
    const double coefficient = (p - 0.5) / eps;
    CHECK(coefficient == doctest::Approx(-config.pulse_area / config.B_f).epsilon(1e-6));
  }

  SUBCASE("signal perpendicular to both drive and field does nothing") {
    config.delta = Eigen::Vector3d(0, 0.05, 0);
    CHECK(prob_S_approx(config).value == doctest::Approx(0.5));
  }

  SUBCASE("regime flag trips for large signals") {
    config.delta = Eigen::Vector3d(0, 0, 2.0);
    CHECK_FALSE(prob_S_approx(config).regime_ok);
  }
}

TEST_CASE("prob_S_approx linear term is twice the closed-form slope") {
  // The expansion form carries 2 sin(z.OmegaT) d.OmegaT/(2 B_f); the exact
  // closed form linearizes to half that coefficient.
  TwoSpinConfig config;
  config.B_i = 100.0;
  config.B_f = 10.0;
  config.b_hat_f = Eigen::Vector3d::UnitX();
  config.chi = 0.0;
  config.pulse_area = kPi / 2;
  const double eps = 1e-5;
  config.delta = Eigen::Vector3d(0, 0, eps);
  const double approx_slope = (prob_S_approx(config).value - 0.5) / (eps / config.B_f);
  const double closed_slope = slope([](double phi) { return prob_S_closed(0.0, phi); });
  CHECK(std::abs(approx_slope) / closed_slope == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("prob_S_static: anchors") {
  CHECK(prob_S_static(0.9, 0.0) == doctest::Approx(0.5));
  const double expected =
      std::pow(std::cos((1.0 + std::cos(0.0) / std::cos(kPi / 4)) * kPi / 8.0), 2);
  CHECK(prob_S_static(kPi / 4, kPi / 4) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(prob_S_static(kPi / 2, 0.0), std::domain_error);
}

TEST_CASE("prob_S_static: slope ratio follows sin(chi)/2, half sensitivity in the limit") {
  for (double chi : {0.5, 1.0, 1.3}) {
    const double rs = std::abs(slope([chi](double p) { return prob_S_static(chi, p); }));
    const double rc = std::abs(slope([chi](double p) { return prob_S_closed(chi, p); }));
    CHECK(rs / rc == doctest::Approx(std::sin(chi) / 2).epsilon(1e-6));
  }
  // Approaching chi = pi/2 the ratio converges to one half.
  const double chi = kPi / 2 - 1e-3;
  const double rs = std::abs(slope([chi](double p) { return prob_S_static(chi, p); }, 1e-7));
  const double rc = std::abs(slope([chi](double p) { return prob_S_closed(chi, p); }, 1e-7));
  CHECK(std::abs(rs / rc - 0.5) < 1e-6);
}

TEST_CASE("gaussian adiabatic pulse: clock subspace confinement below 1 percent") {
  // Slow-ramp scenario: Gaussian drive of width 25 sqrt(2 pi)/(B cos chi),
  // peak 0.01 B, truncated at +-6 widths, static field B z.
  const double B = 1.0, chi = kPi / 3;
  const double tau = 25.0 * std::sqrt(2 * kPi) / (B * std::cos(chi));
  const double peak = 0.01 * B;
  const SingletTripletBasis st{0.0};

  auto schedule_for = [&](double amplitude) {
    return HamiltonianSchedule{
        [=](double t) {
          const double omega = amplitude * std::exp(-t * t / (2 * tau * tau));
          return two_spin_hamiltonian_lab(
              {0, 0, B}, {omega * std::sin(chi), 0, omega * std::cos(chi)});
        },
        -6 * tau, 6 * tau, 4};
  };

  // Track the polarized population along the full-area pulse.
  const int segments = 60;
  StateVector state = make_state(st.singlet());
  double max_leak = 0.0;
  const auto schedule = schedule_for(peak);
  for (int k = 0; k < segments; ++k) {
    HamiltonianSchedule piece = schedule;
    piece.t0 = -6 * tau + 12 * tau * k / segments;
    piece.t1 = -6 * tau + 12 * tau * (k + 1) / segments;
    state = evolve(state, piece, IntegratorConfig{800});
    const double leak = std::norm((st.up_up().adjoint() * state.amplitudes)(0)) +
                        std::norm((st.down_down().adjoint() * state.amplitudes)(0));
    max_leak = std::max(max_leak, leak);
  }
  CHECK(max_leak < 0.01);
  // The full-area pulse drives a complete S -> T transfer.
  CHECK(std::norm((st.triplet().adjoint() * state.amplitudes)(0)) > 0.98);

  // Half the area realizes the projected-pulse pi/2 model.
  const StateVector half =
      evolve(make_state(st.singlet()), schedule_for(peak / 2), IntegratorConfig{40000});
  CHECK(std::norm((st.singlet().adjoint() * half.amplitudes)(0)) ==
        doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("singlet/triplet basis is orthonormal and the singlet is a scalar") {
  for (double alpha : {0.0, 0.7, 2.4}) {
    const SingletTripletBasis basis{alpha};
    const Matrix m = basis.to_st_matrix();
    CHECK(unitarity_defect(m) < 1e-12);
    // The singlet is invariant under the field rotation; the triplet follows it.
    const CVector s0 = SingletTripletBasis{0.0}.singlet();
    CHECK((basis.singlet() - s0).cwiseAbs().maxCoeff() < 1e-15);
    if (alpha != 0.0) {
      const CVector t0 = SingletTripletBasis{0.0}.triplet();
      CHECK(std::abs(std::norm((t0.adjoint() * basis.triplet())(0)) - 1.0) > 1e-3);
    }
  }
}
