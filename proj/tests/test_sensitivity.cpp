#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "clockmag/sensitivity.hpp"

using namespace clockmag;

namespace {
constexpr double kPi = std::numbers::pi;
const double k2Sqrt2 = 2.0 * std::sqrt(2.0);
}  // namespace

TEST_CASE("fisher_information on the sensitivity fringe") {
  for (double B_f : {1.0, 4.0}) {
    for (double ratio : {0.27, 1.0, 3.0}) {
      auto fringe = [=](double d) { return p2_sensitivity_fringe(d, B_f, ratio); };
      const double fisher = fisher_information(fringe, 0.0, 1e-6 * B_f);
      CHECK(fisher == doctest::Approx(ratio * ratio / (B_f * B_f)).epsilon(1e-7));
      CHECK(cramer_rao_delta(fisher, 100) ==
            doctest::Approx(B_f / (10.0 * ratio)).epsilon(1e-7));
    }
  }
}

TEST_CASE("fisher_information edge cases") {
  CHECK(fisher_information([](double) { return 0.5; }, 0.0, 1e-6) == 0.0);
  CHECK(std::isinf(cramer_rao_delta(0.0, 10)));
  CHECK_THROWS_AS(fisher_information([](double) { return 1.0; }, 0.0, 1e-6),
                  std::domain_error);
}

TEST_CASE("generic_leak_correction") {
  CHECK(generic_leak_correction(1.3, 0.0) == doctest::Approx(1.3));
  CHECK(generic_leak_correction(1.0, 0.5) == doctest::Approx(std::sqrt(3.0)));
  const double eps = 1e-4;
  CHECK(generic_leak_correction(1.0, eps) == doctest::Approx(1.0 + eps).epsilon(1e-7));
  CHECK_THROWS_AS(generic_leak_correction(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("power_broadening_error limits and monotonicity") {
  CHECK(power_broadening_error({1e9, 1.0, 0.0, 1}) < 1e-12);
  CHECK(power_broadening_error({1e-12, 1.0, 0.0, 1}) == doctest::Approx(1.0));
  // Longer pi-pulse time (smaller T_tilde) reduces the error at fixed field.
  double previous = 1.0;
  for (double T_tilde : {0.8, 0.5, 0.2, 0.0}) {
    const double eps = power_broadening_error({20.0, 1.0, T_tilde, 1});
    CHECK(eps < previous);
    previous = eps;
  }
}

TEST_CASE("full_sensitivity reduces to the ideal form without errors") {
  // Large field, moderate ratio: both corrections vanish.
  const DimensionlessPoint point{1e6, 50.0, 0.5, 4};
  const SensitivityResult result = full_sensitivity(point);
  CHECK(result.delta_tilde ==
        doctest::Approx(point.B_tilde_f / (2.0 * point.Omega_ratio)).epsilon(1e-6));
}

TEST_CASE("full_sensitivity along the optimal line approaches the expansion") {
  for (double B : {30.0, 100.0, 300.0}) {
    const DimensionlessPoint point{B, B / std::sqrt(2.0), 0.0, 1};
    const double expansion = k2Sqrt2 * (1.0 + 1.0 / (B * B));
    CHECK(full_sensitivity(point).delta_tilde ==
          doctest::Approx(expansion).epsilon(10.0 / (B * B)));
  }
}

TEST_CASE("full_sensitivity rejects the non-independent regime") {
  CHECK_THROWS_AS(full_sensitivity({1.0, 0.5, 0.0, 1}), std::domain_error);
}

TEST_CASE("analytic_optimum anchors") {
  CHECK(analytic_optimum(1e9, 0.0, 1).delta_tilde == doctest::Approx(k2Sqrt2).epsilon(1e-9));
  for (int N : {1, 4, 100}) {
    CHECK(analytic_optimum(1e9, 0.0, N).delta_tilde ==
          doctest::Approx(std::sqrt(8.0 / N)).epsilon(1e-9));
  }
  // Retained corrections at B = 10.
  CHECK(analytic_optimum(10.0, 0.0, 1).delta_tilde ==
        doctest::Approx(k2Sqrt2 * (1.0 + 0.01)).epsilon(1e-9));
  // Settings relations: mu B_f = sqrt(2) Omega_2, Omega_1 = 1/(tau - T).
  const SensitivityResult result = analytic_optimum(50.0, 0.1, 1);
  CHECK(result.settings.Omega1_tau == doctest::Approx(1.0 / 0.9));
  CHECK(std::sqrt(2.0) * result.settings.Omega2_tau ==
        doctest::Approx(result.settings.B_tilde_f));
}

TEST_CASE("numeric_optimize finds the ridge at B/sqrt(2) with T -> 0") {
  std::vector<double> B_grid, O_grid;
  for (int i = 0; i < 12; ++i) B_grid.push_back(5.0 * std::pow(20.0, i / 11.0));
  for (int i = 0; i < 12; ++i) O_grid.push_back(1.0 * std::pow(100.0, i / 11.0));
  const OptimizationGrid grid = numeric_optimize(B_grid, O_grid, 1, 2);

  for (size_t bi = 0; bi < B_grid.size(); ++bi) {
    int best = -1;
    for (size_t oi = 0; oi < O_grid.size(); ++oi) {
      const OptimizedPoint& p = grid.at(bi, oi);
      if (!p.masked && (best < 0 || p.delta_tilde < grid.at(bi, best).delta_tilde))
        best = static_cast<int>(oi);
    }
    REQUIRE(best >= 0);
    const double target = B_grid[bi] / std::sqrt(2.0);
    if (target < O_grid.front() || target > O_grid.back()) continue;
    int nearest = 0;
    for (size_t oi = 0; oi < O_grid.size(); ++oi)
      if (std::abs(std::log(O_grid[oi] / target)) <
          std::abs(std::log(O_grid[nearest] / target)))
        nearest = static_cast<int>(oi);
    CHECK(std::abs(best - nearest) <= 1);
    CHECK(grid.at(bi, best).T_opt < 0.02);
  }
}

TEST_CASE("numeric_optimize masks the combined-error region") {
  const OptimizationGrid grid = numeric_optimize({2.0}, {0.7}, 1, 1);
  CHECK(grid.at(0, 0).masked);
}

TEST_CASE("optimize_at_B converges to 2 sqrt(2) at large field") {
  const OptimizedPoint at50 = optimize_at_B(50.0, 1);
  CHECK(at50.delta_tilde == doctest::Approx(k2Sqrt2).epsilon(0.02));
  CHECK(at50.T_opt < 0.02);
  const OptimizedPoint at10 = optimize_at_B(10.0, 1);
  CHECK(at10.delta_tilde == doctest::Approx(k2Sqrt2).epsilon(0.10));
}

TEST_CASE("optimality certificate at the reported optimum") {
  // Gradient vanishes and curvature is positive at the found optimum, which
  // sits within a per-mille of B/sqrt(2).
  const double B = 50.0;
  const OptimizedPoint opt = optimize_at_B(B, 1);
  // The residual eps_D term shifts the minimizer off B/sqrt(2) by O(B^-2).
  CHECK(std::abs(opt.Omega_opt - B / std::sqrt(2.0)) / opt.Omega_opt < 3e-3);
  auto value = [&](double ratio) {
    return full_sensitivity({B, ratio, opt.T_opt, 1}).delta_tilde;
  };
  const double h = 1e-4 * opt.Omega_opt;
  const double grad = (value(opt.Omega_opt + h) - value(opt.Omega_opt - h)) / (2 * h);
  const double curv = (value(opt.Omega_opt + h) - 2 * value(opt.Omega_opt) +
                       value(opt.Omega_opt - h)) /
                      (h * h);
  CHECK(std::abs(grad) * opt.Omega_opt / value(opt.Omega_opt) < 1e-4);
  CHECK(curv > 0.0);
}

TEST_CASE("self_consistent_sensitivity matches the large-field series at T = 0") {
  for (double B : {10.0, 20.0, 50.0, 100.0}) {
    for (int N : {1, 10}) {
      const double sc = self_consistent_sensitivity(B, 0.0, N).delta_tilde;
      const double series =
          k2Sqrt2 / std::sqrt(static_cast<double>(N)) *
          (1.0 + 1.0 / (B * B) + 8.0 / (N * B * B));
      CHECK(std::abs(sc - series) < 1000.0 / std::pow(B, 4));
    }
  }
}

TEST_CASE("self-consistent residual falls off as the fourth power of the field") {
  auto residual = [](double B) {
    const double sc = self_consistent_sensitivity(B, 0.0, 1).delta_tilde;
    const double series = k2Sqrt2 * (1.0 + 1.0 / (B * B) + 8.0 / (B * B));
    return std::abs(sc - series);
  };
  const double exponent = std::log(residual(10.0) / residual(100.0)) / std::log(10.0);
  CHECK(exponent >= 3.5);
}

TEST_CASE("self_consistent_sensitivity agrees with a fixed-point oracle") {
  // Independent route: iterate delta -> full sensitivity with eps_D(delta).
  const double B = 20.0, T_tilde = 0.0;
  const int N = 10;
  const double ratio = std::sqrt(1.0 + 0.5 * B * B);
  const double eps_pb = power_broadening_error({B, ratio, T_tilde, N});
  const double pb_factor = (1.0 + eps_pb) / (1.0 - eps_pb);
  double delta = B / (std::sqrt(static_cast<double>(N)) * ratio) * pb_factor;
  for (int it = 0; it < 200; ++it) {
    const double eps_d = (delta * delta) / (B * B);
    delta = B / (std::sqrt(static_cast<double>(N)) * ratio) *
            std::sqrt((1.0 + eps_d) / (1.0 - eps_d)) * pb_factor;
  }
  const double sc = self_consistent_sensitivity(B, T_tilde, N).delta_tilde;
  CHECK(std::abs(sc - delta) / delta < 0.01);
}

TEST_CASE("self-consistent N -> infinity recovers the plain expansion") {
  const double B = 30.0;
  const double sc = self_consistent_sensitivity(B, 0.0, 1000000).delta_tilde;
  const double plain = k2Sqrt2 / std::sqrt(1e6) * (1.0 + 1.0 / (B * B));
  CHECK(sc == doctest::Approx(plain).epsilon(1e-5));
}

TEST_CASE("zeeman_ramsey_population anchors") {
  CHECK(zeeman_ramsey_population(0.0, 1.7) == doctest::Approx(1.0));
  CHECK(zeeman_ramsey_population(kPi / 2.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zeeman baseline constant and the underlying Fisher information") {
  // The bare Bernoulli Fisher information of the cosine fringe at quadrature
  // is T^2; the baseline constant corresponds to the half-window convention.
  const double T = 3.0;
  auto fringe = [T](double d) { return 0.5 + 0.5 * std::cos(d * T + kPi / 2); };
  CHECK(fisher_information(fringe, 0.0, 1e-7) == doctest::Approx(T * T).epsilon(1e-6));
  for (int N : {1, 16}) {
    CHECK(zeeman_ramsey_sensitivity(N, T) ==
          doctest::Approx(2.0 / (std::sqrt(static_cast<double>(N)) * T)).epsilon(1e-9));
  }
}

TEST_CASE("geometric-to-Zeeman sensitivity ratio is sqrt(2)") {
  const double geometric = analytic_optimum(1e9, 0.0, 1).delta_tilde;
  const double zeeman = zeeman_ramsey_sensitivity(1, 1.0);
  CHECK(geometric / zeeman == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Cramer-Rao Monte-Carlo quickcheck") {
  const MLEResult result = mle_monte_carlo(1.0, 0.27, 10000, 200, 2024);
  CHECK(result.predicted == doctest::Approx(1.0 / (100.0 * 0.27)));
  CHECK(std::abs(result.sigma - result.predicted) / result.predicted < 0.15);
}

TEST_CASE("scaling laws in the coherence time") {
  // Fixed N: the dimensional sensitivity is (hbar/mu tau) delta_tilde, so
  // doubling tau halves it.
  const double delta_tilde = analytic_optimum(1e9, 0.0, 1).delta_tilde;
  auto dimensional = [&](double tau) { return delta_tilde / tau; };
  CHECK(dimensional(2.0) == doctest::Approx(0.5 * dimensional(1.0)));

  // Fixed total time: N = T_total/tau, so delta scales as tau^(-1/2).
  auto fixed_total = [&](double tau) {
    const int N = static_cast<int>(std::lround(1024.0 / tau));
    return analytic_optimum(1e9, 0.0, N).delta_tilde / tau;
  };
  const double exponent =
      std::log(fixed_total(1.0) / fixed_total(4.0)) / std::log(1.0 / 4.0);
  CHECK(exponent == doctest::Approx(-0.5).epsilon(0.04));
}

TEST_CASE("dimensionless groups determine the sensitivity") {
  // Two dimensional scenarios with identical (B_tilde, ratio, T_tilde, N)
  // built from different (mu, B_f, tau) combinations.
  auto point_from = [](double mu, double B_f, double tau, double Omega2_over_Omega1,
                       double T) {
    return DimensionlessPoint{mu * B_f * tau, Omega2_over_Omega1, T / tau, 7};
  };
  const DimensionlessPoint a = point_from(2.0, 10.0, 1.0, 12.0, 0.05);
  const DimensionlessPoint b = point_from(0.5, 8.0, 5.0, 12.0, 0.25);
  CHECK(a.B_tilde_f == doctest::Approx(b.B_tilde_f));
  CHECK(full_sensitivity(a).delta_tilde == doctest::Approx(full_sensitivity(b).delta_tilde));
}
