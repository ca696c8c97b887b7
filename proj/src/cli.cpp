#include "clockmag/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "clockmag/ac_protocol.hpp"
#include "clockmag/dc_protocol.hpp"
#include "clockmag/diabatic.hpp"
#include "clockmag/hyperfine.hpp"
#include "clockmag/sensitivity.hpp"
#include "clockmag/two_spin.hpp"

namespace clockmag::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double get_or(const Json& block, const std::string& key, double fallback) {
  return block.contains(key) ? block.at(key).get<double>() : fallback;
}

int get_or_int(const Json& block, const std::string& key, int fallback) {
  return block.contains(key) ? block.at(key).get<int>() : fallback;
}

bool get_or_bool(const Json& block, const std::string& key, bool fallback) {
  return block.contains(key) ? block.at(key).get<bool>() : fallback;
}

// ---------------------------------------------------------------------------
// Config schema: unknown keys are rejected.

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {"figure", "operation", "axes", "seed", "threads", "integrator", "output",
            "two_spin_fringe", "rabi_scan", "dc_fringe", "fringe_phase", "ac_filter",
            "diabatic_ramp", "diabatic_plane", "sensitivity_plane", "fields"}},
      {"integrator", {"step_count", "scheme", "renormalize"}},
      {"output", {"dir", "formats"}},
      {"two_spin_fringe", {"chi_values", "phi_min", "phi_max", "phi_count"}},
      {"rabi_scan",
       {"omega_ratio", "area_min", "area_max", "area_count", "phi_min", "phi_max",
        "phi_count"}},
      {"dc_fringe",
       {"omega_ratio", "phi_min", "phi_max", "phi_count", "theta_count",
        "include_simulation", "scan_count"}},
      {"fringe_phase", {"omega_ratios", "phi_min", "phi_max", "phi_count"}},
      {"ac_filter",
       {"phi0", "n", "omega_ratio", "omega_m", "drive_scale", "scan_min", "scan_max",
        "scan_count"}},
      {"diabatic_ramp",
       {"Bi_over_Bf", "Bf_over_delta", "T_min", "T_max", "T_count", "quad_points"}},
      {"diabatic_plane",
       {"ratio_Bi_min", "ratio_Bi_max", "ratio_Bi_count", "ratio_Bf_min", "ratio_Bf_max",
        "ratio_Bf_count", "T_over_tau_delta"}},
      {"sensitivity_plane",
       {"B_min", "B_max", "B_count", "Omega_min", "Omega_max", "Omega_count", "N"}},
      {"fields", {"B_i", "B_f", "delta"}},
  };
  return s;
}

void check_keys(const Json& node, const std::string& path) {
  if (!node.is_object()) return;
  const auto& allowed = schema();
  auto it = allowed.find(path);
  if (it == allowed.end()) return;  // leaf blocks with free-form arrays
  for (const auto& [key, value] : node.items()) {
    if (!it->second.count(key))
      throw ConfigError("unknown config key: " + (path.empty() ? key : path + "." + key));
    if (value.is_object()) check_keys(value, key);
  }
}

IntegratorConfig integrator_from(const Json& config) {
  IntegratorConfig integ;
  if (!config.contains("integrator")) return integ;
  const Json& block = config.at("integrator");
  integ.step_count = get_or_int(block, "step_count", integ.step_count);
  integ.renormalize = get_or_bool(block, "renormalize", false);
  if (block.contains("scheme")) {
    const std::string scheme = block.at("scheme").get<std::string>();
    if (scheme == "midpoint-exponential")
      integ.scheme = IntegrationScheme::MidpointExponential;
    else if (scheme == "fixed-step-RK4-on-amplitudes" || scheme == "rk4")
      integ.scheme = IntegrationScheme::Rk4Amplitudes;
    else
      throw ConfigError("unknown integrator scheme: " + scheme);
  }
  return integ;
}

// ---------------------------------------------------------------------------
// Figure runners.

CommandResult figure_two_spin_fringe(const Json& block) {
  std::vector<double> chis = {0.0, kPi / 6.0, kPi / 3.0};
  if (block.contains("chi_values")) chis = block.at("chi_values").get<std::vector<double>>();
  const auto phis = linspace(get_or(block, "phi_min", -kPi), get_or(block, "phi_max", kPi),
                             get_or_int(block, "phi_count", 61));

  CommandResult result;
  result.name = "two-spin-fringe";
  result.table.columns = {"phi"};
  result.table.units = {"rad"};
  for (size_t c = 0; c < chis.size(); ++c) {
    result.table.columns.push_back("prS_chi" + std::to_string(c));
    result.table.units.push_back("1");
  }
  for (double phi : phis) {
    std::vector<double> row = {phi};
    for (double chi : chis) row.push_back(prob_S_closed(chi, phi));
    result.table.rows.push_back(std::move(row));
  }

  Json at_zero = Json::array();
  for (double chi : chis) at_zero.push_back(prob_S_closed(chi, 0.0));
  result.summary = {{"chi_values", chis}, {"p_at_phi0", at_zero}};
  return result;
}

double first_maximum(const std::function<double(double)>& fn, double lo, double hi,
                     int scan_points) {
  // March until the first decrease, then refine the bracket by golden section.
  const double step = (hi - lo) / scan_points;
  double prev_x = lo, prev_y = fn(lo);
  double peak_lo = lo, peak_hi = hi;
  for (int i = 1; i <= scan_points; ++i) {
    const double x = lo + i * step;
    const double y = fn(x);
    if (y < prev_y) {
      peak_lo = std::max(lo, prev_x - step);
      peak_hi = x;
      break;
    }
    prev_x = x;
    prev_y = y;
  }
  double a = peak_lo, b = peak_hi;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > 1e-10 * (hi - lo)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

CommandResult figure_rabi_scan(const Json& block) {
  const double ratio = get_or(block, "omega_ratio", 0.27);
  const auto areas = linspace(get_or(block, "area_min", 0.0),
                              get_or(block, "area_max", 4.0 * kPi),
                              get_or_int(block, "area_count", 121));
  const auto phis = linspace(get_or(block, "phi_min", -kPi / 2),
                             get_or(block, "phi_max", kPi / 2),
                             get_or_int(block, "phi_count", 61));

  CommandResult result;
  result.name = "rabi-scan";
  result.table.columns = {"pulse_area", "phi", "P2"};
  result.table.units = {"rad", "rad", "1"};
  for (double area : areas)
    for (double phi : phis)
      result.table.rows.push_back({area, phi, rabi_probability(1.0, area, phi, ratio)});

  auto max_at = [&](double phi) {
    return first_maximum([&](double a) { return rabi_probability(1.0, a, phi, ratio); }, 0.1,
                         2.5 * kPi / beta_factor(phi, ratio), 4000);
  };
  result.summary = {{"omega_ratio", ratio},
                    {"first_max_area_phi0", max_at(0.0)},
                    {"first_max_area_phi90", max_at(kPi / 2)}};
  return result;
}

CommandResult figure_dc_fringe(const Json& block, const RunOptions& options) {
  const double ratio = get_or(block, "omega_ratio", 0.27);
  const auto phis = linspace(get_or(block, "phi_min", -kPi), get_or(block, "phi_max", kPi),
                             get_or_int(block, "phi_count", 21));
  const int theta_count = get_or_int(block, "theta_count", 21);
  const bool sim = get_or_bool(block, "include_simulation", true);
  const auto thetas = linspace(0.0, kTwoPi * (1.0 - 1.0 / theta_count), theta_count);

  DCProtocolSpec spec;
  spec.ellipse.Omega1 = Eigen::Vector3d(0, 0, 1);
  spec.ellipse.Omega2 = Eigen::Vector3d(ratio, 0, 0);

  CommandResult result;
  result.name = "dc-fringe";
  result.table.columns = {"phi", "theta", "P2_exact"};
  result.table.units = {"rad", "rad", "1"};
  if (sim) {
    result.table.columns.insert(result.table.columns.end(), {"P2_sim", "abs_diff"});
    result.table.units.insert(result.table.units.end(), {"1", "1"});
  }

  double max_diff = 0.0;
  for (double phi : phis) {
    for (double theta : thetas) {
      const double exact = p2_exact(phi, theta, ratio);
      std::vector<double> row = {phi, theta, exact};
      if (sim) {
        spec.phi = phi;
        spec.theta2 = theta;
        const double simulated = simulate_dc_protocol(spec, options.integrator);
        row.push_back(simulated);
        row.push_back(std::abs(simulated - exact));
        max_diff = std::max(max_diff, std::abs(simulated - exact));
      }
      result.table.rows.push_back(std::move(row));
    }
  }

  // Fringe-phase extraction against the closed form on a fine scan.
  const int scan_count = get_or_int(block, "scan_count", 361);
  const auto scan_grid = linspace(0.0, kTwoPi * (1.0 - 1.0 / scan_count), scan_count);
  double max_phase_err = 0.0;
  for (double phi : phis) {
    if (std::abs(std::abs(phi) - kPi) < 1e-9) continue;  // both extrema degenerate
    spec.phi = phi;
    const FringeResult fringe = ramsey_scan(spec, scan_grid);
    const double closed = fringe_phase(phi, ratio).theta_f;
    double err = std::abs(fringe.theta_f - closed);
    err = std::min(err, kTwoPi - err);
    max_phase_err = std::max(max_phase_err, err);
  }

  result.summary = {{"omega_ratio", ratio}, {"max_fringe_phase_error", max_phase_err}};
  if (sim) result.summary["max_abs_diff"] = max_diff;
  return result;
}

CommandResult figure_fringe_phase(const Json& block) {
  std::vector<double> ratios = {0.27, 1.0, 5.0, 100.0, 0.01};
  if (block.contains("omega_ratios"))
    ratios = block.at("omega_ratios").get<std::vector<double>>();
  const auto phis = linspace(get_or(block, "phi_min", -kPi), get_or(block, "phi_max", kPi),
                             get_or_int(block, "phi_count", 401));

  CommandResult result;
  result.name = "fringe-phase";
  result.table.columns = {"phi"};
  result.table.units = {"rad"};
  for (size_t r = 0; r < ratios.size(); ++r) {
    result.table.columns.push_back("theta_f_ratio" + std::to_string(r));
    result.table.units.push_back("rad");
  }
  for (double phi : phis) {
    std::vector<double> row = {phi};
    for (double ratio : ratios) row.push_back(fringe_phase(phi, ratio).theta_f);
    result.table.rows.push_back(std::move(row));
  }
  Json at_zero = Json::array();
  for (double ratio : ratios) at_zero.push_back(fringe_phase(0.0, ratio).theta_f);
  result.summary = {{"omega_ratios", ratios}, {"theta_f_at_phi0", at_zero}};
  return result;
}

CommandResult figure_ac_filter(const Json& block, const RunOptions& options) {
  ACDriveSpec drive;
  drive.omega_m = get_or(block, "omega_m", 1.0);
  drive.n = get_or_int(block, "n", 20);
  drive.Omega_ratio = get_or(block, "omega_ratio", 3.0);
  const double phi0 = get_or(block, "phi0", 0.005);
  const double scale = get_or(block, "drive_scale", 0.25);
  drive.Omega1_mag =
      scale * (drive.omega_m / drive.n) / (3.0 * phi0 * drive.Omega_ratio);

  const auto scan = linspace(get_or(block, "scan_min", 0.5), get_or(block, "scan_max", 1.5),
                             get_or_int(block, "scan_count", 101));

  IntegratorConfig integ = options.integrator;
  integ.step_count = std::max(integ.step_count, 400 * drive.n);

  CommandResult result;
  result.name = "ac-filter";
  result.table.columns = {"omega0_over_omega_m", "P2_sim", "P2_filter", "abs_diff"};
  result.table.units = {"1", "1", "1", "1"};

  double max_diff = 0.0, peak_value = 0.0, peak_at = 0.0;
  for (double x : scan) {
    ACSignal signal{phi0, x * drive.omega_m, 0.0};
    const double simulated = simulate_ac(signal, drive, integ).stroboscopic.back();
    const double approximated = filter_response(signal, drive).value;
    result.table.rows.push_back({x, simulated, approximated,
                                 std::abs(simulated - approximated)});
    max_diff = std::max(max_diff, std::abs(simulated - approximated));
    if (simulated > peak_value) {
      peak_value = simulated;
      peak_at = x;
    }
  }

  ACSignal resonant{phi0, drive.omega_m, 0.0};
  result.summary = {{"max_discrepancy", max_diff},
                    {"peak_omega0_over_omega_m", peak_at},
                    {"peak_value", peak_value},
                    {"filter_peak_value", filter_response(resonant, drive).value}};
  return result;
}

CommandResult figure_diabatic_ramp(const Json& block, const RunOptions& options) {
  const double bi_over_bf = get_or(block, "Bi_over_Bf", 100.0);
  const double bf_over_delta = get_or(block, "Bf_over_delta", 5.0);
  const auto T_values = geomspace(get_or(block, "T_min", 0.1), get_or(block, "T_max", 100.0),
                                  get_or_int(block, "T_count", 25));

  RampSpec ramp;
  ramp.delta = 1.0;  // tau_delta = 1
  ramp.B_f = bf_over_delta;
  ramp.B_i = bi_over_bf * ramp.B_f;

  CommandResult result;
  result.name = "diabatic-ramp";
  result.table.columns = {"T_over_tau_delta", "eps_sim_gamma", "eps_sim_B", "eps_closed",
                          "eps_bound"};
  result.table.units = {"1", "1", "1", "1", "1"};

  double min_margin = std::numeric_limits<double>::infinity();
  for (double T : T_values) {
    ramp.T = T;
    IntegratorConfig integ = options.integrator;
    integ.step_count = ramp_steps_required(ramp);
    ramp.profile = RampProfile::LinearGamma;
    const double sim_gamma = simulate_ramp(ramp, integ);
    ramp.profile = RampProfile::LinearB;
    const double sim_B = simulate_ramp(ramp, integ);
    const LinearGammaEpsilon closed = epsilon_d_linear_gamma(ramp);
    result.table.rows.push_back({T, sim_gamma, sim_B, closed.exact_approx, closed.bound});
    min_margin = std::min(min_margin, (closed.bound - sim_gamma) / std::max(sim_gamma, 1e-300));
  }
  result.summary = {{"Bi_over_Bf", bi_over_bf},
                    {"Bf_over_delta", bf_over_delta},
                    {"min_stringency_margin", min_margin}};
  return result;
}

CommandResult figure_diabatic_plane(const Json& block, const RunOptions& options) {
  const auto bi_ratios = geomspace(get_or(block, "ratio_Bi_min", 10.0),
                                   get_or(block, "ratio_Bi_max", 200.0),
                                   get_or_int(block, "ratio_Bi_count", 10));
  const auto bf_ratios = geomspace(get_or(block, "ratio_Bf_min", 2.0),
                                   get_or(block, "ratio_Bf_max", 50.0),
                                   get_or_int(block, "ratio_Bf_count", 10));
  const double T_scale = get_or(block, "T_over_tau_delta", 1.0);

  CommandResult result;
  result.name = "diabatic-plane";
  result.table.columns = {"Bi_over_Bf", "Bf_over_delta", "eps_sim", "eps_bound", "margin"};
  result.table.units = {"1", "1", "1", "1", "1"};

  double max_eps = 0.0, min_margin = std::numeric_limits<double>::infinity();
  for (double r1 : bi_ratios) {
    for (double r2 : bf_ratios) {
      RampSpec ramp;
      ramp.delta = 1.0;
      ramp.B_f = r2;
      ramp.B_i = r1 * r2;
      ramp.T = T_scale;
      ramp.profile = RampProfile::LinearGamma;
      IntegratorConfig integ = options.integrator;
      integ.step_count = ramp_steps_required(ramp);
      const double sim = simulate_ramp(ramp, integ);
      const double bound = epsilon_d_bound(ramp);
      const double margin = (bound - sim) / std::max(sim, 1e-300);
      result.table.rows.push_back({r1, r2, sim, bound, margin});
      max_eps = std::max(max_eps, sim);
      min_margin = std::min(min_margin, margin);
    }
  }
  result.summary = {{"max_epsilon_d", max_eps},
                    {"min_stringency_margin", min_margin},
                    {"stringent_everywhere", min_margin >= 0.0}};
  return result;
}

CommandResult figure_sensitivity_plane(const Json& block, const RunOptions& options) {
  const auto B_grid = geomspace(get_or(block, "B_min", 2.0), get_or(block, "B_max", 100.0),
                                get_or_int(block, "B_count", 40));
  const auto O_grid = geomspace(get_or(block, "Omega_min", 0.5),
                                get_or(block, "Omega_max", 100.0),
                                get_or_int(block, "Omega_count", 40));
  const int N = get_or_int(block, "N", 1);

  const OptimizationGrid grid = numeric_optimize(B_grid, O_grid, N, options.threads);

  CommandResult result;
  result.name = "sensitivity-plane";
  result.table.columns = {"B_tilde_f", "Omega_ratio", "delta_tilde", "T_opt", "masked"};
  result.table.units = {"1", "1", "1", "1", "1"};

  double ridge_offset = 0.0, ridge_T_max = 0.0;
  for (size_t bi = 0; bi < B_grid.size(); ++bi) {
    int best = -1;
    for (size_t oi = 0; oi < O_grid.size(); ++oi) {
      const OptimizedPoint& p = grid.at(bi, oi);
      result.table.rows.push_back({B_grid[bi], O_grid[oi],
                                   p.masked ? std::numeric_limits<double>::quiet_NaN()
                                            : p.delta_tilde,
                                   p.T_opt, p.masked ? 1.0 : 0.0});
      if (!p.masked && (best < 0 || p.delta_tilde < grid.at(bi, best).delta_tilde))
        best = static_cast<int>(oi);
    }
    if (best >= 0) {
      // Distance (in cells) between the per-column optimum and B/sqrt(2).
      const double target = B_grid[bi] / std::sqrt(2.0);
      int nearest = 0;
      for (size_t oi = 0; oi < O_grid.size(); ++oi)
        if (std::abs(std::log(O_grid[oi] / target)) <
            std::abs(std::log(O_grid[nearest] / target)))
          nearest = static_cast<int>(oi);
      if (target >= O_grid.front() && target <= O_grid.back()) {
        ridge_offset = std::max(ridge_offset, std::abs(double(best - nearest)));
        ridge_T_max = std::max(ridge_T_max, grid.at(bi, best).T_opt);
      }
    }
  }

  // Continuous minimum at the B values the figure quotes.
  const OptimizedPoint at50 = optimize_at_B(50.0, N);
  const OptimizedPoint at10 = optimize_at_B(10.0, N);
  result.summary = {{"N", N},
                    {"min_delta_tilde", at50.delta_tilde},
                    {"min_delta_tilde_at_B10", at10.delta_tilde},
                    {"ridge_max_cell_offset", ridge_offset},
                    {"ridge_max_T_opt", ridge_T_max}};
  return result;
}

// ---------------------------------------------------------------------------
// Sweep registry.

struct SweepOp {
  std::vector<std::string> params;
  std::vector<std::string> out_names;
  std::vector<std::string> out_units;
  std::function<std::vector<double>(const std::map<std::string, double>&, const RunOptions&)>
      eval;
  bool stochastic = false;
};

const std::map<std::string, SweepOp>& sweep_ops() {
  using Params = std::map<std::string, double>;
  static const std::map<std::string, SweepOp> ops = {
      {"prob_S_closed",
       {{"chi", "phi"},
        {"prS"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{prob_S_closed(p.at("chi"), p.at("phi"))};
        }}},
      {"prob_S_static",
       {{"chi", "phi"},
        {"prS"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{prob_S_static(p.at("chi"), p.at("phi"))};
        }}},
      {"rabi_probability",
       {{"omega1", "T", "phi", "omega_ratio"},
        {"P2"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{
              rabi_probability(p.at("omega1"), p.at("T"), p.at("phi"), p.at("omega_ratio"))};
        }}},
      {"p2_exact",
       {{"phi", "theta", "omega_ratio"},
        {"P2"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{p2_exact(p.at("phi"), p.at("theta"), p.at("omega_ratio"))};
        }}},
      {"fringe_phase",
       {{"phi", "omega_ratio"},
        {"theta_f"},
        {"rad"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{fringe_phase(p.at("phi"), p.at("omega_ratio")).theta_f};
        }}},
      {"filter_response",
       {{"phi0", "omega0", "alpha", "omega1", "omega_ratio", "omega_m", "n"},
        {"P2"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          ACDriveSpec drive{p.at("omega1"), p.at("omega_ratio"), p.at("omega_m"),
                            static_cast<int>(p.at("n"))};
          ACSignal signal{p.at("phi0"), p.at("omega0"), p.at("alpha")};
          return std::vector<double>{filter_response(signal, drive).value};
        }}},
      {"unlocked_spectrometer",
       {{"phi0", "omega0", "omega1", "omega_ratio", "omega_m", "n", "num_samples"},
        {"rms_analytic", "rms_sampled"},
        {"1", "1"},
        [](const Params& p, const RunOptions& options) {
          ACDriveSpec drive{p.at("omega1"), p.at("omega_ratio"), p.at("omega_m"),
                            static_cast<int>(p.at("n"))};
          ACSignal signal{p.at("phi0"), p.at("omega0"), std::nullopt};
          const double analytic = unlocked_spectrometer_analytic(signal, drive);
          const double sampled = unlocked_spectrometer_sampled(
              signal, drive, static_cast<int>(p.at("num_samples")), options.seed);
          return std::vector<double>{analytic, sampled};
        },
        true}},
      {"epsilon_d_linear_gamma",
       {{"B_i", "B_f", "delta", "T"},
        {"eps_closed", "eps_bound"},
        {"1", "1"},
        [](const Params& p, const RunOptions&) {
          RampSpec ramp{p.at("B_i"), p.at("B_f"), p.at("delta"), p.at("T"),
                        RampProfile::LinearGamma, {}};
          const LinearGammaEpsilon eps = epsilon_d_linear_gamma(ramp);
          return std::vector<double>{eps.exact_approx, eps.bound};
        }}},
      {"simulate_ramp",
       {{"B_i", "B_f", "delta", "T"},
        {"eps_sim"},
        {"1"},
        [](const Params& p, const RunOptions& options) {
          RampSpec ramp{p.at("B_i"), p.at("B_f"), p.at("delta"), p.at("T"),
                        RampProfile::LinearGamma, {}};
          IntegratorConfig integ = options.integrator;
          integ.step_count = ramp_steps_required(ramp);
          return std::vector<double>{simulate_ramp(ramp, integ)};
        }}},
      {"power_broadening_error",
       {{"B_tilde_f", "omega_ratio", "T_tilde"},
        {"eps_pb"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          DimensionlessPoint point{p.at("B_tilde_f"), p.at("omega_ratio"), p.at("T_tilde"), 1};
          return std::vector<double>{power_broadening_error(point)};
        }}},
      {"full_sensitivity",
       {{"B_tilde_f", "omega_ratio", "T_tilde", "N"},
        {"delta_tilde", "eps_d", "eps_pb"},
        {"1", "1", "1"},
        [](const Params& p, const RunOptions&) {
          DimensionlessPoint point{p.at("B_tilde_f"), p.at("omega_ratio"), p.at("T_tilde"),
                                   static_cast<int>(p.at("N"))};
          const SensitivityResult r = full_sensitivity(point);
          return std::vector<double>{r.delta_tilde, r.eps_d, r.eps_pb};
        }}},
      {"self_consistent_sensitivity",
       {{"B_tilde_f", "T_tilde", "N"},
        {"delta_tilde"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{
              self_consistent_sensitivity(p.at("B_tilde_f"), p.at("T_tilde"),
                                          static_cast<int>(p.at("N")))
                  .delta_tilde};
        }}},
      {"zeeman_ramsey_population",
       {{"delta", "T"},
        {"P"},
        {"1"},
        [](const Params& p, const RunOptions&) {
          return std::vector<double>{zeeman_ramsey_population(p.at("delta"), p.at("T"))};
        }}},
  };
  return ops;
}

struct Axis {
  std::string name;
  std::vector<double> values;
};

std::vector<Axis> parse_axes(const Json& config) {
  if (!config.contains("axes") || !config.at("axes").is_array())
    throw ConfigError("sweep requires an 'axes' array");
  std::vector<Axis> axes;
  for (const Json& entry : config.at("axes")) {
    Axis axis;
    if (!entry.contains("name")) throw ConfigError("axis entry missing 'name'");
    axis.name = entry.at("name").get<std::string>();
    if (entry.contains("values")) {
      axis.values = entry.at("values").get<std::vector<double>>();
    } else {
      const int count = get_or_int(entry, "count", 0);
      if (count > 0)
        axis.values = linspace(entry.at("min").get<double>(), entry.at("max").get<double>(),
                               count);
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_sci(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.11e", value);
  return buffer;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string config_hash(const Json& config) {
  Json canonical = config;
  canonical.erase("seed");
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical.dump())));
  return buffer;
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << "# clockmag " << kVersion << "\n";
  out << "# config: " << config_hash << "\n";
  if (seed) out << "# seed: " << *seed << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  for (size_t i = 0; i < units.size(); ++i)
    out << units[i] << (i + 1 < units.size() ? "," : "\n");
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size(); ++i)
      out << format_sci(row[i]) << (i + 1 < row.size() ? "," : "\n");
  return out.str();
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

std::vector<double> geomspace(double lo, double hi, int count) {
  detail::expect(lo > 0 && hi > 0, "geomspace needs positive endpoints");
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::exp(ratio * i / (count - 1)));
  return out;
}

std::vector<Finding> validate_config(const Json& config) {
  check_keys(config, "");
  std::vector<Finding> findings;

  if (config.contains("fields")) {
    const Json& f = config.at("fields");
    const double B_i = get_or(f, "B_i", 0.0);
    const double B_f = get_or(f, "B_f", 0.0);
    const double delta = get_or(f, "delta", 0.0);
    if (B_f > 0 && delta > 0 && B_f / delta < 5.0)
      findings.push_back({"regime: B_f >> delta violated (B_f/delta = " +
                          std::to_string(B_f / delta) + ", want >= 5)"});
    if (B_i > 0 && B_f > 0 && B_i / B_f < 5.0)
      findings.push_back({"regime: B_i >> B_f violated (B_i/B_f = " +
                          std::to_string(B_i / B_f) + ", want >= 5)"});
  }

  if (config.contains("ac_filter")) {
    const Json& block = config.at("ac_filter");
    const double phi0 = get_or(block, "phi0", 0.005);
    const int n = get_or_int(block, "n", 20);
    const double ratio = get_or(block, "omega_ratio", 3.0);
    const double omega_m = get_or(block, "omega_m", 1.0);
    const double scale = get_or(block, "drive_scale", 0.25);
    const double Omega2 = ratio * scale * (omega_m / n) / (3.0 * phi0 * ratio);
    if (phi0 * Omega2 * kPi * n / omega_m > 0.5)
      findings.push_back({"linearity: AC response beyond the linear regime"});
    const int steps = get_or_int(config.contains("integrator") ? config.at("integrator")
                                                               : Json::object(),
                                 "step_count", 400 * n);
    const double scan_max = get_or(block, "scan_max", 1.5);
    const int needed = static_cast<int>(std::ceil(50.0 * std::max(1.0, scan_max) * n));
    if (steps < needed)
      findings.push_back({"integrator: under-resolved (" + std::to_string(steps / n) +
                          " steps/period); need step_count >= " + std::to_string(needed)});
  }

  if (config.contains("diabatic_ramp")) {
    const Json& block = config.at("diabatic_ramp");
    if (get_or(block, "Bi_over_Bf", 100.0) < 5.0)
      findings.push_back({"regime: B_i >> B_f violated in diabatic_ramp"});
    if (get_or(block, "Bf_over_delta", 5.0) < 2.0)
      findings.push_back({"regime: B_f >> delta violated in diabatic_ramp"});
  }

  return findings;
}

CommandResult run_reproduce(const Json& config, const RunOptions& options) {
  if (!config.contains("figure")) throw ConfigError("reproduce requires a 'figure' key");
  const std::string figure = config.at("figure").get<std::string>();
  auto block = [&](const char* key) {
    return config.contains(key) ? config.at(key) : Json::object();
  };

  CommandResult result;
  if (figure == "two-spin-fringe")
    result = figure_two_spin_fringe(block("two_spin_fringe"));
  else if (figure == "rabi-scan")
    result = figure_rabi_scan(block("rabi_scan"));
  else if (figure == "dc-fringe")
    result = figure_dc_fringe(block("dc_fringe"), options);
  else if (figure == "fringe-phase")
    result = figure_fringe_phase(block("fringe_phase"));
  else if (figure == "ac-filter")
    result = figure_ac_filter(block("ac_filter"), options);
  else if (figure == "diabatic-ramp")
    result = figure_diabatic_ramp(block("diabatic_ramp"), options);
  else if (figure == "diabatic-plane")
    result = figure_diabatic_plane(block("diabatic_plane"), options);
  else if (figure == "sensitivity-plane")
    result = figure_sensitivity_plane(block("sensitivity_plane"), options);
  else
    throw ConfigError("invalid figure_id: " + figure);

  result.table.config_hash = config_hash(config);
  result.summary["config"] = result.table.config_hash;
  result.summary["version"] = kVersion;
  return result;
}

CommandResult run_sweep(const Json& config, const RunOptions& options) {
  if (!config.contains("operation")) throw ConfigError("sweep requires an 'operation' key");
  const std::string name = config.at("operation").get<std::string>();
  const auto& ops = sweep_ops();
  auto it = ops.find(name);
  if (it == ops.end()) throw ConfigError("unknown operation name: " + name);
  const SweepOp& op = it->second;

  const std::vector<Axis> axes = parse_axes(config);
  std::set<std::string> covered;
  for (const Axis& axis : axes) covered.insert(axis.name);
  for (const std::string& param : op.params)
    if (!covered.count(param))
      throw ConfigError("operation '" + name + "' needs an axis for '" + param + "'");
  if (covered.size() != axes.size() || covered.size() != op.params.size())
    throw ConfigError("axes must cover the operation parameters exactly once");

  CommandResult result;
  result.name = "sweep-" + name;
  for (const Axis& axis : axes) {
    result.table.columns.push_back(axis.name);
    result.table.units.push_back("1");
  }
  result.table.columns.insert(result.table.columns.end(), op.out_names.begin(),
                              op.out_names.end());
  result.table.units.insert(result.table.units.end(), op.out_units.begin(),
                            op.out_units.end());

  // Lexicographic Cartesian product in the declared axis order.
  std::vector<size_t> index(axes.size(), 0);
  size_t total = 1;
  for (const Axis& axis : axes) total *= axis.values.size();

  std::map<std::string, double> params;
  for (size_t flat = 0; flat < total && total > 0; ++flat) {
    size_t rem = flat;
    for (size_t a = axes.size(); a-- > 0;) {
      index[a] = rem % axes[a].values.size();
      rem /= axes[a].values.size();
    }
    std::vector<double> row;
    for (size_t a = 0; a < axes.size(); ++a) {
      params[axes[a].name] = axes[a].values[index[a]];
      row.push_back(axes[a].values[index[a]]);
    }
    const std::vector<double> outputs = op.eval(params, options);
    row.insert(row.end(), outputs.begin(), outputs.end());
    result.table.rows.push_back(std::move(row));
  }

  result.table.config_hash = config_hash(config);
  if (op.stochastic) result.table.seed = options.seed;
  result.summary = {{"operation", name},
                    {"rows", result.table.rows.size()},
                    {"config", result.table.config_hash},
                    {"version", kVersion}};
  if (op.stochastic) result.summary["seed"] = options.seed;
  return result;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"clock-state geometric magnetometry toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::int64_t seed_flag = -1;
  int threads = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_flag, "RNG seed (overrides config)");
    cmd->add_option("--threads", threads, "worker threads for sweeps");
  };

  CLI::App* reproduce = app.add_subcommand("reproduce", "write figure data tables");
  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
  CLI::App* validate = app.add_subcommand("validate", "check config regimes, run nothing");
  add_common(reproduce);
  add_common(sweep);
  add_common(validate);

  std::vector<const char*> argv = {"clockmag"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  Json config;
  {
    std::ifstream stream(config_path);
    if (!stream) {
      err << "cannot open config: " << config_path << "\n";
      return 2;
    }
    try {
      stream >> config;
    } catch (const std::exception& e) {
      err << "config parse error: " << e.what() << "\n";
      return 2;
    }
  }

  RunOptions options;
  try {
    check_keys(config, "");
    options.integrator = integrator_from(config);
    options.threads = threads;
    options.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                                  : static_cast<std::uint64_t>(get_or(config, "seed", 0));
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  if (validate->parsed()) {
    const std::vector<Finding> findings = validate_config(config);
    for (const Finding& f : findings) out << "finding: " << f.message << "\n";
    if (findings.empty()) out << "no findings\n";
    return findings.empty() ? 0 : 1;
  }

  CommandResult result;
  try {
    result = reproduce->parsed() ? run_reproduce(config, options) : run_sweep(config, options);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  }

  std::vector<std::string> formats = {"csv", "json"};
  if (config.contains("output") && config.at("output").contains("formats"))
    formats = config.at("output").at("formats").get<std::vector<std::string>>();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  for (const std::string& format : formats) {
    const std::string path = out_dir + "/" + result.name + "." + format;
    std::ofstream stream(path, std::ios::binary);
    if (!stream) {
      err << "cannot write " << path << "\n";
      return 3;
    }
    if (format == "csv")
      stream << result.table.to_csv();
    else
      stream << result.summary.dump(2) << "\n";
    out << path << "\n";
  }
  return 0;
}

}  // namespace clockmag::cli
