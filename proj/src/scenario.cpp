#include "collide/scenario.hpp"

#include "collide/nonmarkov.hpp"
#include "collide/thermo.hpp"
#include "collide/trajectories.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

namespace collide {

namespace {

using nlohmann::json;

// --- scenario registry ---------------------------------------------------

// Everything a dispatchable run produces: the full column-major-free table
// (rows of doubles, one per column), the tolerances that were in force, and
// the scenario's own acceptance verdict.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> tolerances;
  bool pass = false;
  std::string detail;
};

// Validation rule for one model parameter; the message is empty when the
// value is acceptable.
struct ParamRule {
  bool required = true;
  std::function<std::string(double)> check;
};

ParamRule positive(bool required = true) {
  return {required, [](double v) { return v > 0.0 ? "" : "must be > 0"; }};
}
ParamRule nonnegative(bool required = true) {
  return {required, [](double v) { return v >= 0.0 ? "" : "must be >= 0"; }};
}
ParamRule unit_interval(bool required = true) {
  return {required,
          [](double v) { return v >= 0.0 && v <= 1.0 ? "" : "must lie in [0, 1]"; }};
}

struct ScenarioDef {
  std::string family;
  std::vector<std::string> columns;
  std::map<std::string, ParamRule> params;
  bool needs_integration = false;  // dt_integration drives an RK4 run
  bool needs_truncation = false;   // oscillator baths need a Fock cutoff
  std::string config_text;
  std::function<Table(const ScenarioConfig&)> build;
};

double tolerance_or(const ScenarioConfig& cfg, double fallback) {
  return cfg.numerics.tolerance > 0.0 ? cfg.numerics.tolerance : fallback;
}

std::string format_double(double v, const char* fmt = "%.3e") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

ComplexMatrix qubit_exchange(double g) {
  return g * (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus()));
}

ComplexVector plus_ket() {
  ComplexVector v(2);
  v << Complex(1.0, 0.0), Complex(1.0, 0.0);
  return v / std::sqrt(2.0);
}

double plus_overlap(const ComplexMatrix& rho) {
  const ComplexVector p = plus_ket();
  return (p.adjoint() * rho * p)(0, 0).real();
}

// Strict interior maxima of a magnitude sequence: (index, height) pairs.
std::vector<std::pair<int, double>> maxima_of(const std::vector<double>& y) {
  std::vector<std::pair<int, double>> peaks;
  for (std::size_t k = 1; k + 1 < y.size(); ++k)
    if (y[k] > y[k - 1] && y[k] > y[k + 1]) peaks.push_back({int(k), y[k]});
  return peaks;
}

// --- builders -------------------------------------------------------------

// Emitter relaxing into a vacuum memoryless environment, integrated through
// the reduced generator. The populations obey p(t) = p0 e^{-gamma t} exactly,
// so the check tolerance is dominated by the integrator alone.
Table build_spontaneous_emission(const ScenarioConfig& cfg) {
  const double gamma = cfg.model.at("gamma");
  const double p0 = cfg.model.at("p0");
  const double tol = tolerance_or(cfg, 1e-6);
  const double dtc = cfg.numerics.dt_collision;

  const double g = std::sqrt(gamma / dtc);
  const MomentData moments = MomentData::from_state(
      {{Complex(g, 0.0), sigma_plus(), sigma_minus()},
       {Complex(g, 0.0), sigma_minus(), sigma_plus()}},
      pure_state(ket0(), qubit_space("anc")));
  const LindbladGenerator gen = generator_from_moments(moments, dtc);

  const double t_max = cfg.numerics.steps * cfg.numerics.dt_integration;
  const auto samples =
      integrate(gen, qubit_density({p0, Complex(0.0, 0.0)}), t_max,
                cfg.numerics.dt_integration);

  Table t;
  t.columns = {"t", "p", "coherence_re", "coherence_im", "p_exact", "abs_err"};
  double worst = 0.0;
  for (const auto& s : samples) {
    const double p = s.rho.matrix(0, 0).real();
    const double exact = p0 * std::exp(-gamma * s.t);
    const double err = std::abs(p - exact);
    worst = std::max(worst, err);
    t.rows.push_back({s.t, p, s.rho.matrix(0, 1).real(), s.rho.matrix(0, 1).imag(),
                      exact, err});
  }
  t.tolerances["p_abs_err"] = tol;
  t.pass = worst < tol;
  t.detail = "max |p - p0 exp(-gamma t)| = " + format_double(worst) +
             " (tolerance " + format_double(tol, "%.0e") + ")";
  return t;
}

// Shared by the strong- and weak-coupling survival scenarios: repeated
// excitation-exchange collisions with ground ancillas, checked against the
// closed form 1/2 (1 + cos^n(g dt) cos(2 gz dt n)) for the |+> state.
Table build_survival(const ScenarioConfig& cfg) {
  const double g_dt = cfg.model.at("g_dt");
  const double gz_dt = cfg.model.count("gz_dt") ? cfg.model.at("gz_dt") : 0.0;
  const double tol = tolerance_or(cfg, 1e-12);
  const double dtc = cfg.numerics.dt_collision;
  const int steps = cfg.numerics.steps;

  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  spec.V = [=](int) {
    return ComplexMatrix(qubit_exchange(g_dt / dtc) +
                         (gz_dt / dtc) * kron(pauli_z(), pauli_z()));
  };
  spec.dt = dtc;

  const auto records = run(spec, pure_state(plus_ket(), spec.system), steps);

  Table t;
  t.columns = {"n", "survival", "survival_exact", "abs_err"};
  double worst = 0.0;
  auto push = [&](int n, double survival) {
    const double exact =
        0.5 * (1.0 + std::pow(std::cos(g_dt), n) * std::cos(2.0 * gz_dt * n));
    const double err = std::abs(survival - exact);
    worst = std::max(worst, err);
    t.rows.push_back({double(n), survival, exact, err});
  };
  push(0, 1.0);
  for (const auto& r : records) push(r.index, plus_overlap(r.rho.matrix));

  t.tolerances["survival_abs_err"] = tol;
  t.pass = worst < tol;
  t.detail = "max |survival - closed form| = " + format_double(worst) +
             " over " + std::to_string(steps) + " collisions (tolerance " +
             format_double(tol, "%.0e") + ")";
  return t;
}

// Monte Carlo unraveling of the weak-coupling survival decay: seeded jump
// trajectories, averaged and compared to the same closed form.
Table build_trajectory_survival(const ScenarioConfig& cfg) {
  const double g_dt = cfg.model.at("g_dt");
  const int n_traj = int(std::llround(cfg.model.at("n_traj")));
  const double tol = tolerance_or(cfg, 1e-2);
  const double dtc = cfg.numerics.dt_collision;
  const int steps = cfg.numerics.steps;

  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  spec.V = [=](int) { return qubit_exchange(g_dt / dtc); };
  spec.dt = dtc;
  const MeasurementBasis basis = MeasurementBasis::create({ket0(), ket1()});

  std::vector<TrajectoryRecord> records;
  records.reserve(std::size_t(n_traj));
  for (int k = 0; k < n_traj; ++k)
    records.push_back(simulate_trajectory(spec, plus_ket(), basis, cfg.seed, steps,
                                          std::uint64_t(k)));
  const auto samples = ensemble_average(records);

  Table t;
  t.columns = {"n", "survival_mc", "survival_exact", "abs_err"};
  t.rows.push_back({0.0, 1.0, 1.0, 0.0});
  double worst = 0.0;
  for (const auto& s : samples) {
    const double mc = plus_overlap(s.rho.matrix);
    const double exact = 0.5 * (1.0 + std::pow(std::cos(g_dt), s.step));
    const double err = std::abs(mc - exact);
    worst = std::max(worst, err);
    t.rows.push_back({double(s.step), mc, exact, err});
  }
  t.tolerances["survival_abs_err"] = tol;
  t.pass = worst < tol;
  t.detail = "max |mean - closed form| = " + format_double(worst) + " over " +
             std::to_string(n_traj) + " trajectories (tolerance " +
             format_double(tol, "%.0e") + ")";
  return t;
}

// Qubit between two thermal oscillator baths, via the reduced generator of
// simultaneous collisions. The final sample is checked against the closed
// forms for the effective temperature and the stationary heat current.
Table build_two_bath(const ScenarioConfig& cfg) {
  const double omega0 = cfg.model.at("omega0");
  const double beta1 = cfg.model.at("beta1");
  const double beta2 = cfg.model.at("beta2");
  const double gamma1 = cfg.model.at("gamma1");
  const double gamma2 = cfg.model.at("gamma2");
  const double tol = tolerance_or(cfg, 1e-4);
  const double dtc = cfg.numerics.dt_collision;
  const Eigen::Index d = cfg.numerics.truncation;

  const ComplexMatrix nop = sigma_plus() * sigma_minus();
  auto bath_generator = [&](double gamma, double beta, bool with_free) {
    const double g = std::sqrt(gamma / dtc);
    const TensorSpace osc({"b"}, {d});
    const DensityMatrix eta = thermal_state(omega0 * number_operator(d), beta, osc);
    const MomentData moments = MomentData::from_state(
        {{Complex(g, 0.0), sigma_plus(), annihilation(d)},
         {Complex(g, 0.0), sigma_minus(), ComplexMatrix(annihilation(d).adjoint())}},
        eta);
    return generator_from_moments(moments, dtc,
                                  with_free ? ComplexMatrix(omega0 * nop)
                                            : ComplexMatrix());
  };
  const LindbladGenerator gen1 = bath_generator(gamma1, beta1, true);
  const LindbladGenerator gen1_bare = bath_generator(gamma1, beta1, false);
  const LindbladGenerator gen2 = bath_generator(gamma2, beta2, false);

  LindbladGenerator both = gen1;
  both.dissipatorTerms.insert(both.dissipatorTerms.end(),
                              gen2.dissipatorTerms.begin(),
                              gen2.dissipatorTerms.end());

  const double t_max = cfg.numerics.steps * cfg.numerics.dt_integration;
  const auto samples = integrate(both, qubit_density({0.5, Complex(0.0, 0.0)}),
                                 t_max, cfg.numerics.dt_integration);

  Table t;
  t.columns = {"t", "p", "current"};
  auto current_from = [&](const DensityMatrix& rho) {
    return (omega0 * nop * gen1_bare.apply(rho.matrix)).trace().real();
  };
  for (const auto& s : samples)
    t.rows.push_back({s.t, s.rho.matrix(0, 0).real(), current_from(s.rho)});

  const double p_final = samples.back().rho.matrix(0, 0).real();
  const double beta_measured = std::log((1.0 - p_final) / p_final) / omega0;
  const double current_measured = current_from(samples.back().rho);
  const TwoBathSteady exact = two_bath_steady(gamma1, gamma2, beta1, beta2, omega0);
  const double beta_err = std::abs(beta_measured - exact.beta_eff) / exact.beta_eff;
  const double current_err =
      std::abs(current_measured - exact.current) / std::abs(exact.current);

  t.tolerances["steady_state_rel_err"] = tol;
  t.pass = beta_err < tol && current_err < tol;
  t.detail = "beta_eff rel err = " + format_double(beta_err) +
             ", current rel err = " + format_double(current_err) +
             " (tolerance " + format_double(tol, "%.0e") + ")";
  return t;
}

// Relaxation against a single thermal qubit bath with the full energy and
// entropy ledger. Passing requires the first law to close to machine noise
// and both the entropy production and the erasure margin to stay nonnegative.
Table build_thermal_relaxation(const ScenarioConfig& cfg) {
  const double beta = cfg.model.at("beta");
  const double omega0 = cfg.model.at("omega0");
  const double g = cfg.model.at("g");
  const double p0 = cfg.model.at("p0");
  const double tol = tolerance_or(cfg, 1e-10);
  const double dtc = cfg.numerics.dt_collision;

  const ComplexMatrix nop = sigma_plus() * sigma_minus();
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.H_S = omega0 * nop;
  spec.ancilla = [=](int) { return AncillaSpec(ThermalQubit{beta, omega0}); };
  spec.H_n = [=](int) { return ComplexMatrix(omega0 * nop); };
  spec.V = [=](int) { return qubit_exchange(g); };
  spec.dt = dtc;

  const ThermoRun run = run_with_ledger(
      spec, qubit_density({p0, Complex(0.0, 0.0)}), cfg.numerics.steps);

  Table t;
  t.columns = {"n", "dE_S", "dEp_S", "dQ_total", "dQ_bath1", "dW_d",
               "dW_sw", "Sigma", "I_Sn", "Srel_anc", "dS_S", "res1"};
  double worst_residual = 0.0;
  double min_sigma = 0.0;
  double min_margin = 0.0;
  for (const auto& row : run.ledger) {
    worst_residual = std::max(worst_residual, std::abs(row.residual_first_law));
    min_sigma = std::min(min_sigma, row.Sigma);
    min_margin = std::min(min_margin, row.dS_S - beta * row.dQ_total);
    t.rows.push_back({double(row.n), row.dE_S, row.dEp_S, row.dQ_total,
                      row.dQ_bath[0], row.dW_d, row.dW_sw, row.Sigma, row.I_Sn,
                      row.Srel_anc, row.dS_S, row.residual_first_law});
  }
  t.tolerances["first_law_abs"] = tol;
  t.tolerances["second_law_floor"] = 1e-12;
  t.pass = worst_residual < tol && min_sigma >= -1e-12 && min_margin >= -1e-12;
  t.detail = "max |first-law residual| = " + format_double(worst_residual) +
             ", min entropy production = " + format_double(min_sigma) +
             ", min erasure margin = " + format_double(min_margin);
  return t;
}

// Incoherent ancilla-ancilla chain against the closed memory-kernel
// recursion; the two must agree to quadrature-free precision because they
// describe the same discrete dynamics.
Table build_memory_kernel(const ScenarioConfig& cfg) {
  const double p = cfg.model.at("p");
  const double g = cfg.model.at("g");
  const double g_z = cfg.model.count("g_z") ? cfg.model.at("g_z") : 0.0;
  const double w = cfg.model.count("w") ? cfg.model.at("w") : 0.0;
  const double p0 = cfg.model.at("p0");
  const double tol = tolerance_or(cfg, 1e-10);
  const double dtc = cfg.numerics.dt_collision;
  const int steps = cfg.numerics.steps;

  const ComplexMatrix nop = sigma_plus() * sigma_minus();
  const ComplexMatrix coupling =
      qubit_exchange(g) + g_z * kron(pauli_z(), pauli_z());

  AASpec spec;
  spec.base.system = qubit_space();
  spec.base.H_S = w * nop;
  spec.base.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  spec.base.H_n = [=](int) { return ComplexMatrix(w * nop); };
  spec.base.V = [=](int) { return coupling; };
  spec.base.dt = dtc;
  spec.p = p;
  spec.mode = AAMode::IncoherentSwapMap;

  const DensityMatrix rho0 = qubit_density({p0, Complex(0.0, 0.0)});
  const auto chain = run_aa(spec, rho0, steps, 2);
  const ComplexMatrix U1 = build_unitary(spec.base.H_S, spec.base.H_n(1),
                                         spec.base.V(1), dtc);
  const auto rec = memory_kernel_recursion(
      U1, pure_state(ket0(), qubit_space("anc")), p, rho0, steps);

  Table t;
  t.columns = {"n", "p_chain", "p_kernel", "gap"};
  double worst = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double gap = max_abs(
        ComplexMatrix(chain[std::size_t(n)].matrix - rec[std::size_t(n)].matrix));
    worst = std::max(worst, gap);
    t.rows.push_back({double(n), chain[std::size_t(n)].matrix(0, 0).real(),
                      rec[std::size_t(n)].matrix(0, 0).real(), gap});
  }
  t.tolerances["chain_vs_recursion"] = tol;
  t.pass = worst < tol;
  t.detail = "max chain-vs-recursion gap = " + format_double(worst) +
             " (tolerance " + format_double(tol, "%.0e") + ")";
  return t;
}

// The four composite-model regimes share one builder; the regime tag selects
// which revival structure the run must exhibit.
Table build_composite(const ScenarioConfig& cfg, char regime) {
  const double G = cfg.model.at("G");
  const double gamma = cfg.model.at("gamma");
  const double dtc = cfg.numerics.dt_collision;
  const int steps = cfg.numerics.steps;

  const CompositeAmplitudes amp =
      composite_recurrence({G, std::sqrt(gamma / dtc), dtc}, steps);

  Table t;
  t.columns = {"n", "t", "alpha_re", "alpha_im", "alpha_sq", "beta_sq"};
  std::vector<double> alpha_sq, beta_sq;
  for (int n = 0; n <= steps; ++n) {
    const Complex a = amp.alpha[std::size_t(n)];
    const Complex b = amp.beta[std::size_t(n)];
    alpha_sq.push_back(std::norm(a));
    beta_sq.push_back(std::norm(b));
    t.rows.push_back({double(n), n * dtc, a.real(), a.imag(), std::norm(a),
                      std::norm(b)});
  }

  const auto peaks = maxima_of(alpha_sq);
  const auto beta_peaks = maxima_of(beta_sq);
  std::string shape = std::to_string(peaks.size()) + " revivals";
  if (!peaks.empty())
    shape += ", first at collision " + std::to_string(peaks.front().first) +
             " with height " + format_double(peaks.front().second);

  switch (regime) {
    case 'a': {  // strong collisions: collapse with no recovery above 1%
      const bool quiet = std::none_of(peaks.begin(), peaks.end(),
                                      [](const auto& p) { return p.second >= 0.01; });
      t.pass = alpha_sq[3] < 0.01 && quiet;
      t.tolerances["revival_ceiling"] = 0.01;
      break;
    }
    case 'b':  // coarse collisions: revivals within a handful of steps
      t.pass = peaks.size() >= 7 && peaks.front().first <= 6 &&
               peaks.front().second > 0.05;
      t.tolerances["first_revival_height_min"] = 0.05;
      break;
    case 'c':  // underdamped continuum: damped Rabi revivals
      t.pass = peaks.size() >= 7 && peaks.size() <= 11 &&
               peaks.front().first >= 25 && peaks.front().second > 0.1;
      t.tolerances["first_revival_height_min"] = 0.1;
      break;
    default: {  // 'd', overdamped continuum: monotone sag, single memory hump
      const std::size_t at_t3 =
          std::min(std::size_t(steps), std::size_t(std::llround(3.0 / dtc)));
      t.pass = peaks.empty() && beta_peaks.size() == 1 && alpha_sq[at_t3] > 0.9;
      t.tolerances["population_at_t3_min"] = 0.9;
      break;
    }
  }
  t.detail = shape + "; regime '" + std::string(1, regime) +
             (t.pass ? "' signature present" : "' signature missing");
  return t;
}

// --- registry -------------------------------------------------------------

const std::map<std::string, ScenarioDef>& registry() {
  static const std::map<std::string, ScenarioDef> defs = [] {
    std::map<std::string, ScenarioDef> m;

    m["spontaneous_emission"] = {
        "simulate",
        {"t", "p", "coherence_re", "coherence_im", "p_exact", "abs_err"},
        {{"gamma", positive()}, {"p0", unit_interval()}},
        true,
        false,
        R"({
  "scenario": "spontaneous_emission",
  "model": { "gamma": 1.0, "p0": 1.0 },
  "numerics": { "dt_collision": 0.01, "steps": 5000, "dt_integration": 0.001 },
  "outputs": { "stride": 10 }
}
)",
        build_spontaneous_emission};

    m["survival_strong_coupling"] = {
        "simulate",
        {"n", "survival", "survival_exact", "abs_err"},
        {{"g_dt", positive()}, {"gz_dt", nonnegative(false)}},
        false,
        false,
        R"({
  "scenario": "survival_strong_coupling",
  "model": { "g_dt": 2.5132741228718345, "gz_dt": 0.0 },
  "numerics": { "dt_collision": 1.0, "steps": 40 }
}
)",
        build_survival};

    m["survival_weak_coupling"] = {
        "simulate",
        {"n", "survival", "survival_exact", "abs_err"},
        {{"g_dt", positive()}, {"gz_dt", nonnegative(false)}},
        false,
        false,
        R"({
  "scenario": "survival_weak_coupling",
  "model": { "g_dt": 0.1, "gz_dt": 0.0 },
  "numerics": { "dt_collision": 1.0, "steps": 500 },
  "outputs": { "stride": 5 }
}
)",
        build_survival};

    m["trajectory_survival"] = {
        "trajectories",
        {"n", "survival_mc", "survival_exact", "abs_err"},
        {{"g_dt", positive()},
         {"n_traj", {true, [](double v) {
                       return v >= 1.0 && v == std::floor(v)
                                  ? ""
                                  : "must be a positive integer";
                     }}}},
        false,
        false,
        R"({
  "scenario": "trajectory_survival",
  "model": { "g_dt": 0.2, "n_traj": 10000 },
  "numerics": { "dt_collision": 1.0, "steps": 25 },
  "seed": 1234
}
)",
        build_trajectory_survival};

    m["two_bath_steady"] = {
        "simulate",
        {"t", "p", "current"},
        {{"omega0", positive()},
         {"beta1", positive()},
         {"beta2", positive()},
         {"gamma1", positive()},
         {"gamma2", positive()}},
        true,
        true,
        R"({
  "scenario": "two_bath_steady",
  "model": { "omega0": 1.0, "beta1": 0.5, "beta2": 2.0, "gamma1": 1.0, "gamma2": 1.0 },
  "numerics": { "dt_collision": 0.05, "steps": 400, "dt_integration": 0.02, "truncation": 30 },
  "outputs": { "stride": 5 }
}
)",
        build_two_bath};

    m["thermal_relaxation"] = {
        "thermo",
        {"n", "dE_S", "dEp_S", "dQ_total", "dQ_bath1", "dW_d", "dW_sw",
         "Sigma", "I_Sn", "Srel_anc", "dS_S", "res1"},
        {{"beta", positive()},
         {"omega0", positive()},
         {"g", positive()},
         {"p0", unit_interval()}},
        false,
        false,
        R"({
  "scenario": "thermal_relaxation",
  "model": { "beta": 1.0, "omega0": 1.0, "g": 1.0, "p0": 0.9 },
  "numerics": { "dt_collision": 0.05, "steps": 100 }
}
)",
        build_thermal_relaxation};

    m["memory_kernel"] = {
        "nonmarkov",
        {"n", "p_chain", "p_kernel", "gap"},
        {{"p", unit_interval()},
         {"g", positive()},
         {"g_z", nonnegative(false)},
         {"w", nonnegative(false)},
         {"p0", unit_interval()}},
        false,
        false,
        R"({
  "scenario": "memory_kernel",
  "model": { "p": 0.5, "g": 0.6, "g_z": 0.25, "w": 0.9, "p0": 0.7 },
  "numerics": { "dt_collision": 0.5, "steps": 8 }
}
)",
        build_memory_kernel};

    const auto composite_def = [](char regime, double G, double dt,
                                  int steps) -> ScenarioDef {
      std::ostringstream text;
      text << "{\n  \"scenario\": \"composite_revivals_" << regime << "\",\n"
           << "  \"model\": { \"G\": " << G << ", \"gamma\": 1.0 },\n"
           << "  \"numerics\": { \"dt_collision\": " << dt
           << ", \"steps\": " << steps << " }\n}\n";
      return {"nonmarkov",
              {"n", "t", "alpha_re", "alpha_im", "alpha_sq", "beta_sq"},
              {{"G", nonnegative()}, {"gamma", positive()}},
              false,
              false,
              text.str(),
              [regime](const ScenarioConfig& cfg) {
                return build_composite(cfg, regime);
              }};
    };
    m["composite_revivals_a"] = composite_def('a', 1.0, 2.0, 15);
    m["composite_revivals_b"] = composite_def('b', 1.0, 1.0, 30);
    m["composite_revivals_c"] = composite_def('c', 1.0, 0.1, 300);
    m["composite_revivals_d"] = composite_def('d', 0.1, 0.1, 300);

    return m;
  }();
  return defs;
}

std::string known_scenarios_line() {
  std::string out;
  for (const auto& [name, def] : registry()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

ConfigError make_error(std::vector<std::string> violations) {
  std::string joined;
  for (const auto& v : violations) {
    if (!joined.empty()) joined += "\n";
    joined += v;
  }
  return ConfigError(joined, std::move(violations));
}

// --- output ----------------------------------------------------------------

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot finalize " + path);
}

std::string render_csv(const Table& table, const OutputConfig& out) {
  std::vector<std::size_t> pick;
  if (out.columns.empty()) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) pick.push_back(c);
  } else {
    for (const auto& name : out.columns) {
      const auto it =
          std::find(table.columns.begin(), table.columns.end(), name);
      if (it == table.columns.end())
        throw make_error({"outputs.columns: unknown column '" + name + "'"});
      pick.push_back(std::size_t(it - table.columns.begin()));
    }
  }

  std::string csv;
  for (std::size_t k = 0; k < pick.size(); ++k)
    csv += (k ? "," : "") + table.columns[pick[k]];
  csv += "\r\n";

  const int stride = std::max(out.stride, 1);
  char buf[64];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (r % std::size_t(stride) != 0 && r + 1 != table.rows.size()) continue;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      const double v = table.rows[r][pick[k]];
      if (table.columns[pick[k]] == "n")
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
      else
        std::snprintf(buf, sizeof(buf), "%.16e", v);
      if (k) csv += ",";
      csv += buf;
    }
    csv += "\r\n";
  }
  return csv;
}

// Canonical serialization for hashing: rebuilt from the parsed config so that
// formatting and key order in the user's file cannot change the hash.
std::string canonical_config(const ScenarioConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["model"] = cfg.model;
  j["numerics"] = {{"dt_collision", cfg.numerics.dt_collision},
                   {"steps", cfg.numerics.steps},
                   {"dt_integration", cfg.numerics.dt_integration},
                   {"truncation", cfg.numerics.truncation},
                   {"tolerance", cfg.numerics.tolerance}};
  j["outputs"] = {{"columns", cfg.outputs.columns}, {"stride", cfg.outputs.stride}};
  j["seed"] = cfg.seed;
  return j.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

// --- public entry points -----------------------------------------------------

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw make_error({e.what()});
  }

  std::vector<std::string> bad;
  ScenarioConfig cfg;
  if (!j.is_object()) throw make_error({"config: must be a JSON object"});

  for (const auto& [key, value] : j.items()) {
    if (key != "scenario" && key != "model" && key != "numerics" &&
        key != "outputs" && key != "seed")
      bad.push_back(key + ": unknown key");
  }

  if (!j.contains("scenario")) {
    bad.push_back("scenario: required");
  } else if (!j["scenario"].is_string()) {
    bad.push_back("scenario: must be a string");
  } else {
    cfg.scenario = j["scenario"].get<std::string>();
    if (!registry().count(cfg.scenario))
      bad.push_back("scenario: unknown scenario '" + cfg.scenario +
                    "'; known scenarios: " + known_scenarios_line());
  }

  if (j.contains("model")) {
    if (!j["model"].is_object()) {
      bad.push_back("model: must be an object");
    } else {
      for (const auto& [key, value] : j["model"].items()) {
        if (!value.is_number())
          bad.push_back("model." + key + ": must be a number");
        else
          cfg.model[key] = value.get<double>();
      }
    }
  }

  if (j.contains("numerics")) {
    const json& nm = j["numerics"];
    if (!nm.is_object()) {
      bad.push_back("numerics: must be an object");
    } else {
      for (const auto& [key, value] : nm.items()) {
        if (key == "dt_collision" || key == "dt_integration" || key == "tolerance") {
          if (!value.is_number())
            bad.push_back("numerics." + key + ": must be a number");
          else if (key == "dt_collision")
            cfg.numerics.dt_collision = value.get<double>();
          else if (key == "dt_integration")
            cfg.numerics.dt_integration = value.get<double>();
          else
            cfg.numerics.tolerance = value.get<double>();
        } else if (key == "steps" || key == "truncation") {
          if (!value.is_number_integer())
            bad.push_back("numerics." + key + ": must be an integer");
          else if (key == "steps")
            cfg.numerics.steps = value.get<int>();
          else
            cfg.numerics.truncation = value.get<int>();
        } else {
          bad.push_back("numerics." + key + ": unknown key");
        }
      }
    }
  }

  if (j.contains("outputs")) {
    const json& out = j["outputs"];
    if (!out.is_object()) {
      bad.push_back("outputs: must be an object");
    } else {
      for (const auto& [key, value] : out.items()) {
        if (key == "columns") {
          if (!value.is_array()) {
            bad.push_back("outputs.columns: must be an array of strings");
          } else {
            for (const auto& col : value) {
              if (!col.is_string()) {
                bad.push_back("outputs.columns: must be an array of strings");
                break;
              }
              cfg.outputs.columns.push_back(col.get<std::string>());
            }
          }
        } else if (key == "stride") {
          if (!value.is_number_integer())
            bad.push_back("outputs.stride: must be an integer");
          else
            cfg.outputs.stride = value.get<int>();
        } else {
          bad.push_back("outputs." + key + ": unknown key");
        }
      }
    }
  }

  if (j.contains("seed")) {
    const json& seed = j["seed"];
    if (!seed.is_number_integer() || (seed.is_number_integer() && seed.get<std::int64_t>() < 0)) {
      bad.push_back("seed: must be a nonnegative integer");
    } else {
      cfg.seed = seed.get<std::uint64_t>();
      cfg.seed_in_config = true;
    }
  }

  // Range checks. These run even when the scenario is unknown so a single
  // pass reports everything wrong with the file.
  if (cfg.numerics.dt_collision <= 0.0)
    bad.push_back("numerics.dt_collision: must be > 0");
  if (cfg.numerics.steps <= 0) bad.push_back("numerics.steps: must be > 0");
  if (cfg.numerics.tolerance < 0.0)
    bad.push_back("numerics.tolerance: must be >= 0");
  if (cfg.outputs.stride < 1) bad.push_back("outputs.stride: must be >= 1");

  const auto it = registry().find(cfg.scenario);
  if (it != registry().end()) {
    const ScenarioDef& def = it->second;
    if (def.needs_integration && cfg.numerics.dt_integration <= 0.0)
      bad.push_back("numerics.dt_integration: must be > 0");
    if (def.needs_truncation && cfg.numerics.truncation < 2)
      bad.push_back("numerics.truncation: must be >= 2");
    for (const auto& [name, rule] : def.params) {
      const auto param = cfg.model.find(name);
      if (param == cfg.model.end()) {
        if (rule.required) bad.push_back("model." + name + ": required");
      } else {
        const std::string msg = rule.check(param->second);
        if (!msg.empty()) bad.push_back("model." + name + ": " + msg);
      }
    }
    for (const auto& [name, value] : cfg.model)
      if (!def.params.count(name))
        bad.push_back("model." + name + ": unknown parameter for scenario '" +
                      cfg.scenario + "'");
    for (const auto& col : cfg.outputs.columns)
      if (std::find(def.columns.begin(), def.columns.end(), col) ==
          def.columns.end())
        bad.push_back("outputs.columns: unknown column '" + col + "'");
  }

  if (!bad.empty()) throw make_error(std::move(bad));
  return cfg;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config,
                             const std::string& out_dir) {
  const auto it = registry().find(config.scenario);
  if (it == registry().end())
    throw make_error({"scenario: unknown scenario '" + config.scenario +
                      "'; known scenarios: " + known_scenarios_line()});

  const auto started = std::chrono::steady_clock::now();
  const Table table = it->second.build(config);
  const std::string csv = render_csv(table, config.outputs);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/" + config.scenario + ".csv";
  const std::string manifest_path =
      out_dir + "/" + config.scenario + ".manifest.json";
  write_atomic(csv_path, csv);

  json manifest;
  manifest["version"] = kToolkitVersion;
  manifest["config_hash"] = fnv1a_hex(canonical_config(config));
  manifest["seed"] = config.seed;
  manifest["wall_seconds"] = wall;
  manifest["tolerances"] = table.tolerances;
  write_atomic(manifest_path, manifest.dump(2) + "\n");

  ScenarioOutcome outcome;
  outcome.csv_files = {csv_path};
  outcome.manifest_file = manifest_path;
  outcome.check_passed = table.pass;
  outcome.check_detail = table.detail;
  return outcome;
}

std::vector<std::string> bundled_scenarios() {
  std::vector<std::string> names;
  for (const auto& [name, def] : registry()) names.push_back(name);
  return names;
}

std::string bundled_config_text(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end())
    throw make_error({"scenario: unknown scenario '" + name +
                      "'; known scenarios: " + known_scenarios_line()});
  return it->second.config_text;
}

std::string scenario_family(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end())
    throw make_error({"scenario: unknown scenario '" + name +
                      "'; known scenarios: " + known_scenarios_line()});
  return it->second.family;
}

}  // namespace collide
