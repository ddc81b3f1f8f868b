#include "collide/nonmarkov.hpp"

#include "doctest.h"
#include "support/oracles.hpp"

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

using namespace collide;

namespace {

ComplexMatrix id(Eigen::Index d) { return ComplexMatrix::Identity(d, d); }

ComplexMatrix nop() { return sigma_plus() * sigma_minus(); }

ComplexMatrix exchange_coupling(double g) {
  return g * (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus()));
}

ComplexMatrix pseudo_hermitian(Eigen::Index d, int salt) {
  ComplexMatrix h(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      h(i, j) = Complex(std::sin(0.7 * double(3 * i + j + salt)),
                        std::cos(1.3 * double(i - 2 * j) + salt));
  return 0.5 * (h + ComplexMatrix(h.adjoint()));
}

// The generic qubit chain used across the ancilla-ancilla tests.
CollisionModelSpec chain_base() {
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.H_S = 0.9 * nop();
  spec.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  spec.H_n = [](int) { return ComplexMatrix(0.9 * nop()); };
  spec.V = [](int) {
    return ComplexMatrix(exchange_coupling(0.6) + 0.25 * kron(pauli_z(), pauli_z()));
  };
  spec.dt = 0.5;
  return spec;
}

// Strict interior maxima of a sampled magnitude sequence: (index, height).
std::vector<std::pair<int, double>> maxima_of(const std::vector<double>& y) {
  std::vector<std::pair<int, double>> peaks;
  for (std::size_t k = 1; k + 1 < y.size(); ++k)
    if (y[k] > y[k - 1] && y[k] > y[k + 1]) peaks.push_back({int(k), y[k]});
  return peaks;
}

int count_maxima(const std::vector<double>& y) { return int(maxima_of(y).size()); }

}  // namespace

TEST_SUITE("nonmarkov") {

TEST_CASE("swap extremes reduce to the memoryless and frozen-ancilla chains") {
  const CollisionModelSpec base = chain_base();
  const DensityMatrix rho0 = qubit_density({0.7, Complex(0.0, 0.2)});
  const int n = 6;

  const auto plain = run(base, rho0, n);
  for (AAMode mode : {AAMode::CoherentPartialSwap, AAMode::IncoherentSwapMap}) {
    AASpec spec;
    spec.base = base;
    spec.p = 0.0;
    spec.mode = mode;
    const auto traj = run_aa(spec, rho0, n);
    REQUIRE(int(traj.size()) == n + 1);
    for (int k = 1; k <= n; ++k)
      CHECK(max_abs(ComplexMatrix(traj[std::size_t(k)].matrix -
                                  plain[std::size_t(k - 1)].rho.matrix)) < 1e-14);
  }

  // Full swapping hands the system the same ancilla over and over.
  const DensityMatrix eta = pure_state(ket0(), qubit_space("anc"));
  const ComplexMatrix U1 = build_unitary(base.H_S, base.H_n(1), base.V(1), base.dt);
  const TensorSpace joint = joint_space(rho0.space, eta.space);
  ComplexMatrix power = id(4);
  for (AAMode mode : {AAMode::CoherentPartialSwap, AAMode::IncoherentSwapMap}) {
    AASpec spec;
    spec.base = base;
    spec.p = 1.0;
    spec.mode = mode;
    const auto traj = run_aa(spec, rho0, n);
    power = id(4);
    for (int k = 1; k <= n; ++k) {
      power = U1 * power;
      const ComplexMatrix expected = partial_trace(
          ComplexMatrix(power * kron(rho0.matrix, eta.matrix) * power.adjoint()),
          joint, {"S"});
      CHECK(max_abs(ComplexMatrix(traj[std::size_t(k)].matrix - expected)) < 1e-13);
    }
  }
}

TEST_CASE("retained-window truncation never disturbs the system trajectory") {
  AASpec spec;
  spec.base = chain_base();
  spec.base.ancilla = [](int) { return AncillaSpec(ThermalQubit{1.1, 0.9}); };
  spec.p = 0.45;
  spec.mode = AAMode::CoherentPartialSwap;

  const DensityMatrix rho0 = qubit_density({0.8, Complex(0.1, -0.15)});
  const int n = 7;
  const auto exact = run_aa(spec, rho0, n, 0);
  for (int window : {1, 3}) {
    const auto windowed = run_aa(spec, rho0, n, window);
    for (int k = 0; k <= n; ++k)
      CHECK(max_abs(ComplexMatrix(windowed[std::size_t(k)].matrix -
                                  exact[std::size_t(k)].matrix)) < 1e-13);
  }

  // Same exactness when the neighbours talk through an arbitrary unitary.
  AASpec general;
  general.base = spec.base;
  general.mode = AAMode::GeneralPairUnitary;
  general.W = expm_unitary(pseudo_hermitian(4, 21), 0.8);
  const auto gen_exact = run_aa(general, rho0, 6, 0);
  const auto gen_windowed = run_aa(general, rho0, 6, 2);
  for (int k = 0; k <= 6; ++k)
    CHECK(max_abs(ComplexMatrix(gen_windowed[std::size_t(k)].matrix -
                                gen_exact[std::size_t(k)].matrix)) < 1e-13);
}

TEST_CASE("incoherent chain lands on the frozen checkpoint") {
  AASpec spec;
  spec.base.system = qubit_space();
  spec.base.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  spec.base.V = [](int) { return exchange_coupling(0.6); };
  spec.base.dt = 0.5;
  spec.p = 0.3;
  spec.mode = AAMode::IncoherentSwapMap;

  const DensityMatrix rho0 = qubit_density({0.7, Complex(0.0, 0.2)});
  const auto traj = run_aa(spec, rho0, 4);
  CHECK(std::abs(traj[4].matrix(0, 0).real() - 3.9579136035720563e-01) < 1e-13);
  CHECK(std::abs(traj[4].matrix(0, 1) - Complex(0.0, 1.4908304062141198e-01)) < 1e-13);

  const auto windowed = run_aa(spec, rho0, 4, 1);
  CHECK(max_abs(ComplexMatrix(windowed[4].matrix - traj[4].matrix)) < 1e-13);

  // The closed recursion reproduces the same point from just U1 and eta.
  const DensityMatrix eta = pure_state(ket0(), qubit_space("anc"));
  const ComplexMatrix U1 = expm_unitary(exchange_coupling(0.6), 0.5);
  const auto rec = memory_kernel_recursion(U1, eta, 0.3, rho0, 4);
  CHECK(std::abs(rec[4].matrix(0, 0).real() - 3.9579136035720563e-01) < 1e-13);
  CHECK(std::abs(rec[4].matrix(0, 1) - Complex(0.0, 1.4908304062141198e-01)) < 1e-13);
}

TEST_CASE("memory-kernel recursion equals the interleaved chain") {
  AASpec spec;
  spec.base = chain_base();
  spec.mode = AAMode::IncoherentSwapMap;
  const DensityMatrix rho0 = qubit_density({0.7, Complex(0.0, 0.2)});
  const DensityMatrix eta = pure_state(ket0(), qubit_space("anc"));
  const ComplexMatrix U1 =
      build_unitary(spec.base.H_S, spec.base.H_n(1), spec.base.V(1), spec.base.dt);

  const int n = 8;
  for (double p : {0.0, 0.3, 0.7, 1.0}) {
    spec.p = p;
    const auto chain = run_aa(spec, rho0, n, 2);
    const auto rec = memory_kernel_recursion(U1, eta, p, rho0, n);
    REQUIRE(rec.size() == chain.size());
    for (int k = 0; k <= n; ++k) {
      CHECK(max_abs(ComplexMatrix(rec[std::size_t(k)].matrix -
                                  chain[std::size_t(k)].matrix)) < 1e-10);
      CHECK(std::abs(rec[std::size_t(k)].matrix.trace().real() - 1.0) < 1e-13);
    }
  }
}

TEST_CASE("memory-kernel master equation integrates the history faithfully") {
  CollisionMapFamily family;
  family.system = qubit_space();
  family.H1 = kron(0.6 * nop(), id(2)) + kron(id(2), 0.6 * nop()) +
              exchange_coupling(0.8);
  family.eta = DensityMatrix::create(
      qubit_density({0.29, Complex(0.0, 0.0)}).matrix, qubit_space("anc"));
  const DensityMatrix rho0 = qubit_density({0.85, Complex(0.12, -0.08)});
  const TensorSpace joint = joint_space(family.system, family.eta.space);

  SUBCASE("no memory keeps only the inhomogeneous term") {
    const auto samples = memory_kernel_me(0.0, family, rho0, 1.0, 1e-3);
    for (int k = 250; k <= 1000; k += 250) {
      const auto& s = samples[std::size_t(k)];
      const ComplexMatrix U = expm_unitary(family.H1, s.t);
      const ComplexMatrix expected = partial_trace(
          ComplexMatrix(U * kron(rho0.matrix, family.eta.matrix) * U.adjoint()),
          joint, {"S"});
      CHECK(max_abs(ComplexMatrix(s.rho - expected)) < 1e-5);
    }
  }

  SUBCASE("discrete recursion converges onto the kernel solution") {
    const double Gamma = 0.8;
    const auto reference = memory_kernel_me(Gamma, family, rho0, 1.0, 1e-3);
    const ComplexMatrix target = reference.back().rho;
    for (const auto& s : reference)
      CHECK(std::abs(s.rho.trace().real() - 1.0) < 1e-9);

    auto recursion_gap = [&](double dt) {
      const ComplexMatrix U1 = expm_unitary(family.H1, dt);
      const double p = std::exp(-Gamma * dt);
      const int n = int(std::llround(1.0 / dt));
      const auto rec = memory_kernel_recursion(U1, family.eta, p, rho0, n);
      return max_abs(ComplexMatrix(rec.back().matrix - target));
    };
    const double coarse = recursion_gap(0.1);
    const double fine = recursion_gap(0.05);
    CHECK(coarse / fine >= 1.8);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_WITH(memory_kernel_me(0.5, family, rho0, 1.0, 0.4),
                      "step too coarse");
    CHECK_THROWS_WITH(memory_kernel_me(0.5, family, rho0, 1.0, 0.0),
                      "dt must be positive");
    CHECK_THROWS_WITH(memory_kernel_me(-0.1, family, rho0, 1.0, 1e-3),
                      "memory rate must be nonnegative");
    CHECK_THROWS_WITH(memory_kernel_me(0.5, family, rho0, -1.0, 1e-3),
                      "t_max must be nonnegative");
    CollisionMapFamily crooked = family;
    crooked.H1(0, 1) += Complex(0.0, 0.3);
    CHECK_THROWS_WITH(memory_kernel_me(0.5, crooked, rho0, 1.0, 1e-3),
                      "not Hermitian");
  }
}

TEST_CASE("ancilla mixtures average the component dynamics") {
  CollisionModelSpec base;
  base.system = qubit_space();
  base.ancilla = [](int) { return AncillaSpec(PureVector{ket0()}); };
  base.V = [](int) { return exchange_coupling(0.7); };
  base.dt = 0.4;

  const double w0 = 0.55, w1 = 0.45;
  MixtureSpec mixture;
  mixture.components.push_back(
      {w0, [](int) { return AncillaSpec(PureVector{ket0()}); }});
  mixture.components.push_back(
      {w1, [](int) { return AncillaSpec(PureVector{ket1()}); }});

  const DensityMatrix rho0 = pure_state(ket1(), base.system);
  const int n = 4;
  const auto traj = mixture_dynamics(mixture, base, rho0, n);

  // One collision from the excited state: the all-ground branch rotates by
  // g dt, the all-excited branch is blocked by excitation exchange.
  const double c = std::cos(0.7 * 0.4), s = std::sin(0.7 * 0.4);
  CHECK(std::abs(traj[1].matrix(0, 0).real() - (w0 * c * c + w1)) < 1e-14);
  CHECK(std::abs(traj[1].matrix(1, 1).real() - w0 * s * s) < 1e-14);
  CHECK(std::abs(traj[1].matrix(0, 1)) < 1e-14);

  // Dense joint evolution with the correlated bath state as the oracle.
  std::vector<std::string> labels = {"S", "b1", "b2", "b3", "b4"};
  const TensorSpace full(labels, {2, 2, 2, 2, 2});
  ComplexMatrix bath = ComplexMatrix::Zero(16, 16);
  bath(15, 15) = w0;  // |0000>
  bath(0, 0) = w1;    // |1111>
  ComplexMatrix state = kron(rho0.matrix, bath);
  const ComplexMatrix U4 = expm_unitary(exchange_coupling(0.7), 0.4);
  for (int k = 1; k <= n; ++k) {
    const ComplexMatrix U_emb = embed_subset(U4, full, {"S", "b" + std::to_string(k)});
    state = U_emb * state * U_emb.adjoint();
    const ComplexMatrix reduced = partial_trace(state, full, {"S"});
    CHECK(max_abs(ComplexMatrix(traj[std::size_t(k)].matrix - reduced)) < 1e-12);
  }

  // A single component is the plain chain again.
  MixtureSpec lone;
  lone.components.push_back({1.0, nullptr});
  const auto alone = mixture_dynamics(lone, base, rho0, n);
  const auto plain = run(base, rho0, n);
  for (int k = 1; k <= n; ++k)
    CHECK(max_abs(ComplexMatrix(alone[std::size_t(k)].matrix -
                                plain[std::size_t(k - 1)].rho.matrix)) < 1e-14);

  MixtureSpec short_weights = mixture;
  short_weights.components[0].weight = 0.5;
  short_weights.components[1].weight = 0.4;
  CHECK_THROWS_WITH(mixture_dynamics(short_weights, base, rho0, 2),
                    "mixture weights must sum to one");
  MixtureSpec negative = mixture;
  negative.components[0].weight = -0.1;
  negative.components[1].weight = 1.1;
  CHECK_THROWS_WITH(mixture_dynamics(negative, base, rho0, 2),
                    "mixture weights must be nonnegative");
  CHECK_THROWS_WITH(mixture_dynamics(MixtureSpec{}, base, rho0, 2),
                    "mixture needs at least one component");
}

TEST_CASE("delayed feedback follows the finite-difference law") {
  DelaySpec spec;
  spec.gamma = 1.0;
  spec.dt = 1e-3;
  spec.d = 20;
  spec.phi = 0.4;

  const int n_max = 60;
  const auto alpha = delayed_emission(spec, n_max);
  REQUIRE(int(alpha.size()) == n_max + 1);

  // Before the first echo arrives the decay is exactly memoryless.
  for (int n = 0; n < spec.d; ++n)
    CHECK(std::abs(alpha[std::size_t(n)] -
                   std::pow(1.0 - spec.gamma * spec.dt, n)) < 1e-14);

  // Full single-excitation evolution with expanded collision unitaries.
  const auto oracle = oracle::delayed_feedback_amplitudes(
      spec.gamma, spec.dt, spec.d, spec.phi, n_max);
  const double gdt = spec.gamma * spec.dt;
  for (int n = 1; n <= n_max; ++n) {
    const double bound = 5.0 * n * std::pow(gdt, 1.5);
    CHECK(std::abs(alpha[std::size_t(n)] - oracle.alpha[std::size_t(n)]) < bound);
  }
  // The expansion is non-unitary only at second order per step.
  CHECK(std::abs(oracle.norm_sq - 1.0) < 2.0 * n_max * gdt * gdt);

  CHECK_THROWS_WITH(delayed_emission(DelaySpec{1.0, 0.2, 20, 0.0}, 5),
                    "gamma*dt too large for the second-order expansion");
  CHECK_THROWS_WITH(delayed_emission(DelaySpec{1.0, 1e-3, 0, 0.0}, 5),
                    "delay must be at least one collision");
  CHECK_THROWS_WITH(delayed_emission(DelaySpec{0.0, 1e-3, 3, 0.0}, 5),
                    "rate and collision duration must be positive");
}

TEST_CASE("delayed feedback converges to the delay differential equation") {
  const double gamma = 1.0, tau = 1.0, phi = 0.7, t_star = 3.0;

  // Reference: Heun integration of the continuum equation on a grid where
  // the delayed argument falls exactly on stored nodes.
  const double h = 1e-4;
  const int K = int(std::llround(tau / h));
  const int steps = int(std::llround(t_star / h));
  std::vector<Complex> a(std::size_t(steps) + 1);
  a[0] = 1.0;
  const Complex ph = std::exp(Complex(0.0, phi));
  auto rate = [&](int k, const Complex& now) {
    Complex out = -gamma * now;
    if (k >= K) out -= gamma * ph * a[std::size_t(k - K)];
    return out;
  };
  for (int k = 0; k < steps; ++k) {
    const Complex k1 = rate(k, a[std::size_t(k)]);
    const Complex k2 = rate(k + 1, a[std::size_t(k)] + h * k1);
    a[std::size_t(k) + 1] = a[std::size_t(k)] + 0.5 * h * (k1 + k2);
  }
  const Complex reference = a.back();

  auto gap = [&](double dt) {
    DelaySpec spec;
    spec.gamma = gamma;
    spec.dt = dt;
    spec.d = int(std::llround(tau / dt));
    spec.phi = phi;
    const int n = int(std::llround(t_star / dt));
    return std::abs(delayed_emission(spec, n).back() - reference);
  };
  const double coarse = gap(1e-2);
  const double fine = gap(5e-3);
  CHECK(fine < 5e-3);
  CHECK(coarse / fine > 1.6);
  CHECK(coarse / fine < 2.7);
}

TEST_CASE("composite recurrence reproduces the frozen point and the envelope") {
  CompositeSpec frozen{1.0, 2.0, 0.3};
  const CompositeAmplitudes amp = composite_recurrence(frozen, 5);
  CHECK(std::abs(amp.alpha[5] - Complex(2.9090435672636772e-01, 0.0)) < 1e-15);
  CHECK(std::abs(amp.beta[5] - Complex(0.0, -7.0891240342650608e-01)) < 1e-15);

  // Without leakage the two amplitudes just Rabi-rotate.
  const CompositeAmplitudes rabi = composite_recurrence({0.8, 0.0, 0.25}, 40);
  for (int n = 0; n <= 40; ++n)
    CHECK(std::abs(std::norm(rabi.alpha[std::size_t(n)]) +
                   std::norm(rabi.beta[std::size_t(n)]) - 1.0) < 1e-13);

  // Near-continuum leakage gamma = g^2 dt: underdamped and overdamped
  // envelopes, both within 1e-2 of the recurrence.
  const double gamma = 1.0, dt = 1e-3;
  const double g = std::sqrt(gamma / dt);
  for (double G : {1.0, 0.1}) {
    const int n = int(std::llround(6.0 / dt));
    const CompositeAmplitudes run = composite_recurrence({G, g, dt}, n);
    double worst = 0.0;
    for (int k = 0; k <= n; ++k) {
      CHECK(run.alpha[std::size_t(k)].imag() == 0.0);
      const Complex env = composite_envelope(G, gamma, k * dt);
      worst = std::max(worst,
                       std::abs(run.alpha[std::size_t(k)].real() - env.real()));
    }
    CHECK(worst < 1e-2);
  }

  CHECK_THROWS_WITH(composite_recurrence({-1.0, 1.0, 0.1}, 3),
                    "exchange rates must be nonnegative");
  CHECK_THROWS_WITH(composite_recurrence({1.0, 1.0, 0.0}, 3),
                    "collision duration must be positive");
}

TEST_CASE("composite regimes separate by their revival structure") {
  const double gamma = 1.0;
  auto profile = [&](double G, double dt, double horizon) {
    const double g = std::sqrt(gamma / dt);
    const int n = int(std::llround(horizon / dt));
    return composite_recurrence({G, g, dt}, n);
  };

  auto magnitudes = [](const std::vector<Complex>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const Complex& z : v) out.push_back(std::norm(z));
    return out;
  };

  const auto a = profile(1.0, 2.0, 30.0);   // strong collisions, fast drain
  const auto b = profile(1.0, 1.0, 30.0);   // coarse collapse and revival
  const auto c = profile(1.0, 0.1, 30.0);   // near-continuum, underdamped
  const auto d = profile(0.1, 0.1, 30.0);   // near-continuum, overdamped

  const auto peaks_a = maxima_of(magnitudes(a.alpha));
  const auto peaks_b = maxima_of(magnitudes(b.alpha));
  const auto peaks_c = maxima_of(magnitudes(c.alpha));
  const auto peaks_d = maxima_of(magnitudes(d.alpha));

  // Overdamped: the system amplitude sags monotonically while the memory
  // fills and empties exactly once.
  CHECK(peaks_d.empty());
  CHECK(count_maxima(magnitudes(d.beta)) == 1);
  CHECK(std::norm(d.alpha[30]) > 0.9);

  // Underdamped continuum: damped Rabi revivals roughly every 2 pi / delta,
  // the first a macroscopic fraction of the initial excitation and dozens of
  // collisions away.
  CHECK(peaks_c.size() >= 7);
  CHECK(peaks_c.size() <= 11);
  CHECK(peaks_c.front().first >= 25);
  CHECK(peaks_c.front().second > 0.1);

  // Coarse collisions: revivals recur within a handful of collisions.
  CHECK(peaks_b.size() >= 7);
  CHECK(peaks_b.front().first <= 6);
  CHECK(peaks_b.front().second > 0.05);

  // Strong collisions: the excitation collapses within three steps and no
  // later revival recovers even one percent of it.
  CHECK(std::norm(a.alpha[3]) < 0.01);
  for (const auto& [where, height] : peaks_a) CHECK(height < 0.01);
}

TEST_CASE("composite map run carries the single-excitation amplitudes") {
  const double G = 1.0, g = 2.0, dt = 0.3;
  const ComplexMatrix U_SM = expm_unitary(exchange_coupling(G), dt);
  const ComplexMatrix U_Mn = expm_unitary(exchange_coupling(g), dt);
  const DensityMatrix eta_M = pure_state(ket0(), qubit_space("M"));
  const DensityMatrix eta = pure_state(ket0(), qubit_space("a"));
  const DensityMatrix rho0 = pure_state(ket1(), qubit_space());

  const int n = 6;
  const auto traj = composite_map_run(U_SM, U_Mn, eta_M, eta, rho0, n);
  const CompositeAmplitudes amp = composite_recurrence({G, g, dt}, n);
  for (int k = 0; k <= n; ++k) {
    CHECK(std::abs(traj[std::size_t(k)].matrix(0, 0).real() -
                   std::norm(amp.alpha[std::size_t(k)])) < 1e-12);
    CHECK(std::abs(traj[std::size_t(k)].matrix(0, 1)) < 1e-12);
  }

  CHECK_THROWS_WITH(composite_map_run(id(6), U_Mn, eta_M, eta, rho0, 2),
                    "dimension mismatch: unitary does not fit system ⊗ memory");
  CHECK_THROWS_WITH(composite_map_run(U_SM, id(6), eta_M, eta, rho0, 2),
                    "dimension mismatch: unitary does not fit memory ⊗ ancilla");
}

TEST_CASE("an ancilla-ancilla chain is a composite model with a swapped memory") {
  CollisionModelSpec base;
  base.system = qubit_space();
  base.H_S = 0.7 * nop();
  base.ancilla = [](int) { return AncillaSpec(ThermalQubit{1.3, 0.7}); };
  base.H_n = [](int) { return ComplexMatrix(0.7 * nop()); };
  base.V = [](int) {
    return ComplexMatrix(exchange_coupling(0.8) + 0.2 * kron(pauli_z(), pauli_z()));
  };
  base.dt = 0.45;

  AASpec spec;
  spec.base = base;
  spec.mode = AAMode::GeneralPairUnitary;
  spec.W = expm_unitary(pseudo_hermitian(4, 11), 0.8);

  const DensityMatrix rho0 = qubit_density({0.7, Complex(0.1, -0.2)});
  const int n = 6;
  const auto chain = run_aa(spec, rho0, n);

  const ComplexMatrix U_SM = build_unitary(base.H_S, base.H_n(1), base.V(1), base.dt);
  const ComplexMatrix W_prime = swap_operator(2) * spec.W;
  const DensityMatrix eta_M = ancilla_density(base.ancilla(1), qubit_space("M"));
  const DensityMatrix eta = ancilla_density(base.ancilla(1), qubit_space("a"));
  const auto composite = composite_map_run(U_SM, W_prime, eta_M, eta, rho0, n);

  for (int k = 0; k <= n; ++k)
    CHECK(max_abs(ComplexMatrix(chain[std::size_t(k)].matrix -
                                composite[std::size_t(k)].matrix)) < 1e-12);
}

TEST_CASE("swap conjugation relocates states and operators exactly") {
  const ComplexMatrix A = pseudo_hermitian(2, 3);
  const ComplexMatrix B = pseudo_hermitian(2, 8);
  const ComplexMatrix S = swap_operator(2);
  CHECK(max_abs(ComplexMatrix(S * kron(A, B) * S - kron(B, A))) == 0.0);

  const TensorSpace full({"S", "a1", "a2"}, {2, 2, 2});
  const ComplexMatrix O = pseudo_hermitian(4, 5);
  const ComplexMatrix S_emb = embed_subset(S, full, {"a1", "a2"});
  const ComplexMatrix moved =
      S_emb * embed_subset(O, full, {"S", "a2"}) * S_emb;
  CHECK(max_abs(ComplexMatrix(moved - embed_subset(O, full, {"S", "a1"}))) < 1e-13);
}

TEST_CASE("chain construction rejects invalid requests") {
  AASpec spec;
  spec.base = chain_base();
  const DensityMatrix rho0 = qubit_density({0.7, Complex(0.0, 0.2)});

  AASpec bad = spec;
  bad.p = 1.2;
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2), "swap probability must lie in [0, 1]");

  bad = spec;
  bad.base.variant = MultiBath{};
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2),
                    "ancilla-ancilla chains require a basic model");

  bad = spec;
  bad.base.dt = 0.0;
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2), "collision duration must be positive");

  bad = spec;
  bad.base.ancilla = nullptr;
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2), "model has no ancilla source");

  bad = spec;
  bad.base.V = nullptr;
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2), "model has no coupling");

  CHECK_THROWS_WITH(run_aa(spec, rho0, -1), "negative step count");
  CHECK_THROWS_WITH(run_aa(spec, rho0, 2, -1),
                    "retained window must be positive when given");

  const DensityMatrix wrong = DensityMatrix::create(
      ComplexMatrix::Identity(3, 3) / 3.0, TensorSpace({"S"}, {3}));
  CHECK_THROWS_WITH(run_aa(spec, wrong, 2),
                    "dimension mismatch: initial state does not fit the system space");

  bad = spec;
  bad.base.ancilla = [](int n) {
    if (n == 1) return AncillaSpec(PureVector{ket0()});
    ComplexVector three = ComplexVector::Zero(3);
    three(0) = 1.0;
    return AncillaSpec(PureVector{three});
  };
  bad.base.V = [](int n) {
    return ComplexMatrix(ComplexMatrix::Zero(2 * (n == 1 ? 2 : 3), 2 * (n == 1 ? 2 : 3)));
  };
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2),
                    "ancilla-ancilla chains require a fixed ancilla dimension");

  bad = spec;
  bad.mode = AAMode::GeneralPairUnitary;
  bad.W = id(3);
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2),
                    "dimension mismatch: pair unitary does not fit two ancillas");
  bad.W = 2.0 * id(4);
  CHECK_THROWS_WITH(run_aa(bad, rho0, 2), "pair operator must be unitary");

  // A fat ancilla overflows the dense-chain cap at the second collision.
  AASpec fat;
  fat.base.system = qubit_space();
  fat.base.ancilla = [](int) {
    ComplexVector v = ComplexVector::Zero(256);
    v(0) = 1.0;
    return AncillaSpec(PureVector{v});
  };
  fat.base.V = [](int) { return ComplexMatrix(ComplexMatrix::Zero(512, 512)); };
  fat.base.dt = 0.1;
  CHECK_THROWS_WITH(run_aa(fat, rho0, 2),
                    "joint chain too large; request a retained window");

  const DensityMatrix eta = pure_state(ket0(), qubit_space("anc"));
  CHECK_THROWS_WITH(memory_kernel_recursion(id(4), eta, 1.3, rho0, 2),
                    "swap probability must lie in [0, 1]");
  CHECK_THROWS_WITH(memory_kernel_recursion(id(6), eta, 0.3, rho0, 2),
                    "dimension mismatch: unitary does not fit rho ⊗ eta");
  CHECK_THROWS_WITH(memory_kernel_recursion(id(4), eta, 0.3, rho0, -2),
                    "negative step count");
}

}  // TEST_SUITE
