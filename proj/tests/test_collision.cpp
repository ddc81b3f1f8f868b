#include "doctest.h"

#include "collide/collision.hpp"

#include <cmath>
#include <complex>

using namespace collide;

namespace {

// Exchange coupling with a dephasing part, on two qubits.
ComplexMatrix xy_zz_coupling(double g, double gz) {
  return g * (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus())) +
         gz * kron(pauli_z(), pauli_z());
}

ComplexVector plus_state() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

// Deterministic "random" Hermitian matrix, no RNG state involved.
ComplexMatrix pseudo_hermitian(Eigen::Index d, int salt) {
  ComplexMatrix h(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      h(i, j) = Complex(std::sin(0.7 * double(3 * i + j + salt)),
                        std::cos(1.3 * double(i - 2 * j) + salt));
  return ComplexMatrix(0.5 * (h + h.adjoint()));
}

// Reference values from an independent dense implementation (numpy/scipy):
// seven collisions, g = 0.74, gz = 0.42, dt = 0.5, omega = 0.9,
// eta = (0.22, 0.05 - 0.13i), rho0 = (0.63, 0.11 - 0.09i).
constexpr double kChainP7 = 3.9335195510920684e-01;
constexpr Complex kChainC7{-9.6020611650444510e-02, -1.2981258733607359e-01};

// Same source: cascaded model, three collisions, g1 = 0.6, g2 = 0.45,
// dt = 0.7, omega = 0.9, psi = (0.8|1> + 0.6|0>) x (0.6|1> + 0.8i|0>).
constexpr double kCascS1P = 3.7090139674161005e-01;
constexpr Complex kCascS1C{-2.9344102793336979e-01, 2.1775414106828578e-01};
constexpr double kCascS2P = 3.0307480801701120e-01;
constexpr Complex kCascS2C{2.7662405147851277e-01, 2.8125655942333722e-01};

}  // namespace

TEST_SUITE("collision") {

TEST_CASE("collision unitary closed form") {
  const double g = 0.37, gz = 0.21, dt = 0.8;
  ComplexMatrix u = build_unitary(ComplexMatrix::Zero(2, 2),
                                  ComplexMatrix::Zero(2, 2),
                                  xy_zz_coupling(g, gz), dt);
  // basis order |11>, |10>, |01>, |00>
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  const Complex edge = std::exp(-I_UNIT * gz * dt);
  const Complex mid = std::exp(I_UNIT * gz * dt);
  expected(0, 0) = expected(3, 3) = edge;
  expected(1, 1) = expected(2, 2) = mid * std::cos(g * dt);
  expected(1, 2) = expected(2, 1) = -I_UNIT * mid * std::sin(g * dt);
  CHECK(max_abs(u - expected) < 1e-14);
  CHECK(max_abs(u * u.adjoint() - ComplexMatrix::Identity(4, 4)) < 1e-14);
}

TEST_CASE("kraus operators of the ground-ancilla collision") {
  const double g = 0.37, gz = 0.21, dt = 0.8;
  ComplexMatrix u = build_unitary(ComplexMatrix::Zero(2, 2),
                                  ComplexMatrix::Zero(2, 2),
                                  xy_zz_coupling(g, gz), dt);
  auto kraus = kraus_from_unitary(u, 2, ket0());
  REQUIRE(kraus.size() == 2);

  ComplexMatrix k0 = std::exp(I_UNIT * gz * dt) * std::cos(g * dt) *
                         (ket1() * ket1().adjoint()) +
                     std::exp(-I_UNIT * gz * dt) * (ket0() * ket0().adjoint());
  ComplexMatrix k1 =
      -I_UNIT * std::exp(I_UNIT * gz * dt) * std::sin(g * dt) * sigma_minus();
  // outcome index follows the ancilla basis order (excited first), so the
  // jump operator sits at index 0 and the no-jump branch at index 1
  CHECK(max_abs(kraus[1] - k0) < 1e-14);
  CHECK(max_abs(kraus[0] - k1) < 1e-14);

  ComplexMatrix completeness = ComplexMatrix::Zero(2, 2);
  for (const auto& k : kraus) completeness += k.adjoint() * k;
  CHECK(max_abs(completeness - ComplexMatrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("kraus decomposition reproduces the reduced map") {
  // qubit system, three-level ancilla, generic unitary and ancilla vector
  ComplexMatrix u = expm_unitary(pseudo_hermitian(6, 5), 0.9);
  ComplexVector chi(3);
  chi << Complex(0.3, 0.4), Complex(0.5, -0.1), Complex(0.2, 0.67);
  chi.normalize();
  auto kraus = kraus_from_unitary(u, 2, chi);
  REQUIRE(kraus.size() == 3);

  ComplexMatrix completeness = ComplexMatrix::Zero(2, 2);
  for (const auto& k : kraus) completeness += k.adjoint() * k;
  CHECK(max_abs(completeness - ComplexMatrix::Identity(2, 2)) < 1e-12);

  DensityMatrix rho = qubit_density({0.35, Complex(0.2, -0.3)});
  TensorSpace anc({"anc"}, {3});
  StepRecord rec = collide::collide(rho, pure_state(chi, anc), u);
  ComplexMatrix via_kraus = ComplexMatrix::Zero(2, 2);
  for (const auto& k : kraus) via_kraus += k * rho.matrix * k.adjoint();
  CHECK(max_abs(via_kraus - rec.rho.matrix) < 1e-13);
}

TEST_CASE("seven generic collisions match an independent chain") {
  const double g = 0.74, gz = 0.42, dt = 0.5, omega = 0.9;
  ComplexMatrix h_loc = omega * sigma_plus() * sigma_minus();
  ComplexMatrix u = build_unitary(h_loc, h_loc, xy_zz_coupling(g, gz), dt);
  DensityMatrix eta = ancilla_density(PureVector{ket0()}, qubit_space("anc"));
  // the reference chain uses a mixed ancilla, built directly
  eta = DensityMatrix::create(qubit_density({0.22, Complex(0.05, -0.13)}).matrix,
                              qubit_space("anc"));
  DensityMatrix rho = qubit_density({0.63, Complex(0.11, -0.09)});
  for (int n = 0; n < 7; ++n) {
    StepRecord rec = collide::collide(rho, eta, u);
    // marginals of the retained joint state are consistent
    CHECK(max_abs(rec.joint.reduced({"S"}).matrix - rec.rho.matrix) < 1e-12);
    CHECK(max_abs(rec.joint.reduced({"anc"}).matrix - rec.eta_out.matrix) < 1e-12);
    rho = rec.rho;
  }
  CHECK(std::abs(rho.matrix(0, 0).real() - kChainP7) < 1e-13);
  CHECK(std::abs(rho.matrix(0, 1) - kChainC7) < 1e-13);
}

TEST_CASE("population and coherence closed forms") {
  const double g = 0.2, dt = 0.5, gz = 0.6;  // g dt = 0.1
  const double p0 = 0.7;
  const Complex c0(0.0, 0.2);
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec{PureVector{ket0()}}; };
  spec.V = [&](int) { return xy_zz_coupling(g, gz); };
  spec.dt = dt;

  auto records = run(spec, qubit_density({p0, c0}), 50);
  const double cc = std::cos(g * dt);
  for (int n = 1; n <= 50; ++n) {
    const auto& rho = records[std::size_t(n - 1)].rho;
    CHECK(rho.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-13));
    const double p_expect = std::pow(cc, 2 * n) * p0;
    const Complex c_expect =
        std::exp(2.0 * I_UNIT * gz * dt * double(n)) * std::pow(cc, n) * c0;
    CHECK(std::abs(rho.matrix(0, 0).real() - p_expect) < 1e-13);
    CHECK(std::abs(rho.matrix(0, 1) - c_expect) < 1e-13);
  }
}

TEST_CASE("ancilla marginals after each collision") {
  const double g = 0.4, dt = 0.5, gz = 0.6;
  const double p0 = 0.55;
  const Complex c0(0.3, -0.2);
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec{PureVector{ket0()}}; };
  spec.V = [&](int) { return xy_zz_coupling(g, gz); };
  spec.dt = dt;

  auto records = run(spec, qubit_density({p0, c0}), 12);
  const double s = std::sin(g * dt), cc = std::cos(g * dt);
  for (int n = 1; n <= 12; ++n) {
    const auto& eta = records[std::size_t(n - 1)].eta_out;
    const double pi_expect = s * s * std::pow(cc, 2 * (n - 1)) * p0;
    const Complex d_expect = -I_UNIT * s * std::pow(cc, n - 1) *
                             std::exp(2.0 * I_UNIT * gz * dt * double(n)) * c0;
    CHECK(std::abs(eta.matrix(0, 0).real() - pi_expect) < 1e-13);
    CHECK(std::abs(eta.matrix(0, 1) - d_expect) < 1e-13);
  }
}

TEST_CASE("survival of the plus state") {
  auto survival_run = [](double g_dt, int n_steps) {
    CollisionModelSpec spec;
    spec.system = qubit_space();
    spec.ancilla = [](int) { return AncillaSpec{PureVector{ket0()}}; };
    spec.V = [&](int) { return xy_zz_coupling(g_dt, 0.0); };
    spec.dt = 1.0;
    return run(spec, pure_state(plus_state(), qubit_space()), n_steps);
  };
  ComplexVector plus = plus_state();

  for (double g_dt : {0.8 * M_PI, 0.1}) {
    auto records = survival_run(g_dt, 60);
    for (int n = 1; n <= 60; ++n) {
      const double surv =
          (plus.adjoint() * records[std::size_t(n - 1)].rho.matrix * plus)(0).real();
      CHECK(std::abs(surv - 0.5 * (1.0 + std::pow(std::cos(g_dt), n))) < 1e-12);
    }
  }

  // full swap angle: coherences flip sign forever, no steady state
  auto records = survival_run(M_PI, 40);
  for (int n = 1; n <= 40; ++n) {
    const double surv =
        (plus.adjoint() * records[std::size_t(n - 1)].rho.matrix * plus)(0).real();
    CHECK(std::abs(surv - (n % 2 == 0 ? 1.0 : 0.0)) < 1e-12);
  }
  CHECK_FALSE(detect_steady(records, 3, 1e-6).has_value());
}

TEST_CASE("isotropic coupling is a partial swap") {
  const double g = 0.45, dt = 0.9;
  ComplexMatrix u = build_unitary(ComplexMatrix::Zero(2, 2),
                                  ComplexMatrix::Zero(2, 2),
                                  xy_zz_coupling(g, g / 2.0), dt);
  ComplexMatrix expected =
      std::exp(I_UNIT * g * dt / 2.0) *
      (std::cos(g * dt) * ComplexMatrix::Identity(4, 4) -
       I_UNIT * std::sin(g * dt) * swap_operator(2));
  CHECK(max_abs(u - expected) < 1e-14);
}

TEST_CASE("homogenization toward the ancilla state") {
  const double g = 0.5, dt = 1.0;
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec{ThermalQubit{1.3, 1.0}}; };
  spec.V = [&](int) { return xy_zz_coupling(g, g / 2.0); };
  spec.dt = dt;

  DensityMatrix eta = ancilla_density(ThermalQubit{1.3, 1.0}, qubit_space());
  auto records = run(spec, pure_state(plus_state(), qubit_space()), 80);
  CHECK(trace_distance(records.back().rho.matrix, eta.matrix) < 1e-6);

  auto steady = detect_steady(records, 10, 1e-7);
  REQUIRE(steady.has_value());
  CHECK(trace_distance(steady->matrix, eta.matrix) < 1e-5);
  // no verdict from a window longer than the run
  CHECK_FALSE(detect_steady(records, 200, 1e-7).has_value());
}

TEST_CASE("thermal oscillator bath fixes the Gibbs qubit") {
  const double omega = 1.0, beta = 0.7, g = 0.6, dt = 0.5;
  const Eigen::Index d = 28;
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.H_S = omega * sigma_plus() * sigma_minus();
  spec.ancilla = [&](int) { return AncillaSpec{ThermalOscillator{beta, omega, d}}; };
  spec.H_n = [&](int) { return ComplexMatrix(omega * number_operator(d)); };
  spec.V = [&](int) {
    return ComplexMatrix(g * (kron(sigma_plus(), annihilation(d)) +
                              kron(sigma_minus(), annihilation(d).adjoint())));
  };
  spec.dt = dt;

  DensityMatrix gibbs = thermal_state(spec.H_S, beta, qubit_space());
  // exact fixed point, not merely approached: one collision does not move it
  auto one = run(spec, gibbs, 1);
  CHECK(trace_distance(one[0].rho.matrix, gibbs.matrix) < 1e-12);

  // and it attracts a far-away initial state
  auto records = run(spec, qubit_density({0.95, Complex(0.1, 0.05)}), 300);
  const double p_steady = std::exp(-beta * omega) / (1.0 + std::exp(-beta * omega));
  CHECK(std::abs(records.back().rho.matrix(0, 0).real() - p_steady) < 1e-9);
  CHECK(std::abs(records.back().rho.matrix(0, 1)) < 1e-9);
}

TEST_CASE("cascaded collisions hit the first subsystem unchanged") {
  const double g1 = 0.6, g2 = 0.45, dt = 0.7, omega = 0.9;
  TensorSpace sys({"S1", "S2"}, {2, 2});
  TensorSpace joint({"S1", "S2", "anc"}, {2, 2, 2});
  ComplexMatrix n_op = sigma_plus() * sigma_minus();

  ComplexMatrix v1 = embed_subset(
      g1 * (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus())),
      joint, {"S1", "anc"});
  ComplexMatrix v2 = embed_subset(
      g2 * (kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus())),
      joint, {"S2", "anc"});

  CollisionModelSpec spec;
  spec.system = sys;
  spec.H_S = omega * (embed(n_op, sys, "S1") + embed(n_op, sys, "S2"));
  spec.ancilla = [](int) { return AncillaSpec{PureVector{ket0()}}; };
  spec.H_n = [&](int) { return ComplexMatrix(omega * n_op); };
  spec.dt = dt;
  spec.variant = Cascaded{[&](int) { return v1; }, [&](int) { return v2; }};

  ComplexVector psi1(2), psi2(2);
  psi1 << 0.8, 0.6;
  psi2 << 0.6, Complex(0.0, 0.8);
  ComplexVector psi12 = kron(psi1, psi2);
  DensityMatrix rho0 = pure_state(psi12, sys);

  auto records = run(spec, rho0, 3);
  DensityMatrix s1 = records.back().rho.reduced({"S1"});
  DensityMatrix s2 = records.back().rho.reduced({"S2"});
  CHECK(std::abs(s1.matrix(0, 0).real() - kCascS1P) < 1e-13);
  CHECK(std::abs(s1.matrix(0, 1) - kCascS1C) < 1e-13);
  CHECK(std::abs(s2.matrix(0, 0).real() - kCascS2P) < 1e-13);
  CHECK(std::abs(s2.matrix(0, 1) - kCascS2C) < 1e-13);

  // the same first subsystem with the second deleted: both sub-collision
  // halves still tick, the second one just carries no coupling
  TensorSpace pair({"S1", "anc"}, {2, 2});
  ComplexMatrix h_free = kron(omega * n_op, ComplexMatrix::Identity(2, 2)) +
                         kron(ComplexMatrix::Identity(2, 2), omega * n_op);
  ComplexMatrix u1 = expm_unitary(
      h_free + g1 * (kron(sigma_plus(), sigma_minus()) +
                     kron(sigma_minus(), sigma_plus())), dt);
  ComplexMatrix u2 = expm_unitary(h_free, dt);
  DensityMatrix alone = pure_state(psi1, qubit_space("S1"));
  DensityMatrix eta0 = ancilla_density(PureVector{ket0()}, qubit_space("anc"));
  for (int n = 0; n < 3; ++n)
    alone = cascaded_step(alone, eta0, u1, u2).rho;
  CHECK(max_abs(alone.matrix - s1.matrix) < 1e-12);

  // reversing the sub-collision order is a different channel for S2
  CollisionModelSpec reversed = spec;
  reversed.variant = Cascaded{[&](int) { return v2; }, [&](int) { return v1; }};
  auto rev = run(reversed, rho0, 3);
  CHECK(trace_distance(rev.back().rho.reduced({"S2"}).matrix, s2.matrix) > 1e-6);
}

TEST_CASE("multi-bath step equals its dense assembly") {
  const double g1 = 0.3, g2 = 0.5, dt = 0.4, omega = 0.7;
  ComplexMatrix n_op = sigma_plus() * sigma_minus();
  ComplexMatrix xy = kron(sigma_plus(), sigma_minus()) + kron(sigma_minus(), sigma_plus());

  MultiBath mb;
  mb.baths.push_back({"b1",
                      [](int) { return AncillaSpec{PureVector{ket0()}}; },
                      [&](int) { return ComplexMatrix(omega * n_op); },
                      [&](int) { return ComplexMatrix(g1 * xy); }});
  mb.baths.push_back({"b2",
                      [&](int) { return AncillaSpec{ThermalQubit{1.1, omega}}; },
                      [&](int) { return ComplexMatrix(omega * n_op); },
                      [&](int) { return ComplexMatrix(g2 * xy); }});

  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.H_S = omega * n_op;
  spec.dt = dt;
  spec.variant = mb;

  DensityMatrix rho0 = qubit_density({0.8, Complex(0.15, -0.25)});
  auto records = run(spec, rho0, 2);

  // dense reference assembled by hand
  TensorSpace full({"S", "b1", "b2"}, {2, 2, 2});
  ComplexMatrix h = embed(omega * n_op, full, "S") + embed(omega * n_op, full, "b1") +
                    embed(omega * n_op, full, "b2") +
                    embed_subset(g1 * xy, full, {"S", "b1"}) +
                    embed_subset(g2 * xy, full, {"S", "b2"});
  ComplexMatrix u = expm_unitary(h, dt);
  ComplexMatrix eta1 = (ket0() * ket0().adjoint());
  ComplexMatrix eta2 = ancilla_density(ThermalQubit{1.1, omega}, qubit_space()).matrix;
  ComplexMatrix rho = rho0.matrix;
  for (int n = 0; n < 2; ++n) {
    ComplexMatrix joint = u * kron(kron(rho, eta1), eta2) * u.adjoint();
    rho = partial_trace(joint, full, {"S"});
  }
  CHECK(max_abs(records.back().rho.matrix - rho) < 1e-13);

  // explicitly supplying the product state as initial correlation changes nothing
  TensorSpace bath_pair({"b1", "b2"}, {2, 2});
  MultiBath with_product = mb;
  with_product.chi_corr = DensityMatrix::create(kron(eta1, eta2), bath_pair);
  CollisionModelSpec spec_prod = spec;
  spec_prod.variant = with_product;
  auto prod_records = run(spec_prod, rho0, 2);
  CHECK(max_abs(prod_records.back().rho.matrix - records.back().rho.matrix) < 1e-14);

  // a genuinely correlated bath pair is a different environment
  ComplexMatrix corr = ComplexMatrix::Zero(4, 4);
  corr(0, 0) = corr(3, 3) = 0.5;
  corr(0, 3) = corr(3, 0) = 0.3;
  MultiBath with_corr = mb;
  with_corr.chi_corr = DensityMatrix::create(corr, bath_pair);
  CollisionModelSpec spec_corr = spec;
  spec_corr.variant = with_corr;
  auto corr_records = run(spec_corr, rho0, 2);
  CHECK(trace_distance(corr_records.back().rho.matrix,
                       records.back().rho.matrix) > 1e-6);

  // mislabeled correlated state is rejected
  MultiBath bad = mb;
  bad.chi_corr = DensityMatrix::create(kron(eta1, eta2),
                                       TensorSpace({"x", "y"}, {2, 2}));
  CollisionModelSpec spec_bad = spec;
  spec_bad.variant = bad;
  CHECK_THROWS_WITH(run(spec_bad, rho0, 1),
                    "dimension mismatch: correlated bath state does not match the bath channels");
}

TEST_CASE("tensor chain matches dense evolution") {
  ComplexMatrix u = expm_unitary(pseudo_hermitian(4, 11), 0.6);
  ComplexVector psi0(2);
  psi0 << Complex(0.48, 0.36), Complex(0.64, -0.48);
  psi0.normalize();

  PureChainState chain = PureChainState::from_vector(psi0);
  std::vector<std::string> labels{"S"};
  std::vector<Eigen::Index> dims{2};
  ComplexVector dense = psi0;
  for (int m = 1; m <= 4; ++m) {
    chain = mps_evolve(chain, u);
    labels.push_back("a" + std::to_string(m));
    dims.push_back(2);
    TensorSpace space(labels, dims);
    ComplexVector grown(dense.size() * 2);
    for (Eigen::Index i = 0; i < dense.size(); ++i) {
      grown(2 * i) = dense(i);      // fresh ancilla in the first basis vector
      grown(2 * i + 1) = 0.0;
    }
    dense = embed_subset(u, space, {"S", labels.back()}) * grown;
  }
  CHECK(chain.steps() == 4);
  CHECK((mps_contract(chain) - dense).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(mps_norm(chain) == doctest::Approx(1.0).epsilon(1e-12));

  TensorSpace full(labels, dims);
  ComplexMatrix rho_dense =
      partial_trace(dense * dense.adjoint(), full, {"S"});
  CHECK(max_abs(mps_reduced_system(chain).matrix - rho_dense) < 1e-13);

  // mixed input has no chain representation
  DensityMatrix mixed = qubit_density({0.5, Complex(0.1, 0.0)});
  CHECK_THROWS_WITH(PureChainState::from_state(mixed), "MPS track requires pure states");
  CHECK_NOTHROW(PureChainState::from_state(pure_state(psi0, qubit_space())));

  // ancilla dimension cannot change once the chain has started
  ComplexMatrix u6 = expm_unitary(pseudo_hermitian(6, 2), 0.5);
  CHECK_THROWS_WITH(mps_evolve(chain, u6),
                    "dimension mismatch: ancilla dimension changed mid-chain");
}

TEST_CASE("engine validation") {
  CollisionModelSpec spec;
  spec.system = qubit_space();
  spec.ancilla = [](int) { return AncillaSpec{PureVector{ket0()}}; };
  spec.V = [](int) { return xy_zz_coupling(0.1, 0.0); };
  spec.dt = 0.0;
  DensityMatrix rho = qubit_density({0.5, 0.0});
  CHECK_THROWS_WITH(run(spec, rho, 1), "collision duration must be positive");

  spec.dt = 0.5;
  CollisionModelSpec no_v = spec;
  no_v.V = nullptr;
  CHECK_THROWS_WITH(run(no_v, rho, 1), "model has no coupling");

  CollisionModelSpec no_anc = spec;
  no_anc.ancilla = nullptr;
  CHECK_THROWS_WITH(run(no_anc, rho, 1), "model has no ancilla source");

  CollisionModelSpec bad_v = spec;
  bad_v.V = [](int) { return ComplexMatrix::Zero(3, 3); };
  CHECK_THROWS_WITH(run(bad_v, rho, 1),
                    "dimension mismatch: step operator does not fit its space");

  CollisionModelSpec bad_h = spec;
  bad_h.H_S = ComplexMatrix::Zero(3, 3);
  CHECK_THROWS_WITH(run(bad_h, rho, 1),
                    "dimension mismatch: system Hamiltonian does not fit the system space");

  CollisionModelSpec casc = spec;
  casc.variant = Cascaded{[](int) { return ComplexMatrix::Zero(4, 4); },
                          [](int) { return ComplexMatrix::Zero(4, 4); }};
  CHECK_THROWS_WITH(step_operators(casc, 1),
                    "cascaded models have no single per-step coupling");

  DensityMatrix eta = DensityMatrix::create(rho.matrix, qubit_space("anc"));
  CHECK_THROWS_WITH(collide::collide(rho, eta, ComplexMatrix::Identity(3, 3)),
                    "dimension mismatch: unitary does not fit rho ⊗ eta");
  CHECK_THROWS_WITH(detect_steady({}, 0, 1e-6), "window must be at least 1");
}

}  // TEST_SUITE
