#include "collide/nonmarkov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace collide {

namespace {

ComplexMatrix step_matrix(const std::function<ComplexMatrix(int)>& f, int n,
                          Eigen::Index d) {
  if (!f) return ComplexMatrix::Zero(d, d);
  ComplexMatrix m = f(n);
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("dimension mismatch: step operator does not fit its space");
  return m;
}

// The unitary applied to (previous ancilla, fresh ancilla) in the modes that
// have one. The incoherent mode is a map, not a unitary, and is handled where
// the state is at hand.
ComplexMatrix pair_unitary(const AASpec& spec, Eigen::Index d_A) {
  const Eigen::Index d2 = d_A * d_A;
  if (spec.mode == AAMode::GeneralPairUnitary) {
    if (spec.W.rows() != d2 || spec.W.cols() != d2)
      throw std::invalid_argument("dimension mismatch: pair unitary does not fit two ancillas");
    if (max_abs(ComplexMatrix(spec.W.adjoint() * spec.W -
                              ComplexMatrix::Identity(d2, d2))) > 1e-10)
      throw std::invalid_argument("pair operator must be unitary");
    return spec.W;
  }
  const double theta = std::asin(std::sqrt(spec.p));
  return std::cos(theta) * ComplexMatrix::Identity(d2, d2) -
         I_UNIT * std::sin(theta) * swap_operator(d_A);
}

}  // namespace

std::vector<DensityMatrix> run_aa(const AASpec& spec, const DensityMatrix& rho0,
                                  int n_steps, int window) {
  const CollisionModelSpec& base = spec.base;
  if (!std::holds_alternative<Basic>(base.variant))
    throw std::invalid_argument("ancilla-ancilla chains require a basic model");
  if (base.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
  if (spec.p < 0.0 || spec.p > 1.0)
    throw std::invalid_argument("swap probability must lie in [0, 1]");
  if (!base.ancilla) throw std::invalid_argument("model has no ancilla source");
  if (!base.V) throw std::invalid_argument("model has no coupling");
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  if (window < 0) throw std::invalid_argument("retained window must be positive when given");
  const Eigen::Index d_S = base.system.dim();
  if (rho0.dim() != d_S)
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");

  const Eigen::Index d_A = ancilla_dim(base.ancilla(1));
  const ComplexMatrix H_S =
      base.H_S.size() == 0 ? ComplexMatrix::Zero(d_S, d_S) : base.H_S;
  // An explicit pair unitary is validated up front; the built-in pair
  // operators are d_A^2-dimensional and are only constructed once the cap
  // check has cleared, so an oversized request fails before allocating them.
  ComplexMatrix W =
      spec.mode == AAMode::GeneralPairUnitary ? pair_unitary(spec, d_A) : ComplexMatrix();
  ComplexMatrix S_pair;

  std::vector<DensityMatrix> traj;
  traj.reserve(std::size_t(n_steps) + 1);
  traj.push_back(rho0);

  DensityMatrix tau = DensityMatrix::create(rho0.matrix, base.system);
  std::vector<std::string> retained;  // ancilla labels, oldest first

  for (int n = 1; n <= n_steps; ++n) {
    if (ancilla_dim(base.ancilla(n)) != d_A)
      throw std::invalid_argument("ancilla-ancilla chains require a fixed ancilla dimension");
    if (tau.dim() * d_A > kDimensionCap)
      throw std::invalid_argument("joint chain too large; request a retained window");

    const std::string label = "a" + std::to_string(n);
    const TensorSpace anc_space({label}, {d_A});
    const DensityMatrix eta = ancilla_density(base.ancilla(n), anc_space);
    const TensorSpace grown = joint_space(tau.space, anc_space);
    ComplexMatrix state = kron(tau.matrix, eta.matrix);

    if (n >= 2) {
      const std::vector<std::string> pair = {retained.back(), label};
      if (spec.mode == AAMode::IncoherentSwapMap) {
        if (S_pair.size() == 0) S_pair = swap_operator(d_A);
        const ComplexMatrix S_emb = embed_subset(S_pair, grown, pair);
        state = (1.0 - spec.p) * state + spec.p * ComplexMatrix(S_emb * state * S_emb);
      } else {
        if (W.size() == 0) W = pair_unitary(spec, d_A);
        const ComplexMatrix W_emb = embed_subset(W, grown, pair);
        state = W_emb * state * W_emb.adjoint();
      }
    }

    std::vector<std::string> sys_anc = base.system.labels;
    sys_anc.push_back(label);
    const ComplexMatrix U = build_unitary(H_S, step_matrix(base.H_n, n, d_A),
                                          step_matrix(base.V, n, d_S * d_A), base.dt);
    const ComplexMatrix U_emb = embed_subset(U, grown, sys_anc);
    state = U_emb * state * U_emb.adjoint();

    tau = DensityMatrix::create(std::move(state), grown);
    retained.push_back(label);
    if (window > 0 && int(retained.size()) > window) {
      std::vector<std::string> keep = base.system.labels;
      keep.insert(keep.end(), retained.begin() + 1, retained.end());
      tau = tau.reduced(keep);
      retained.erase(retained.begin());
    }
    traj.push_back(tau.reduced(base.system.labels));
  }
  return traj;
}

std::vector<DensityMatrix> memory_kernel_recursion(const ComplexMatrix& U1,
                                                   const DensityMatrix& eta, double p,
                                                   const DensityMatrix& rho0,
                                                   int n_steps) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("swap probability must lie in [0, 1]");
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  const Eigen::Index d_J = rho0.dim() * eta.dim();
  if (U1.rows() != d_J || U1.cols() != d_J)
    throw std::invalid_argument("dimension mismatch: unitary does not fit rho ⊗ eta");

  const TensorSpace joint = joint_space(rho0.space, eta.space);

  // U1^j for j = 1..n; each F_j reuses one ancilla j times before tracing.
  std::vector<ComplexMatrix> powers;
  powers.reserve(std::size_t(n_steps));
  ComplexMatrix acc = ComplexMatrix::Identity(d_J, d_J);
  for (int j = 1; j <= n_steps; ++j) {
    acc = U1 * acc;
    powers.push_back(acc);
  }
  const auto F = [&](int j, const ComplexMatrix& X) {
    const ComplexMatrix& Uj = powers[std::size_t(j - 1)];
    return partial_trace(ComplexMatrix(Uj * kron(X, eta.matrix) * Uj.adjoint()),
                         joint, rho0.space.labels);
  };

  std::vector<DensityMatrix> traj{rho0};
  const double q = 1.0 - p;
  for (int n = 1; n <= n_steps; ++n) {
    ComplexMatrix sum = ComplexMatrix::Zero(rho0.dim(), rho0.dim());
    double weight = q;  // q p^{j-1}
    for (int j = 1; j <= n - 1; ++j) {
      sum += weight * F(j, traj[std::size_t(n - j)].matrix);
      weight *= p;
    }
    sum += std::pow(p, n - 1) * F(n, rho0.matrix);
    traj.push_back(DensityMatrix::create(std::move(sum), rho0.space));
  }
  return traj;
}

std::vector<KernelSample> memory_kernel_me(double Gamma, const CollisionMapFamily& family,
                                           const DensityMatrix& rho0, double t_max,
                                           double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (t_max < 0.0) throw std::invalid_argument("t_max must be nonnegative");
  if (Gamma < 0.0) throw std::invalid_argument("memory rate must be nonnegative");
  const Eigen::Index d_S = family.system.dim();
  const Eigen::Index d_J = d_S * family.eta.dim();
  if (rho0.dim() != d_S)
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");
  if (family.H1.rows() != d_J || family.H1.cols() != d_J)
    throw std::invalid_argument("dimension mismatch: joint Hamiltonian does not fit system ⊗ ancilla");
  if (!is_hermitian(family.H1)) throw std::invalid_argument("not Hermitian");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(family.H1);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const double fastest =
      std::max(Gamma, d_J > 0 ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0);
  if (fastest * dt > 0.5) throw std::invalid_argument("step too coarse");

  const TensorSpace joint = joint_space(family.system, family.eta.space);
  const ComplexMatrix& P = es.eigenvectors();
  const auto U_at = [&](double t) {
    ComplexVector phases(d_J);
    for (Eigen::Index i = 0; i < d_J; ++i)
      phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * t));
    return ComplexMatrix(P * phases.asDiagonal() * P.adjoint());
  };

  const int N = int(std::llround(t_max / dt));
  const Eigen::Index d2 = d_S * d_S;

  // F(t_k) as superoperators over the column-major matrix units, plus the
  // propagators themselves for the inhomogeneous term.
  std::vector<Eigen::MatrixXcd> Fsuper(std::size_t(N) + 1);
  std::vector<ComplexMatrix> Us(std::size_t(N) + 1);
  for (int k = 0; k <= N; ++k) {
    const ComplexMatrix U = U_at(k * dt);
    Eigen::MatrixXcd S(d2, d2);
    for (Eigen::Index c = 0; c < d_S; ++c)
      for (Eigen::Index r = 0; r < d_S; ++r) {
        ComplexMatrix unit = ComplexMatrix::Zero(d_S, d_S);
        unit(r, c) = 1.0;
        const ComplexMatrix mapped = partial_trace(
            ComplexMatrix(U * kron(unit, family.eta.matrix) * U.adjoint()), joint,
            family.system.labels);
        S.col(c * d_S + r) = Eigen::Map<const ComplexVector>(mapped.data(), d2);
      }
    Fsuper[std::size_t(k)] = std::move(S);
    Us[std::size_t(k)] = U;
  }

  // Fdot(t_k)[rho0] = Tr_anc{-i [H1, U (rho0 ⊗ eta) U†]}.
  const auto family_derivative = [&](int k) {
    const ComplexMatrix M =
        Us[std::size_t(k)] * kron(rho0.matrix, family.eta.matrix) *
        Us[std::size_t(k)].adjoint();
    return partial_trace(ComplexMatrix(-I_UNIT * (family.H1 * M - M * family.H1)),
                         joint, family.system.labels);
  };

  // The derivative history is the unknown; the j = 0 endpoint of the
  // trapezoidal sum involves rhodot(t_k) itself and is moved to the left side.
  std::vector<ComplexVector> rdot;
  rdot.reserve(std::size_t(N) + 1);
  {
    const ComplexMatrix first = family_derivative(0);
    rdot.push_back(Eigen::Map<const ComplexVector>(first.data(), d2));
  }

  std::vector<KernelSample> samples;
  samples.reserve(std::size_t(N) + 1);
  samples.push_back({0.0, rho0.matrix});
  ComplexMatrix rho = rho0.matrix;

  for (int k = 1; k <= N; ++k) {
    const ComplexMatrix inhom = family_derivative(k);
    ComplexVector rhs =
        std::exp(-Gamma * k * dt) * Eigen::Map<const ComplexVector>(inhom.data(), d2);
    if (Gamma > 0.0) {
      ComplexVector hist = ComplexVector::Zero(d2);
      for (int j = 1; j < k; ++j)
        hist += std::exp(-Gamma * j * dt) *
                (Fsuper[std::size_t(j)] * rdot[std::size_t(k - j)]);
      hist *= dt;
      hist += 0.5 * dt * std::exp(-Gamma * k * dt) * (Fsuper[std::size_t(k)] * rdot[0]);
      rhs += Gamma * hist;
      rhs /= 1.0 - 0.5 * Gamma * dt;
    }
    rdot.push_back(rhs);

    const ComplexVector drho = 0.5 * dt * (rdot[std::size_t(k - 1)] + rdot[std::size_t(k)]);
    rho += Eigen::Map<const ComplexMatrix>(drho.data(), d_S, d_S);
    samples.push_back({k * dt, rho});
  }
  return samples;
}

std::vector<DensityMatrix> mixture_dynamics(const MixtureSpec& mixture,
                                            const CollisionModelSpec& base,
                                            const DensityMatrix& rho0, int n_steps) {
  if (mixture.components.empty())
    throw std::invalid_argument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& comp : mixture.components) {
    if (comp.weight < 0.0)
      throw std::invalid_argument("mixture weights must be nonnegative");
    total += comp.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to one");
  if (n_steps < 0) throw std::invalid_argument("negative step count");

  std::vector<ComplexMatrix> acc(std::size_t(n_steps) + 1,
                                 ComplexMatrix::Zero(rho0.dim(), rho0.dim()));
  for (const auto& comp : mixture.components) {
    CollisionModelSpec branch = base;
    if (comp.ancilla) branch.ancilla = comp.ancilla;
    const std::vector<StepRecord> records = run(branch, rho0, n_steps);
    acc[0] += comp.weight * rho0.matrix;
    for (int n = 1; n <= n_steps; ++n)
      acc[std::size_t(n)] += comp.weight * records[std::size_t(n - 1)].rho.matrix;
  }

  std::vector<DensityMatrix> traj;
  traj.reserve(acc.size());
  for (ComplexMatrix& m : acc)
    traj.push_back(DensityMatrix::create(std::move(m), rho0.space));
  return traj;
}

std::vector<Complex> delayed_emission(const DelaySpec& spec, int n_max) {
  if (spec.gamma <= 0.0 || spec.dt <= 0.0)
    throw std::invalid_argument("rate and collision duration must be positive");
  if (spec.d < 1) throw std::invalid_argument("delay must be at least one collision");
  if (spec.gamma * spec.dt > 0.1)
    throw std::invalid_argument("gamma*dt too large for the second-order expansion");
  if (n_max < 0) throw std::invalid_argument("negative step count");

  const double gdt = spec.gamma * spec.dt;
  const Complex feedback = gdt * std::exp(Complex(0.0, spec.phi));
  std::vector<Complex> alpha(std::size_t(n_max) + 1);
  alpha[0] = 1.0;
  for (int n = 0; n < n_max; ++n) {
    Complex next = (1.0 - gdt) * alpha[std::size_t(n)];
    if (n >= spec.d) next -= feedback * alpha[std::size_t(n - spec.d)];
    alpha[std::size_t(n) + 1] = next;
  }
  return alpha;
}

CompositeAmplitudes composite_recurrence(const CompositeSpec& spec, int n_max) {
  if (spec.G < 0.0 || spec.g < 0.0)
    throw std::invalid_argument("exchange rates must be nonnegative");
  if (spec.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
  if (n_max < 0) throw std::invalid_argument("negative step count");

  const double c = std::cos(spec.g * spec.dt);
  const double C = std::cos(spec.G * spec.dt);
  const double S = std::sin(spec.G * spec.dt);

  CompositeAmplitudes out;
  out.alpha.reserve(std::size_t(n_max) + 1);
  out.beta.reserve(std::size_t(n_max) + 1);
  Complex a = 1.0;
  Complex b = 0.0;
  out.alpha.push_back(a);
  out.beta.push_back(b);
  for (int n = 0; n < n_max; ++n) {
    const Complex a_next = C * a - I_UNIT * (c * S) * b;
    const Complex b_next = -I_UNIT * S * a + (c * C) * b;
    a = a_next;
    b = b_next;
    out.alpha.push_back(a);
    out.beta.push_back(b);
  }
  return out;
}

Complex composite_envelope(double G, double gamma, double t) {
  const Complex delta = std::sqrt(Complex(4.0 * G * G - gamma * gamma / 4.0, 0.0));
  const Complex half = 0.5 * delta * t;
  Complex trig = std::cos(half);
  if (std::abs(delta) > 1e-12) {
    trig += (gamma / (2.0 * delta)) * std::sin(half);
  } else {
    trig += gamma * t / 4.0;  // critically damped limit of (gamma/2delta) sin
  }
  return std::exp(-gamma * t / 4.0) * trig;
}

std::vector<DensityMatrix> composite_map_run(const ComplexMatrix& U_SM,
                                             const ComplexMatrix& U_Mn,
                                             const DensityMatrix& eta_M,
                                             const DensityMatrix& eta,
                                             const DensityMatrix& rho0, int n_steps) {
  const Eigen::Index d_S = rho0.dim();
  const Eigen::Index d_M = eta_M.dim();
  const Eigen::Index d_A = eta.dim();
  if (U_SM.rows() != d_S * d_M || U_SM.cols() != d_S * d_M)
    throw std::invalid_argument("dimension mismatch: unitary does not fit system ⊗ memory");
  if (U_Mn.rows() != d_M * d_A || U_Mn.cols() != d_M * d_A)
    throw std::invalid_argument("dimension mismatch: unitary does not fit memory ⊗ ancilla");
  if (n_steps < 0) throw std::invalid_argument("negative step count");

  const TensorSpace sm = joint_space(rho0.space, eta_M.space);
  const TensorSpace full = joint_space(sm, eta.space);
  std::vector<std::string> mem_anc = eta_M.space.labels;
  mem_anc.insert(mem_anc.end(), eta.space.labels.begin(), eta.space.labels.end());
  const ComplexMatrix U_Mn_emb = embed_subset(U_Mn, full, mem_anc);

  std::vector<DensityMatrix> traj;
  traj.reserve(std::size_t(n_steps) + 1);
  traj.push_back(rho0);

  DensityMatrix tau = DensityMatrix::create(kron(rho0.matrix, eta_M.matrix), sm);
  for (int n = 1; n <= n_steps; ++n) {
    ComplexMatrix state = U_SM * tau.matrix * U_SM.adjoint();
    state = kron(state, eta.matrix);
    state = U_Mn_emb * state * U_Mn_emb.adjoint();
    tau = DensityMatrix::create(std::move(state), full).reduced(sm.labels);
    traj.push_back(tau.reduced(rho0.space.labels));
  }
  return traj;
}

}  // namespace collide
