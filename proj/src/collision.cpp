#include "collide/collision.hpp"

#include <stdexcept>

namespace collide {

namespace {

ComplexMatrix identity(Eigen::Index d) { return ComplexMatrix::Identity(d, d); }

ComplexMatrix or_zero(const std::function<ComplexMatrix(int)>& f, int n, Eigen::Index d) {
  if (!f) return ComplexMatrix::Zero(d, d);
  ComplexMatrix m = f(n);
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("dimension mismatch: step operator does not fit its space");
  return m;
}

// Free Hamiltonian H_S ⊗ I + I ⊗ H_n plus the coupling, all on the joint space.
ComplexMatrix joint_hamiltonian(const ComplexMatrix& H_S, const ComplexMatrix& H_n,
                                const ComplexMatrix& V) {
  const Eigen::Index d_S = H_S.rows();
  const Eigen::Index d_A = H_n.rows();
  if (V.rows() != d_S * d_A || V.cols() != d_S * d_A)
    throw std::invalid_argument("dimension mismatch: coupling does not fit the joint space");
  return kron(H_S, identity(d_A)) + kron(identity(d_S), H_n) + V;
}

}  // namespace

ComplexMatrix build_unitary(const ComplexMatrix& H_S, const ComplexMatrix& H_n,
                            const ComplexMatrix& V, double dt) {
  return expm_unitary(joint_hamiltonian(H_S, H_n, V), dt);
}

StepRecord collide(const DensityMatrix& rho, const DensityMatrix& eta,
                   const ComplexMatrix& U) {
  const TensorSpace joint = joint_space(rho.space, eta.space);
  if (U.rows() != joint.dim() || U.cols() != joint.dim())
    throw std::invalid_argument("dimension mismatch: unitary does not fit rho ⊗ eta");

  const ComplexMatrix evolved = U * kron(rho.matrix, eta.matrix) * U.adjoint();

  StepRecord rec;
  rec.joint = DensityMatrix::create(evolved, joint);
  rec.rho = rec.joint.reduced(rho.space.labels);
  rec.eta_out = rec.joint.reduced(eta.space.labels);
  return rec;
}

StepRecord cascaded_step(const DensityMatrix& rho_12, const DensityMatrix& eta,
                         const ComplexMatrix& U1, const ComplexMatrix& U2) {
  const Eigen::Index d = rho_12.dim() * eta.dim();
  if (U1.rows() != d || U1.cols() != d || U2.rows() != d || U2.cols() != d)
    throw std::invalid_argument("dimension mismatch: sub-collision unitaries must act on the joint space");
  return collide(rho_12, eta, ComplexMatrix(U2 * U1));
}

namespace {

// Joint ancilla space and initial state for one step of a multi-bath model.
std::pair<TensorSpace, DensityMatrix> multibath_ancilla(const MultiBath& mb, int n) {
  if (mb.baths.empty()) throw std::invalid_argument("multi-bath model needs at least one bath");
  TensorSpace anc_space;
  for (const auto& bath : mb.baths) {
    const TensorSpace one({bath.label}, {ancilla_dim(bath.ancilla(n))});
    anc_space = anc_space.size() == 0 ? one : joint_space(anc_space, one);
  }
  if (mb.chi_corr) {
    if (mb.chi_corr->space.labels != anc_space.labels || mb.chi_corr->space.dims != anc_space.dims)
      throw std::invalid_argument("dimension mismatch: correlated bath state does not match the bath channels");
    return {anc_space, *mb.chi_corr};
  }
  ComplexMatrix joint = ComplexMatrix::Identity(1, 1);
  for (const auto& bath : mb.baths) {
    const TensorSpace one({bath.label}, {ancilla_dim(bath.ancilla(n))});
    joint = kron(joint, ancilla_density(bath.ancilla(n), one).matrix);
  }
  return {anc_space, DensityMatrix::create(joint, anc_space)};
}

}  // namespace

std::vector<StepRecord> run(const CollisionModelSpec& spec, const DensityMatrix& rho0,
                            int n_steps) {
  if (spec.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  const Eigen::Index d_S = spec.system.dim();
  if (rho0.dim() != d_S)
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");

  std::vector<StepRecord> records;
  records.reserve(std::size_t(n_steps));
  DensityMatrix rho = rho0;

  for (int n = 1; n <= n_steps; ++n) {
    StepRecord rec;
    if (const auto* casc = std::get_if<Cascaded>(&spec.variant)) {
      const ComplexMatrix H_S =
          spec.H_S.size() == 0 ? ComplexMatrix::Zero(d_S, d_S) : spec.H_S;
      if (!spec.ancilla) throw std::invalid_argument("model has no ancilla source");
      const AncillaSpec anc = spec.ancilla(n);
      const TensorSpace anc_space({"anc"}, {ancilla_dim(anc)});
      const DensityMatrix eta = ancilla_density(anc, anc_space);
      const ComplexMatrix H_n = or_zero(spec.H_n, n, anc_space.dim());
      const Eigen::Index d_J = d_S * anc_space.dim();

      if (!casc->V1 || !casc->V2)
        throw std::invalid_argument("cascaded model needs both sub-collision couplings");
      // Each sub-collision lasts dt, so one full collision advances 2*dt and
      // the free parts act in both halves.
      const ComplexMatrix H_free = joint_hamiltonian(H_S, H_n, ComplexMatrix::Zero(d_J, d_J));
      const ComplexMatrix U1 = expm_unitary(H_free + or_zero(casc->V1, n, d_J), spec.dt);
      const ComplexMatrix U2 = expm_unitary(H_free + or_zero(casc->V2, n, d_J), spec.dt);
      rec = cascaded_step(rho, eta, U1, U2);
    } else {
      const StepOperators ops = step_operators(spec, n);
      rec = collide(rho, ops.eta, expm_unitary(ops.total_hamiltonian(), spec.dt));
    }
    rec.index = n;
    rho = rec.rho;
    records.push_back(std::move(rec));
  }
  return records;
}

StepOperators step_operators(const CollisionModelSpec& spec, int n,
                             const ComplexMatrix* H_S_override) {
  const Eigen::Index d_S = spec.system.dim();
  ComplexMatrix H_S = H_S_override ? *H_S_override : spec.H_S;
  if (H_S.size() == 0) H_S = ComplexMatrix::Zero(d_S, d_S);
  if (H_S.rows() != d_S || H_S.cols() != d_S)
    throw std::invalid_argument("dimension mismatch: system Hamiltonian does not fit the system space");

  StepOperators ops;
  if (const auto* mb = std::get_if<MultiBath>(&spec.variant)) {
    auto [anc_space, eta] = multibath_ancilla(*mb, n);
    ops.anc_space = anc_space;
    ops.eta = std::move(eta);
    ops.joint = joint_space(spec.system, ops.anc_space);
    ops.H_sys = embed_subset(H_S, ops.joint, spec.system.labels);
    ops.H_anc = ComplexMatrix::Zero(ops.joint.dim(), ops.joint.dim());
    ops.V = ops.H_anc;
    for (const auto& bath : mb->baths) {
      const Eigen::Index d_b = ancilla_dim(bath.ancilla(n));
      ComplexMatrix H_b = or_zero(bath.H_n, n, d_b);
      ops.H_anc += embed(H_b, ops.joint, bath.label);
      std::vector<std::string> pair_labels = spec.system.labels;
      pair_labels.push_back(bath.label);
      ops.V += embed_subset(or_zero(bath.V, n, d_S * d_b), ops.joint, pair_labels);
      ops.bath_labels.push_back(bath.label);
      ops.bath_hamiltonians.push_back(std::move(H_b));
    }
    return ops;
  }
  if (std::holds_alternative<Cascaded>(spec.variant))
    throw std::invalid_argument("cascaded models have no single per-step coupling");

  if (!spec.ancilla) throw std::invalid_argument("model has no ancilla source");
  if (!spec.V) throw std::invalid_argument("model has no coupling");
  const AncillaSpec anc = spec.ancilla(n);
  ops.anc_space = TensorSpace({"anc"}, {ancilla_dim(anc)});
  ops.eta = ancilla_density(anc, ops.anc_space);
  ops.joint = joint_space(spec.system, ops.anc_space);
  const Eigen::Index d_A = ops.anc_space.dim();
  ComplexMatrix H_n = or_zero(spec.H_n, n, d_A);
  ops.H_sys = kron(H_S, ComplexMatrix::Identity(d_A, d_A));
  ops.H_anc = kron(ComplexMatrix::Identity(d_S, d_S), H_n);
  ops.V = or_zero(spec.V, n, d_S * d_A);
  ops.bath_labels = {"anc"};
  ops.bath_hamiltonians = {std::move(H_n)};
  return ops;
}

std::optional<DensityMatrix> detect_steady(const std::vector<StepRecord>& records,
                                           int window, double tol) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  int streak = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (trace_distance(records[i].rho.matrix, records[i - 1].rho.matrix) < tol) {
      if (++streak >= window) return records[i].rho;
    } else {
      streak = 0;
    }
  }
  return std::nullopt;
}

std::vector<ComplexMatrix> kraus_from_unitary(const ComplexMatrix& U,
                                              Eigen::Index d_sys,
                                              const ComplexVector& chi) {
  if (d_sys < 1 || U.rows() % d_sys != 0)
    throw std::invalid_argument("dimension mismatch: unitary is not system ⊗ ancilla");
  const Eigen::Index d_A = U.rows() / d_sys;
  if (chi.size() != d_A)
    throw std::invalid_argument("dimension mismatch: ancilla vector does not fit");

  std::vector<ComplexMatrix> kraus(std::size_t(d_A), ComplexMatrix::Zero(d_sys, d_sys));
  for (Eigen::Index k = 0; k < d_A; ++k)
    for (Eigen::Index a_out = 0; a_out < d_sys; ++a_out)
      for (Eigen::Index a_in = 0; a_in < d_sys; ++a_in) {
        Complex sum = 0.0;
        for (Eigen::Index j = 0; j < d_A; ++j)
          sum += U(a_out * d_A + k, a_in * d_A + j) * chi(j);
        kraus[std::size_t(k)](a_out, a_in) = sum;
      }
  return kraus;
}

// --- tensor chains -----------------------------------------------------------

PureChainState PureChainState::from_vector(ComplexVector psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("zero vector is not a state");
  PureChainState chain;
  chain.psi0 = psi / norm;
  return chain;
}

PureChainState PureChainState::from_state(const DensityMatrix& rho) {
  const double purity = (rho.matrix * rho.matrix).trace().real();
  if (std::abs(purity - 1.0) > 1e-10)
    throw std::invalid_argument("MPS track requires pure states");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix);
  Eigen::Index top;
  es.eigenvalues().maxCoeff(&top);
  return from_vector(es.eigenvectors().col(top));
}

PureChainState mps_evolve(PureChainState chain, const ComplexMatrix& U) {
  const Eigen::Index d_S = chain.d_sys();
  if (d_S == 0) throw std::invalid_argument("MPS track requires pure states");
  if (U.rows() != U.cols() || U.rows() % d_S != 0)
    throw std::invalid_argument("dimension mismatch: unitary is not system ⊗ ancilla");
  const Eigen::Index d_A = U.rows() / d_S;
  if (chain.steps() > 0 && d_A != chain.d_anc())
    throw std::invalid_argument("dimension mismatch: ancilla dimension changed mid-chain");

  // T[k](a, a') = <a', k| U |a, first ancilla basis vector>.
  std::vector<ComplexMatrix> T(std::size_t(d_A), ComplexMatrix(d_S, d_S));
  for (Eigen::Index k = 0; k < d_A; ++k)
    for (Eigen::Index a = 0; a < d_S; ++a)
      for (Eigen::Index a_out = 0; a_out < d_S; ++a_out)
        T[std::size_t(k)](a, a_out) = U(a_out * d_A + k, a * d_A);

  if (chain.leading.size() == 0) {
    // Absorb psi0 into the first tensor: L(a1, k) = sum_a psi0(a) T[k](a, a1).
    chain.leading = ComplexMatrix(d_S, d_A);
    for (Eigen::Index k = 0; k < d_A; ++k)
      chain.leading.col(k) = T[std::size_t(k)].transpose() * chain.psi0;
  } else {
    chain.tensors.push_back(std::move(T));
  }
  return chain;
}

namespace {

// Walk every ancilla outcome string, carrying the partially contracted row
// vector, and hand (flat outcome index, amplitude row) to the sink.
template <typename Sink>
void for_each_outcome(const PureChainState& chain, Sink&& sink) {
  const Eigen::Index d_A = chain.d_anc();
  std::function<void(std::size_t, Eigen::Index, const Eigen::RowVectorXcd&)> walk =
      [&](std::size_t depth, Eigen::Index flat, const Eigen::RowVectorXcd& v) {
        if (depth == chain.tensors.size()) {
          sink(flat, v);
          return;
        }
        for (Eigen::Index k = 0; k < d_A; ++k)
          walk(depth + 1, flat * d_A + k,
               Eigen::RowVectorXcd(v * chain.tensors[depth][std::size_t(k)]));
      };
  for (Eigen::Index k = 0; k < d_A; ++k)
    walk(0, k, chain.leading.col(k).transpose());
}

}  // namespace

ComplexVector mps_contract(const PureChainState& chain) {
  if (chain.steps() == 0) return chain.psi0;
  const Eigen::Index d_S = chain.d_sys();
  Eigen::Index outcomes = 1;
  for (int m = 0; m < chain.steps(); ++m) {
    outcomes *= chain.d_anc();
    if (outcomes * d_S > kDimensionCap) throw std::invalid_argument("space too large");
  }
  ComplexVector out = ComplexVector::Zero(d_S * outcomes);
  for_each_outcome(chain, [&](Eigen::Index flat, const Eigen::RowVectorXcd& v) {
    for (Eigen::Index a = 0; a < d_S; ++a) out(a * outcomes + flat) = v(a);
  });
  return out;
}

DensityMatrix mps_reduced_system(const PureChainState& chain) {
  const Eigen::Index d_S = chain.d_sys();
  const TensorSpace space({"S"}, {d_S});
  if (chain.steps() == 0)
    return DensityMatrix::create(ComplexMatrix(chain.psi0 * chain.psi0.adjoint()), space);
  ComplexMatrix rho = ComplexMatrix::Zero(d_S, d_S);
  for_each_outcome(chain, [&](Eigen::Index, const Eigen::RowVectorXcd& v) {
    rho += v.transpose() * v.conjugate();
  });
  return DensityMatrix::create_renormalized(rho, space);
}

double mps_norm(const PureChainState& chain) {
  if (chain.steps() == 0) return chain.psi0.norm();
  double sum = 0.0;
  for_each_outcome(chain, [&](Eigen::Index, const Eigen::RowVectorXcd& v) {
    sum += v.squaredNorm();
  });
  return std::sqrt(sum);
}

}  // namespace collide
