#include "collide/trajectories.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace collide {

namespace {

// splitmix64 finalizer; the standard constant is the golden-ratio increment.
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t counter) {
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ mix64(trajectory + kGolden));
  k = mix64(k ^ mix64(counter + kGolden));
  // 53 high bits -> [0, 1) with full double resolution.
  return double(k >> 11) * 0x1.0p-53;
}

}  // namespace

double StepRng::next() { return keyed_uniform(seed, trajectory, counter++); }

double StepRng::at(std::uint64_t counter_value) const {
  return keyed_uniform(seed, trajectory, counter_value);
}

MeasurementBasis MeasurementBasis::create(std::vector<ComplexVector> kets) {
  if (kets.empty()) throw std::invalid_argument("basis incomplete");
  const Eigen::Index d = kets.front().size();
  if (Eigen::Index(kets.size()) != d) throw std::invalid_argument("basis incomplete");
  for (const auto& ket : kets)
    if (ket.size() != d) throw std::invalid_argument("basis incomplete");
  for (std::size_t i = 0; i < kets.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex g = kets[i].dot(kets[j]);  // <i|j>
      const Complex want = i == j ? Complex(1.0) : Complex(0.0);
      if (std::abs(g - want) > 1e-12)
        throw std::invalid_argument("basis not orthonormal");
    }
  MeasurementBasis basis;
  basis.kets = std::move(kets);
  return basis;
}

std::vector<ComplexMatrix> conditional_kraus(const ComplexMatrix& U,
                                             const ComplexVector& chi,
                                             const MeasurementBasis& basis) {
  const Eigen::Index d_A = chi.size();
  if (d_A == 0 || U.rows() != U.cols() || U.rows() % d_A != 0)
    throw std::invalid_argument("dimension mismatch: unitary is not system ⊗ ancilla");
  if (basis.dim() != d_A || Eigen::Index(basis.kets.size()) != d_A)
    throw std::invalid_argument("basis incomplete");
  if (std::abs(chi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("ancilla vector not normalized");

  const Eigen::Index d_S = U.rows() / d_A;
  std::vector<ComplexMatrix> kraus(std::size_t(d_A), ComplexMatrix(d_S, d_S));
  for (Eigen::Index k = 0; k < d_A; ++k)
    for (Eigen::Index a = 0; a < d_S; ++a)
      for (Eigen::Index b = 0; b < d_S; ++b) {
        Complex sum = 0.0;
        for (Eigen::Index i = 0; i < d_A; ++i)
          for (Eigen::Index j = 0; j < d_A; ++j)
            sum += std::conj(basis.kets[std::size_t(k)](i)) * U(a * d_A + i, b * d_A + j) *
                   chi(j);
        kraus[std::size_t(k)](a, b) = sum;
      }
  return kraus;
}

namespace {

// Shared inverse-CDF walk over outcome probabilities.
int sample_outcome(const std::vector<double>& p, StepRng& rng) {
  double total = 0.0;
  for (double v : p) total += v;
  if (total <= 1e-15) throw std::runtime_error("state annihilated");

  const double u = rng.next() * total;
  double cum = 0.0;
  int last_live = -1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    cum += p[k];
    last_live = int(k);
    if (u <= cum) return int(k);  // boundary hits resolve to the lower index
  }
  return last_live;
}

}  // namespace

PovmOutcome povm_step(const ComplexVector& psi, const std::vector<ComplexMatrix>& kraus,
                      StepRng& rng) {
  std::vector<double> p(kraus.size(), 0.0);
  std::vector<ComplexVector> branches(kraus.size());
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    branches[k] = kraus[k] * psi;
    p[k] = branches[k].squaredNorm();
  }
  const int k = sample_outcome(p, rng);
  PovmOutcome out;
  out.k = k;
  out.probability = p[std::size_t(k)];
  out.psi = branches[std::size_t(k)] / std::sqrt(p[std::size_t(k)]);
  return out;
}

PovmOutcomeMixed povm_step(const DensityMatrix& rho,
                           const std::vector<ComplexMatrix>& kraus, StepRng& rng) {
  std::vector<double> p(kraus.size(), 0.0);
  std::vector<ComplexMatrix> branches(kraus.size());
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    branches[k] = kraus[k] * rho.matrix * kraus[k].adjoint();
    p[k] = branches[k].trace().real();
  }
  const int k = sample_outcome(p, rng);
  PovmOutcomeMixed out;
  out.k = k;
  out.probability = p[std::size_t(k)];
  out.rho = DensityMatrix::create_renormalized(branches[std::size_t(k)], rho.space);
  return out;
}

namespace {

ComplexVector pure_ancilla_vector(const AncillaSpec& spec) {
  if (const auto* pv = std::get_if<PureVector>(&spec)) {
    const double norm = pv->amplitudes.norm();
    if (norm == 0.0) throw std::invalid_argument("zero vector is not a state");
    return pv->amplitudes / norm;
  }
  const TensorSpace space({"anc"}, {ancilla_dim(spec)});
  const DensityMatrix eta = ancilla_density(spec, space);
  const double purity = (eta.matrix * eta.matrix).trace().real();
  if (std::abs(purity - 1.0) > 1e-10)
    throw std::invalid_argument("trajectory unraveling requires pure ancillas");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(eta.matrix);
  Eigen::Index top;
  es.eigenvalues().maxCoeff(&top);
  return es.eigenvectors().col(top);
}

int nearest_basis_index(const MeasurementBasis& basis, const ComplexVector& chi) {
  int best = 0;
  double best_overlap = -1.0;
  for (std::size_t k = 0; k < basis.kets.size(); ++k) {
    const double overlap = std::norm(basis.kets[k].dot(chi));
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = int(k);
    }
  }
  return best;
}

// Per-step conditional Kraus family for a Basic model, reusing the previous
// step's unitary when the generators repeat (the homogeneous fast path).
struct KrausBuilder {
  const CollisionModelSpec& spec;
  ComplexMatrix last_H;
  ComplexMatrix last_U;
  ComplexVector chi;
  int chi_index = -1;

  explicit KrausBuilder(const CollisionModelSpec& s) : spec(s) {
    if (!std::holds_alternative<Basic>(s.variant))
      throw std::invalid_argument("trajectory unraveling requires a basic model");
    if (s.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
    if (!s.ancilla || !s.V) throw std::invalid_argument("model has no coupling");
  }

  std::vector<ComplexMatrix> kraus_for(int n, const MeasurementBasis& basis) {
    const AncillaSpec anc = spec.ancilla(n);
    chi = pure_ancilla_vector(anc);
    const Eigen::Index d_S = spec.system.dim();
    const Eigen::Index d_A = chi.size();
    const ComplexMatrix H_S =
        spec.H_S.size() == 0 ? ComplexMatrix::Zero(d_S, d_S) : spec.H_S;
    const ComplexMatrix H_n =
        spec.H_n ? spec.H_n(n) : ComplexMatrix::Zero(d_A, d_A);
    const ComplexMatrix H = kron(H_S, ComplexMatrix::Identity(d_A, d_A)) +
                            kron(ComplexMatrix::Identity(d_S, d_S), H_n) + spec.V(n);
    if (last_H.rows() != H.rows() || max_abs(ComplexMatrix(H - last_H)) != 0.0) {
      last_U = expm_unitary(H, spec.dt);
      last_H = H;
    }
    chi_index = nearest_basis_index(basis, chi);
    return conditional_kraus(last_U, chi, basis);
  }
};

}  // namespace

TrajectoryRecord simulate_trajectory(const CollisionModelSpec& spec,
                                     const ComplexVector& psi0,
                                     const MeasurementBasis& basis, std::uint64_t seed,
                                     int n_steps, std::uint64_t trajectory_index) {
  KrausBuilder builder(spec);
  if (psi0.size() != spec.system.dim())
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.trajectory = trajectory_index;
  rec.outcomes.reserve(std::size_t(n_steps));
  rec.states.reserve(std::size_t(n_steps));

  StepRng rng{seed, trajectory_index, 0};
  ComplexVector psi = psi0 / psi0.norm();
  for (int n = 1; n <= n_steps; ++n) {
    const auto kraus = builder.kraus_for(n, basis);
    const PovmOutcome outcome = povm_step(psi, kraus, rng);
    psi = outcome.psi;
    rec.outcomes.push_back(outcome.k);
    rec.states.push_back(psi);
    if (outcome.k != builder.chi_index) rec.jump_steps.push_back(n);
  }
  return rec;
}

DensityMatrix enumerate_average(const CollisionModelSpec& spec, const ComplexVector& psi0,
                                const MeasurementBasis& basis, int n_steps) {
  KrausBuilder builder(spec);
  const Eigen::Index d_S = spec.system.dim();
  if (psi0.size() != d_S)
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");

  // Unnormalized branch vectors carry their own probability weight, so the
  // average is just the sum of branch projectors.
  std::vector<ComplexVector> branches{psi0 / psi0.norm()};
  for (int n = 1; n <= n_steps; ++n) {
    const auto kraus = builder.kraus_for(n, basis);
    std::vector<ComplexVector> next;
    next.reserve(branches.size() * kraus.size());
    for (const auto& branch : branches)
      for (const auto& K : kraus) next.push_back(K * branch);
    branches = std::move(next);
  }

  ComplexMatrix rho = ComplexMatrix::Zero(d_S, d_S);
  for (const auto& branch : branches) rho += branch * branch.adjoint();
  return DensityMatrix::create(std::move(rho), spec.system);
}

ComplexVector sse_step(const ComplexVector& psi, const JumpScheme& scheme, StepRng& rng) {
  if (scheme.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
  const ComplexMatrix LdL = scheme.L.adjoint() * scheme.L;
  const double excitation = (psi.dot(LdL * psi)).real();  // <L†L>
  const double p_jump = scheme.dt * excitation;
  if (p_jump > 0.1) throw std::invalid_argument("weak measurement guard violated");

  if (rng.next() < p_jump) {
    const ComplexVector jumped = scheme.L * psi;
    return jumped / jumped.norm();
  }
  ComplexVector drifted = psi - 0.5 * scheme.dt * (LdL * psi - excitation * psi);
  if (scheme.H_S.size() != 0) drifted -= I_UNIT * scheme.dt * (scheme.H_S * psi);
  return drifted / drifted.norm();
}

std::vector<EnsembleSample> ensemble_average(
    const std::vector<TrajectoryRecord>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("grid mismatch");
  const std::size_t n_steps = trajectories.front().states.size();
  const Eigen::Index d =
      n_steps == 0 ? 0 : trajectories.front().states.front().size();
  for (const auto& t : trajectories) {
    if (t.states.size() != n_steps) throw std::invalid_argument("grid mismatch");
    for (const auto& s : t.states)
      if (s.size() != d) throw std::invalid_argument("grid mismatch");
  }
  if (n_steps == 0) return {};

  const double N = double(trajectories.size());
  const TensorSpace space({"S"}, {d});
  std::vector<EnsembleSample> samples;
  samples.reserve(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) {
    ComplexMatrix mean = ComplexMatrix::Zero(d, d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (const auto& t : trajectories) {
      const ComplexMatrix proj = t.states[n] * t.states[n].adjoint();
      mean += proj;
      second += proj.cwiseAbs2();
    }
    mean /= N;
    EnsembleSample sample;
    sample.step = int(n) + 1;
    sample.rho = DensityMatrix::create(std::move(mean), space);
    if (trajectories.size() > 1) {
      const Eigen::MatrixXd var =
          (second / N - sample.rho.matrix.cwiseAbs2()).cwiseMax(0.0) * (N / (N - 1.0));
      sample.stderr_abs = (var / N).cwiseSqrt();
    } else {
      sample.stderr_abs = Eigen::MatrixXd::Zero(d, d);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace collide
