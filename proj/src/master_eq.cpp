#include "collide/master_eq.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace collide {

namespace {

constexpr double kRateFloor = 1e-14;       // drop numerically-zero channels
constexpr double kNegativeRateTol = 1e-10; // clamp PSD rounding noise

// Total coupling sum g_nu A_nu ⊗ B_nu; must come out Hermitian.
ComplexMatrix total_coupling(const std::vector<MomentTerm>& terms) {
  if (terms.empty()) throw std::invalid_argument("no coupling terms");
  const Eigen::Index d = terms.front().A.rows() * terms.front().B.rows();
  ComplexMatrix V = ComplexMatrix::Zero(d, d);
  for (const auto& term : terms) V += term.g * kron(term.A, term.B);
  return V;
}

Complex state_average(const ComplexMatrix& op, const ComplexMatrix& rho) {
  return (op * rho).trace();
}

// Turn a double-sum dissipator sum_{nu,mu} M(nu,mu) A_nu rho A_mu (right
// factor NOT daggered) into canonical (rate, jump) pairs by re-expressing it
// over the matrix-unit basis and diagonalizing the coefficient matrix.
std::vector<DissipatorTerm> diagonalize_dissipator(const std::vector<ComplexMatrix>& A,
                                                   const ComplexMatrix& M) {
  const Eigen::Index d = A.front().rows();
  const Eigen::Index n = Eigen::Index(A.size());

  // vec(A_nu) for the left factors; the right factor A_mu = (A_mu†)†
  // contributes conj(vec(A_mu†)) so both sides use E_i rho E_j†.
  ComplexMatrix left(d * d, n), right(d * d, n);
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    const ComplexMatrix& a = A[std::size_t(nu)];
    const ComplexMatrix ad = a.adjoint();
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) {
        left(r * d + c, nu) = a(r, c);
        right(r * d + c, nu) = std::conj(ad(r, c));
      }
  }
  ComplexMatrix C = left * M * right.transpose();

  if (max_abs(ComplexMatrix(C - C.adjoint())) > kNegativeRateTol)
    throw std::invalid_argument("invalid moment matrix");
  C = 0.5 * (C + ComplexMatrix(C.adjoint()));

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(C);
  std::vector<DissipatorTerm> out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double rate = es.eigenvalues()(k);
    if (rate < -kNegativeRateTol) throw std::invalid_argument("invalid moment matrix");
    if (rate < kRateFloor) continue;
    ComplexMatrix L(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) L(r, c) = es.eigenvectors()(r * d + c, k);
    out.push_back({rate, std::move(L)});
  }
  return out;
}

void check_hermitian_part(const ComplexMatrix& h, const char* what) {
  if (!is_hermitian(h))
    throw std::invalid_argument(std::string(what) + " not Hermitian");
}

}  // namespace

MomentData MomentData::from_state(std::vector<MomentTerm> terms, const DensityMatrix& eta) {
  MomentData m;
  m.terms = std::move(terms);
  const Eigen::Index n = Eigen::Index(m.terms.size());
  m.firstMoments = ComplexVector(n);
  m.secondMoments = ComplexMatrix(n, n);
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    const ComplexMatrix& Bn = m.terms[std::size_t(nu)].B;
    if (Bn.rows() != eta.dim())
      throw std::invalid_argument("dimension mismatch: ancilla operator does not fit eta");
    m.firstMoments(nu) = state_average(Bn, eta.matrix);
    for (Eigen::Index mu = 0; mu < n; ++mu)
      m.secondMoments(nu, mu) =
          state_average(Bn * m.terms[std::size_t(mu)].B, eta.matrix);
  }
  return m;
}

ComplexMatrix LindbladGenerator::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out = -I_UNIT * (hamiltonian * rho - rho * hamiltonian);
  for (const auto& term : dissipatorTerms) {
    const ComplexMatrix LdL = term.L.adjoint() * term.L;
    out += term.rate * (term.L * rho * term.L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  }
  return out;
}

double LindbladGenerator::fastest_rate() const {
  double fastest = max_abs(hamiltonian);
  for (const auto& term : dissipatorTerms)
    fastest = std::max(fastest, term.rate * max_abs(term.L) * max_abs(term.L));
  return fastest;
}

LindbladGenerator generator_from_moments(const MomentData& m, double dt,
                                         const ComplexMatrix& H_S) {
  if (m.terms.empty()) throw std::invalid_argument("no coupling terms");
  check_hermitian_part(total_coupling(m.terms), "coupling");
  const Eigen::Index n = Eigen::Index(m.terms.size());
  const Eigen::Index d = m.terms.front().A.rows();

  ComplexMatrix H = H_S.size() == 0 ? ComplexMatrix::Zero(d, d) : H_S;
  std::vector<ComplexMatrix> A;
  A.reserve(m.terms.size());
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    const auto& term = m.terms[std::size_t(nu)];
    if (term.A.rows() != d || term.A.cols() != d)
      throw std::invalid_argument("dimension mismatch: system operators differ in size");
    H += term.g * m.firstMoments(nu) * term.A;
    A.push_back(term.A);
  }
  check_hermitian_part(H, "generator Hamiltonian");

  // M(nu, mu) = g_nu g_mu dt <B_mu B_nu>; note the transposed moment order.
  ComplexMatrix M(n, n);
  for (Eigen::Index nu = 0; nu < n; ++nu)
    for (Eigen::Index mu = 0; mu < n; ++mu)
      M(nu, mu) = m.terms[std::size_t(nu)].g * m.terms[std::size_t(mu)].g * dt *
                  m.secondMoments(mu, nu);

  LindbladGenerator gen;
  gen.hamiltonian = 0.5 * (H + ComplexMatrix(H.adjoint()));
  gen.dissipatorTerms = diagonalize_dissipator(A, M);
  return gen;
}

std::vector<ComplexMatrix> jumps_from_spectral(const ComplexMatrix& V,
                                               const DensityMatrix& eta, double dt) {
  const Eigen::Index d_A = eta.dim();
  if (V.rows() % d_A != 0)
    throw std::invalid_argument("dimension mismatch: coupling is not system ⊗ ancilla");
  const Eigen::Index d_S = V.rows() / d_A;

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(eta.matrix);
  std::vector<ComplexMatrix> jumps;
  for (Eigen::Index k = 0; k < d_A; ++k) {
    const double p_k = es.eigenvalues()(k);
    if (p_k < 1e-15) continue;  // unpopulated ancilla levels contribute nothing
    const ComplexVector in = es.eigenvectors().col(k);
    for (Eigen::Index kp = 0; kp < d_A; ++kp) {
      const ComplexVector out = es.eigenvectors().col(kp);
      ComplexMatrix L(d_S, d_S);
      for (Eigen::Index a = 0; a < d_S; ++a)
        for (Eigen::Index b = 0; b < d_S; ++b) {
          Complex sum = 0.0;
          for (Eigen::Index i = 0; i < d_A; ++i)
            for (Eigen::Index j = 0; j < d_A; ++j)
              sum += std::conj(out(i)) * V(a * d_A + i, b * d_A + j) * in(j);
          L(a, b) = sum;
        }
      jumps.push_back(std::sqrt(p_k * dt) * L);
    }
  }
  return jumps;
}

ComplexMatrix ancilla_average(const ComplexMatrix& V, const DensityMatrix& eta) {
  const Eigen::Index d_A = eta.dim();
  if (V.rows() % d_A != 0)
    throw std::invalid_argument("dimension mismatch: coupling is not system ⊗ ancilla");
  const Eigen::Index d_S = V.rows() / d_A;
  ComplexMatrix out(d_S, d_S);
  for (Eigen::Index a = 0; a < d_S; ++a)
    for (Eigen::Index b = 0; b < d_S; ++b) {
      Complex sum = 0.0;
      for (Eigen::Index i = 0; i < d_A; ++i)
        for (Eigen::Index j = 0; j < d_A; ++j)
          sum += V(a * d_A + i, b * d_A + j) * eta.matrix(j, i);
      out(a, b) = sum;
    }
  return out;
}

LindbladGenerator generator_from_spectral(const ComplexMatrix& V,
                                          const DensityMatrix& eta, double dt,
                                          const ComplexMatrix& H_S) {
  LindbladGenerator gen;
  const ComplexMatrix Heff = ancilla_average(V, eta);
  gen.hamiltonian = (H_S.size() == 0 ? ComplexMatrix(ComplexMatrix::Zero(Heff.rows(), Heff.cols()))
                                     : H_S) +
                    Heff;
  check_hermitian_part(gen.hamiltonian, "generator Hamiltonian");
  for (auto& L : jumps_from_spectral(V, eta, dt)) gen.dissipatorTerms.push_back({1.0, std::move(L)});
  return gen;
}

ComplexMatrix superoperator(const LindbladGenerator& gen) {
  const Eigen::Index d = gen.hamiltonian.rows();
  ComplexMatrix S(d * d, d * d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) {
      ComplexMatrix basis = ComplexMatrix::Zero(d, d);
      basis(r, c) = 1.0;
      const ComplexMatrix image = gen.apply(basis);
      for (Eigen::Index cc = 0; cc < d; ++cc)
        for (Eigen::Index rr = 0; rr < d; ++rr)
          S(cc * d + rr, c * d + r) = image(rr, cc);
    }
  return S;
}

namespace {

std::vector<MasterEquationSample> integrate_impl(
    const std::function<ComplexMatrix(double)>& hamiltonian,
    const std::vector<DissipatorTerm>& dissipators, const DensityMatrix& rho0,
    double t_max, double dt, double fastest) {
  if (dt <= 0.0 || t_max < 0.0) throw std::invalid_argument("integration times must be positive");
  if (dt * fastest > kIntegrationStepBound) throw std::invalid_argument("dt too coarse");

  auto rhs = [&](double t, const ComplexMatrix& rho) {
    LindbladGenerator gen;
    gen.hamiltonian = hamiltonian(t);
    gen.dissipatorTerms = dissipators;
    return gen.apply(rho);
  };

  const int n_steps = int(std::llround(t_max / dt));
  std::vector<MasterEquationSample> samples;
  samples.reserve(std::size_t(n_steps) + 1);
  samples.push_back({0.0, rho0});

  ComplexMatrix rho = rho0.matrix;
  for (int n = 0; n < n_steps; ++n) {
    const double t = n * dt;
    const ComplexMatrix k1 = rhs(t, rho);
    const ComplexMatrix k2 = rhs(t + 0.5 * dt, rho + 0.5 * dt * k1);
    const ComplexMatrix k3 = rhs(t + 0.5 * dt, rho + 0.5 * dt * k2);
    const ComplexMatrix k4 = rhs(t + dt, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    samples.push_back({(n + 1) * dt, DensityMatrix::create(rho, rho0.space)});
  }
  return samples;
}

}  // namespace

std::vector<MasterEquationSample> integrate(const LindbladGenerator& gen,
                                            const DensityMatrix& rho0, double t_max,
                                            double dt) {
  const ComplexMatrix H = gen.hamiltonian;
  return integrate_impl([H](double) { return H; }, gen.dissipatorTerms, rho0, t_max, dt,
                        gen.fastest_rate());
}

std::vector<MasterEquationSample> integrate(
    const std::function<ComplexMatrix(double)>& hamiltonian,
    const std::vector<DissipatorTerm>& dissipators, const DensityMatrix& rho0,
    double t_max, double dt) {
  LindbladGenerator probe;
  probe.hamiltonian = hamiltonian(0.0);
  probe.dissipatorTerms = dissipators;
  return integrate_impl(hamiltonian, dissipators, rho0, t_max, dt, probe.fastest_rate());
}

namespace {

// Diagonal spectral functions of the number operator on a d-level space.
struct MaserOperators {
  ComplexMatrix C;       // cos(g tau sqrt(n̂+1))
  ComplexMatrix Cprime;  // cos(g tau sqrt(n̂))
  ComplexMatrix S;       // sin(g tau sqrt(n̂+1)) / sqrt(n̂+1)
};

MaserOperators maser_operators(Eigen::Index d, double g_tau) {
  MaserOperators ops{ComplexMatrix::Zero(d, d), ComplexMatrix::Zero(d, d),
                     ComplexMatrix::Zero(d, d)};
  for (Eigen::Index n = 0; n < d; ++n) {
    const double root = std::sqrt(double(n + 1));
    ops.C(n, n) = std::cos(g_tau * root);
    ops.Cprime(n, n) = std::cos(g_tau * std::sqrt(double(n)));
    ops.S(n, n) = std::sin(g_tau * root) / root;
  }
  return ops;
}

}  // namespace

DensityMatrix micromaser_map(const DensityMatrix& rho_cavity, double g_tau, double p) {
  const Eigen::Index d = rho_cavity.dim();
  if (d < 3) throw std::invalid_argument("truncation too small");
  const double tail =
      rho_cavity.matrix(d - 1, d - 1).real() + rho_cavity.matrix(d - 2, d - 2).real();
  if (tail > 1e-8) throw std::invalid_argument("truncation too small");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("atom excitation probability must be in [0, 1]");

  const auto ops = maser_operators(d, g_tau);
  const ComplexMatrix a = annihilation(d);
  const ComplexMatrix& rho = rho_cavity.matrix;

  ComplexMatrix out =
      (1.0 - p) * (ops.Cprime * rho * ops.Cprime + ops.S * a * rho * a.adjoint() * ops.S) +
      p * (ops.C * rho * ops.C + a.adjoint() * ops.S * rho * ops.S * a);
  // The top truncated level leaks trace at most the checked tail mass.
  return DensityMatrix::create_renormalized(std::move(out), rho_cavity.space);
}

LindbladGenerator micromaser_generator(Eigen::Index d, double g, double tau, double p,
                                       double dt) {
  if (d < 3) throw std::invalid_argument("truncation too small");
  const double gamma = g * g * tau * tau / dt;
  const ComplexMatrix a = annihilation(d);
  LindbladGenerator gen;
  gen.hamiltonian = ComplexMatrix::Zero(d, d);
  if ((1.0 - p) * gamma > 0.0) gen.dissipatorTerms.push_back({(1.0 - p) * gamma, a});
  if (p * gamma > 0.0) gen.dissipatorTerms.push_back({p * gamma, ComplexMatrix(a.adjoint())});
  return gen;
}

CascadedMomentData CascadedMomentData::from_state(std::vector<CascadedTerm> terms,
                                                  const DensityMatrix& eta) {
  std::vector<MomentTerm> probe;
  probe.reserve(terms.size());
  for (const auto& term : terms) probe.push_back({term.g, term.A1, term.B});
  const MomentData m = MomentData::from_state(std::move(probe), eta);
  CascadedMomentData out;
  out.terms = std::move(terms);
  out.firstMoments = m.firstMoments;
  out.secondMoments = m.secondMoments;
  return out;
}

LindbladGenerator cascaded_generator(const CascadedMomentData& m, double dt) {
  if (m.terms.empty()) throw std::invalid_argument("no coupling terms");
  const Eigen::Index n = Eigen::Index(m.terms.size());
  const Eigen::Index d = m.terms.front().A1.rows();
  for (const auto& term : m.terms)
    if (term.A1.rows() != d || term.A1.cols() != d || term.A2.rows() != d ||
        term.A2.cols() != d)
      throw std::invalid_argument("dimension mismatch: site operators must share the two-site space");

  ComplexMatrix H = ComplexMatrix::Zero(d, d);
  std::vector<ComplexMatrix> collective;
  collective.reserve(m.terms.size());
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    const auto& term = m.terms[std::size_t(nu)];
    H += 0.5 * term.g * m.firstMoments(nu) * (term.A1 + term.A2);
    collective.push_back(term.A1 + term.A2);
  }

  // Ordering term: the ancilla hits site 1 before site 2, which survives the
  // continuum limit as i (dt/4) sum g_nu g_mu <[B_nu, B_mu]> A2_mu A1_nu.
  for (Eigen::Index nu = 0; nu < n; ++nu)
    for (Eigen::Index mu = 0; mu < n; ++mu) {
      const Complex comm = m.secondMoments(nu, mu) - m.secondMoments(mu, nu);
      H += I_UNIT * (dt / 4.0) * m.terms[std::size_t(nu)].g *
           m.terms[std::size_t(mu)].g * comm *
           (m.terms[std::size_t(mu)].A2 * m.terms[std::size_t(nu)].A1);
    }
  check_hermitian_part(H, "generator Hamiltonian");

  ComplexMatrix M(n, n);
  for (Eigen::Index nu = 0; nu < n; ++nu)
    for (Eigen::Index mu = 0; mu < n; ++mu)
      M(nu, mu) = m.terms[std::size_t(nu)].g * m.terms[std::size_t(mu)].g * (dt / 2.0) *
                  m.secondMoments(mu, nu);

  LindbladGenerator gen;
  gen.hamiltonian = 0.5 * (H + ComplexMatrix(H.adjoint()));
  gen.dissipatorTerms = diagonalize_dissipator(collective, M);
  return gen;
}

}  // namespace collide
