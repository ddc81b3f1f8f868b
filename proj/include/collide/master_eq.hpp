#pragma once

#include "collide/states.hpp"

#include <functional>
#include <vector>

namespace collide {

// One coupling term g * A ⊗ B (A on the system, B on the ancilla). The term
// list as a whole must make the total coupling Hermitian; individual A and B
// may be non-Hermitian and g complex.
struct MomentTerm {
  Complex g;
  ComplexMatrix A;
  ComplexMatrix B;
};

// Coupling terms together with the ancilla moments that drive the reduced
// dynamics: <B_nu> and <B_nu B_mu>.
struct MomentData {
  std::vector<MomentTerm> terms;
  ComplexVector firstMoments;   // firstMoments(nu)      = <B_nu>
  ComplexMatrix secondMoments;  // secondMoments(nu, mu) = <B_nu B_mu>

  // Compute the moments from an explicit ancilla state.
  static MomentData from_state(std::vector<MomentTerm> terms, const DensityMatrix& eta);
};

struct DissipatorTerm {
  double rate = 0.0;
  ComplexMatrix L;
};

// Right-hand side of a Lindblad-form master equation
//   d rho/dt = -i [H, rho] + sum_k rate_k (L rho L† - 1/2 {L†L, rho}).
struct LindbladGenerator {
  ComplexMatrix hamiltonian;
  std::vector<DissipatorTerm> dissipatorTerms;

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  double fastest_rate() const;
};

// Reduced one-step generator from bath moments: effective Hamiltonian
// sum_nu g_nu <B_nu> A_nu plus a dissipator with coefficients
// g_nu g_mu dt <B_mu B_nu>, diagonalized into (rate, jump) pairs.
// H_S, when given, is added to the Hamiltonian unchanged.
LindbladGenerator generator_from_moments(const MomentData& m, double dt,
                                         const ComplexMatrix& H_S = {});

// Jump operators sqrt(p_k dt) <k'|V|k> over the eigenpairs (p_k, |k>) of eta.
// All rates are 1 (absorbed into the operators).
std::vector<ComplexMatrix> jumps_from_spectral(const ComplexMatrix& V,
                                               const DensityMatrix& eta, double dt);

// Same reduced dynamics assembled via the spectral route: Hamiltonian
// H_S + Tr_n{V eta} and unit-rate jumps from jumps_from_spectral. Kept as an
// independent construction so the two routes can cross-check each other.
LindbladGenerator generator_from_spectral(const ComplexMatrix& V,
                                          const DensityMatrix& eta, double dt,
                                          const ComplexMatrix& H_S = {});

// Partial expectation Tr_ancilla{ V (I ⊗ eta) }, a system operator.
ComplexMatrix ancilla_average(const ComplexMatrix& V, const DensityMatrix& eta);

// Dense superoperator matrix of a generator (d² x d², column-major vec
// convention). Used for route-equivalence checks.
ComplexMatrix superoperator(const LindbladGenerator& gen);

struct MasterEquationSample {
  double t = 0.0;
  DensityMatrix rho;
};

// Fixed-step RK4 integration of the master equation, sampling every step.
// Requires dt * fastest rate <= kIntegrationStepBound ("dt too coarse").
inline constexpr double kIntegrationStepBound = 0.1;

std::vector<MasterEquationSample> integrate(const LindbladGenerator& gen,
                                            const DensityMatrix& rho0, double t_max,
                                            double dt);

// Time-dependent Hamiltonian variant (drives); the callback is evaluated at
// the RK4 substage times.
std::vector<MasterEquationSample> integrate(
    const std::function<ComplexMatrix(double)>& hamiltonian,
    const std::vector<DissipatorTerm>& dissipators, const DensityMatrix& rho0,
    double t_max, double dt);

// One cavity-field collision with a two-level atom that enters excited with
// probability p, expressed through the nonlinear field operators
//   C = cos(g tau sqrt(n̂+1)), C' = cos(g tau sqrt(n̂)),
//   S = sin(g tau sqrt(n̂+1)) / sqrt(n̂+1).
// The cavity state must have negligible mass (< 1e-8) in its top two Fock
// levels, otherwise "truncation too small".
DensityMatrix micromaser_map(const DensityMatrix& rho_cavity, double g_tau, double p);

// Same collision family as a generator: the discrete map linearized at rate
// Gamma = (g tau)² / dt. tau defaults to dt (one collision per bin).
LindbladGenerator micromaser_generator(Eigen::Index d, double g, double tau, double p,
                                       double dt);

// One coupling term for a two-site cascade: the shared ancilla couples to
// site 1 through A1 and to site 2 through A2 (both already embedded on the
// full two-site space), with the same g and ancilla operator B.
struct CascadedTerm {
  Complex g;
  ComplexMatrix A1;
  ComplexMatrix A2;
  ComplexMatrix B;
};

struct CascadedMomentData {
  std::vector<CascadedTerm> terms;
  ComplexVector firstMoments;   // <B_nu>
  ComplexMatrix secondMoments;  // <B_nu B_mu>

  static CascadedMomentData from_state(std::vector<CascadedTerm> terms,
                                       const DensityMatrix& eta);
};

// Reduced generator of the two-site cascade: effective Hamiltonian
// sum (g_nu/2) <B_nu> (A1 + A2), the ordering term
// i (dt/4) sum g_nu g_mu <[B_nu, B_mu]> A2_mu A1_nu, and a dissipator with
// collective operators A1 + A2 at rates g_nu g_mu dt/2 <B_mu B_nu>. One full
// cascade step advances the engine clock by 2 dt, which is what makes this
// normalization match the collision trajectory.
LindbladGenerator cascaded_generator(const CascadedMomentData& m, double dt);

}  // namespace collide
