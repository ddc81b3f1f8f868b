#pragma once

#include "collide/collision.hpp"
#include "collide/master_eq.hpp"

namespace collide {

// --- ancilla-ancilla collisions ---------------------------------------------

// How two neighbouring ancillas interact before the fresh one meets the
// system. The coherent partial swap is cos(theta) I - i sin(theta) Swap with
// p = sin^2(theta); the incoherent map mixes identity and full swap with
// weights (1-p, p); a general pair unitary is accepted as an explicit matrix
// acting on (previous ancilla (x) fresh ancilla).
enum class AAMode { CoherentPartialSwap, IncoherentSwapMap, GeneralPairUnitary };

struct AASpec {
  CollisionModelSpec base;  // Basic variant; fixed ancilla dimension
  double p = 0.0;           // swap probability
  AAMode mode = AAMode::CoherentPartialSwap;
  ComplexMatrix W;          // GeneralPairUnitary only
};

// Interleaved chain evolution: collision n >= 2 first lets the fresh ancilla
// collide with its predecessor, then with the system. Returns the system
// trajectory with rho0 at index 0.
//
// window = 0 keeps the full joint chain (dimension-capped); window = l >= 1
// keeps only the last l ancillas, tracing out older ones once nothing touches
// them again, which leaves the system trajectory exact at any l.
std::vector<DensityMatrix> run_aa(const AASpec& spec, const DensityMatrix& rho0,
                                  int n_steps, int window = 0);

// Closed recursion equivalent to run_aa in incoherent mode with homogeneous
// ancillas: rho_n = (1-p) sum_{j=1}^{n-1} p^{j-1} F_j[rho_{n-j}]
//                   + p^{n-1} F_n[rho_0],
// where F_j[X] = Tr_anc{U1^j (X (x) eta) U1^dag^j} reuses one ancilla j
// times. Returns the trajectory with rho0 at index 0.
std::vector<DensityMatrix> memory_kernel_recursion(const ComplexMatrix& U1,
                                                   const DensityMatrix& eta, double p,
                                                   const DensityMatrix& rho0,
                                                   int n_steps);

// The continuous-time map family F(t)[X] = Tr_anc{e^{-iH1 t}(X (x) eta)
// e^{iH1 t}} entering the memory-kernel master equation, described by the
// joint Hamiltonian that generates it.
struct CollisionMapFamily {
  TensorSpace system;
  ComplexMatrix H1;   // on system (x) ancilla
  DensityMatrix eta;  // ancilla state
};

// One sample of the kernel integration. Raw matrices: the scheme preserves
// trace and positivity only to its own integration order, so wrapping them in
// validated states would reject perfectly good coarse runs.
struct KernelSample {
  double t = 0.0;
  ComplexMatrix rho;
};

// Integrates rhodot(t) = Gamma * int_0^t e^{-Gamma t'} F(t')[rhodot(t-t')] dt'
//                        + e^{-Gamma t} Fdot(t)[rho0]
// with trapezoidal quadrature over the stored derivative history, on the same
// fixed grid as the outer integration.
std::vector<KernelSample> memory_kernel_me(double Gamma, const CollisionMapFamily& family,
                                           const DensityMatrix& rho0, double t_max,
                                           double dt);

// --- statistical mixtures of dynamics ----------------------------------------

// Ancillas drawn once from a classical mixture: component m supplies the whole
// chain with weight p_m, so the system evolves under the average of the m-th
// powers, not the power of the average.
struct MixtureComponent {
  double weight = 0.0;
  std::function<AncillaSpec(int)> ancilla;  // per-step ancilla of this branch
};
struct MixtureSpec {
  std::vector<MixtureComponent> components;
};

// rho_n = sum_m p_m E_m^n[rho0]; trajectory with rho0 at index 0. Each
// component runs the base model with its own ancilla source.
std::vector<DensityMatrix> mixture_dynamics(const MixtureSpec& mixture,
                                            const CollisionModelSpec& base,
                                            const DensityMatrix& rho0, int n_steps);

// --- delayed bi-local emission ------------------------------------------------

// An excited emitter coupled to time bin n and, with a phase, to the bin it
// already met d steps earlier. Single-excitation sector throughout.
struct DelaySpec {
  double gamma = 0.0;
  double dt = 0.0;
  int d = 1;          // delay in collisions
  double phi = 0.0;   // reabsorption phase
};

// Emitter amplitude alpha^(0..n_max) from the finite-difference equation
//   (alpha^(n+1) - alpha^(n)) / dt = -gamma alpha^(n)            n < d
//                                  = -gamma alpha^(n)
//                                    - gamma e^{i phi} alpha^(n-d)  n >= d.
// Guarded by gamma*dt <= 0.1, the validity range of the second-order
// expansion behind it.
std::vector<Complex> delayed_emission(const DelaySpec& spec, int n_max);

// --- composite collision models ------------------------------------------------

// System S talks only to a memory qubit M; M collides with fresh ancillas.
struct CompositeSpec {
  double G = 0.0;   // S-M exchange rate
  double g = 0.0;   // M-ancilla exchange rate
  double dt = 0.0;
};

struct CompositeAmplitudes {
  std::vector<Complex> alpha;  // S excited amplitude, index = collision count
  std::vector<Complex> beta;   // M excited amplitude
};

// Single-excitation recurrence from (alpha, beta) = (1, 0): each step applies
// [[C, -i c S], [-i S, c C]] with c = cos(g dt), C = cos(G dt), S = sin(G dt)
// (memory-ancilla leak first, then the S-M rotation).
CompositeAmplitudes composite_recurrence(const CompositeSpec& spec, int n_max);

// Continuous-limit envelope of alpha at total leak rate gamma = g^2 dt:
// e^{-gamma t/4} [cos(delta t/2) + (gamma/(2 delta)) sin(delta t/2)] with
// delta = sqrt(4G^2 - gamma^2/4), continued analytically (cos -> cosh) when
// the argument turns negative.
Complex composite_envelope(double G, double gamma, double t);

// Full density-matrix composite run: per step, U_SM acts on (S, M), then M
// collides with a fresh ancilla (unitary U_Mn, ancilla traced out). Returns
// the S trajectory with rho0 at index 0.
std::vector<DensityMatrix> composite_map_run(const ComplexMatrix& U_SM,
                                             const ComplexMatrix& U_Mn,
                                             const DensityMatrix& eta_M,
                                             const DensityMatrix& eta,
                                             const DensityMatrix& rho0, int n_steps);

}  // namespace collide
