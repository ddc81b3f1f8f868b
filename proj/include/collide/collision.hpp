#pragma once

#include "collide/states.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace collide {

// One completed collision. The joint post-collision state is retained because
// the thermodynamic bookkeeping needs it (switching work, correlations).
struct StepRecord {
  int index = 0;          // collision number, 1-based
  DensityMatrix rho;      // reduced system state after the collision
  DensityMatrix eta_out;  // reduced ancilla state after the collision
  DensityMatrix joint;    // full system+ancilla state before tracing
};

// --- model specification ----------------------------------------------------
//
// Inhomogeneous models are expressed as functions of the 1-based step index;
// a homogeneous model simply ignores the argument. Couplings are supplied on
// the full joint space (system factors first, ancilla factors last), which
// keeps the engine agnostic about how many subsystems either side has.

struct Basic {};

// Two sub-collisions per ancilla: first V1 (system part 1 with the ancilla),
// then V2 (system part 2 with the same ancilla). Both couplings arrive
// already embedded on the full joint space.
struct Cascaded {
  std::function<ComplexMatrix(int)> V1;
  std::function<ComplexMatrix(int)> V2;
};

// One independent ancilla per bath, all colliding simultaneously.
struct BathChannel {
  std::string label;                         // ancilla label in the joint space
  std::function<AncillaSpec(int)> ancilla;
  std::function<ComplexMatrix(int)> H_n;     // on this ancilla alone; empty = 0
  std::function<ComplexMatrix(int)> V;       // on (system ⊗ this ancilla)
};
struct MultiBath {
  std::vector<BathChannel> baths;
  // Optional initial correlations between the bath ancillas, given explicitly
  // as a joint state over all bath subsystems (labels matching the channels).
  std::optional<DensityMatrix> chi_corr;
};

struct CollisionModelSpec {
  TensorSpace system;                        // possibly multipartite
  ComplexMatrix H_S;                         // on the system space; empty = 0
  std::function<AncillaSpec(int)> ancilla;   // Basic and Cascaded variants
  std::function<ComplexMatrix(int)> H_n;     // on the ancilla space; empty = 0
  std::function<ComplexMatrix(int)> V;       // Basic variant, on the joint space
  double dt = 0.0;
  std::variant<Basic, Cascaded, MultiBath> variant = Basic{};
};

// --- engine -----------------------------------------------------------------

// exp(-i (H_S + H_n + V) dt) with the free parts embedded on the joint space.
ComplexMatrix build_unitary(const ComplexMatrix& H_S, const ComplexMatrix& H_n,
                            const ComplexMatrix& V, double dt);

// One collision: U (rho ⊗ eta) U†, then both partial traces.
StepRecord collide(const DensityMatrix& rho, const DensityMatrix& eta,
                   const ComplexMatrix& U);

// The assembled ingredients of collision n, with the Hamiltonian pieces kept
// separate so energy bookkeeping can weigh each one on its own.
struct StepOperators {
  TensorSpace anc_space;   // all ancillas of this step
  TensorSpace joint;       // system ⊗ anc_space
  DensityMatrix eta;       // joint pre-collision ancilla state
  ComplexMatrix H_sys;     // system Hamiltonian, embedded on `joint`
  ComplexMatrix H_anc;     // bath free Hamiltonians, embedded on `joint`
  ComplexMatrix V;         // couplings, embedded on `joint`
  std::vector<std::string> bath_labels;          // one per bath channel
  std::vector<ComplexMatrix> bath_hamiltonians;  // per channel, on its own space

  ComplexMatrix total_hamiltonian() const { return H_sys + H_anc + V; }
};

// Assemble step n of a Basic or MultiBath model. The system Hamiltonian may be
// overridden (drive protocols change it between steps). Cascaded models have
// no single per-step coupling and are rejected.
StepOperators step_operators(const CollisionModelSpec& spec, int n,
                             const ComplexMatrix* H_S_override = nullptr);

// Iterate the model for n_steps collisions from rho0.
std::vector<StepRecord> run(const CollisionModelSpec& spec, const DensityMatrix& rho0,
                            int n_steps);

// One cascaded collision U2 U1 (rho ⊗ eta) U1† U2†. U1 and U2 must already be
// embedded on the joint space; the ordering (first 1, then 2) is fixed.
StepRecord cascaded_step(const DensityMatrix& rho_12, const DensityMatrix& eta,
                         const ComplexMatrix& U1, const ComplexMatrix& U2);

// Fixed-point search over a finished run: the state is declared steady once
// trace_distance(rho_n, rho_{n-1}) stays below tol for `window` consecutive
// steps. Since each record is one application of the map, the last qualifying
// pair doubles as the fixed-point residual check. Absence is a valid result.
std::optional<DensityMatrix> detect_steady(const std::vector<StepRecord>& records,
                                           int window, double tol);

// Kraus operators K_k = <k|U|chi> of the reduced map, indexed by the ancilla
// output basis. chi is the (pure) ancilla input state.
std::vector<ComplexMatrix> kraus_from_unitary(const ComplexMatrix& U,
                                              Eigen::Index d_sys,
                                              const ComplexVector& chi);

// --- pure joint states as tensor chains --------------------------------------
//
// When everything is pure and each ancilla starts in the first basis vector,
// the joint state after n collisions factorizes into a chain: one rank-2
// tensor carrying the initial system amplitudes and one rank-3 tensor per
// later collision. Amplitudes are recovered by matrix products along the
// chain, so nothing exponential is stored.

struct PureChainState {
  ComplexVector psi0;      // initial system amplitudes (d_S)
  ComplexMatrix leading;   // d_S x d_A after the first collision; empty before
  // tensors[m][k](a, a') — collision m+2, ancilla outcome k, system in/out.
  std::vector<std::vector<ComplexMatrix>> tensors;

  static PureChainState from_vector(ComplexVector psi);
  // Throws "MPS track requires pure states" for mixed input.
  static PureChainState from_state(const DensityMatrix& rho);

  Eigen::Index d_sys() const { return psi0.size(); }
  Eigen::Index d_anc() const { return leading.size() == 0 ? 0 : leading.cols(); }
  int steps() const { return leading.size() == 0 ? 0 : 1 + int(tensors.size()); }
};

// Append one collision. U acts on (system ⊗ ancilla); the ancilla enters in
// its first basis vector.
PureChainState mps_evolve(PureChainState chain, const ComplexMatrix& U);

// Dense joint amplitudes (system index first, then ancillas in collision
// order). Exponential in the number of steps; meant for small-n validation.
ComplexVector mps_contract(const PureChainState& chain);

// Reduced system state after the recorded collisions.
DensityMatrix mps_reduced_system(const PureChainState& chain);

double mps_norm(const PureChainState& chain);

}  // namespace collide
