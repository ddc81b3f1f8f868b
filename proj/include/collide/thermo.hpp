#pragma once

#include "collide/collision.hpp"

namespace collide {

// Per-collision energy and entropy bookkeeping.
//
// Sign conventions: heat is counted positive when it flows INTO the system
// (the ancilla loses energy), work is positive when done ON the system. With
// those signs every row satisfies
//
//   dE_S + dEp_S = dQ_total + dW_d + dW_sw
//
// exactly, provided the collision unitary was generated by the same
// Hamiltonian pieces the row is priced against (run_with_ledger guarantees
// that even under a drive protocol).
struct LedgerRow {
  int n = 0;                    // collision number, 1-based
  double dE_S = 0.0;            // bare system energy change
  double dEp_S = 0.0;           // interaction energy change (next minus current coupling)
  std::vector<double> dQ_bath;  // heat drawn from each bath channel
  double dQ_total = 0.0;
  double dW_d = 0.0;            // work of changing the drive between steps
  double dW_sw = 0.0;           // work of swapping the spent ancilla for a fresh one
  double Sigma = 0.0;           // entropy production of the collision
  double I_Sn = 0.0;            // post-collision system-ancilla mutual information
  double Srel_anc = 0.0;        // relative entropy of the used ancilla to a fresh one
  double dS_S = 0.0;            // system entropy change
  double dS_anc = 0.0;          // ancilla entropy change
  bool srel_infinite = false;   // support mismatch: Sigma and Srel_anc diverge
  double residual_first_law = 0.0;
};
using ThermoLedger = std::vector<LedgerRow>;

// Step-indexed system Hamiltonian, evaluated piecewise-constant per collision.
// Index 0 is the Hamiltonian in force before the first collision; the work of
// switching from H_S(n-1) to H_S(n) is charged at the start of step n.
struct DriveProtocol {
  std::function<ComplexMatrix(int)> H_S;
};

// Energy bookkeeping for one finished collision. `record` must retain the
// joint post-collision state, `rho_prev` is the system state the collision
// started from. The fresh ancilla and coupling of step n+1 are read from the
// spec, so inhomogeneous models are priced with the operators actually used.
LedgerRow step_energetics(const StepRecord& record, const DensityMatrix& rho_prev,
                          const CollisionModelSpec& spec,
                          const DriveProtocol* drive = nullptr);

// dE_S + dEp_S - dQ_total - dW_d - dW_sw; an identity up to roundoff.
double first_law_residual(const LedgerRow& row);

// Irreversibility bookkeeping of one collision.
struct EntropyProduction {
  double Sigma = 0.0;       // relative entropy of the joint state to rho_n (x) eta
  double I_Sn = 0.0;        // mutual information of the joint state
  double Srel_anc = 0.0;    // relative entropy of the used ancilla to a fresh one
  double dS_S = 0.0;
  double dS_anc = 0.0;
  bool infinite = false;    // support violation; the decomposition has no finite value
};

// Sigma = S(joint || rho_n (x) eta). The decomposition
// Sigma = I_Sn + Srel_anc = dS_S + dS_anc + Srel_anc holds whenever the
// quantities are finite. The reference product uses the POST-collision system
// marginal together with the fresh ancilla state.
EntropyProduction entropy_production(const DensityMatrix& rho_prev,
                                     const DensityMatrix& eta,
                                     const DensityMatrix& joint_post);

// Left-minus-right margins of the two per-step inequalities against a thermal
// ancilla at inverse temperature beta. Both are the same number: the second
// law reads dS_S - beta*dQ >= 0, the bound on erasure reads
// beta*(-dQ) - (-dS_S) >= 0, which is the identical expression.
struct LawMargins {
  double second_law = 0.0;
  double landauer = 0.0;
};
LawMargins second_law_and_landauer(const LedgerRow& row, double beta);

// Closed-form rate of the erasure margin along a single-bath thermal
// relaxation: beta*dQ~/dt - dS~/dt = -pdot * (beta*omega0 + log(p/(1-p)))
// with pdot = gamma_up*(1-p) - gamma_down*p and detailed balance
// gamma_down = gamma_up * e^{beta*omega0} folded in.
double landauer_margin_rate(double p, double beta, double omega0, double gamma_up);

// Steady state of a qubit weakly coupled to two thermal oscillator baths:
// effective inverse temperature and the stationary heat current drawn from
// bath 1 (equal and opposite to bath 2's).
struct TwoBathSteady {
  double beta_eff = 0.0;
  double current = 0.0;
};
TwoBathSteady two_bath_steady(double gamma1, double gamma2, double beta1,
                              double beta2, double omega0);

// run() plus a ledger row per collision. The drive protocol, when given,
// replaces the spec's system Hamiltonian step by step, both in the generated
// unitaries and in the bookkeeping, so the first-law residual stays an
// identity. Cascaded models are rejected (their two-stage clock prices
// energies differently).
struct ThermoRun {
  std::vector<StepRecord> records;
  ThermoLedger ledger;
};
ThermoRun run_with_ledger(const CollisionModelSpec& spec, const DensityMatrix& rho0,
                          int n_steps, const DriveProtocol* drive = nullptr);

}  // namespace collide
