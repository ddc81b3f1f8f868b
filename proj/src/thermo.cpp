#include "collide/thermo.hpp"

#include <cmath>
#include <stdexcept>

namespace collide {

namespace {

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a * b).trace().real();
}

// System Hamiltonian in force during step n; n = 0 means before the run.
ComplexMatrix drive_hamiltonian(const CollisionModelSpec& spec,
                                const DriveProtocol* drive, int n) {
  if (drive && drive->H_S) return drive->H_S(n);
  if (spec.H_S.size() == 0) {
    const Eigen::Index d = spec.system.dim();
    return ComplexMatrix::Zero(d, d);
  }
  return spec.H_S;
}

}  // namespace

LedgerRow step_energetics(const StepRecord& record, const DensityMatrix& rho_prev,
                          const CollisionModelSpec& spec, const DriveProtocol* drive) {
  if (record.joint.matrix.size() == 0)
    throw std::invalid_argument("joint state not retained");
  const int n = record.index;
  if (n < 1) throw std::invalid_argument("record carries no step index");

  const ComplexMatrix H_now = drive_hamiltonian(spec, drive, n);
  const ComplexMatrix H_before = drive_hamiltonian(spec, drive, n - 1);
  const StepOperators ops = step_operators(spec, n, &H_now);
  const StepOperators next = step_operators(spec, n + 1);

  LedgerRow row;
  row.n = n;
  row.dE_S = real_trace_product(H_now, record.rho.matrix) -
             real_trace_product(H_before, rho_prev.matrix);
  // Switching the drive happens before the collision, on the old state.
  row.dW_d = real_trace_product(ComplexMatrix(H_now - H_before), rho_prev.matrix);

  // Heat = energy lost by each ancilla, read from its own marginal.
  for (std::size_t i = 0; i < ops.bath_labels.size(); ++i) {
    const DensityMatrix used = record.eta_out.reduced({ops.bath_labels[i]});
    const DensityMatrix fresh = ops.eta.reduced({ops.bath_labels[i]});
    const double dq = -real_trace_product(ops.bath_hamiltonians[i],
                                          ComplexMatrix(used.matrix - fresh.matrix));
    row.dQ_bath.push_back(dq);
    row.dQ_total += dq;
  }

  // Interaction energy right after coupling to the current / the next ancilla.
  const double coupling_before =
      real_trace_product(ops.V, kron(rho_prev.matrix, ops.eta.matrix));
  const double coupling_after =
      real_trace_product(next.V, kron(record.rho.matrix, next.eta.matrix));
  row.dEp_S = coupling_after - coupling_before;
  // Swapping ancillas discards the built-up system-ancilla coupling energy
  // and pays for establishing the fresh one.
  row.dW_sw = coupling_after - real_trace_product(ops.V, record.joint.matrix);

  const EntropyProduction ent = entropy_production(rho_prev, ops.eta, record.joint);
  row.Sigma = ent.Sigma;
  row.I_Sn = ent.I_Sn;
  row.Srel_anc = ent.Srel_anc;
  row.dS_S = ent.dS_S;
  row.dS_anc = ent.dS_anc;
  row.srel_infinite = ent.infinite;
  row.residual_first_law = first_law_residual(row);
  return row;
}

double first_law_residual(const LedgerRow& row) {
  return row.dE_S + row.dEp_S - row.dQ_total - row.dW_d - row.dW_sw;
}

EntropyProduction entropy_production(const DensityMatrix& rho_prev,
                                     const DensityMatrix& eta,
                                     const DensityMatrix& joint_post) {
  const DensityMatrix rho_n = joint_post.reduced(rho_prev.space.labels);
  const DensityMatrix eta_out = joint_post.reduced(eta.space.labels);
  const DensityMatrix product =
      DensityMatrix::create(kron(rho_n.matrix, eta.matrix), joint_post.space);

  EntropyProduction out;
  out.Sigma = relative_entropy(joint_post, product);
  out.I_Sn = mutual_information(joint_post, rho_prev.space.labels);
  out.Srel_anc = relative_entropy(eta_out, eta);
  out.dS_S = entropy(rho_n) - entropy(rho_prev);
  out.dS_anc = entropy(eta_out) - entropy(eta);
  out.infinite = std::isinf(out.Sigma) || std::isinf(out.Srel_anc);
  return out;
}

LawMargins second_law_and_landauer(const LedgerRow& row, double beta) {
  const double margin = row.dS_S - beta * row.dQ_total;
  return {margin, margin};
}

double landauer_margin_rate(double p, double beta, double omega0, double gamma_up) {
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("population must lie strictly between 0 and 1");
  const double x = std::exp(beta * omega0);
  return gamma_up * (beta * omega0 + std::log(p / (1.0 - p))) * ((1.0 + x) * p - 1.0);
}

TwoBathSteady two_bath_steady(double gamma1, double gamma2, double beta1,
                              double beta2, double omega0) {
  if (gamma1 <= 0.0 || gamma2 <= 0.0)
    throw std::invalid_argument("bath rates must be positive");
  if (omega0 <= 0.0) throw std::invalid_argument("omega0 must be positive");
  const double n1 = 1.0 / std::expm1(beta1 * omega0);
  const double n2 = 1.0 / std::expm1(beta2 * omega0);
  const double up = gamma1 * n1 + gamma2 * n2;                    // absorption
  const double down = gamma1 * (n1 + 1.0) + gamma2 * (n2 + 1.0);  // emission

  TwoBathSteady out;
  out.beta_eff = std::log(down / up) / omega0;
  out.current = omega0 * gamma1 * gamma2 * (n1 - n2) /
                (gamma1 + gamma2 + 2.0 * (gamma1 * n1 + gamma2 * n2));
  return out;
}

ThermoRun run_with_ledger(const CollisionModelSpec& spec, const DensityMatrix& rho0,
                          int n_steps, const DriveProtocol* drive) {
  if (std::holds_alternative<Cascaded>(spec.variant))
    throw std::invalid_argument("cascaded models are not supported by the energy ledger");
  if (spec.dt <= 0.0) throw std::invalid_argument("collision duration must be positive");
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  if (rho0.dim() != spec.system.dim())
    throw std::invalid_argument("dimension mismatch: initial state does not fit the system space");

  ThermoRun out;
  out.records.reserve(std::size_t(n_steps));
  out.ledger.reserve(std::size_t(n_steps));
  DensityMatrix rho = rho0;
  for (int n = 1; n <= n_steps; ++n) {
    const ComplexMatrix H_now = drive_hamiltonian(spec, drive, n);
    const StepOperators ops = step_operators(spec, n, &H_now);
    StepRecord rec = collide(rho, ops.eta, expm_unitary(ops.total_hamiltonian(), spec.dt));
    rec.index = n;
    out.ledger.push_back(step_energetics(rec, rho, spec, drive));
    rho = rec.rho;
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace collide
