#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace collide {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex I_UNIT{0.0, 1.0};

// Hard cap on tensor-product dimensions; anything larger is almost certainly
// a runaway kron chain rather than a deliberate simulation.
inline constexpr Eigen::Index kDimensionCap = 1 << 16;

// Ordered, labeled factorization of a Hilbert space into subsystems.
// Subsystem 0 is the leftmost kron factor.
struct TensorSpace {
  std::vector<std::string> labels;
  std::vector<Eigen::Index> dims;

  TensorSpace() = default;
  TensorSpace(std::vector<std::string> labels_, std::vector<Eigen::Index> dims_);

  Eigen::Index dim() const;
  std::size_t size() const { return dims.size(); }
  // Position of a labeled subsystem; throws "no such subsystem" if absent.
  std::size_t index_of(const std::string& label) const;
  bool has(const std::string& label) const;
};

// Convenience builders for the spaces used throughout.
TensorSpace qubit_space(const std::string& label = "S");
TensorSpace joint_space(const TensorSpace& a, const TensorSpace& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Embed a single-subsystem operator into the full space (identity elsewhere).
ComplexMatrix embed(const ComplexMatrix& op, const TensorSpace& space,
                    const std::string& label);

// Embed an operator acting jointly on several subsystems (identity on the
// rest). The labels must be listed in the order the subsystems appear in
// `space`, and the operator's factors must follow that same order.
ComplexMatrix embed_subset(const ComplexMatrix& op, const TensorSpace& space,
                           const std::vector<std::string>& labels);

// Trace out every subsystem whose label is not in `keep`. The result is
// ordered by the original subsystem order restricted to `keep`.
ComplexMatrix partial_trace(const ComplexMatrix& m, const TensorSpace& space,
                            const std::vector<std::string>& keep);

// exp(-i h t) for Hermitian h, via eigendecomposition so the result is
// unitary up to rounding.
ComplexMatrix expm_unitary(const ComplexMatrix& h, double t);

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// Qubit operators in basis order (|1>, |0>), excited state first.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix sigma_plus();   // |1><0|
ComplexMatrix sigma_minus();  // |0><1|
ComplexVector ket1();
ComplexVector ket0();

// Oscillator ladder operators on a d-level Fock space, basis |0>..|d-1>.
ComplexMatrix annihilation(Eigen::Index d);
ComplexMatrix number_operator(Eigen::Index d);

// Swap unitary on H ⊗ H (both factors of dimension d).
ComplexMatrix swap_operator(Eigen::Index d);

double max_abs(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);

}  // namespace collide
