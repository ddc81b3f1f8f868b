#include "collide/states.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace collide {

namespace {

void check_state(const ComplexMatrix& m, const TensorSpace& space) {
  if (m.rows() != m.cols() || m.rows() != space.dim())
    throw std::invalid_argument("not a state: matrix does not match space");
  if (!is_hermitian(m)) throw std::invalid_argument("not a state: not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > 1e-12 || std::abs(m.trace().imag()) > 1e-12)
    throw std::invalid_argument("not a state: trace != 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("not a state: negative eigenvalue");
}

}  // namespace

DensityMatrix DensityMatrix::create(ComplexMatrix m, TensorSpace space) {
  check_state(m, space);
  return DensityMatrix{std::move(m), std::move(space)};
}

DensityMatrix DensityMatrix::create_renormalized(ComplexMatrix m, TensorSpace space) {
  const double tr = m.trace().real();
  if (tr <= 0) throw std::invalid_argument("not a state: non-positive trace");
  m /= tr;
  return create(std::move(m), std::move(space));
}

DensityMatrix DensityMatrix::reduced(const std::vector<std::string>& keep) const {
  ComplexMatrix m = partial_trace(matrix, space, keep);
  std::vector<std::string> labels;
  std::vector<Eigen::Index> dims;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), space.labels[i]) != keep.end()) {
      labels.push_back(space.labels[i]);
      dims.push_back(space.dims[i]);
    }
  }
  // Guard against typos: every requested label must exist.
  for (const auto& k : keep) (void)space.index_of(k);
  return DensityMatrix{std::move(m), TensorSpace(labels, dims)};
}

DensityMatrix pure_state(const ComplexVector& psi, const TensorSpace& space) {
  const double n = psi.norm();
  if (n <= 0) throw std::invalid_argument("not a state: zero vector");
  ComplexVector v = psi / n;
  return DensityMatrix{v * v.adjoint(), space};
}

DensityMatrix qubit_density(const QubitParams& q) {
  if (q.p < 0.0 || q.p > 1.0) throw std::invalid_argument("not a state");
  const double r = (1 - 2 * q.p) * (1 - 2 * q.p) + 4 * std::norm(q.c);
  if (r > 1.0 + 1e-12) throw std::invalid_argument("not a state");
  ComplexMatrix m(2, 2);
  m << q.p, q.c, std::conj(q.c), 1.0 - q.p;
  return DensityMatrix{m, qubit_space()};
}

QubitParams qubit_params(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("qubit_params: not a qubit state");
  return QubitParams{rho.matrix(0, 0).real(), rho.matrix(0, 1)};
}

DensityMatrix thermal_state(const ComplexMatrix& h, double beta,
                            const TensorSpace& space) {
  if (beta < 0) throw std::invalid_argument("negative temperature not supported here");
  if (!is_hermitian(h)) throw std::invalid_argument("not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  // Shift by the ground energy before exponentiating so large beta stays finite.
  const Eigen::VectorXd ev = es.eigenvalues();
  const double e0 = ev.minCoeff();
  Eigen::VectorXd w = (-beta * (ev.array() - e0)).exp();
  w /= w.sum();
  ComplexMatrix m = es.eigenvectors() * w.cast<Complex>().asDiagonal() *
                    es.eigenvectors().adjoint();
  return DensityMatrix{std::move(m), space};
}

DensityMatrix coherent_bin_state(Complex alpha_n, double dt, Eigen::Index d) {
  if (d < 2) throw std::invalid_argument("coherent_bin_state: d must be >= 2");
  if (dt <= 0) throw std::invalid_argument("coherent_bin_state: dt must be > 0");
  const Complex a = alpha_n * std::sqrt(dt);
  // Unnormalized Fock amplitudes a^k / sqrt(k!).
  ComplexVector amp(d);
  amp(0) = 1.0;
  for (Eigen::Index k = 1; k < d; ++k) amp(k) = amp(k - 1) * a / std::sqrt(double(k));
  // Tail mass of the untruncated state above the last level.
  const double mean = std::norm(a);
  double kept = 0.0, term = std::exp(-mean);
  for (Eigen::Index k = 0; k < d; ++k) {
    kept += term;
    term *= mean / double(k + 1);
  }
  if (1.0 - kept > 1e-8) throw std::invalid_argument("truncation too small");
  amp /= amp.norm();
  return pure_state(amp, TensorSpace({"bin"}, {d}));
}

DensityMatrix ancilla_density(const AncillaSpec& spec, const TensorSpace& space) {
  return std::visit(
      [&](const auto& s) -> DensityMatrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PureVector>) {
          return pure_state(s.amplitudes, space);
        } else if constexpr (std::is_same_v<T, ThermalQubit>) {
          return thermal_state(s.omega0 * (ComplexMatrix(2, 2) << 1, 0, 0, 0).finished(),
                               s.beta, space);
        } else if constexpr (std::is_same_v<T, ThermalOscillator>) {
          DensityMatrix rho = thermal_state(s.omega0 * number_operator(s.d), s.beta,
                                            space);
          // Thermal weight stranded above the truncation must be negligible.
          const double tail = rho.matrix(s.d - 1, s.d - 1).real() +
                              rho.matrix(s.d - 2, s.d - 2).real();
          if (tail > 1e-8) throw std::invalid_argument("truncation too small");
          return rho;
        } else if constexpr (std::is_same_v<T, CoherentBin>) {
          DensityMatrix rho = coherent_bin_state(s.alpha_n, s.dt, s.d);
          rho.space = space;
          return rho;
        } else {
          throw std::invalid_argument(
              "ancilla_density: spec describes moments or a correlated chain, "
              "not a single-bin state");
        }
      },
      spec);
}

Eigen::Index ancilla_dim(const AncillaSpec& spec) {
  return std::visit(
      [](const auto& s) -> Eigen::Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PureVector>)
          return s.amplitudes.size();
        else if constexpr (std::is_same_v<T, ThermalQubit>)
          return 2;
        else if constexpr (std::is_same_v<T, ThermalOscillator>)
          return s.d;
        else if constexpr (std::is_same_v<T, CoherentBin>)
          return s.d;
        else if constexpr (std::is_same_v<T, GaussianMoments>)
          return 2;
        else
          return 2;
      },
      spec);
}

namespace {

// Eigenvalues below this are treated as exact zeros in entropy sums.
constexpr double kEigenvalueFloor = 1e-14;

Eigen::VectorXd state_spectrum(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double entropy(const DensityMatrix& rho) {
  const Eigen::VectorXd ev = state_spectrum(rho.matrix);
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > kEigenvalueFloor) s -= ev(i) * std::log(ev(i));
  return s;
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& rho_prime) {
  if (rho.dim() != rho_prime.dim())
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  // S(rho || rho') = Tr{rho log rho} - Tr{rho log rho'}, evaluated in the
  // eigenbasis of each operator. Support violation signals "infinite".
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ea(rho.matrix);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eb(rho_prime.matrix);
  const Eigen::VectorXd pa = ea.eigenvalues();
  const Eigen::VectorXd pb = eb.eigenvalues();

  double s = 0.0;
  for (Eigen::Index i = 0; i < pa.size(); ++i)
    if (pa(i) > kEigenvalueFloor) s += pa(i) * std::log(pa(i));

  // Overlap of rho with each eigenvector of rho'.
  for (Eigen::Index j = 0; j < pb.size(); ++j) {
    const ComplexVector v = eb.eigenvectors().col(j);
    const double w = (v.adjoint() * rho.matrix * v)(0).real();
    if (pb(j) > kEigenvalueFloor) {
      if (w > kEigenvalueFloor) s -= w * std::log(pb(j));
    } else if (w > 1e-12) {
      return std::numeric_limits<double>::infinity();  // relative entropy infinite
    }
  }
  return s;
}

double mutual_information(const DensityMatrix& rho_ab,
                          const std::vector<std::string>& part_a) {
  std::vector<std::string> part_b;
  for (const auto& label : rho_ab.space.labels)
    if (std::find(part_a.begin(), part_a.end(), label) == part_a.end())
      part_b.push_back(label);
  if (part_a.empty() || part_b.empty())
    throw std::invalid_argument("mutual_information: split must be proper");
  return entropy(rho_ab.reduced(part_a)) + entropy(rho_ab.reduced(part_b)) -
         entropy(rho_ab);
}

}  // namespace collide
