#include "collide/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace collide {

TensorSpace::TensorSpace(std::vector<std::string> labels_,
                         std::vector<Eigen::Index> dims_)
    : labels(std::move(labels_)), dims(std::move(dims_)) {
  if (labels.size() != dims.size())
    throw std::invalid_argument("TensorSpace: one label per dimension required");
  for (Eigen::Index d : dims)
    if (d < 2) throw std::invalid_argument("TensorSpace: subsystem dims must be >= 2");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j])
        throw std::invalid_argument("TensorSpace: duplicate label '" + labels[i] + "'");
}

Eigen::Index TensorSpace::dim() const {
  Eigen::Index d = 1;
  for (Eigen::Index s : dims) {
    d *= s;
    if (d > kDimensionCap) throw std::invalid_argument("space too large");
  }
  return d;
}

std::size_t TensorSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  throw std::invalid_argument("no such subsystem: '" + label + "'");
}

bool TensorSpace::has(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

TensorSpace qubit_space(const std::string& label) { return TensorSpace({label}, {2}); }

TensorSpace joint_space(const TensorSpace& a, const TensorSpace& b) {
  TensorSpace out = a;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
  return TensorSpace(out.labels, out.dims);  // re-validate uniqueness
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() * b.rows() > kDimensionCap || a.cols() * b.cols() > kDimensionCap)
    throw std::invalid_argument("space too large");
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, const TensorSpace& space,
                    const std::string& label) {
  const std::size_t pos = space.index_of(label);
  if (op.rows() != space.dims[pos] || op.cols() != space.dims[pos])
    throw std::invalid_argument("embed: operator does not fit subsystem '" + label + "'");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i == pos)
      out = kron(out, op);
    else
      out = kron(out, ComplexMatrix::Identity(space.dims[i], space.dims[i]));
  }
  return out;
}

namespace {

// Mixed-radix row/column index decomposition for partial traces.
std::vector<Eigen::Index> strides_of(const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

}  // namespace

ComplexMatrix embed_subset(const ComplexMatrix& op, const TensorSpace& space,
                           const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("embed_subset: no subsystems given");
  std::vector<std::size_t> active;
  active.reserve(labels.size());
  Eigen::Index active_dim = 1;
  for (const auto& label : labels) {
    const std::size_t pos = space.index_of(label);
    if (!active.empty() && pos <= active.back())
      throw std::invalid_argument("embed_subset: labels must follow the space order");
    active.push_back(pos);
    active_dim *= space.dims[pos];
  }
  if (op.rows() != active_dim || op.cols() != active_dim)
    throw std::invalid_argument("embed_subset: operator does not fit the chosen subsystems");

  const Eigen::Index total = space.dim();
  const auto strides = strides_of(space.dims);
  // For each flat index, precompute (active part, passive part) so the result
  // is op(active_r, active_c) * delta(passive_r, passive_c).
  std::vector<Eigen::Index> active_of(total), passive_of(total);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index rem = flat, act = 0, pas = 0;
    std::size_t next_active = 0;
    for (std::size_t s = 0; s < space.size(); ++s) {
      const Eigen::Index digit = rem / strides[s];
      rem %= strides[s];
      if (next_active < active.size() && s == active[next_active]) {
        act = act * space.dims[s] + digit;
        ++next_active;
      } else {
        pas = pas * space.dims[s] + digit;
      }
    }
    active_of[flat] = act;
    passive_of[flat] = pas;
  }

  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (Eigen::Index r = 0; r < total; ++r)
    for (Eigen::Index c = 0; c < total; ++c)
      if (passive_of[r] == passive_of[c]) out(r, c) = op(active_of[r], active_of[c]);
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const TensorSpace& space,
                            const std::vector<std::string>& keep) {
  const Eigen::Index total = space.dim();
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("partial_trace: matrix does not match space dimension");

  std::vector<bool> kept(space.size(), false);
  for (const auto& label : keep) kept[space.index_of(label)] = true;

  Eigen::Index keep_dim = 1, trace_dim = 1;
  std::vector<std::size_t> keep_idx, trace_idx;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (kept[i]) {
      keep_dim *= space.dims[i];
      keep_idx.push_back(i);
    } else {
      trace_dim *= space.dims[i];
      trace_idx.push_back(i);
    }
  }

  const auto strides = strides_of(space.dims);
  // Output index strides within the kept / traced groups, preserving order.
  auto group_offsets = [&](const std::vector<std::size_t>& group, Eigen::Index count) {
    // Enumerate all basis combinations of the group, returning flat offsets.
    std::vector<Eigen::Index> offsets(count, 0);
    std::vector<Eigen::Index> digits(group.size(), 0);
    for (Eigen::Index n = 0; n < count; ++n) {
      Eigen::Index off = 0;
      for (std::size_t g = 0; g < group.size(); ++g) off += digits[g] * strides[group[g]];
      offsets[n] = off;
      for (std::size_t g = group.size(); g-- > 0;) {
        if (++digits[g] < space.dims[group[g]]) break;
        digits[g] = 0;
      }
    }
    return offsets;
  };

  const auto keep_off = group_offsets(keep_idx, keep_dim);
  const auto trace_off = group_offsets(trace_idx, trace_dim);

  ComplexMatrix out = ComplexMatrix::Zero(keep_dim, keep_dim);
  for (Eigen::Index r = 0; r < keep_dim; ++r)
    for (Eigen::Index c = 0; c < keep_dim; ++c) {
      Complex sum = 0.0;
      for (Eigen::Index t = 0; t < trace_dim; ++t)
        sum += m(keep_off[r] + trace_off[t], keep_off[c] + trace_off[t]);
      out(r, c) = sum;
    }
  return out;
}

ComplexMatrix expm_unitary(const ComplexMatrix& h, double t) {
  if (!is_hermitian(h)) throw std::invalid_argument("not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd& ev = es.eigenvalues();
  ComplexVector phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -ev(i) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

ComplexMatrix pauli_z() {
  // Basis (|1>, |0>): sigma_z |1> = +|1>, so the +1 sits first.
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix sigma_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1;  // |1><0|
  return m;
}

ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1;  // |0><1|
  return m;
}

ComplexVector ket1() {
  ComplexVector v(2);
  v << 1, 0;
  return v;
}

ComplexVector ket0() {
  ComplexVector v(2);
  v << 0, 1;
  return v;
}

ComplexMatrix annihilation(Eigen::Index d) {
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

ComplexMatrix number_operator(Eigen::Index d) {
  ComplexMatrix n = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) n(k, k) = double(k);
  return n;
}

ComplexMatrix swap_operator(Eigen::Index d) {
  const Eigen::Index dd = d * d;
  ComplexMatrix s = ComplexMatrix::Zero(dd, dd);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1;
  return s;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(ComplexMatrix(m - m.adjoint())) <= tol;
}

}  // namespace collide
