#include "cvrep/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cvrep/simd.hpp"

namespace cvrep {
namespace {

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

// out[new index] = in[old index] where new axis k is old axis perm[k].
std::vector<cplx> permute(std::span<const cplx> in, const std::vector<int>& dims,
                          const std::vector<int>& perm) {
  const int rank = static_cast<int>(dims.size());
  bool identity = true;
  for (int k = 0; k < rank; ++k) identity = identity && perm[k] == k;
  if (identity) return {in.begin(), in.end()};

  const auto old_stride = strides_of(dims);
  std::vector<int> nd(rank);
  for (int k = 0; k < rank; ++k) nd[k] = dims[perm[k]];

  std::vector<cplx> out(in.size());
  const std::size_t inner = nd[rank - 1];
  const std::size_t inner_stride = old_stride[perm[rank - 1]];
  std::vector<int> idx(rank, 0);
  std::size_t off = 0, pos = 0;
  while (true) {
    for (std::size_t t = 0; t < inner; ++t) out[pos++] = in[off + t * inner_stride];
    int k = rank - 2;
    for (; k >= 0; --k) {
      ++idx[k];
      off += old_stride[perm[k]];
      if (idx[k] < nd[k]) break;
      off -= old_stride[perm[k]] * nd[k];
      idx[k] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

// Fixes tensor axis `axis` to `value` and drops it.
std::vector<cplx> select(std::span<const cplx> in, const std::vector<int>& dims, int axis, int value) {
  std::size_t outer = 1, inner = 1;
  for (int k = 0; k < axis; ++k) outer *= dims[k];
  for (int k = axis + 1; k < static_cast<int>(dims.size()); ++k) inner *= dims[k];
  const std::size_t d = dims[axis];
  std::vector<cplx> out(outer * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    const cplx* src = in.data() + (o * d + value) * inner;
    std::copy(src, src + inner, out.data() + o * inner);
  }
  return out;
}

// Contracts op (rows over out_axis_dims, cols over dims[axes]) into the listed
// axes. The contracted axes keep their positions.
std::vector<cplx> contract(std::span<const cplx> in, const std::vector<int>& dims,
                           const std::vector<int>& axes, const Eigen::MatrixXcd& op,
                           const std::vector<int>& out_axis_dims, bool conjugate,
                           std::vector<int>& new_dims) {
  const int rank = static_cast<int>(dims.size());
  std::vector<int> perm(axes);
  std::vector<bool> used(rank, false);
  for (int a : axes) used[a] = true;
  for (int k = 0; k < rank; ++k)
    if (!used[k]) perm.push_back(k);

  std::size_t in_dim = 1, out_dim = 1;
  for (int a : axes) in_dim *= dims[a];
  for (int d : out_axis_dims) out_dim *= d;
  if (static_cast<std::size_t>(op.cols()) != in_dim || static_cast<std::size_t>(op.rows()) != out_dim) {
    throw std::invalid_argument("mode operator shape does not match the addressed modes");
  }

  const auto moved = permute(in, dims, perm);
  const std::size_t rest = in.size() / in_dim;
  std::vector<cplx> out(out_dim * rest, cplx{0.0, 0.0});
  const auto& kern = simd::active();
  for (std::size_t r = 0; r < out_dim; ++r) {
    for (std::size_t c = 0; c < in_dim; ++c) {
      cplx m = op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (m == cplx{0.0, 0.0}) continue;
      if (conjugate) m = std::conj(m);
      kern.caxpy(m, moved.data() + c * rest, out.data() + r * rest, rest);
    }
  }

  std::vector<int> moved_dims(out_axis_dims);
  for (int k = 0; k < rank; ++k)
    if (!used[k]) moved_dims.push_back(dims[k]);
  std::vector<int> inverse(rank);
  for (int k = 0; k < rank; ++k) inverse[perm[k]] = k;
  new_dims.assign(rank, 0);
  for (int k = 0; k < rank; ++k) new_dims[k] = moved_dims[inverse[k]];
  return permute(out, moved_dims, inverse);
}

std::vector<int> dims_of(const std::vector<int>& cutoffs) {
  std::vector<int> d(cutoffs.size());
  for (std::size_t k = 0; k < cutoffs.size(); ++k) d[k] = cutoffs[k] + 1;
  return d;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// (i s)^p as a complex number; integer powers of i are exact.
cplx i_power(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double ipow(double x, int p) { return p == 0 ? 1.0 : std::pow(x, p); }

}  // namespace

FockArray::FockArray(std::vector<int> cutoffs, StateKind kind) : cutoffs_(std::move(cutoffs)), kind_(kind) {
  if (cutoffs_.empty()) throw std::invalid_argument("FockArray needs at least one mode");
  for (int c : cutoffs_)
    if (c < 0) throw std::invalid_argument("Fock cutoff must be non-negative");
  const std::size_t d = hilbert_dim();
  data_.assign(kind_ == StateKind::pure ? d : d * d, cplx{0.0, 0.0});
}

FockArray FockArray::vacuum(std::vector<int> cutoffs, StateKind kind) {
  return number_state(cutoffs, std::vector<int>(cutoffs.size(), 0), kind);
}

FockArray FockArray::number_state(std::vector<int> cutoffs, std::vector<int> occupation, StateKind kind) {
  if (occupation.size() != cutoffs.size()) throw std::invalid_argument("occupation/cutoff size mismatch");
  FockArray s(std::move(cutoffs), kind);
  std::size_t flat = 0;
  for (int k = 0; k < s.num_modes(); ++k) {
    if (occupation[k] < 0 || occupation[k] > s.cutoffs_[k]) {
      throw std::invalid_argument("occupation above cutoff on mode " + std::to_string(k));
    }
    flat = flat * (s.cutoffs_[k] + 1) + occupation[k];
  }
  const std::size_t d = s.hilbert_dim();
  s.data_[kind == StateKind::pure ? flat : flat * d + flat] = 1.0;
  return s;
}

FockArray FockArray::from_amplitudes(std::vector<int> cutoffs, std::vector<cplx> amplitudes) {
  FockArray s(std::move(cutoffs), StateKind::pure);
  if (amplitudes.size() != s.data_.size()) throw std::invalid_argument("amplitude count mismatch");
  s.data_ = std::move(amplitudes);
  return s;
}

FockArray FockArray::from_density(std::vector<int> cutoffs, std::vector<cplx> elements) {
  FockArray s(std::move(cutoffs), StateKind::density);
  if (elements.size() != s.data_.size()) throw std::invalid_argument("density element count mismatch");
  s.data_ = std::move(elements);
  return s;
}

std::size_t FockArray::hilbert_dim() const {
  std::size_t d = 1;
  for (int c : cutoffs_) d *= static_cast<std::size_t>(c + 1);
  return d;
}

std::vector<int> FockArray::tensor_dims() const {
  auto d = dims_of(cutoffs_);
  if (kind_ == StateKind::density) {
    const auto ket = d;
    d.insert(d.end(), ket.begin(), ket.end());
  }
  return d;
}

int FockArray::check(Mode m) const {
  if (m.index < 0 || m.index >= num_modes()) {
    throw std::out_of_range("mode index " + std::to_string(m.index) + " out of range");
  }
  return m.index;
}

namespace {
std::size_t flat_index(const std::vector<int>& cutoffs, std::span<const int> occ) {
  if (occ.size() != cutoffs.size()) throw std::invalid_argument("occupation rank mismatch");
  std::size_t f = 0;
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    if (occ[k] < 0 || occ[k] > cutoffs[k]) throw std::out_of_range("occupation above cutoff");
    f = f * (cutoffs[k] + 1) + occ[k];
  }
  return f;
}
}  // namespace

cplx FockArray::amplitude(std::span<const int> occupation) const {
  if (!is_pure()) throw std::logic_error("amplitude() requires a pure state");
  return data_[flat_index(cutoffs_, occupation)];
}

cplx FockArray::element(std::span<const int> ket, std::span<const int> bra) const {
  const std::size_t k = flat_index(cutoffs_, ket), b = flat_index(cutoffs_, bra);
  if (is_pure()) return data_[k] * std::conj(data_[b]);
  return data_[k * hilbert_dim() + b];
}

double FockArray::trace() const {
  if (is_pure()) return simd::norm2(data_);
  const std::size_t d = hilbert_dim();
  double t = 0.0;
  for (std::size_t k = 0; k < d; ++k) t += data_[k * d + k].real();
  return t;
}

std::vector<double> FockArray::photon_distribution(Mode m) const {
  const int mode = check(m);
  const auto dims = dims_of(cutoffs_);
  const auto stride = strides_of(dims);
  const std::size_t d = hilbert_dim();
  std::vector<double> p(dims[mode], 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const int n = static_cast<int>((k / stride[mode]) % dims[mode]);
    p[n] += is_pure() ? std::norm(data_[k]) : data_[k * d + k].real();
  }
  return p;
}

double FockArray::top_level_mass(Mode m) const { return photon_distribution(m).back(); }

FockArray tensor_product(const FockArray& a, const FockArray& b) {
  if (a.kind() != b.kind()) throw std::invalid_argument("tensor_product of pure and density inputs");
  std::vector<int> cut(a.cutoffs());
  cut.insert(cut.end(), b.cutoffs().begin(), b.cutoffs().end());
  FockArray out(cut, a.kind());
  auto o = out.data();
  const auto da = a.data(), db = b.data();
  if (a.is_pure()) {
    for (std::size_t i = 0; i < da.size(); ++i) {
      if (da[i] == cplx{}) continue;
      simd::caxpy(da[i], db, o.subspan(i * db.size(), db.size()));
    }
  } else {
    const std::size_t d1 = a.hilbert_dim(), d2 = b.hilbert_dim(), d = d1 * d2;
    for (std::size_t k1 = 0; k1 < d1; ++k1)
      for (std::size_t b1 = 0; b1 < d1; ++b1) {
        const cplx v = da[k1 * d1 + b1];
        if (v == cplx{}) continue;
        for (std::size_t k2 = 0; k2 < d2; ++k2) {
          simd::caxpy(v, db.subspan(k2 * d2, d2), o.subspan((k1 * d2 + k2) * d + b1 * d2, d2));
        }
      }
  }
  out.add_discarded_mass(a.discarded_mass() * b.trace() + b.discarded_mass() * a.trace());
  return out;
}

FockArray to_density(const FockArray& s) {
  if (!s.is_pure()) return s;
  FockArray out(s.cutoffs(), StateKind::density);
  const auto psi = s.data();
  auto o = out.data();
  const std::size_t d = psi.size();
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t b = 0; b < d; ++b) o[k * d + b] = psi[k] * std::conj(psi[b]);
  }
  out.add_discarded_mass(s.discarded_mass());
  return out;
}

FockArray normalized(const FockArray& s) {
  const double t = s.trace();
  if (!(t > 0.0)) throw std::domain_error("cannot normalize a state with zero trace");
  FockArray out = s.is_pure() ? FockArray::from_amplitudes(s.cutoffs(), {s.data().begin(), s.data().end()})
                              : FockArray::from_density(s.cutoffs(), {s.data().begin(), s.data().end()});
  simd::cscale(cplx{s.is_pure() ? 1.0 / std::sqrt(t) : 1.0 / t, 0.0}, out.data());
  out.add_discarded_mass(s.discarded_mass() / t);
  return out;
}

FockArray permute_modes(const FockArray& s, std::span<const int> order) {
  const int m = s.num_modes();
  if (static_cast<int>(order.size()) != m) throw std::invalid_argument("mode order has wrong length");
  std::vector<bool> seen(m, false);
  for (int k : order) {
    if (k < 0 || k >= m || seen[k]) throw std::invalid_argument("mode order is not a permutation");
    seen[k] = true;
  }
  std::vector<int> perm(order.begin(), order.end());
  if (!s.is_pure())
    for (int k = 0; k < m; ++k) perm.push_back(order[k] + m);
  std::vector<int> cut(m);
  for (int k = 0; k < m; ++k) cut[k] = s.cutoffs()[order[k]];
  auto data = permute(s.data(), s.tensor_dims(), perm);
  FockArray out = s.is_pure() ? FockArray::from_amplitudes(cut, std::move(data))
                              : FockArray::from_density(cut, std::move(data));
  out.add_discarded_mass(s.discarded_mass());
  return out;
}

Eigen::MatrixXcd beamsplitter_matrix(double transmissivity, int in_cut_i, int in_cut_j, int out_cut_i,
                                     int out_cut_j) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw std::invalid_argument("beamsplitter transmissivity must lie in [0, 1]");
  }
  const double c = std::sqrt(transmissivity), s = std::sqrt(1.0 - transmissivity);
  const int di = in_cut_j + 1;
  const int dout = out_cut_j + 1;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero((out_cut_i + 1) * dout, (in_cut_i + 1) * di);
  // a^dag -> c a^dag + i s b^dag,  b^dag -> i s a^dag + c b^dag
  for (int n = 0; n <= in_cut_i; ++n) {
    for (int m = 0; m <= in_cut_j; ++m) {
      const int total = n + m;
      for (int p = 0; p <= n; ++p) {
        for (int q = 0; q <= m; ++q) {
          const int k = p + q;
          if (k > out_cut_i || total - k > out_cut_j) continue;
          const double mag = binomial(n, p) * binomial(m, q) * ipow(c, p + m - q) * ipow(s, n - p + q) *
                             std::exp(0.5 * (log_factorial(k) + log_factorial(total - k) - log_factorial(n) -
                                             log_factorial(m)));
          if (mag == 0.0) continue;
          u(k * dout + (total - k), n * di + m) += mag * i_power(n - p + q);
        }
      }
    }
  }
  return u;
}

FockArray apply_mode_operator(const FockArray& s, std::span<const Mode> modes, const Eigen::MatrixXcd& op,
                              std::span<const int> out_cutoffs) {
  if (modes.size() != out_cutoffs.size()) throw std::invalid_argument("one output cutoff per mode");
  const int m = s.num_modes();
  std::vector<int> axes, out_dims, cut(s.cutoffs());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const int idx = s.check(modes[k]);
    for (int a : axes)
      if (a == idx) throw std::invalid_argument("mode listed twice");
    axes.push_back(idx);
    out_dims.push_back(out_cutoffs[k] + 1);
    cut[idx] = out_cutoffs[k];
  }
  std::vector<int> dims = s.tensor_dims(), new_dims;
  auto data = contract(s.data(), dims, axes, op, out_dims, false, new_dims);
  if (s.is_pure()) {
    FockArray out = FockArray::from_amplitudes(cut, std::move(data));
    out.add_discarded_mass(s.discarded_mass());
    return out;
  }
  std::vector<int> bra_axes;
  for (int a : axes) bra_axes.push_back(a + m);
  std::vector<int> final_dims;
  data = contract(data, new_dims, bra_axes, op, out_dims, true, final_dims);
  FockArray out = FockArray::from_density(cut, std::move(data));
  out.add_discarded_mass(s.discarded_mass());
  return out;
}

FockArray apply_channel(const FockArray& s, Mode i, const Eigen::MatrixXcd& superop, int out_cutoff) {
  const int mode = s.check(i);
  const FockArray rho = to_density(s);
  const int m = rho.num_modes();
  std::vector<int> cut(rho.cutoffs()), new_dims;
  cut[mode] = out_cutoff;
  const std::vector<int> axes{mode, mode + m};
  const std::vector<int> out_dims{out_cutoff + 1, out_cutoff + 1};
  auto data = contract(rho.data(), rho.tensor_dims(), axes, superop, out_dims, false, new_dims);
  FockArray out = FockArray::from_density(cut, std::move(data));
  out.add_discarded_mass(s.discarded_mass() + (rho.trace() - out.trace()));
  return out;
}

FockArray apply_beamsplitter(const FockArray& s, Mode i, Mode j, double transmissivity, BeamsplitterCutoffs cut) {
  if (s.check(i) == s.check(j)) throw std::invalid_argument("beamsplitter needs two distinct modes");
  const int oi = cut.out_i < 0 ? s.cutoff(i) : cut.out_i;
  const int oj = cut.out_j < 0 ? s.cutoff(j) : cut.out_j;
  const auto u = beamsplitter_matrix(transmissivity, s.cutoff(i), s.cutoff(j), oi, oj);
  const std::array<Mode, 2> modes{i, j};
  const std::array<int, 2> outs{oi, oj};
  const double before = s.trace();
  FockArray out = apply_mode_operator(s, modes, u, outs);
  // The full beamsplitter is unitary, so lost trace is exactly the overflow.
  out.add_discarded_mass(before - out.trace());
  return out;
}

FockArray apply_phase(const FockArray& s, Mode i, double phi) {
  const int mode = s.check(i);
  const auto dims = dims_of(s.cutoffs());
  const auto stride = strides_of(dims);
  const std::size_t d = s.hilbert_dim();
  std::vector<cplx> phase(dims[mode]);
  for (int n = 0; n < dims[mode]; ++n) phase[n] = std::polar(1.0, n * phi);
  FockArray out = s;
  auto o = out.data();
  if (s.is_pure()) {
    for (std::size_t k = 0; k < d; ++k) o[k] *= phase[(k / stride[mode]) % dims[mode]];
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      const cplx pk = phase[(k / stride[mode]) % dims[mode]];
      for (std::size_t b = 0; b < d; ++b) o[k * d + b] *= pk * std::conj(phase[(b / stride[mode]) % dims[mode]]);
    }
  }
  return out;
}

FockArray partial_trace(const FockArray& s, std::span<const Mode> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept mode");
  const int m = s.num_modes();
  std::vector<bool> kept(m, false);
  std::vector<int> keep_idx, trace_idx, cut;
  for (Mode k : keep) {
    const int idx = s.check(k);
    if (kept[idx]) throw std::invalid_argument("mode kept twice");
    kept[idx] = true;
    keep_idx.push_back(idx);
    cut.push_back(s.cutoffs()[idx]);
  }
  for (int k = 0; k < m; ++k)
    if (!kept[k]) trace_idx.push_back(k);

  std::size_t kd = 1, td = 1;
  for (int k : keep_idx) kd *= s.cutoffs()[k] + 1;
  for (int k : trace_idx) td *= s.cutoffs()[k] + 1;

  FockArray out(cut, StateKind::density);
  auto o = out.data();
  if (s.is_pure()) {
    std::vector<int> perm(keep_idx);
    perm.insert(perm.end(), trace_idx.begin(), trace_idx.end());
    const auto psi = permute(s.data(), s.tensor_dims(), perm);
    const auto& kern = simd::active();
    for (std::size_t a = 0; a < kd; ++a)
      for (std::size_t b = 0; b < kd; ++b) o[a * kd + b] = kern.cdotc(psi.data() + b * td, psi.data() + a * td, td);
  } else {
    std::vector<int> perm(keep_idx);
    for (int k : keep_idx) perm.push_back(k + m);
    for (int k : trace_idx) perm.push_back(k);
    for (int k : trace_idx) perm.push_back(k + m);
    const auto rho = permute(s.data(), s.tensor_dims(), perm);
    const std::size_t block = td * td;
    for (std::size_t r = 0; r < kd * kd; ++r) {
      cplx acc{0.0, 0.0};
      const cplx* src = rho.data() + r * block;
      for (std::size_t t = 0; t < td; ++t) acc += src[t * (td + 1)];
      o[r] = acc;
    }
  }
  out.add_discarded_mass(s.discarded_mass());
  return out;
}

namespace {
std::vector<int> without(const std::vector<int>& v, int idx) {
  std::vector<int> r(v);
  r.erase(r.begin() + idx);
  return r;
}
}  // namespace

Herald herald_fock(const FockArray& s, Mode i, int n) {
  const int mode = s.check(i);
  if (n < 0 || n > s.cutoffs()[mode]) {
    throw std::out_of_range("herald outcome " + std::to_string(n) + " exceeds the mode cutoff");
  }
  if (s.num_modes() == 1) {
    const double p = s.is_pure() ? std::norm(s.data()[n]) : s.data()[n * (s.cutoffs()[0] + 1) + n].real();
    // A fully measured state leaves a trivial one-level mode behind.
    FockArray out(std::vector<int>{0}, s.kind());
    out.data()[0] = s.is_pure() ? s.data()[n] : cplx{p, 0.0};
    return {out, p};
  }
  const auto cut = without(s.cutoffs(), mode);
  const auto dims = s.tensor_dims();
  std::vector<cplx> data = select(s.data(), dims, mode, n);
  if (!s.is_pure()) {
    const auto dims1 = without(dims, mode);
    data = select(data, dims1, s.num_modes() - 1 + mode, n);
  }
  FockArray out = s.is_pure() ? FockArray::from_amplitudes(cut, std::move(data))
                              : FockArray::from_density(cut, std::move(data));
  out.add_discarded_mass(s.discarded_mass());
  return {out, out.trace()};
}

Herald apply_diagonal_povm(const FockArray& s, Mode i, std::span<const double> weights) {
  const int mode = s.check(i);
  const int levels = std::min<int>(weights.size(), s.cutoffs()[mode] + 1);
  int nonzero = 0, last = -1;
  for (int n = 0; n < levels; ++n) {
    if (weights[n] < 0.0) throw std::invalid_argument("POVM weights must be non-negative");
    if (weights[n] > 0.0) {
      ++nonzero;
      last = n;
    }
  }
  if (s.num_modes() == 1) {
    double p = 0.0;
    for (int n = 0; n < levels; ++n) p += weights[n] * herald_fock(s, i, n).probability;
    FockArray out(std::vector<int>{0}, StateKind::density);
    out.data()[0] = p;
    return {out, p};
  }
  if (s.is_pure() && nonzero <= 1) {
    auto h = herald_fock(s, i, last < 0 ? 0 : last);
    const double w = last < 0 ? 0.0 : weights[last];
    simd::cscale(cplx{std::sqrt(w), 0.0}, h.state.data());
    return {h.state, h.state.trace()};
  }
  const FockArray rho = to_density(s);
  FockArray acc(without(s.cutoffs(), mode), StateKind::density);
  for (int n = 0; n < levels; ++n) {
    if (weights[n] == 0.0) continue;
    const auto h = herald_fock(rho, i, n);
    simd::raxpy(weights[n], h.state.data(), acc.data());
  }
  acc.add_discarded_mass(s.discarded_mass());
  return {acc, acc.trace()};
}

std::vector<Herald> interfere_and_measure(const FockArray& s, Mode i, Mode j, double transmissivity,
                                          std::span<const PovmPair> patterns) {
  const int mi = s.check(i), mj = s.check(j);
  if (mi == mj) throw std::invalid_argument("interfere_and_measure needs two distinct modes");
  for (const auto& p : patterns)
    for (const auto* w : {&p.weights_i, &p.weights_j})
      for (double x : *w)
        if (x < 0.0) throw std::invalid_argument("POVM weights must be non-negative");

  const int m = s.num_modes();
  const int ci = s.cutoffs()[mi], cj = s.cutoffs()[mj];
  const int top = ci + cj;
  const auto u = beamsplitter_matrix(transmissivity, ci, cj, top, top);
  auto weight = [](const std::vector<double>& w, int n) { return n < static_cast<int>(w.size()) ? w[n] : 0.0; };

  std::vector<int> perm{mi, mj}, rest_cut;
  for (int k = 0; k < m; ++k)
    if (k != mi && k != mj) {
      perm.push_back(k);
      rest_cut.push_back(s.cutoffs()[k]);
    }
  for (int k = 0; k < m; ++k) perm.push_back(perm[k] + m);
  std::vector<cplx> data;
  if (s.is_pure()) {
    const FockArray rho = to_density(s);
    data = permute(rho.data(), rho.tensor_dims(), perm);
  } else {
    data = permute(s.data(), s.tensor_dims(), perm);
  }
  if (rest_cut.empty()) rest_cut.push_back(0);

  std::vector<Herald> results;
  results.reserve(patterns.size());
  const auto& kern = simd::active();
  for (const auto& pattern : patterns) {
    FockArray out(rest_cut, StateKind::density);
    const std::size_t rest = out.hilbert_dim();
    const std::size_t total = rest * (ci + 1) * (cj + 1);
    auto o = out.data();
    for (int n_tot = 0; n_tot <= top; ++n_tot) {
      const int lo = std::max(0, n_tot - cj), hi = std::min(ci, n_tot);
      if (lo > hi) continue;
      for (int n = lo; n <= hi; ++n) {
        const Eigen::Index col = n * (cj + 1) + (n_tot - n);
        for (int np = lo; np <= hi; ++np) {
          const Eigen::Index colp = np * (cj + 1) + (n_tot - np);
          cplx coeff{0.0, 0.0};
          for (int k = 0; k <= n_tot; ++k) {
            const double w = weight(pattern.weights_i, k) * weight(pattern.weights_j, n_tot - k);
            if (w == 0.0) continue;
            const Eigen::Index row = k * (top + 1) + (n_tot - k);
            coeff += w * u(row, col) * std::conj(u(row, colp));
          }
          if (std::abs(coeff) == 0.0) continue;
          const std::size_t a = static_cast<std::size_t>(col), b = static_cast<std::size_t>(colp);
          for (std::size_t r = 0; r < rest; ++r) {
            kern.caxpy(coeff, data.data() + (a * rest + r) * total + b * rest, o.data() + r * rest, rest);
          }
        }
      }
    }
    out.add_discarded_mass(s.discarded_mass());
    const double p = out.trace();
    results.push_back({std::move(out), p});
  }
  return results;
}

namespace {

// Density data with mode i moved to the front on both ket and bra sides.
std::vector<cplx> mode_first(const FockArray& s, int mode, std::vector<int>& rest_cut) {
  const int m = s.num_modes();
  std::vector<int> perm{mode};
  for (int k = 0; k < m; ++k)
    if (k != mode) {
      perm.push_back(k);
      rest_cut.push_back(s.cutoffs()[k]);
    }
  for (int k = 0; k < m; ++k) perm.push_back(perm[k] + m);
  if (s.is_pure()) {
    const FockArray rho = to_density(s);
    return permute(rho.data(), rho.tensor_dims(), perm);
  }
  return permute(s.data(), s.tensor_dims(), perm);
}

}  // namespace

std::vector<Herald> interfere_and_measure(const FockArray& a, Mode i, const FockArray& b, Mode j,
                                          double transmissivity, std::span<const PovmPair> patterns) {
  const int mi = a.check(i), mj = b.check(j);
  for (const auto& p : patterns)
    for (const auto* w : {&p.weights_i, &p.weights_j})
      for (double x : *w)
        if (x < 0.0) throw std::invalid_argument("POVM weights must be non-negative");
  const int ci = a.cutoffs()[mi], cj = b.cutoffs()[mj];
  const int top = ci + cj;
  const auto u = beamsplitter_matrix(transmissivity, ci, cj, top, top);
  auto weight = [](const std::vector<double>& w, int n) { return n < static_cast<int>(w.size()) ? w[n] : 0.0; };

  std::vector<int> rest_a, rest_b;
  const auto da = mode_first(a, mi, rest_a);
  const auto db = mode_first(b, mj, rest_b);
  std::size_t ra = 1, rb = 1;
  for (int c : rest_a) ra *= c + 1;
  for (int c : rest_b) rb *= c + 1;
  const std::size_t ta = ra * (ci + 1), tb = rb * (cj + 1);
  std::vector<int> rest_cut(rest_a);
  rest_cut.insert(rest_cut.end(), rest_b.begin(), rest_b.end());
  if (rest_cut.empty()) rest_cut.push_back(0);
  const std::size_t rab = ra * rb;

  std::vector<Herald> results;
  results.reserve(patterns.size());
  const auto& kern = simd::active();
  for (const auto& pattern : patterns) {
    FockArray out(rest_cut, StateKind::density);
    auto o = out.data();
    for (int n_tot = 0; n_tot <= top; ++n_tot) {
      const int lo = std::max(0, n_tot - cj), hi = std::min(ci, n_tot);
      for (int c = lo; c <= hi; ++c) {
        const int d = n_tot - c;
        const Eigen::Index col = c * (cj + 1) + d;
        for (int cp = lo; cp <= hi; ++cp) {
          const int dp = n_tot - cp;
          const Eigen::Index colp = cp * (cj + 1) + dp;
          cplx coeff{0.0, 0.0};
          for (int k = 0; k <= n_tot; ++k) {
            const double w = weight(pattern.weights_i, k) * weight(pattern.weights_j, n_tot - k);
            if (w == 0.0) continue;
            const Eigen::Index row = k * (top + 1) + (n_tot - k);
            coeff += w * u(row, col) * std::conj(u(row, colp));
          }
          if (std::abs(coeff) == 0.0) continue;
          for (std::size_t r = 0; r < ra; ++r) {
            for (std::size_t rp = 0; rp < ra; ++rp) {
              const cplx v = coeff * da[(c * ra + r) * ta + cp * ra + rp];
              if (v == cplx{}) continue;
              for (std::size_t q = 0; q < rb; ++q) {
                kern.caxpy(v, db.data() + (d * rb + q) * tb + dp * rb, o.data() + (r * rb + q) * rab + rp * rb, rb);
              }
            }
          }
        }
      }
    }
    out.add_discarded_mass(a.discarded_mass() * b.trace() + b.discarded_mass() * a.trace());
    const double p = out.trace();
    results.push_back({std::move(out), p});
  }
  return results;
}

Herald interfere_and_measure(const FockArray& s, Mode i, Mode j, double transmissivity,
                             std::span<const double> weights_i, std::span<const double> weights_j) {
  const std::array<PovmPair, 1> one{PovmPair{{weights_i.begin(), weights_i.end()}, {weights_j.begin(), weights_j.end()}}};
  return std::move(interfere_and_measure(s, i, j, transmissivity, one).front());
}

namespace {

Eigen::MatrixXcd annihilation(int cutoff) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Tr(rho (oa (x) ob)) for a two-mode density matrix.
cplx expect(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& oa, const Eigen::MatrixXcd& ob) {
  const Eigen::Index db = ob.rows();
  cplx acc{0.0, 0.0};
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      const cplx v = rho(r, c);
      if (v == cplx{}) continue;
      // rho(n, m) * O(m, n)
      acc += v * oa(c / db, r / db) * ob(c % db, r % db);
    }
  }
  return acc;
}

}  // namespace

QuadratureMoments quadrature_moments(const FockArray& s, Mode i, Mode j) {
  if (s.check(i) == s.check(j)) throw std::invalid_argument("quadrature_moments needs two distinct modes");
  const double t = s.trace();
  if (std::abs(t - 1.0) > 1e-9) {
    throw std::domain_error("quadrature_moments needs a normalized state; call normalized() first");
  }
  const std::array<Mode, 2> keep{i, j};
  const FockArray red = partial_trace(s, keep);
  const int ca = red.cutoffs()[0], cb = red.cutoffs()[1];
  const Eigen::Index d = (ca + 1) * (cb + 1);
  const Eigen::MatrixXcd rho = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      red.data().data(), d, d);
  const Eigen::MatrixXcd a = annihilation(ca), b = annihilation(cb);
  const Eigen::MatrixXcd ia = Eigen::MatrixXcd::Identity(ca + 1, ca + 1);
  const Eigen::MatrixXcd ib = Eigen::MatrixXcd::Identity(cb + 1, cb + 1);

  const cplx ma = expect(rho, a, ib), mb = expect(rho, ia, b);
  const cplx aa = expect(rho, a * a, ib), bb = expect(rho, ia, b * b);
  const double na = expect(rho, a.adjoint() * a, ib).real(), nb = expect(rho, ia, b.adjoint() * b).real();
  const cplx ab = expect(rho, a, b), abd = expect(rho, a, b.adjoint());

  QuadratureMoments out{};
  out.mean = {2.0 * ma.real(), 2.0 * ma.imag(), 2.0 * mb.real(), 2.0 * mb.imag()};
  Eigen::Matrix4d second;
  second(0, 0) = 2.0 * aa.real() + 2.0 * na + 1.0;
  second(1, 1) = -2.0 * aa.real() + 2.0 * na + 1.0;
  second(0, 1) = second(1, 0) = 2.0 * aa.imag();
  second(2, 2) = 2.0 * bb.real() + 2.0 * nb + 1.0;
  second(3, 3) = -2.0 * bb.real() + 2.0 * nb + 1.0;
  second(2, 3) = second(3, 2) = 2.0 * bb.imag();
  second(0, 2) = second(2, 0) = 2.0 * ab.real() + 2.0 * abd.real();
  second(0, 3) = second(3, 0) = 2.0 * ab.imag() - 2.0 * abd.imag();
  second(1, 2) = second(2, 1) = 2.0 * ab.imag() + 2.0 * abd.imag();
  second(1, 3) = second(3, 1) = -2.0 * ab.real() + 2.0 * abd.real();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.cov(r, c) = second(r, c) - out.mean[r] * out.mean[c];
  return out;
}

double purity(const FockArray& s) {
  const double t = s.trace();
  if (!(t > 0.0)) throw std::domain_error("purity of a zero-trace state");
  if (s.is_pure()) return 1.0;
  return simd::norm2(s.data()) / (t * t);
}

}  // namespace cvrep
