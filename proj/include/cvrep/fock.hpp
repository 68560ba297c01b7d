#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvrep {

using cplx = std::complex<double>;

inline constexpr double kDefaultTailTolerance = 1e-10;

enum class StateKind { pure, density };

// Index of a bosonic mode inside a FockArray.
struct Mode {
  int index;
};

// Dense complex tensor over M truncated bosonic modes.
//
// Mode k spans Fock levels 0..cutoff(k). Pure states store M indices,
// density operators store 2M indices (all ket indices, then all bra
// indices), both row-major with mode 0 most significant. A density operator
// is therefore a D x D row-major matrix with D = prod(cutoff + 1).
//
// Heralded branches are allowed to be unnormalized. discarded_mass() counts
// probability that fell outside the truncated space along the way and bounds
// the error made by truncation.
class FockArray {
 public:
  FockArray(std::vector<int> cutoffs, StateKind kind);

  static FockArray vacuum(std::vector<int> cutoffs, StateKind kind = StateKind::pure);
  static FockArray number_state(std::vector<int> cutoffs, std::vector<int> occupation,
                                StateKind kind = StateKind::pure);
  static FockArray from_amplitudes(std::vector<int> cutoffs, std::vector<cplx> amplitudes);
  static FockArray from_density(std::vector<int> cutoffs, std::vector<cplx> elements);

  int num_modes() const { return static_cast<int>(cutoffs_.size()); }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  int cutoff(Mode m) const { return cutoffs_.at(check(m)); }
  int dim(Mode m) const { return cutoff(m) + 1; }
  std::size_t hilbert_dim() const;
  StateKind kind() const { return kind_; }
  bool is_pure() const { return kind_ == StateKind::pure; }

  std::span<const cplx> data() const { return data_; }
  std::span<cplx> data() { return data_; }
  // Tensor shape: M dims for pure states, 2M for density operators.
  std::vector<int> tensor_dims() const;

  cplx amplitude(std::span<const int> occupation) const;
  // <ket| rho |bra>; pure states return psi(ket) * conj(psi(bra)).
  cplx element(std::span<const int> ket, std::span<const int> bra) const;

  // Squared norm for pure states.
  double trace() const;
  std::vector<double> photon_distribution(Mode m) const;
  double top_level_mass(Mode m) const;

  double discarded_mass() const { return discarded_; }
  void add_discarded_mass(double mass) { discarded_ += mass > 0.0 ? mass : 0.0; }
  bool cutoff_suspect(double tol = kDefaultTailTolerance) const { return discarded_ > tol; }

  int check(Mode m) const;

 private:
  std::vector<int> cutoffs_;
  StateKind kind_;
  std::vector<cplx> data_;
  double discarded_ = 0.0;
};

struct Herald {
  FockArray state;  // unnormalized conditional state on the remaining modes
  double probability;
};

struct QuadratureMoments {
  std::array<double, 4> mean;  // <x_i>, <p_i>, <x_j>, <p_j>
  Eigen::Matrix4d cov;         // symmetrized, vacuum = identity
};

// Output cutoffs for the two modes of a beamsplitter. Unset entries keep the
// input cutoff; amplitude pushed above the output cutoff is discarded.
struct BeamsplitterCutoffs {
  int out_i = -1;
  int out_j = -1;
  static BeamsplitterCutoffs exact(const FockArray& s, Mode i, Mode j) {
    const int total = s.cutoff(i) + s.cutoff(j);
    return {total, total};
  }
};

FockArray tensor_product(const FockArray& a, const FockArray& b);
FockArray to_density(const FockArray& s);
FockArray normalized(const FockArray& s);
FockArray permute_modes(const FockArray& s, std::span<const int> order);

// Matrix elements <k, N-k| B |n, m> of B(theta) = exp[i theta (a^dag b + a b^dag)],
// T = cos^2 theta. Rows index (k_i, k_j) row-major over the output cutoffs,
// columns (n, m) row-major over the input cutoffs.
Eigen::MatrixXcd beamsplitter_matrix(double transmissivity, int in_cut_i, int in_cut_j,
                                     int out_cut_i, int out_cut_j);

// Applies `op` (rows: product of out dims, cols: product of in dims) on the
// listed modes; densities get op * rho * op^dag. Trace is not tracked.
FockArray apply_mode_operator(const FockArray& s, std::span<const Mode> modes,
                              const Eigen::MatrixXcd& op, std::span<const int> out_cutoffs);

// Applies a single-mode channel given as a superoperator in the row-major
// (ket, bra) basis: rows (m, m') over out_cutoff, columns (n, n') over the
// input cutoff. Pure inputs are converted to density form; any trace lost
// to the output truncation is recorded as discarded mass.
FockArray apply_channel(const FockArray& s, Mode i, const Eigen::MatrixXcd& superop, int out_cutoff);

FockArray apply_beamsplitter(const FockArray& s, Mode i, Mode j, double transmissivity,
                             BeamsplitterCutoffs cut = {});
FockArray apply_phase(const FockArray& s, Mode i, double phi);

FockArray partial_trace(const FockArray& s, std::span<const Mode> keep);

Herald herald_fock(const FockArray& s, Mode i, int n);
// Applies a POVM element diagonal in the Fock basis of mode i,
// sum_m weight[m] |m><m|, and removes the mode. Missing weights count as 0.
Herald apply_diagonal_povm(const FockArray& s, Mode i, std::span<const double> weights);

// Mixes modes i and j on a beamsplitter of transmissivity T, then measures
// both outputs with diagonal POVMs (weights_i on output i, weights_j on
// output j) and removes them. The remaining modes keep their relative order.
// Photon-number conservation is used so the output space is never built.
Herald interfere_and_measure(const FockArray& s, Mode i, Mode j, double transmissivity,
                             std::span<const double> weights_i, std::span<const double> weights_j);

struct PovmPair {
  std::vector<double> weights_i;
  std::vector<double> weights_j;
};
// Several outcome patterns on the same input, sharing the work.
std::vector<Herald> interfere_and_measure(const FockArray& s, Mode i, Mode j, double transmissivity,
                                          std::span<const PovmPair> patterns);
// The same measurement on a (x) b with i in a and j in b, computed without
// forming the product. Output modes: a without i, then b without j.
std::vector<Herald> interfere_and_measure(const FockArray& a, Mode i, const FockArray& b, Mode j,
                                          double transmissivity, std::span<const PovmPair> patterns);

// Requires a normalized state (trace within 1e-9 of 1).
QuadratureMoments quadrature_moments(const FockArray& s, Mode i, Mode j);

// Tr(rho^2) / Tr(rho)^2.
double purity(const FockArray& s);

}  // namespace cvrep
