#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvrep/components.hpp"
#include "cvrep/fock.hpp"

namespace {

using namespace cvrep;

FockArray random_density(std::vector<int> cutoffs, unsigned seed) {
  std::size_t d = 1;
  for (int c : cutoffs) d *= static_cast<std::size_t>(c + 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(d, d);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  std::vector<cplx> el(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) el[r * d + c] = rho(r, c);
  return FockArray::from_density(std::move(cutoffs), std::move(el));
}

Eigen::MatrixXcd as_matrix(const FockArray& s) {
  const FockArray rho = to_density(s);
  const auto d = static_cast<Eigen::Index>(rho.hilbert_dim());
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = rho.data()[r * d + c];
  return m;
}

double max_diff(const FockArray& a, const FockArray& b) {
  EXPECT_EQ(a.data().size(), b.data().size());
  double w = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) w = std::max(w, std::abs(a.data()[k] - b.data()[k]));
  return w;
}

TEST(FockArray, VacuumAndNumberStates) {
  const FockArray v = FockArray::vacuum({3, 2});
  EXPECT_EQ(v.hilbert_dim(), 12u);
  EXPECT_DOUBLE_EQ(v.trace(), 1.0);
  const std::array<int, 2> occ{2, 1};
  const FockArray n = FockArray::number_state({3, 2}, {2, 1}, StateKind::density);
  EXPECT_EQ(n.element(occ, occ), cplx(1.0, 0.0));
  EXPECT_EQ(n.tensor_dims().size(), 4u);
  EXPECT_THROW(FockArray::number_state({1}, {2}), std::invalid_argument);
  EXPECT_THROW(n.check(Mode{2}), std::out_of_range);
}

TEST(Beamsplitter, MatchesMatrixExponential) {
  const int N = 6;
  const double T = 0.3;
  const double theta = std::acos(std::sqrt(T));
  const int d = N + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n <= N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  auto kron = [](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    Eigen::MatrixXcd out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  };
  const Eigen::MatrixXcd A = kron(a, id), B = kron(id, a);
  const Eigen::MatrixXcd gen = cplx(0.0, theta) * (A.adjoint() * B + A * B.adjoint());
  const Eigen::MatrixXcd u = gen.exp();
  const Eigen::MatrixXcd ours = beamsplitter_matrix(T, N, N, N, N);
  double worst = 0.0;
  for (int n = 0; n <= N; ++n)
    for (int m = 0; n + m <= N; ++m)
      for (int k = 0; k <= n + m; ++k) {
        const int l = n + m - k;
        worst = std::max(worst, std::abs(ours(k * d + l, n * d + m) - u(k * d + l, n * d + m)));
      }
  EXPECT_LT(worst, 1e-12);
}

TEST(Beamsplitter, HongOuMandel) {
  FockArray s = FockArray::number_state({2, 2}, {1, 1});
  s = apply_beamsplitter(s, Mode{0}, Mode{1}, 0.5);
  const std::array<int, 2> o11{1, 1}, o20{2, 0}, o02{0, 2};
  EXPECT_NEAR(std::abs(s.amplitude(o11)), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(s.amplitude(o20)), 0.5, 1e-14);
  EXPECT_NEAR(std::norm(s.amplitude(o02)), 0.5, 1e-14);
}

TEST(Beamsplitter, ReflectedPhotonCarriesI) {
  FockArray s = FockArray::number_state({1, 1}, {1, 0});
  s = apply_beamsplitter(s, Mode{0}, Mode{1}, 0.25);
  const std::array<int, 2> o10{1, 0}, o01{0, 1};
  EXPECT_NEAR(std::abs(s.amplitude(o10) - cplx(0.5, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitude(o01) - cplx(0.0, std::sqrt(0.75))), 0.0, 1e-15);
}

TEST(Beamsplitter, UnitaryOnDensityAndTruncationAccounting) {
  const FockArray rho = random_density({2, 2}, 11);
  const FockArray out = apply_beamsplitter(rho, Mode{0}, Mode{1}, 0.37, BeamsplitterCutoffs::exact(rho, Mode{0}, Mode{1}));
  EXPECT_NEAR(out.trace(), 1.0, 1e-12);
  EXPECT_NEAR(purity(out), purity(rho), 1e-12);
  const FockArray cut = apply_beamsplitter(rho, Mode{0}, Mode{1}, 0.37);
  EXPECT_NEAR(cut.trace() + cut.discarded_mass(), 1.0, 1e-12);
  EXPECT_GT(cut.discarded_mass(), 0.0);
}

TEST(PartialTrace, EprReducesToThermal) {
  const double chi = 0.35;
  const int N = 25;
  const FockArray e = epr_state(chi, N);
  const std::array<Mode, 1> keep{Mode{0}};
  const FockArray r = partial_trace(e, keep);
  for (int n = 0; n <= 6; ++n) {
    const std::array<int, 1> k{n};
    EXPECT_NEAR(r.element(k, k).real(), (1 - chi * chi) * std::pow(chi, 2 * n), 1e-14);
  }
  const FockArray th = thermal_state((1 + chi * chi) / (1 - chi * chi), N);
  EXPECT_LT(max_diff(r, th), 1e-14);
}

TEST(Herald, OutcomesAreComplete) {
  const FockArray rho = random_density({3, 2}, 5);
  double total = 0.0;
  for (int n = 0; n <= 3; ++n) total += herald_fock(rho, Mode{0}, n).probability;
  EXPECT_NEAR(total, 1.0, 1e-13);
  const auto d = rho.photon_distribution(Mode{1});
  for (int n = 0; n <= 2; ++n) EXPECT_NEAR(herald_fock(rho, Mode{1}, n).probability, d[n], 1e-14);
}

TEST(Herald, DiagonalPovmWeightsPhotonDistribution) {
  const FockArray rho = random_density({3, 1}, 8);
  const std::vector<double> w{0.1, 0.7, 0.2, 1.0};
  const auto d = rho.photon_distribution(Mode{0});
  double expect = 0.0;
  for (int n = 0; n <= 3; ++n) expect += w[n] * d[n];
  EXPECT_NEAR(apply_diagonal_povm(rho, Mode{0}, w).probability, expect, 1e-14);
}

TEST(Permute, RoundTripAndElementMapping) {
  const FockArray rho = random_density({1, 2, 3}, 3);
  const std::array<int, 3> order{2, 0, 1};
  const FockArray p = permute_modes(rho, order);
  EXPECT_EQ(p.cutoffs(), (std::vector<int>{3, 1, 2}));
  const std::array<int, 3> ket{1, 2, 0}, bra{0, 1, 3};
  const std::array<int, 3> pket{0, 1, 2}, pbra{3, 0, 1};
  EXPECT_EQ(rho.element(ket, bra), p.element(pket, pbra));
  const std::array<int, 3> back{1, 2, 0};
  EXPECT_EQ(max_diff(permute_modes(p, back), rho), 0.0);
}

TEST(TensorProduct, DensityMatchesKronecker) {
  const FockArray a = random_density({1}, 1), b = random_density({2}, 2);
  const FockArray ab = tensor_product(a, b);
  const Eigen::MatrixXcd ma = as_matrix(a), mb = as_matrix(b), mab = as_matrix(ab);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_LT((mab.block(3 * i, 3 * j, 3, 3) - ma(i, j) * mb).norm(), 1e-15);
}

TEST(InterfereAndMeasure, MatchesExplicitBeamsplitterThenHerald) {
  const FockArray rho = random_density({2, 2, 1}, 21);
  const std::vector<double> wi{0.0, 1.0, 0.3}, wj{1.0, 0.5, 0.0, 0.2, 0.0};
  const Herald fast = interfere_and_measure(rho, Mode{0}, Mode{1}, 0.4, wi, wj);
  FockArray big = apply_beamsplitter(rho, Mode{0}, Mode{1}, 0.4, BeamsplitterCutoffs::exact(rho, Mode{0}, Mode{1}));
  Herald h1 = apply_diagonal_povm(big, Mode{0}, wi);
  Herald h2 = apply_diagonal_povm(h1.state, Mode{0}, wj);
  EXPECT_NEAR(fast.probability, h2.probability, 1e-13);
  EXPECT_LT(max_diff(fast.state, h2.state), 1e-13);
}

TEST(InterfereAndMeasure, ProductFormMatchesJoint) {
  const FockArray a = random_density({3, 2}, 31), b = random_density({1, 2}, 32);
  const std::vector<PovmPair> pats{{{0.0, 1.0, 0.0, 0.0, 0.0}, {1.0}}, {{1.0}, {0.0, 0.9, 0.1}}};
  const auto split = interfere_and_measure(a, Mode{1}, b, Mode{1}, 0.6, pats);
  const auto joint = interfere_and_measure(tensor_product(a, b), Mode{1}, Mode{3}, 0.6, pats);
  ASSERT_EQ(split.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(split[k].probability, joint[k].probability, 1e-14);
    EXPECT_LT(max_diff(split[k].state, joint[k].state), 1e-14);
  }
}

TEST(Channel, IdentitySuperoperatorIsNoOp) {
  const FockArray rho = random_density({2, 1}, 4);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(4, 4);
  EXPECT_LT(max_diff(apply_channel(rho, Mode{1}, id, 1), rho), 1e-16);
}

TEST(Moments, CoherentStateAndEpr) {
  const cplx alpha{0.4, -0.3};
  const FockArray c = tensor_product(coherent_state(alpha, 30), FockArray::vacuum({1}));
  const QuadratureMoments q = quadrature_moments(normalized(c), Mode{0}, Mode{1});
  EXPECT_NEAR(q.mean[0], 2 * alpha.real(), 1e-12);
  EXPECT_NEAR(q.mean[1], 2 * alpha.imag(), 1e-12);
  EXPECT_LT((q.cov - Eigen::Matrix4d::Identity()).norm(), 1e-12);

  const double chi = 0.3;
  const QuadratureMoments e = quadrature_moments(normalized(epr_state(chi, 30)), Mode{0}, Mode{1});
  const double v = (1 + chi * chi) / (1 - chi * chi), c2 = 2 * chi / (1 - chi * chi);
  EXPECT_NEAR(e.cov(0, 0), v, 1e-12);
  EXPECT_NEAR(e.cov(3, 3), v, 1e-12);
  EXPECT_NEAR(e.cov(0, 2), c2, 1e-12);
  EXPECT_NEAR(e.cov(1, 3), -c2, 1e-12);
  EXPECT_THROW(quadrature_moments(epr_state(chi, 2), Mode{0}, Mode{1}), std::domain_error);
}

TEST(Phase, RotatesCoherentAmplitude) {
  const FockArray c = apply_phase(coherent_state({0.5, 0.0}, 25), Mode{0}, 0.5 * std::numbers::pi);
  const FockArray ref = coherent_state({0.0, 0.5}, 25);
  EXPECT_LT(max_diff(c, ref), 1e-14);
}

TEST(Purity, PureAndMixed) {
  EXPECT_NEAR(purity(epr_state(0.4, 20)), 1.0, 1e-14);
  const FockArray th = thermal_state(3.0, 40);
  EXPECT_NEAR(purity(th), 1.0 / 3.0, 1e-9);
}

}  // namespace
