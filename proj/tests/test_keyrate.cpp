#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvrep/keyrate.hpp"

namespace {

using namespace cvrep;

// Local symplectic: squeezing r then rotation phi on one mode.
Eigen::Matrix2d local_symplectic(double r, double phi) {
  Eigen::Matrix2d s, rot;
  s << std::exp(-r), 0, 0, std::exp(r);
  rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return rot * s;
}

CovarianceMatrix transformed(const CovarianceMatrix& cm, const Eigen::Matrix2d& sa, const Eigen::Matrix2d& sb) {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s.topLeftCorner<2, 2>() = sa;
  s.bottomRightCorner<2, 2>() = sb;
  CovarianceMatrix out;
  out.m = s * cm.m * s.transpose();
  return out;
}

// Entanglement of formation of a symmetric state from its smallest
// partially transposed symplectic eigenvalue.
double symmetric_eof(double a, double c) {
  const double x = a - c;
  const double cp = std::pow(1.0 / std::sqrt(x) + std::sqrt(x), 2) / 4.0;
  const double cm = std::pow(1.0 / std::sqrt(x) - std::sqrt(x), 2) / 4.0;
  return cp * std::log2(cp) - (cm > 0 ? cm * std::log2(cm) : 0.0);
}

TEST(Entropy, GFunction) {
  EXPECT_EQ(entropy_g(1.0), 0.0);
  EXPECT_NEAR(entropy_g(3.0), 2.0, 1e-15);
}

TEST(Holevo, VanishesOnPureGaussianStates) {
  for (double chi : {0.05, 0.3, 0.6, 0.9}) {
    const CovarianceMatrix t = CovarianceMatrix::tmsv(chi);
    EXPECT_NEAR(holevo_bound(t), 0.0, 1e-8);
    EXPECT_NEAR(holevo_bound(transformed(t, local_symplectic(0.3, 0.2), local_symplectic(-0.4, 1.1))), 0.0, 1e-8);
  }
  // Product of squeezed vacua.
  CovarianceMatrix sq;
  sq.m.diagonal() << 0.5, 2.0, 3.0, 1.0 / 3.0;
  EXPECT_NEAR(holevo_bound(sq), 0.0, 1e-8);
}

TEST(Holevo, RejectsUnphysicalMatrix) {
  CovarianceMatrix bad;
  bad.m.diagonal() << 0.5, 0.5, 1.0, 1.0;
  EXPECT_THROW(holevo_bound(bad), std::domain_error);
}

TEST(SymplecticEigenvalues, ThermalDirectSum) {
  CovarianceMatrix cm;
  cm.m.diagonal() << 2.0, 2.0, 5.0, 5.0;
  const Eigen::VectorXd nu = symplectic_eigenvalues(cm.m);
  EXPECT_NEAR(nu[0], 2.0, 1e-12);
  EXPECT_NEAR(nu[1], 5.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(cm.m), entropy_g(2.0) + entropy_g(5.0), 1e-12);
}

TEST(MutualInformation, MatchesSampledHeterodyneCorrelations) {
  // Quadratures drawn from the Wigner covariance, each heterodyne output
  // adding one unit of vacuum noise; I = -1/2 log2(1 - rho^2) per quadrature.
  const CovarianceMatrix cm = CovarianceMatrix::standard(3.0, 2.2, 2.0);
  Eigen::Matrix4d cov = cm.m + Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d l = cov.llt().matrixL();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const int n = 400000;
  double sxx = 0, saa = 0, sbb = 0, spp = 0, sqq = 0, spq = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector4d z(g(rng), g(rng), g(rng), g(rng));
    const Eigen::Vector4d v = l * z;
    saa += v[0] * v[0];
    sbb += v[2] * v[2];
    sxx += v[0] * v[2];
    spp += v[1] * v[1];
    sqq += v[3] * v[3];
    spq += v[1] * v[3];
  }
  const double rx = sxx / std::sqrt(saa * sbb), rp = spq / std::sqrt(spp * sqq);
  const double sampled = -0.5 * std::log2(1 - rx * rx) - 0.5 * std::log2(1 - rp * rp);
  EXPECT_NEAR(sampled / mutual_information_het(cm), 1.0, 0.01);
}

TEST(KeyRate, AssemblesFromParts) {
  const CovarianceMatrix cm = direct_covariance(10.0, 0.1, 1.0);
  const KeyRateResult r = key_rate_from(cm, 0.25, 0.95);
  EXPECT_NEAR(r.k_raw, 0.95 * r.i_ab - r.chi_eb, 1e-15);
  EXPECT_NEAR(r.k, 0.25 * std::max(0.0, r.k_raw), 1e-15);
}

TEST(Direct, OptimumBeatsFixedModulation) {
  const double eta = transmissivity_of(100.0, 0.2);
  const DirectResult best = direct_transmission_key(eta, 1.0 + 2e-9);
  for (double va : {0.1, 1.0, 5.0, 20.0, 100.0}) {
    EXPECT_GE(best.key.k_raw + 1e-12, key_rate_from(direct_covariance(va, eta, 1.0 + 2e-9), 1.0).k_raw);
  }
  EXPECT_GT(best.key.k, 0.0);
  EXPECT_LT(best.key.k, plob_bound(eta, 1));
}

TEST(Bounds, Plob) {
  EXPECT_TRUE(std::isinf(plob_bound(1.0, 1)));
  EXPECT_NEAR(plob_bound(1e-3, 1), -std::log2(1 - 1e-3), 1e-15);
  EXPECT_NEAR(plob_bound(1e-3, 1), 1.4434e-3, 1e-7);
  for (double eta : {0.5, 1e-3, 1e-9}) {
    EXPECT_GT(plob_bound(eta, 2), plob_bound(eta, 1));
    EXPECT_GT(plob_bound(eta, 4), plob_bound(eta, 2));
  }
  EXPECT_NEAR(plob_bound(1e-20, 1) / (1e-20 / std::log(2.0)), 1.0, 1e-12);
  EXPECT_THROW(plob_bound(0.0, 1), std::invalid_argument);
}

TEST(Geof, PureTmsvEqualsEntanglementEntropy) {
  for (double chi : {0.1, 0.2, 0.5}) {
    const GeofResult r = geof(CovarianceMatrix::tmsv(chi));
    EXPECT_FALSE(r.separable);
    EXPECT_NEAR(r.value, tmsv_entanglement(chi), 1e-6);
  }
}

TEST(Geof, SymmetricMixedStatesMatchClosedForm) {
  const double v = CovarianceMatrix::tmsv(0.6).a();
  for (double eta : {0.9, 0.5, 0.3}) {
    const double a = eta * v + 1 - eta, c = eta * std::sqrt(v * v - 1);
    const CovarianceMatrix cm = CovarianceMatrix::standard(a, a, c);
    EXPECT_NEAR(geof(cm).value, symmetric_eof(a, c), 1e-6) << "eta " << eta;
    const CovarianceMatrix moved = transformed(cm, local_symplectic(0.2, 0.7), local_symplectic(-0.1, 2.0));
    EXPECT_NEAR(geof(moved).value, symmetric_eof(a, c), 1e-6);
  }
}

TEST(Geof, AsymmetricValueIsBracketed) {
  // Concavity of the entropy caps any decomposition's average at S(A).
  const CovarianceMatrix cm = CovarianceMatrix::standard(1.8, 1.2, 0.6);
  const GeofResult r = geof(cm);
  EXPECT_FALSE(r.separable);
  EXPECT_GT(r.value, 0.0);
  EXPECT_LT(r.value, von_neumann_entropy(cm.block_a()));
}

TEST(Geof, SeparableStatesGiveZero) {
  CovarianceMatrix th;
  th.m.diagonal() << 2.0, 2.0, 1.5, 1.5;
  EXPECT_TRUE(geof(th).separable);
  EXPECT_EQ(geof(th).value, 0.0);
  const CovarianceMatrix weak = CovarianceMatrix::standard(2.0, 2.0, 0.9);
  EXPECT_TRUE(geof(weak).separable);
}

TEST(Covariance, HeraldedStateNeedsProbability) {
  HeraldedState s{FockArray::vacuum({1, 1}, StateKind::density), 0.0, 0, {}};
  EXPECT_THROW(covariance_of(s), std::domain_error);
}

}  // namespace
