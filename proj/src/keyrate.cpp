#include "cvrep/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace cvrep {

CovarianceMatrix CovarianceMatrix::standard(double a, double b, double c) {
  CovarianceMatrix cm;
  cm.m << a, 0, c, 0,
          0, a, 0, -c,
          c, 0, b, 0,
          0, -c, 0, b;
  return cm;
}

CovarianceMatrix CovarianceMatrix::tmsv(double chi) {
  const double nu = (1.0 + chi * chi) / (1.0 - chi * chi);
  return standard(nu, nu, std::sqrt(nu * nu - 1.0));
}

double CovarianceMatrix::standard_form_asymmetry() const {
  double worst = std::abs(m(0, 0) - m(1, 1));
  worst = std::max(worst, std::abs(m(2, 2) - m(3, 3)));
  worst = std::max(worst, std::abs(m(0, 2) + m(1, 3)));
  for (auto [r, c] : {std::pair{0, 1}, {2, 3}, {0, 3}, {1, 2}}) worst = std::max(worst, std::abs(m(r, c)));
  return worst;
}

CovarianceMatrix covariance_of(const FockArray& rho_ab) {
  if (rho_ab.num_modes() != 2) throw std::invalid_argument("covariance_of expects a two-mode state");
  if (!(rho_ab.trace() > 0.0)) throw std::domain_error("covariance_of needs a state with nonzero probability");
  const QuadratureMoments q = quadrature_moments(normalized(rho_ab), Mode{0}, Mode{1});
  CovarianceMatrix cm;
  cm.m = q.cov;
  return cm;
}

CovarianceMatrix covariance_of(const HeraldedState& state) {
  if (!(state.P > 0.0)) throw std::domain_error("covariance_of needs P > 0");
  return covariance_of(state.rho_ab);
}

double mutual_information_het(const CovarianceMatrix& cm) {
  const double a = cm.a(), b = cm.b(), c = cm.c();
  const double den = 1.0 + a - c * c / (1.0 + b);
  if (!(den > 0.0)) throw std::domain_error("unphysical covariance matrix: heterodyne conditional variance <= 0");
  return std::log2((1.0 + a) / den);
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& gamma) {
  const Eigen::Index n = gamma.rows() / 2;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(omega * gamma, false);
  std::vector<double> mags;
  for (Eigen::Index k = 0; k < 2 * n; ++k) mags.push_back(std::abs(es.eigenvalues()[k].imag()));
  std::sort(mags.begin(), mags.end());
  Eigen::VectorXd nu(n);
  for (Eigen::Index k = 0; k < n; ++k) nu[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
  return nu;
}

Eigen::Vector2d pt_symplectic_eigenvalues(const CovarianceMatrix& cm) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t(3, 3) = -1.0;
  return symplectic_eigenvalues(t * cm.m * t);
}

double entropy_g(double nu) {
  if (nu <= 1.0) return 0.0;
  const double p = 0.5 * (nu + 1.0), q = 0.5 * (nu - 1.0);
  return p * std::log2(p) - q * std::log2(q);
}

namespace {

// Eigenvalue round-off grows with the square of the matrix scale.
double checked(double nu, double scale = 1.0) {
  if (nu < 1.0 - 1e-6 - 1e-14 * scale * scale) throw std::domain_error("unphysical covariance matrix: symplectic eigenvalue below 1");
  return std::max(nu, 1.0);
}

}  // namespace

double von_neumann_entropy(const Eigen::MatrixXd& gamma) {
  double s = 0.0;
  const double scale = gamma.cwiseAbs().maxCoeff();
  for (double nu : symplectic_eigenvalues(gamma)) s += entropy_g(checked(nu, scale));
  return s;
}

Eigen::Matrix2d conditional_on_heterodyne(const CovarianceMatrix& cm) {
  const Eigen::Matrix2d c = cm.block_c();
  return cm.block_a() - c * (cm.block_b() + Eigen::Matrix2d::Identity()).inverse() * c.transpose();
}

double holevo_bound(const CovarianceMatrix& cm) {
  const double s_ab = von_neumann_entropy(cm.m);
  const double s_cond = entropy_g(checked(std::sqrt(conditional_on_heterodyne(cm).determinant()), cm.m.cwiseAbs().maxCoeff()));
  return std::max(0.0, s_ab - s_cond);
}

KeyRateResult key_rate_from(const CovarianceMatrix& cm, double rate, double beta) {
  KeyRateResult r;
  r.rate = rate;
  r.beta = beta;
  r.i_ab = mutual_information_het(cm);
  r.chi_eb = holevo_bound(cm);
  r.k_raw = beta * r.i_ab - r.chi_eb;
  r.k = rate * std::max(0.0, r.k_raw);
  return r;
}

KeyRateResult secret_key_rate(const HeraldedState& state, double beta) {
  return key_rate_from(covariance_of(state), state.P, beta);
}

CovarianceMatrix direct_covariance(double v_a, double eta, double env_V) {
  const double v = v_a + 1.0;
  return CovarianceMatrix::standard(v, eta * v + (1.0 - eta) * env_V, std::sqrt(eta * (v * v - 1.0)));
}

DirectResult direct_transmission_key(double eta, double env_V, double beta) {
  // Optimise over log V_A; the raw key is unimodal on this range.
  auto neg = [&](double log_va) { return -key_rate_from(direct_covariance(std::exp(log_va), eta, env_V), 1.0, beta).k_raw; };
  const auto best = boost::math::tools::brent_find_minima(neg, std::log(1e-4), std::log(1e5),
                                                               std::numeric_limits<double>::digits / 2);
  DirectResult out;
  out.v_a = std::exp(best.first);
  out.key = key_rate_from(direct_covariance(out.v_a, eta, env_V), 1.0, beta);
  return out;
}

double plob_bound(double eta, int links) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("plob_bound needs eta in (0, 1]");
  if (links < 1) throw std::invalid_argument("plob_bound needs at least one link");
  const double x = std::pow(eta, 1.0 / links);
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  if (x < 0.5) return -std::log1p(-x) / std::numbers::ln2;
  return -std::log2(-std::expm1(std::log(eta) / links));
}

double tmsv_entanglement(double chi) {
  const double c2 = 1.0 / (1.0 - chi * chi), s2 = chi * chi / (1.0 - chi * chi);
  if (s2 == 0.0) return 0.0;
  return c2 * std::log2(c2) - s2 * std::log2(s2);
}

double state_purity(const HeraldedState& state) { return purity(state.rho_ab); }

}  // namespace cvrep
