#pragma once

#include <Eigen/Dense>

#include "cvrep/protocol.hpp"

namespace cvrep {

inline constexpr double kDefaultBeta = 0.95;

// Two-mode quadrature covariance matrix in shot-noise units, ordered
// (x_A, p_A, x_B, p_B).
struct CovarianceMatrix {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

  static CovarianceMatrix standard(double a, double b, double c);
  static CovarianceMatrix tmsv(double chi);

  double a() const { return 0.5 * (m(0, 0) + m(1, 1)); }
  double b() const { return 0.5 * (m(2, 2) + m(3, 3)); }
  double c() const { return 0.5 * (m(0, 2) - m(1, 3)); }
  Eigen::Matrix2d block_a() const { return m.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d block_b() const { return m.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d block_c() const { return m.topRightCorner<2, 2>(); }
  // Largest deviation from the (a, a, b, b; c, -c) form.
  double standard_form_asymmetry() const;
};

CovarianceMatrix covariance_of(const HeraldedState& state);
CovarianceMatrix covariance_of(const FockArray& rho_ab);

double mutual_information_het(const CovarianceMatrix& cm);

// Sorted symplectic eigenvalues, from the spectrum of i Omega Gamma.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& gamma);
// Symplectic eigenvalues of the partial transpose (p_B -> -p_B).
Eigen::Vector2d pt_symplectic_eigenvalues(const CovarianceMatrix& cm);
double entropy_g(double nu);
double von_neumann_entropy(const Eigen::MatrixXd& gamma);
// Alice's conditional matrix after Bob's heterodyne.
Eigen::Matrix2d conditional_on_heterodyne(const CovarianceMatrix& cm);
double holevo_bound(const CovarianceMatrix& cm);

struct KeyRateResult {
  double rate = 0.0;  // P for one repeater, R for the chain
  double i_ab = 0.0;
  double chi_eb = 0.0;
  double k_raw = 0.0;  // beta I_AB - chi_EB, unclamped
  double k = 0.0;      // rate * max(0, k_raw)
  double beta = kDefaultBeta;
};

KeyRateResult key_rate_from(const CovarianceMatrix& cm, double rate, double beta = kDefaultBeta);
KeyRateResult secret_key_rate(const HeraldedState& state, double beta = kDefaultBeta);

// Coherent-state heterodyne protocol over a thermal-loss line with the
// modulation variance optimised.
struct DirectResult {
  KeyRateResult key;
  double v_a = 0.0;
};
CovarianceMatrix direct_covariance(double v_a, double eta, double env_V);
DirectResult direct_transmission_key(double eta, double env_V, double beta = kDefaultBeta);

// -log2(1 - eta^(1/N)); +infinity at eta = 1.
double plob_bound(double eta, int links);

struct GeofResult {
  double value = 0.0;
  bool separable = false;
  bool converged = true;
  int evaluations = 0;
  double residual = 0.0;  // spread of the best objective across restarts
};
GeofResult geof(const CovarianceMatrix& cm);
// Entanglement entropy of a pure TMSV, cosh^2 r = 1 / (1 - chi^2).
double tmsv_entanglement(double chi);

double state_purity(const HeraldedState& state);

}  // namespace cvrep
