#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "cvrep/keyrate.hpp"

namespace cvrep {
namespace {

// The GSL handler is process-wide, so concurrent solves share one switch.
class QuietGsl {
 public:
  QuietGsl() {
    const std::lock_guard lock(mutex_);
    if (users_++ == 0) saved_ = gsl_set_error_handler_off();
  }
  ~QuietGsl() {
    const std::lock_guard lock(mutex_);
    if (--users_ == 0) gsl_set_error_handler(saved_);
  }
  QuietGsl(const QuietGsl&) = delete;
  QuietGsl& operator=(const QuietGsl&) = delete;

 private:
  static inline std::mutex mutex_;
  static inline int users_ = 0;
  static inline gsl_error_handler_t* saved_ = nullptr;
};

using Eigen::Matrix2d;

Matrix2d sqrt_spd(const Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(m);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix2d rotation(double phi) {
  Matrix2d r;
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

// Local symplectic reduction to x/p decoupled form: A = a I, B = b I,
// C = diag(c1, c2). Returns the x block X and p block P.
std::pair<Matrix2d, Matrix2d> decoupled_blocks(const CovarianceMatrix& cm) {
  const Matrix2d a = cm.block_a(), b = cm.block_b(), c = cm.block_c();
  const double na = std::sqrt(a.determinant()), nb = std::sqrt(b.determinant());
  // a = na S_a S_a^T with det S_a = 1.
  const Matrix2d sa_inv = (sqrt_spd(a) / std::sqrt(na)).inverse();
  const Matrix2d sb_inv = (sqrt_spd(b) / std::sqrt(nb)).inverse();
  const Matrix2d cp = sa_inv * c * sb_inv.transpose();

  Eigen::JacobiSVD<Matrix2d> svd(cp, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix2d u = svd.matrixU(), v = svd.matrixV();
  Eigen::Vector2d s = svd.singularValues();
  // Keep both local maps proper rotations; the sign lands on the p entry.
  if (u.determinant() < 0) {
    u.col(1) *= -1.0;
    s[1] *= -1.0;
  }
  if (v.determinant() < 0) {
    v.col(1) *= -1.0;
    s[1] *= -1.0;
  }
  Matrix2d x, p;
  x << na, s[0], s[0], nb;
  p << na, s[1], s[1], nb;
  return {x, p};
}

struct Problem {
  Matrix2d lower;  // P^-1
  Matrix2d root;   // (X - P^-1)^(1/2)
  int evaluations = 0;

  // Squared correlation coefficient of the candidate pure-state x block.
  double objective(double u1, double u2, double phi) {
    ++evaluations;
    const double q1 = std::sin(u1) * std::sin(u1), q2 = std::sin(u2) * std::sin(u2);
    const Matrix2d r = rotation(phi);
    const Matrix2d q = r * Eigen::Vector2d(q1, q2).asDiagonal() * r.transpose();
    const Matrix2d xp = lower + root * q * root;
    return xp(0, 1) * xp(0, 1) / (xp(0, 0) * xp(1, 1));
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  auto* p = static_cast<Problem*>(params);
  return p->objective(gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2));
}

struct LocalMin {
  double value;
  bool converged;
};

LocalMin nelder_mead(Problem& prob, std::array<double, 3> start) {
  gsl_multimin_function f{&gsl_objective, 3, &prob};
  gsl_vector* x = gsl_vector_alloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  for (int k = 0; k < 3; ++k) {
    gsl_vector_set(x, k, start[k]);
    gsl_vector_set(step, k, 0.05);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(s, &f, x, step);
  int status = GSL_CONTINUE;
  for (int iter = 0; iter < 2000 && status == GSL_CONTINUE; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s)) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10);
  }
  LocalMin out{s->fval, status == GSL_SUCCESS};
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return out;
}

}  // namespace

GeofResult geof(const CovarianceMatrix& cm) {
  GeofResult res;
  if (pt_symplectic_eigenvalues(cm).minCoeff() >= 1.0) {
    res.separable = true;
    return res;
  }
  const auto [x, p] = decoupled_blocks(cm);
  const Matrix2d lower = p.inverse();
  const Matrix2d gap = x - lower;
  if (Eigen::SelfAdjointEigenSolver<Matrix2d>(gap).eigenvalues().minCoeff() < -1e-9) {
    throw std::domain_error("geof: covariance matrix violates the uncertainty relation");
  }
  Problem prob{lower, sqrt_spd(gap)};

  // Coarse scan, then polish the best few cells.
  constexpr int kGrid = 9, kAngles = 12, kStarts = 4;
  constexpr double kPi = 3.14159265358979323846;
  std::vector<std::pair<double, std::array<double, 3>>> cells;
  for (int i = 0; i <= kGrid; ++i)
    for (int j = 0; j <= kGrid; ++j)
      for (int k = 0; k < kAngles; ++k) {
        const std::array<double, 3> pt{0.5 * kPi * i / kGrid, 0.5 * kPi * j / kGrid, kPi * k / kAngles};
        cells.push_back({prob.objective(pt[0], pt[1], pt[2]), pt});
      }
  std::partial_sort(cells.begin(), cells.begin() + kStarts, cells.end(),
                    [](const auto& l, const auto& r) { return l.first < r.first; });

  const QuietGsl quiet;
  double best = cells.front().first, worst_local = best;
  bool any_converged = false;
  for (int s = 0; s < kStarts; ++s) {
    const LocalMin m = nelder_mead(prob, cells[s].second);
    any_converged = any_converged || m.converged;
    best = std::min(best, m.value);
    worst_local = std::max(worst_local, m.value);
  }

  res.converged = any_converged;
  res.evaluations = prob.evaluations;
  res.residual = worst_local - best;
  const double rho2 = std::clamp(best, 0.0, 1.0 - 1e-15);
  res.value = entropy_g(1.0 / std::sqrt(1.0 - rho2));
  return res;
}

}  // namespace cvrep
