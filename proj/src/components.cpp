#include "cvrep/components.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cvrep/simd.hpp"

namespace cvrep {

DetectorModel DetectorModel::with_dark_click(double efficiency, double click_prob) {
  DetectorModel d;
  d.efficiency = efficiency;
  d.dark_click_prob = click_prob;
  d.dark_mean = calibrate_dark_counts(efficiency, click_prob);
  return d;
}

FockArray epr_state(double chi, int cutoff) {
  if (!(chi >= 0.0 && chi < 1.0)) throw std::invalid_argument("EPR parameter chi must lie in [0, 1)");
  FockArray s({cutoff, cutoff}, StateKind::pure);
  auto d = s.data();
  const double norm = std::sqrt(1.0 - chi * chi);
  double amp = norm;
  for (int n = 0; n <= cutoff; ++n) {
    d[n * (cutoff + 1) + n] = amp;
    amp *= chi;
  }
  s.add_discarded_mass(std::pow(chi, 2.0 * (cutoff + 1)));
  return s;
}

int epr_cutoff_for(double chi, double tol, int max_cutoff) {
  if (chi <= 0.0) return 1;
  int n = 1;
  while (n < max_cutoff && std::pow(chi, 2.0 * (n + 1)) >= tol) ++n;
  return n;
}

FockArray coherent_state(cplx alpha, int cutoff) {
  FockArray s({cutoff}, StateKind::pure);
  auto d = s.data();
  cplx amp = std::exp(-0.5 * std::norm(alpha));
  double kept = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    d[n] = amp;
    kept += std::norm(amp);
    amp *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  s.add_discarded_mass(1.0 - kept);
  return s;
}

FockArray thermal_state(double variance, int cutoff) {
  if (!(variance >= 1.0)) throw std::invalid_argument("thermal variance must be >= 1 (vacuum is 1)");
  FockArray s({cutoff}, StateKind::density);
  auto d = s.data();
  const double nbar = 0.5 * (variance - 1.0);
  const double ratio = nbar / (1.0 + nbar);
  double p = 1.0 / (1.0 + nbar);
  for (int n = 0; n <= cutoff; ++n) {
    d[n * (cutoff + 1) + n] = p;
    p *= ratio;
  }
  s.add_discarded_mass(std::pow(ratio, cutoff + 1));
  return s;
}

int thermal_cutoff_for(double variance, double tol, int max_cutoff) {
  const double nbar = 0.5 * (variance - 1.0);
  if (nbar <= 0.0) return 0;
  const double ratio = nbar / (1.0 + nbar);
  int n = 0;
  while (n < max_cutoff && std::pow(ratio, n + 1) >= tol) ++n;
  return n;
}

namespace {

// Superoperator of the thermal-loss channel on a single mode with input
// cutoff `cut`; output keeps the same cutoff.
Eigen::MatrixXcd thermal_loss_superop(double eta, double env_V, int cut, int env_cut, double& env_tail) {
  const FockArray env = thermal_state(env_V, env_cut);
  env_tail = env.discarded_mass();
  const int top = cut + env_cut;
  const auto u = beamsplitter_matrix(eta, cut, env_cut, cut, top);
  const int d = cut + 1;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (int k = 0; k <= env_cut; ++k) {
    const double pk = env.data()[k * (env_cut + 1) + k].real();
    if (pk == 0.0) continue;
    for (int n = 0; n <= cut; ++n) {
      for (int np = 0; np <= cut; ++np) {
        const Eigen::Index col_n = n * (env_cut + 1) + k, col_np = np * (env_cut + 1) + k;
        for (int l = 0; l <= top; ++l) {
          // Output photon numbers follow from conservation.
          const int mo = n + k - l, mop = np + k - l;
          if (mo < 0 || mo > cut || mop < 0 || mop > cut) continue;
          const cplx a = u(mo * (top + 1) + l, col_n);
          const cplx b = u(mop * (top + 1) + l, col_np);
          s(mo * d + mop, n * d + np) += pk * a * std::conj(b);
        }
      }
    }
  }
  return s;
}

}  // namespace

FockArray loss_channel(const FockArray& s, Mode i, double eta, double env_V, LossOptions opt) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss transmissivity must lie in [0, 1]");
  if (!(env_V >= 1.0)) throw std::invalid_argument("environment variance must be >= 1");
  const int mode = s.check(i);
  const int env_cut = opt.env_cutoff >= 0 ? opt.env_cutoff : thermal_cutoff_for(env_V);
  const int cut = s.cutoffs()[mode];

  if (opt.keep_environment) {
    const bool vacuum_env = env_V == 1.0;
    FockArray env = vacuum_env && s.is_pure() ? FockArray::vacuum({env_cut}) : thermal_state(env_V, env_cut);
    const FockArray base = env.is_pure() ? s : to_density(s);
    FockArray joint = tensor_product(base, env);
    const Mode e{joint.num_modes() - 1};
    return apply_beamsplitter(joint, i, e, eta, {cut, cut + env_cut});
  }

  double env_tail = 0.0;
  const auto superop = thermal_loss_superop(eta, env_V, cut, env_cut, env_tail);
  FockArray out = apply_channel(s, i, superop, cut);
  out.add_discarded_mass(env_tail * s.trace());
  return out;
}

FockArray single_photon_source(const SourceModel& model) {
  const double t = model.efficiency;
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("source efficiency must lie in [0, 1]");
  FockArray s({1}, StateKind::density);
  s.data()[0] = 1.0 - t;
  s.data()[3] = t;
  return s;
}

double calibrate_dark_counts(double tau_d, double target_click_prob) {
  if (!(target_click_prob >= 0.0 && target_click_prob < 1.0)) {
    throw std::invalid_argument("dark-click probability must lie in [0, 1)");
  }
  if (!(tau_d >= 0.0 && tau_d <= 1.0)) throw std::invalid_argument("detector efficiency must lie in [0, 1]");
  if (target_click_prob == 0.0) return 0.0;
  if (tau_d == 1.0) {
    throw std::invalid_argument(
        "dark counts cannot be injected at unit detector efficiency: the auxiliary port is fully reflected");
  }
  // Thermal light of mean n through transmissivity (1 - tau_d) stays thermal
  // with mean n (1 - tau_d); its vacuum overlap is 1 / (1 + n (1 - tau_d)).
  return target_click_prob / ((1.0 - target_click_prob) * (1.0 - tau_d));
}

double vacuum_click_probability(const DetectorModel& model) {
  const double x = model.dark_mean * (1.0 - model.efficiency);
  return x / (1.0 + x);
}

std::vector<double> detector_povm(const DetectorModel& model, int outcome, int signal_cutoff) {
  if (outcome < 0) throw std::invalid_argument("detector outcome must be non-negative");
  const double tau = model.efficiency;
  std::vector<double> w(signal_cutoff + 1, 0.0);
  if (model.dark_mean == 0.0) {
    // Binomial thinning.
    for (int m = outcome; m <= signal_cutoff; ++m) {
      const double log_c = std::lgamma(m + 1.0) - std::lgamma(outcome + 1.0) - std::lgamma(m - outcome + 1.0);
      const double a = outcome == 0 ? 1.0 : std::pow(tau, outcome);
      const double b = m - outcome == 0 ? 1.0 : std::pow(1.0 - tau, m - outcome);
      w[m] = std::exp(log_c) * a * b;
    }
    return w;
  }
  const double aux_V = 1.0 + 2.0 * model.dark_mean;
  const int aux_cut = std::max(thermal_cutoff_for(aux_V), outcome);
  const FockArray aux = thermal_state(aux_V, aux_cut);
  const int top = signal_cutoff + aux_cut;
  const auto u = beamsplitter_matrix(tau, signal_cutoff, aux_cut, top, top);
  for (int m = 0; m <= signal_cutoff; ++m) {
    for (int k = 0; k <= aux_cut; ++k) {
      const int rest = m + k - outcome;
      if (rest < 0) continue;
      const double pk = aux.data()[k * (aux_cut + 1) + k].real();
      w[m] += pk * std::norm(u(outcome * (top + 1) + rest, m * (aux_cut + 1) + k));
    }
  }
  return w;
}

Herald detect_pnr(const FockArray& s, Mode i, const DetectorModel& model, int outcome) {
  const int cut = s.cutoff(i);
  if (outcome < 0 || outcome > cut) {
    throw std::out_of_range("detector outcome " + std::to_string(outcome) + " exceeds the mode cutoff");
  }
  if (model.ideal()) return herald_fock(s, i, outcome);
  const auto w = detector_povm(model, outcome, cut);
  return apply_diagonal_povm(s, i, w);
}

double gain_of(double t_b, double eta_b) {
  if (!(t_b > 0.0 && t_b < 1.0)) throw std::invalid_argument("T_B must lie in (0, 1)");
  if (!(eta_b > 0.0 && eta_b <= 1.0)) throw std::invalid_argument("eta_B must lie in (0, 1]");
  return std::sqrt(t_b / (eta_b * (1.0 - t_b)));
}

double t_b_for_gain(double gain, double eta_b) {
  if (!(gain > 0.0)) throw std::invalid_argument("gain must be positive");
  const double x = gain * gain * eta_b;
  return x / (1.0 + x);
}

Herald scissor_ideal(const FockArray& s, Mode i, const ScissorSpec& spec) {
  if (spec.order < 1) throw std::invalid_argument("scissor order must be >= 1");
  if (!(spec.gain > 0.0)) throw std::invalid_argument("scissor gain must be positive");
  const int k = spec.order;
  const int cut = s.cutoff(i);
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(k + 1, cut + 1);
  const double c = std::sqrt(spec.success);
  for (int n = 0; n <= std::min(k, cut); ++n) op(n, n) = c * std::pow(spec.gain, n);
  const std::array<Mode, 1> modes{i};
  const std::array<int, 1> outs{k};
  FockArray out = apply_mode_operator(s, modes, op, outs);
  // Levels k' <= k that the input could not represent are lost information.
  if (cut < k) out.add_discarded_mass(s.top_level_mass(i));
  return {out, out.trace()};
}

ScissorResult scissor1_circuit(const FockArray& s, Mode i, const ScissorSpec& spec, double eta_b, double env_V,
                               ScissorCutoffs cut) {
  if (spec.order != 1) throw std::invalid_argument("scissor1_circuit simulates the single-photon scissor only");
  if (cut.arm < 1) throw std::invalid_argument("scissor arm cutoff must be >= 1");
  const int input = s.check(i);

  // Resource on (B, D): the source photon split on the T_B beamsplitter,
  // then the arm D travels through the lossy link to Charlie.
  FockArray resource = tensor_product(single_photon_source(spec.source), FockArray::vacuum({cut.arm}, StateKind::density));
  resource = apply_beamsplitter(resource, Mode{0}, Mode{1}, spec.t_b);
  resource = loss_channel(resource, Mode{1}, eta_b, env_V);

  const int m = s.num_modes();
  const Mode arm{1};
  const int top = s.cutoffs()[input] + cut.arm;
  const auto click = detector_povm(spec.detector, 1, top);
  const auto dark = detector_povm(spec.detector, 0, top);

  // Output modes come back as (s without i, B); move B to position i.
  std::vector<int> order(m);
  for (int k = 0; k < m; ++k) order[k] = k < input ? k : (k == input ? m - 1 : k - 1);

  const std::array<PovmPair, 2> patterns{PovmPair{dark, click}, PovmPair{click, dark}};
  auto branches = interfere_and_measure(s, i, resource, arm, spec.t_c, patterns);
  Herald p10{permute_modes(branches[0].state, order), branches[0].probability};
  Herald p01{permute_modes(branches[1].state, order), branches[1].probability};

  FockArray sum = p10.state;
  const FockArray corrected = apply_phase(p01.state, i, std::numbers::pi);
  simd::caxpy(cplx{1.0, 0.0}, corrected.data(), sum.data());
  return {sum, p10.probability + p01.probability, {p10.probability, p01.probability}};
}

}  // namespace cvrep
