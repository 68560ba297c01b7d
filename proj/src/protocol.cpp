#include "cvrep/protocol.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cvrep {

double transmissivity_of(double km, double db_per_km) { return std::pow(10.0, -db_per_km * km / 10.0); }

int RepeaterConfig::resolved_epr_cutoff() const {
  return epr_cutoff >= 0 ? epr_cutoff : epr_cutoff_for(chi);
}

FockArray RepeaterConfig::input_state() const {
  if (input == InputKind::epr) return epr_state(chi, resolved_epr_cutoff());
  // The sent mode gets the arm's headroom for thermal photons added in the link.
  return apply_beamsplitter(FockArray::number_state({1, arm_cutoff}, {1, 0}), Mode{0}, Mode{1}, photon_split);
}

void RepeaterConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("RepeaterConfig: " + what); };
  if (!(chi >= 0.0 && chi < 1.0)) fail("chi must lie in [0, 1)");
  if (!(photon_split >= 0.0 && photon_split <= 1.0)) fail("photon split must lie in [0, 1]");
  if (!(total_km >= 0.0)) fail("total distance must be >= 0");
  if (!(split > 0.0 && split < 1.0)) fail("split must lie in (0, 1)");
  if (!(attenuation >= 0.0)) fail("attenuation must be >= 0");
  if (!(t_c > 0.0 && t_c < 1.0)) fail("T_C must lie in (0, 1)");
  if (!(t_b > 0.0 && t_b < 1.0)) fail("T_B must lie in (0, 1)");
  if (!(source.efficiency >= 0.0 && source.efficiency <= 1.0)) fail("source efficiency must lie in [0, 1]");
  if (!(detector.efficiency >= 0.0 && detector.efficiency <= 1.0)) fail("detector efficiency must lie in [0, 1]");
  if (!(detector.dark_mean >= 0.0)) fail("dark-count mean must be >= 0");
  if (!(env_V >= 1.0)) fail("environment variance must be >= 1");
  if (epr_cutoff == 0 || epr_cutoff < -1) fail("EPR cutoff must be >= 1 (or -1 for automatic)");
  if (arm_cutoff < 1) fail("arm cutoff must be >= 1");
}

FockArray analytic_output_pure_loss(double chi, double eta_a, double eta_b, double t_b, int cutoff) {
  FockArray out({cutoff, 1, cutoff, 1}, StateKind::pure);
  auto d = out.data();
  const int n = cutoff + 1;
  auto at = [&](int a, int b, int e, int f) -> cplx& { return d[((a * 2 + b) * n + e) * 2 + f]; };
  const double pre = std::sqrt((1.0 - chi * chi) / 2.0);
  for (int k = 0; k <= cutoff; ++k) {
    const double loss = std::pow(1.0 - eta_a, 0.5 * k);
    const double chik = std::pow(chi, k);
    at(k, 0, k, 0) = pre * loss * chik * std::sqrt(eta_b) * std::sqrt(1.0 - t_b);
    if (k + 1 > cutoff) continue;
    const double second = pre * loss * chik * chi * std::sqrt(k + 1.0) * std::sqrt(eta_a);
    at(k + 1, 1, k, 0) = second * std::sqrt(t_b);
    at(k + 1, 0, k, 1) = second * std::sqrt(1.0 - eta_b) * std::sqrt(1.0 - t_b);
  }
  return out;
}

FockArray circuit_output_pure_loss(double chi, double eta_a, double eta_b, double t_b, int cutoff) {
  LossOptions keep{.keep_environment = true, .env_cutoff = 0};
  // (A, C, E)
  FockArray alice = loss_channel(epr_state(chi, cutoff), Mode{1}, eta_a, 1.0, keep);
  // (B, D, F)
  FockArray bob = FockArray::number_state({1, 1}, {1, 0});
  bob = apply_beamsplitter(bob, Mode{0}, Mode{1}, t_b);
  bob = loss_channel(bob, Mode{1}, eta_b, 1.0, keep);

  // (A, C, E, B, D, F); only the one-photon outputs of Charlie's beamsplitter
  // are needed, and their amplitudes are exact at output cutoff 1.
  FockArray joint = tensor_product(alice, bob);
  joint = apply_beamsplitter(joint, Mode{1}, Mode{4}, 0.5, {1, 1});
  Herald h = herald_fock(joint, Mode{4}, 1);
  h = herald_fock(h.state, Mode{1}, 0);
  const std::array<int, 4> order{0, 2, 1, 3};
  FockArray out = permute_modes(h.state, order);

  out = apply_phase(out, Mode{2}, -0.5 * std::numbers::pi);
  out = apply_phase(out, Mode{3}, std::numbers::pi);
  for (auto& v : out.data()) v *= cplx{0.0, -1.0};
  return out;
}

namespace {

ScissorSpec scissor_from(const RepeaterConfig& cfg) {
  ScissorSpec spec;
  spec.order = 1;
  spec.t_b = cfg.t_b;
  spec.t_c = cfg.t_c;
  spec.gain = gain_of(cfg.t_b, cfg.eta_b());
  spec.success = cfg.eta_b() * (1.0 - cfg.t_b);
  spec.detector = cfg.detector;
  spec.source = cfg.source;
  return spec;
}

}  // namespace

HeraldedState run_single_repeater(const RepeaterConfig& cfg) {
  cfg.validate();
  FockArray rho = loss_channel(cfg.input_state(), Mode{1}, cfg.eta_a(), cfg.env_V);
  ScissorResult r = scissor1_circuit(rho, Mode{1}, scissor_from(cfg), cfg.eta_b(), cfg.env_V, {cfg.arm_cutoff});
  HeraldedState out{std::move(r.state), r.probability, 2, r.pattern_probability};
  return out;
}

double k_scissor_prefactor(int order) {
  switch (order) {
    case 1: return 0.5;
    case 3: return 3.0 / 64.0;
    default:
      throw std::invalid_argument("no success prefactor is defined for a " + std::to_string(order) + "-scissor");
  }
}

HeraldedState run_k_scissor_repeater(const RepeaterConfig& cfg, int order) {
  cfg.validate();
  const int cut = std::max(cfg.resolved_epr_cutoff(), order);
  FockArray rho = loss_channel(epr_state(cfg.chi, cut), Mode{1}, cfg.eta_a(), cfg.env_V);
  ScissorSpec spec = scissor_from(cfg);
  spec.order = order;
  spec.success = k_scissor_prefactor(order) * std::pow(cfg.eta_b(), order);
  Herald h = scissor_ideal(rho, Mode{1}, spec);
  HeraldedState out{std::move(h.state), h.probability, 1, {h.probability, 0.0}};
  return out;
}

double calibrate_env_noise(double xi_ref, double km_ref, double db_per_km, NoiseReferral referral) {
  if (!(km_ref > 0.0)) throw std::invalid_argument("reference distance must be positive");
  if (!(xi_ref >= 0.0)) throw std::invalid_argument("excess noise must be >= 0");
  const double eta = transmissivity_of(km_ref, db_per_km);
  if (referral == NoiseReferral::input) return 1.0 + xi_ref * eta / (1.0 - eta);
  return 1.0 + xi_ref / (1.0 - eta);
}

double excess_noise_of(double eta, double env_V, NoiseReferral referral) {
  const double out = (1.0 - eta) * (env_V - 1.0);
  return referral == NoiseReferral::input ? out / eta : out;
}

RepeaterConfig symmetric_preset(double total_km, double chi) {
  RepeaterConfig c;
  c.chi = chi;
  c.total_km = total_km;
  c.split = 0.5;
  c.t_b = 0.5;
  c.t_c = 0.5;
  return c;
}

double asymmetric_split(double total_km, double t_b, double amplitude, double db_per_km) {
  if (!(total_km > 0.0)) throw Infeasible("asymmetric preset needs a positive distance");
  // eta_A / eta_B = amplitude^2 (1 - T_B) / T_B fixes the offset 2 L_A - L.
  const double ratio = amplitude * amplitude * (1.0 - t_b) / t_b;
  const double offset = -10.0 * std::log10(ratio) / db_per_km;
  const double split = 0.5 * (total_km + offset) / total_km;
  if (!(split > 0.0 && split < 1.0)) {
    throw Infeasible("no relay position satisfies sqrt(eta_A) g = " + std::to_string(amplitude) + " at " +
                     std::to_string(total_km) + " km");
  }
  return split;
}

RepeaterConfig asymmetric_preset(double total_km, double chi, double t_b, double amplitude) {
  RepeaterConfig c;
  c.chi = chi;
  c.total_km = total_km;
  c.t_b = t_b;
  c.t_c = 0.5;
  c.split = asymmetric_split(total_km, t_b, amplitude, c.attenuation);
  return c;
}

}  // namespace cvrep
