#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "cvrep/components.hpp"

namespace cvrep {

double transmissivity_of(double km, double db_per_km);

// What Alice feeds into her link: an EPR state, or a single photon split on
// a beamsplitter of transmissivity photon_split (kept mode, sent mode).
enum class InputKind { epr, split_photon };

struct RepeaterConfig {
  InputKind input = InputKind::epr;
  double photon_split = 0.5;
  double chi = 0.1;
  double total_km = 100.0;
  double split = 0.5;  // fraction of the distance on Alice's link
  double attenuation = 0.2;  // dB/km
  double t_c = 0.5;
  double t_b = 0.5;
  SourceModel source{};
  DetectorModel detector{};
  double env_V = 1.0;
  int epr_cutoff = -1;  // -1 picks the cutoff from chi
  int arm_cutoff = 2;

  double km_a() const { return split * total_km; }
  double km_b() const { return (1.0 - split) * total_km; }
  double eta_a() const { return transmissivity_of(km_a(), attenuation); }
  double eta_b() const { return transmissivity_of(km_b(), attenuation); }
  double eta() const { return transmissivity_of(total_km, attenuation); }
  int resolved_epr_cutoff() const;
  // Two-mode state Alice holds before her link, (kept, sent).
  FockArray input_state() const;
  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct HeraldedState {
  FockArray rho_ab;  // (A, Bob's output), unnormalized, trace = P
  double P = 0.0;
  int branch_count = 0;
  std::array<double, 2> pattern_probability{};

  // Truncation error relative to the heralded probability.
  double tail() const { return P > 0.0 ? rho_ab.discarded_mass() / P : rho_ab.discarded_mass(); }
  bool cutoff_suspect(double tol = kDefaultTailTolerance) const { return tail() > tol; }
};

// The heralded pure-loss state on (A, B, E, F) written out term by term for
// the (1,0) pattern with ideal devices and T_C = 1/2. Squared norm is P/2.
FockArray analytic_output_pure_loss(double chi, double eta_a, double eta_b, double t_b, int cutoff);

// Same state obtained by simulating the circuit with both environments kept.
// The environment phases and the global phase are aligned with the analytic
// form; these are local unitaries on E and F and do not affect rho_AB.
FockArray circuit_output_pure_loss(double chi, double eta_a, double eta_b, double t_b, int cutoff);

HeraldedState run_single_repeater(const RepeaterConfig& cfg);

// Repeater built on the k-scissor contract: Alice's link, then the heralded
// operator with gain set to undo that link and success prefactor
// kappa_k eta_B^k.
HeraldedState run_k_scissor_repeater(const RepeaterConfig& cfg, int order);
double k_scissor_prefactor(int order);

enum class NoiseReferral { input, output };

double calibrate_env_noise(double xi_ref, double km_ref, double db_per_km,
                           NoiseReferral referral = NoiseReferral::input);
double excess_noise_of(double eta, double env_V, NoiseReferral referral = NoiseReferral::input);

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// eta_A = eta_B = sqrt(eta), T_B = T_C = 1/2.
RepeaterConfig symmetric_preset(double total_km, double chi);
// The split is solved in closed form so that sqrt(eta_A) * g hits the target.
RepeaterConfig asymmetric_preset(double total_km, double chi = 0.4, double t_b = 2.0 / 3.0,
                                 double amplitude = 0.21);
double asymmetric_split(double total_km, double t_b, double amplitude, double db_per_km);

}  // namespace cvrep
