#pragma once

#include <array>
#include <vector>

#include "cvrep/fock.hpp"

namespace cvrep {

struct SourceModel {
  double efficiency = 1.0;  // tau_s
};

struct DetectorModel {
  double efficiency = 1.0;       // tau_d
  double dark_mean = 0.0;        // mean photon number injected on the auxiliary port
  double dark_click_prob = 0.0;  // click probability on vacuum input

  bool ideal() const { return efficiency == 1.0 && dark_mean == 0.0; }
  // Calibrates dark_mean so a vacuum input clicks with the given probability.
  static DetectorModel with_dark_click(double efficiency, double click_prob);
};

struct ScissorSpec {
  int order = 1;
  double gain = 1.0;
  double t_b = 0.5;
  double t_c = 0.5;
  // Squared prefactor c_k^2 of the heralded operator used by scissor_ideal.
  double success = 0.5;
  DetectorModel detector{};
  SourceModel source{};
};

// Two-mode squeezed vacuum on (signal, idler). The truncated Schmidt tail
// is recorded as discarded mass.
FockArray epr_state(double chi, int cutoff);
// Smallest cutoff whose EPR tail chi^(2(N+1)) falls below tol.
int epr_cutoff_for(double chi, double tol = 1e-15, int max_cutoff = 40);
FockArray coherent_state(cplx alpha, int cutoff);
FockArray thermal_state(double variance, int cutoff);
// Cutoff at which a thermal state of this variance keeps all but tol of its mass.
int thermal_cutoff_for(double variance, double tol = 1e-16, int max_cutoff = 12);

struct LossOptions {
  bool keep_environment = false;  // environment appended as the last mode
  int env_cutoff = -1;            // -1 picks one from env_V
};

// Thermal-loss channel: mixes mode i with a thermal environment of variance
// env_V on a beamsplitter of transmissivity eta.
FockArray loss_channel(const FockArray& s, Mode i, double eta, double env_V, LossOptions opt = {});

FockArray single_photon_source(const SourceModel& model);

// Inverse of the vacuum click probability p = n(1 - tau)/(1 + n(1 - tau)).
double calibrate_dark_counts(double tau_d, double target_click_prob);
// Click probability of a vacuum input for the given detector.
double vacuum_click_probability(const DetectorModel& model);

// POVM weights w[m] = P(outcome | m photons), m = 0..signal_cutoff.
std::vector<double> detector_povm(const DetectorModel& model, int outcome, int signal_cutoff);
Herald detect_pnr(const FockArray& s, Mode i, const DetectorModel& model, int outcome);

// Gain of the single scissor under pure loss.
double gain_of(double t_b, double eta_b);
// T_B that realises gain g with loss eta_b inside the scissor.
double t_b_for_gain(double gain, double eta_b);

// Heralded operator c_k sum_{n<=k} g^n |n><n| on mode i; the mode cutoff
// becomes k.
Herald scissor_ideal(const FockArray& s, Mode i, const ScissorSpec& spec);

struct ScissorResult {
  FockArray state;  // unnormalized, both patterns summed
  double probability;
  std::array<double, 2> pattern_probability;  // (1,0) then (0,1)
};

struct ScissorCutoffs {
  int arm = 2;  // the lossy arm travelling to Charlie; Bob's output keeps cutoff 1
};

// Physical single-photon scissor acting on mode i. A click pattern is (n, m)
// with n counted behind Bob's arm and m behind the input arm. Pattern (1,0)
// needs no correction; pattern (0,1) is corrected with a pi phase on the
// output. Bob's output mode replaces mode i.
ScissorResult scissor1_circuit(const FockArray& s, Mode i, const ScissorSpec& spec, double eta_b,
                               double env_V, ScissorCutoffs cut = {});

}  // namespace cvrep
