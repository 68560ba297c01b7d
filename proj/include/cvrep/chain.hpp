#pragma once

#include "cvrep/keyrate.hpp"
#include "cvrep/protocol.hpp"

namespace cvrep {

// Expected number of rounds until 2^n independent attempts, each succeeding
// with probability P per round, have all succeeded at least once.
double z_n(double P, int n);

// What the second half of the chain distributes between the central node
// and Bob. split_photon: a single photon split at the central node and
// relayed to Bob by a scissor, which makes the swap a scissor teleportation
// of the first half's stored mode. epr: a second EPR-sourced repeater with
// its source at the central node.
enum class SwapResource { split_photon, epr };

struct ChainConfig {
  double chi = 0.2;
  double total_km = 400.0;
  double attenuation = 0.2;
  double star_t = 0.73;     // T_B of the first-half scissor
  double amplitude = 0.42;  // sqrt(eta_A) g within the first half
  double memory_efficiency = 1.0;
  SwapResource resource = SwapResource::split_photon;
  SourceModel source{};
  DetectorModel detector{};
  double env_V = 1.0;
  int epr_cutoff = -1;
  int arm_cutoff = 2;

  // Alice to the central node; the split is solved from star_t and amplitude.
  RepeaterConfig first_half() const;
  // Central node to Bob, symmetric with 50:50 beamsplitters.
  RepeaterConfig second_half() const;
  void validate() const;
};

// s1 on (A, m1), s2 on (m2, B). Both are normalized, passed through the
// memory channel, and m1, m2 are interfered on a 50:50 beamsplitter with
// exactly one click heralded. The result on (A, B) has trace P_swap.
HeraldedState swap_partial_bell(const HeraldedState& s1, const HeraldedState& s2, const DetectorModel& detector,
                                double memory_efficiency = 1.0);

struct ChainResult {
  HeraldedState state;  // swapped state, P = P_swap
  double p_first = 0.0;
  double p_second = 0.0;
  double p_swap = 0.0;
  double rate = 0.0;  // P_swap / Z_1(min(p_first, p_second))
  KeyRateResult key;
};

ChainResult run_three_repeater_chain(const ChainConfig& cfg, double beta = kDefaultBeta);

}  // namespace cvrep
