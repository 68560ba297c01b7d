#include "cvrep/chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cvrep/simd.hpp"

namespace cvrep {

double z_n(double P, int n) {
  if (!(P > 0.0 && P <= 1.0)) throw std::invalid_argument("z_n needs P in (0, 1]");
  if (n < 0 || n > 6) throw std::invalid_argument("z_n needs 0 <= n <= 6");
  const int top = 1 << n;
  const long double q = 1.0L - P;
  long double sum = 0.0L, binom = 1.0L, qj = 1.0L;
  for (int j = 1; j <= top; ++j) {
    binom = binom * (top - j + 1) / j;
    qj *= q;
    const long double term = binom / (1.0L - qj);
    sum += (j % 2 == 1) ? term : -term;
  }
  return static_cast<double>(sum);
}

namespace {

RepeaterConfig common(const ChainConfig& cfg) {
  RepeaterConfig c;
  c.chi = cfg.chi;
  c.total_km = 0.5 * cfg.total_km;
  c.attenuation = cfg.attenuation;
  c.t_c = 0.5;
  c.source = cfg.source;
  c.detector = cfg.detector;
  c.env_V = cfg.env_V;
  c.epr_cutoff = cfg.epr_cutoff;
  c.arm_cutoff = cfg.arm_cutoff;
  return c;
}

}  // namespace

RepeaterConfig ChainConfig::first_half() const {
  RepeaterConfig c = common(*this);
  c.t_b = star_t;
  c.split = asymmetric_split(c.total_km, star_t, amplitude, attenuation);
  return c;
}

RepeaterConfig ChainConfig::second_half() const {
  RepeaterConfig c = common(*this);
  c.t_b = 0.5;
  c.split = 0.5;
  if (resource == SwapResource::split_photon) {
    c.input = InputKind::split_photon;
    c.photon_split = 0.5;
  }
  return c;
}

void ChainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("ChainConfig: " + what); };
  if (!(total_km > 0.0)) fail("total distance must be positive");
  if (!(star_t > 0.0 && star_t < 1.0)) fail("star transmissivity must lie in (0, 1)");
  if (!(amplitude > 0.0)) fail("amplitude must be positive");
  if (!(memory_efficiency >= 0.0 && memory_efficiency <= 1.0)) fail("memory efficiency must lie in [0, 1]");
  first_half().validate();
  second_half().validate();
}

HeraldedState swap_partial_bell(const HeraldedState& s1, const HeraldedState& s2, const DetectorModel& detector,
                                double memory_efficiency) {
  if (s1.rho_ab.num_modes() != 2 || s2.rho_ab.num_modes() != 2 || s1.rho_ab.kind() != StateKind::density ||
      s2.rho_ab.kind() != StateKind::density) {
    throw std::invalid_argument("swap_partial_bell expects two two-mode density matrices");
  }
  if (!(s1.P > 0.0 && s2.P > 0.0)) throw std::domain_error("swap_partial_bell needs both halves to have P > 0");
  if (!(memory_efficiency >= 0.0 && memory_efficiency <= 1.0)) {
    throw std::invalid_argument("memory efficiency must lie in [0, 1]");
  }
  FockArray left = normalized(s1.rho_ab);
  FockArray right = normalized(s2.rho_ab);
  if (memory_efficiency < 1.0) {
    left = loss_channel(left, Mode{1}, memory_efficiency, 1.0);
    right = loss_channel(right, Mode{0}, memory_efficiency, 1.0);
  }
  const int top = left.cutoffs()[1] + right.cutoffs()[0];
  const auto click = detector_povm(detector, 1, top);
  const auto dark = detector_povm(detector, 0, top);
  const std::array<PovmPair, 2> patterns{PovmPair{click, dark}, PovmPair{dark, click}};
  auto branches = interfere_and_measure(left, Mode{1}, right, Mode{0}, 0.5, patterns);

  // The reflected photon picks up a quarter turn; the two patterns differ by pi.
  FockArray sum = apply_phase(branches[0].state, Mode{1}, 0.0);
  const FockArray other = apply_phase(branches[1].state, Mode{1}, std::numbers::pi);
  simd::caxpy(cplx{1.0, 0.0}, other.data(), sum.data());
  HeraldedState out{std::move(sum), branches[0].probability + branches[1].probability, 2,
                    {branches[0].probability, branches[1].probability}};
  return out;
}

ChainResult run_three_repeater_chain(const ChainConfig& cfg, double beta) {
  cfg.validate();
  const HeraldedState first = run_single_repeater(cfg.first_half());
  const HeraldedState second = run_single_repeater(cfg.second_half());
  ChainResult r{swap_partial_bell(first, second, cfg.detector, cfg.memory_efficiency)};
  r.p_first = first.P;
  r.p_second = second.P;
  r.p_swap = r.state.P;
  r.rate = r.p_swap / z_n(std::min(r.p_first, r.p_second), 1);
  r.key = key_rate_from(covariance_of(r.state), r.rate, beta);
  return r;
}

}  // namespace cvrep
