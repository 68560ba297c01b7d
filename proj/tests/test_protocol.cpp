#include <gtest/gtest.h>

#include <cmath>

#include "cvrep/keyrate.hpp"
#include "cvrep/protocol.hpp"
#include "cvrep/simd.hpp"

namespace {

using namespace cvrep;

double max_diff(const FockArray& a, const FockArray& b) {
  EXPECT_EQ(a.data().size(), b.data().size());
  double w = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) w = std::max(w, std::abs(a.data()[k] - b.data()[k]));
  return w;
}

struct AnalyticCase {
  double chi, eta_a, eta_b, t_b;
};

class AnalyticGrid : public ::testing::TestWithParam<AnalyticCase> {};

TEST_P(AnalyticGrid, CircuitMatchesTermByTermState) {
  const auto c = GetParam();
  const FockArray analytic = analytic_output_pure_loss(c.chi, c.eta_a, c.eta_b, c.t_b, 12);
  const FockArray circuit = circuit_output_pure_loss(c.chi, c.eta_a, c.eta_b, c.t_b, 12);
  EXPECT_LT(max_diff(analytic, circuit), 1e-10);
}

std::vector<AnalyticCase> analytic_cases() {
  std::vector<AnalyticCase> out;
  for (double chi : {0.0, 0.2, 0.4})
    for (double ea : {0.25, 0.5, 1.0})
      for (double eb : {0.25, 0.5, 1.0})
        for (double tb : {1.0 / 3.0, 0.5, 2.0 / 3.0}) out.push_back({chi, ea, eb, tb});
  return out;
}

INSTANTIATE_TEST_SUITE_P(Grid, AnalyticGrid, ::testing::ValuesIn(analytic_cases()));

TEST(SingleRepeater, PatternProbabilityMatchesAnalyticNorm) {
  RepeaterConfig cfg;
  cfg.chi = 0.3;
  cfg.total_km = 40.0;
  cfg.split = 0.4;
  cfg.t_b = 0.6;
  const HeraldedState s = run_single_repeater(cfg);
  const FockArray a = analytic_output_pure_loss(cfg.chi, cfg.eta_a(), cfg.eta_b(), cfg.t_b, cfg.resolved_epr_cutoff());
  EXPECT_NEAR(s.pattern_probability[0], a.trace(), 1e-12);
  EXPECT_NEAR(s.P, 2.0 * a.trace(), 1e-12);
  EXPECT_NEAR(s.rho_ab.trace(), s.P, 1e-14);
}

TEST(SingleRepeater, VacuumInput) {
  for (double km_b : {10.0, 30.0, 60.0})
    for (double t_b : {0.2, 0.5, 0.8}) {
      RepeaterConfig cfg;
      cfg.chi = 0.0;
      cfg.total_km = 2.0 * km_b;
      cfg.t_b = t_b;
      EXPECT_NEAR(run_single_repeater(cfg).P, cfg.eta_b() * (1.0 - t_b), 1e-12);
    }
}

TEST(SingleRepeater, SmallChiSuccessIsHalfRootEta) {
  const RepeaterConfig cfg = symmetric_preset(300.0, 0.01);
  EXPECT_NEAR(run_single_repeater(cfg).P / (0.5 * std::sqrt(cfg.eta())), 1.0, 1e-3);
}

TEST(SingleRepeater, ScalarAndVectorKernelsAgree) {
  if (!simd::cpu_has_avx2()) GTEST_SKIP() << "no AVX2";
  RepeaterConfig cfg = asymmetric_preset(200.0);
  cfg.detector = DetectorModel::with_dark_click(0.75, 1e-8);
  cfg.source = {0.75};
  cfg.env_V = 1.001;
  const auto before = simd::active_isa();
  simd::set_isa(simd::Isa::scalar);
  const HeraldedState a = run_single_repeater(cfg);
  simd::set_isa(simd::Isa::avx2);
  const HeraldedState b = run_single_repeater(cfg);
  simd::set_isa(before);
  EXPECT_NEAR(a.P, b.P, 1e-15);
  EXPECT_LT(max_diff(a.rho_ab, b.rho_ab), 1e-15);
}

TEST(SingleRepeater, OutputIsInStandardForm) {
  RepeaterConfig cfg = asymmetric_preset(250.0);
  cfg.env_V = 1.0 + 2e-9;
  const CovarianceMatrix cm = covariance_of(run_single_repeater(cfg));
  EXPECT_LT(cm.standard_form_asymmetry(), 1e-12);
  EXPECT_GT(cm.c(), 0.0);
}

TEST(SingleRepeater, SmallCutoffIsFlagged) {
  RepeaterConfig cfg = symmetric_preset(50.0, 0.5);
  cfg.epr_cutoff = 3;
  EXPECT_TRUE(run_single_repeater(cfg).cutoff_suspect());
  cfg.epr_cutoff = -1;
  EXPECT_FALSE(run_single_repeater(cfg).cutoff_suspect());
}

TEST(SingleRepeater, RejectsInvalidConfig) {
  RepeaterConfig cfg;
  cfg.split = 1.0;
  EXPECT_THROW(run_single_repeater(cfg), std::invalid_argument);
  cfg = RepeaterConfig{};
  cfg.env_V = 0.9;
  EXPECT_THROW(run_single_repeater(cfg), std::invalid_argument);
  cfg = RepeaterConfig{};
  cfg.chi = 1.0;
  EXPECT_THROW(run_single_repeater(cfg), std::invalid_argument);
}

TEST(SplitPhotonInput, LosslessRelayReproducesInput) {
  RepeaterConfig cfg;
  cfg.input = InputKind::split_photon;
  cfg.photon_split = 0.3;
  cfg.total_km = 0.0;
  const HeraldedState s = run_single_repeater(cfg);
  const FockArray in = to_density(cfg.input_state());
  const FockArray out = normalized(s.rho_ab);
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c)
        for (int d = 0; d <= 1; ++d) {
          const std::array<int, 2> k{a, b}, r{c, d};
          EXPECT_NEAR(std::abs(out.element(k, r) - in.element(k, r)), 0.0, 1e-14);
        }
}

TEST(KScissor, SuccessFollowsPrefactor) {
  EXPECT_DOUBLE_EQ(k_scissor_prefactor(1), 0.5);
  EXPECT_DOUBLE_EQ(k_scissor_prefactor(3), 3.0 / 64.0);
  EXPECT_THROW(k_scissor_prefactor(2), std::invalid_argument);
  const RepeaterConfig cfg = symmetric_preset(200.0, 1e-3);
  const HeraldedState s = run_k_scissor_repeater(cfg, 3);
  EXPECT_NEAR(s.P / (3.0 / 64.0 * std::pow(cfg.eta(), 1.5)), 1.0, 1e-4);
  EXPECT_EQ(s.rho_ab.cutoffs()[1], 3);
}

TEST(Presets, AsymmetricSplitHitsAmplitude) {
  for (double L : {150.0, 250.0, 400.0}) {
    const RepeaterConfig c = asymmetric_preset(L, 0.4, 2.0 / 3.0, 0.21);
    EXPECT_NEAR(std::sqrt(c.eta_a()) * gain_of(c.t_b, c.eta_b()), 0.21, 1e-12);
    EXPECT_NEAR(c.km_a() + c.km_b(), L, 1e-9);
  }
  EXPECT_THROW(asymmetric_preset(50.0), Infeasible);
  const RepeaterConfig s = symmetric_preset(100.0, 0.1);
  EXPECT_NEAR(s.eta_a(), std::sqrt(s.eta()), 1e-15);
}

TEST(Noise, CalibrationInvertsExcessNoise) {
  for (auto ref : {NoiseReferral::input, NoiseReferral::output}) {
    const double w = calibrate_env_noise(0.02, 350.0, 0.2, ref);
    EXPECT_NEAR(excess_noise_of(transmissivity_of(350.0, 0.2), w, ref), 0.02, 1e-8);
  }
  EXPECT_NEAR(calibrate_env_noise(0.02, 350.0, 0.2) - 1.0, 2e-9, 1e-15);
}

}  // namespace
