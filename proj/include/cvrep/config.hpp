#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "cvrep/chain.hpp"

namespace cvrep {

enum class SweepMode { single_repeater, direct, chain, geof, purity };
enum class Preset { ideal, realistic, custom };
// asymmetric solves the split from amplitude; fixed uses split as given.
enum class Layout { asymmetric, symmetric, fixed };
enum class OutputFormat { csv, json };

// Everything a CLI run needs. The text form is INI with sections
// [sweep] [noise] [repeater] [devices] [chain] [optimize] [bounds];
// see README for the key list.
struct SweepSpec {
  SweepMode mode = SweepMode::single_repeater;
  double start_km = 100.0;
  double stop_km = 400.0;
  double step_km = 10.0;
  Preset preset = Preset::ideal;
  OutputFormat format = OutputFormat::csv;
  double beta = kDefaultBeta;

  double xi = 0.02;
  double xi_reference_km = 350.0;
  NoiseReferral referral = NoiseReferral::input;

  Layout layout = Layout::asymmetric;
  double chi = 0.4;
  double t_b = 2.0 / 3.0;
  double t_c = 0.5;
  double split = 0.5;
  double amplitude = 0.21;
  double attenuation = 0.2;
  int epr_cutoff = -1;
  int arm_cutoff = 2;

  // Only read with preset = custom.
  double source_efficiency = 1.0;
  double detector_efficiency = 1.0;
  double dark_click = 0.0;

  double chain_chi = 0.2;
  double star_t = 0.73;
  double chain_amplitude = 0.42;
  double memory_efficiency = 1.0;
  SwapResource resource = SwapResource::split_photon;

  double optimize_km = 300.0;
  std::vector<double> optimize_chi{0.2, 0.3, 0.4, 0.5};
  std::vector<double> optimize_t_b{0.5, 2.0 / 3.0, 0.75};
  std::vector<double> optimize_split{0.4, 0.5, 0.55, 0.6, 0.65, 0.7};

  std::vector<int> links{1, 2, 4};

  // Throws std::invalid_argument on the first violated constraint.
  void validate() const;
  double env_V() const;
  SourceModel source() const;
  DetectorModel detector() const;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Applies "section.key = value" on top of spec. Unknown keys and malformed
// values throw ConfigError.
void set_option(SweepSpec& spec, const std::string& dotted_key, const std::string& value);
SweepSpec parse_config(std::istream& in);
SweepSpec load_config(const std::string& path);
// Canonical text; parse_config(to_config_text(s)) reproduces s exactly.
std::string to_config_text(const SweepSpec& spec);
std::vector<std::string> config_keys();

std::string to_string(SweepMode m);
std::string to_string(Preset p);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace cvrep
