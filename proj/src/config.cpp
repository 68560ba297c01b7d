#include "cvrep/config.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cvrep {
namespace {

template <class E>
using Names = std::vector<std::pair<E, const char*>>;

const Names<SweepMode> kModes{{SweepMode::single_repeater, "single-repeater"},
                              {SweepMode::direct, "direct"},
                              {SweepMode::chain, "chain"},
                              {SweepMode::geof, "geof"},
                              {SweepMode::purity, "purity"}};
const Names<Preset> kPresets{{Preset::ideal, "ideal"}, {Preset::realistic, "realistic"}, {Preset::custom, "custom"}};
const Names<Layout> kLayouts{{Layout::asymmetric, "asymmetric"}, {Layout::symmetric, "symmetric"}, {Layout::fixed, "fixed"}};
const Names<OutputFormat> kFormats{{OutputFormat::csv, "csv"}, {OutputFormat::json, "json"}};
const Names<NoiseReferral> kReferrals{{NoiseReferral::input, "input"}, {NoiseReferral::output, "output"}};
const Names<SwapResource> kResources{{SwapResource::split_photon, "split-photon"}, {SwapResource::epr, "epr"}};

template <class E>
std::string name_of(const Names<E>& names, E e) {
  for (const auto& [v, n] : names)
    if (v == e) return n;
  return "?";
}

template <class E>
E enum_of(const Names<E>& names, const std::string& key, const std::string& s) {
  for (const auto& [v, n] : names)
    if (s == n) return v;
  std::string allowed;
  for (const auto& [v, n] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
  throw ConfigError(key + ": '" + s + "' is not one of " + allowed);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": '" + raw + "' is not a number");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": '" + raw + "' is not an integer");
  }
  return v;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& raw, F one) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(one(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ",";
    if constexpr (std::is_same_v<T, double>) {
      s += fmt(x);
    } else {
      s += std::to_string(x);
    }
  }
  return s;
}

struct Field {
  const char* key;
  std::function<std::string(const SweepSpec&)> get;
  std::function<void(SweepSpec&, const std::string&, const std::string&)> set;
  bool custom_only = false;
};

#define CVREP_REAL(k, member) \
  Field{k, [](const SweepSpec& s) { return fmt(s.member); }, \
        [](SweepSpec& s, const std::string& key, const std::string& v) { s.member = parse_double(key, v); }}
#define CVREP_INT(k, member) \
  Field{k, [](const SweepSpec& s) { return std::to_string(s.member); }, \
        [](SweepSpec& s, const std::string& key, const std::string& v) { s.member = parse_int(key, v); }}
#define CVREP_ENUM(k, member, names) \
  Field{k, [](const SweepSpec& s) { return name_of(names, s.member); }, \
        [](SweepSpec& s, const std::string& key, const std::string& v) { s.member = enum_of(names, key, trim(v)); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        CVREP_ENUM("sweep.mode", mode, kModes),
        CVREP_REAL("sweep.start_km", start_km),
        CVREP_REAL("sweep.stop_km", stop_km),
        CVREP_REAL("sweep.step_km", step_km),
        CVREP_ENUM("sweep.preset", preset, kPresets),
        CVREP_ENUM("sweep.format", format, kFormats),
        CVREP_REAL("sweep.beta", beta),
        CVREP_REAL("noise.xi", xi),
        CVREP_REAL("noise.reference_km", xi_reference_km),
        CVREP_ENUM("noise.referral", referral, kReferrals),
        CVREP_ENUM("repeater.layout", layout, kLayouts),
        CVREP_REAL("repeater.chi", chi),
        CVREP_REAL("repeater.t_b", t_b),
        CVREP_REAL("repeater.t_c", t_c),
        CVREP_REAL("repeater.split", split),
        CVREP_REAL("repeater.amplitude", amplitude),
        CVREP_REAL("repeater.attenuation", attenuation),
        CVREP_INT("repeater.epr_cutoff", epr_cutoff),
        CVREP_INT("repeater.arm_cutoff", arm_cutoff),
        CVREP_REAL("devices.source_efficiency", source_efficiency),
        CVREP_REAL("devices.detector_efficiency", detector_efficiency),
        CVREP_REAL("devices.dark_click", dark_click),
        CVREP_REAL("chain.chi", chain_chi),
        CVREP_REAL("chain.star_t", star_t),
        CVREP_REAL("chain.amplitude", chain_amplitude),
        CVREP_REAL("chain.memory_efficiency", memory_efficiency),
        CVREP_ENUM("chain.resource", resource, kResources),
        CVREP_REAL("optimize.distance_km", optimize_km),
        Field{"optimize.chi", [](const SweepSpec& s) { return fmt_list(s.optimize_chi); },
              [](SweepSpec& s, const std::string& k, const std::string& v) {
                s.optimize_chi = parse_list<double>(k, v, parse_double);
              }},
        Field{"optimize.t_b", [](const SweepSpec& s) { return fmt_list(s.optimize_t_b); },
              [](SweepSpec& s, const std::string& k, const std::string& v) {
                s.optimize_t_b = parse_list<double>(k, v, parse_double);
              }},
        Field{"optimize.split", [](const SweepSpec& s) { return fmt_list(s.optimize_split); },
              [](SweepSpec& s, const std::string& k, const std::string& v) {
                s.optimize_split = parse_list<double>(k, v, parse_double);
              }},
        Field{"bounds.links", [](const SweepSpec& s) { return fmt_list(s.links); },
              [](SweepSpec& s, const std::string& k, const std::string& v) {
                s.links = parse_list<int>(k, v, parse_int);
              }},
    };
    for (auto& x : f) x.custom_only = std::string(x.key).rfind("devices.", 0) == 0;
    return f;
  }();
  return table;
}

#undef CVREP_REAL
#undef CVREP_INT
#undef CVREP_ENUM

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

}  // namespace

std::string to_string(SweepMode m) { return name_of(kModes, m); }
std::string to_string(Preset p) { return name_of(kPresets, p); }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void set_option(SweepSpec& spec, const std::string& dotted_key, const std::string& value) {
  const Field* f = find_field(trim(dotted_key));
  if (f == nullptr) throw ConfigError("unknown configuration key '" + dotted_key + "'");
  f->set(spec, f->key, value);
}

SweepSpec parse_config(std::istream& in) {
  // Comments start with ';' or '#' anywhere on a line.
  std::stringstream text;
  for (std::string line; std::getline(in, line);) text << line.substr(0, line.find_first_of(";#")) << '\n';
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(text, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  SweepSpec spec;
  bool devices_given = false;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string dotted = section + "." + key;
      const Field* f = find_field(dotted);
      if (f == nullptr) throw ConfigError("unknown configuration key '" + dotted + "'");
      devices_given = devices_given || f->custom_only;
      f->set(spec, dotted, value.data());
    }
  }
  if (devices_given && spec.preset != Preset::custom) {
    throw ConfigError("[devices] keys are only allowed with preset = custom; '" + to_string(spec.preset) +
                      "' fixes the device model");
  }
  return spec;
}

SweepSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in);
}

std::string to_config_text(const SweepSpec& spec) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.custom_only && spec.preset != Preset::custom) continue;
    const std::string key = f.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << f.get(spec) << "\n";
  }
  return out.str();
}

void SweepSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(step_km > 0.0)) fail("sweep.step_km must be > 0");
  if (!(start_km >= 0.0)) fail("sweep.start_km must be >= 0");
  if (!(stop_km >= start_km)) fail("sweep.stop_km must be >= sweep.start_km");
  if (!(beta > 0.0 && beta <= 1.0)) fail("sweep.beta must lie in (0, 1]");
  if (!(xi >= 0.0)) fail("noise.xi must be >= 0");
  if (!(xi_reference_km > 0.0)) fail("noise.reference_km must be > 0");
  if (!(source_efficiency >= 0.0 && source_efficiency <= 1.0)) fail("devices.source_efficiency must lie in [0, 1]");
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) fail("devices.detector_efficiency must lie in (0, 1]");
  if (!(dark_click >= 0.0 && dark_click < 1.0)) fail("devices.dark_click must lie in [0, 1)");
  if (!(amplitude > 0.0)) fail("repeater.amplitude must be > 0");
  for (double v : optimize_t_b)
    if (!(v > 0.0 && v < 1.0)) fail("optimize.t_b entries must lie in (0, 1)");
  for (double v : optimize_split)
    if (!(v > 0.0 && v < 1.0)) fail("optimize.split entries must lie in (0, 1)");
  for (double v : optimize_chi)
    if (!(v >= 0.0 && v < 1.0)) fail("optimize.chi entries must lie in [0, 1)");
  for (int n : links)
    if (n < 1) fail("bounds.links entries must be >= 1");
}

double SweepSpec::env_V() const { return calibrate_env_noise(xi, xi_reference_km, attenuation, referral); }

SourceModel SweepSpec::source() const {
  switch (preset) {
    case Preset::ideal: return SourceModel{1.0};
    case Preset::realistic: return SourceModel{0.75};
    case Preset::custom: break;
  }
  return SourceModel{source_efficiency};
}

DetectorModel SweepSpec::detector() const {
  switch (preset) {
    case Preset::ideal: return DetectorModel{};
    case Preset::realistic: return DetectorModel::with_dark_click(0.75, 1e-8);
    case Preset::custom: break;
  }
  return DetectorModel::with_dark_click(detector_efficiency, dark_click);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

}  // namespace cvrep
