#include "cvrep/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace cvrep {
namespace {

std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void add_status(std::string& status, const std::string& token) { status = status == "ok" ? token : status + ";" + token; }

double capped_bound(double eta, int links, std::string& status) {
  const double b = plob_bound(eta, links);
  if (std::isfinite(b)) return b;
  if (status.find("bound_capped") == std::string::npos) add_status(status, "bound_capped");
  return kBoundCap;
}

bool has_values(const SweepRow& r) { return r.status.find("infeasible") == std::string::npos; }

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"distance_km", "eta",     "P_or_R",   "I_AB",     "chi_EB",
                                             "K_raw",       "K",       "plob_N1",  "bound_N2", "bound_N4",
                                             "tail_mass_flag", "geof", "purity",   "status"};
  return cols;
}

RepeaterConfig repeater_for(const SweepSpec& spec, double km) {
  RepeaterConfig c;
  c.chi = spec.chi;
  c.total_km = km;
  c.attenuation = spec.attenuation;
  c.t_c = spec.t_c;
  c.source = spec.source();
  c.detector = spec.detector();
  c.env_V = spec.env_V();
  c.epr_cutoff = spec.epr_cutoff;
  c.arm_cutoff = spec.arm_cutoff;
  switch (spec.layout) {
    case Layout::asymmetric:
      c.t_b = spec.t_b;
      c.split = asymmetric_split(km, spec.t_b, spec.amplitude, spec.attenuation);
      break;
    case Layout::symmetric:
      c.t_b = 0.5;
      c.split = 0.5;
      break;
    case Layout::fixed:
      c.t_b = spec.t_b;
      c.split = spec.split;
      break;
  }
  return c;
}

ChainConfig chain_for(const SweepSpec& spec, double km) {
  ChainConfig c;
  c.chi = spec.chain_chi;
  c.total_km = km;
  c.attenuation = spec.attenuation;
  c.star_t = spec.star_t;
  c.amplitude = spec.chain_amplitude;
  c.memory_efficiency = spec.memory_efficiency;
  c.resource = spec.resource;
  c.source = spec.source();
  c.detector = spec.detector();
  c.env_V = spec.env_V();
  c.epr_cutoff = spec.epr_cutoff;
  c.arm_cutoff = spec.arm_cutoff;
  return c;
}

SweepRow evaluate_point(const SweepSpec& spec, double km) {
  SweepRow row;
  row.distance_km = km;
  row.eta = transmissivity_of(km, spec.attenuation);
  row.plob_n1 = capped_bound(row.eta, 1, row.status);
  row.bound_n2 = capped_bound(row.eta, 2, row.status);
  row.bound_n4 = capped_bound(row.eta, 4, row.status);

  auto take = [&](const KeyRateResult& key) {
    row.rate = key.rate;
    row.i_ab = key.i_ab;
    row.chi_eb = key.chi_eb;
    row.k_raw = key.k_raw;
    row.k = key.k;
  };
  try {
    switch (spec.mode) {
      case SweepMode::direct:
        take(direct_transmission_key(row.eta, spec.env_V(), spec.beta).key);
        break;
      case SweepMode::chain: {
        const ChainResult r = run_three_repeater_chain(chain_for(spec, km), spec.beta);
        take(r.key);
        row.tail_flag = r.state.cutoff_suspect();
        row.purity = state_purity(r.state);
        break;
      }
      case SweepMode::single_repeater:
      case SweepMode::geof:
      case SweepMode::purity: {
        const HeraldedState s = run_single_repeater(repeater_for(spec, km));
        take(secret_key_rate(s, spec.beta));
        row.tail_flag = s.cutoff_suspect();
        row.purity = state_purity(s);
        if (spec.mode == SweepMode::geof) row.geof = geof(covariance_of(s)).value;
        break;
      }
    }
  } catch (const Infeasible&) {
    add_status(row.status, "infeasible");
  }
  return row;
}

std::vector<double> distances(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((spec.stop_km - spec.start_km) / spec.step_km + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(spec.start_km + static_cast<double>(k) * spec.step_km);
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads) {
  const std::vector<double> km = distances(spec);
  std::vector<SweepRow> rows(km.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, km.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t k = next++; k < km.size(); k = next++) {
      try {
        rows[k] = evaluate_point(spec, km[k]);
      } catch (...) {
        const std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  for (const auto& r : rows) {
    const bool v = has_values(r);
    auto val = [&](double x) { return v ? fmt(x) : std::string(); };
    auto opt = [&](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
    out << fmt(r.distance_km) << ',' << fmt(r.eta) << ',' << val(r.rate) << ',' << val(r.i_ab) << ','
        << val(r.chi_eb) << ',' << val(r.k_raw) << ',' << val(r.k) << ',' << fmt(r.plob_n1) << ','
        << fmt(r.bound_n2) << ',' << fmt(r.bound_n4) << ',' << (r.tail_flag ? 1 : 0) << ',' << opt(r.geof) << ','
        << opt(r.purity) << ',' << r.status << "\n";
  }
}

void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  using nlohmann::ordered_json;
  const std::string text = to_config_text(spec);
  ordered_json doc;
  doc["metadata"] = {{"version", kVersion},
                     {"config_hash", fnv1a_hex(text)},
                     {"mode", to_string(spec.mode)},
                     {"preset", to_string(spec.preset)},
                     {"columns", csv_columns()},
                     {"config", text}};
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    const bool v = has_values(r);
    auto val = [&](double x) { return v ? ordered_json(x) : ordered_json(nullptr); };
    auto opt = [&](const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); };
    arr.push_back(ordered_json{{"distance_km", r.distance_km},
                               {"eta", r.eta},
                               {"P_or_R", val(r.rate)},
                               {"I_AB", val(r.i_ab)},
                               {"chi_EB", val(r.chi_eb)},
                               {"K_raw", val(r.k_raw)},
                               {"K", val(r.k)},
                               {"plob_N1", r.plob_n1},
                               {"bound_N2", r.bound_n2},
                               {"bound_N4", r.bound_n4},
                               {"tail_mass_flag", r.tail_flag ? 1 : 0},
                               {"geof", opt(r.geof)},
                               {"purity", opt(r.purity)},
                               {"status", r.status}});
  }
  doc["rows"] = std::move(arr);
  out << doc.dump(2) << "\n";
}

OptimizeResult optimize_grid(const SweepSpec& spec) {
  spec.validate();
  OptimizeResult res;
  for (double chi : spec.optimize_chi)
    for (double t_b : spec.optimize_t_b)
      for (double split : spec.optimize_split) {
        SweepSpec s = spec;
        s.layout = Layout::fixed;
        s.chi = chi;
        s.t_b = t_b;
        s.split = split;
        GridPoint g{chi, t_b, split};
        const HeraldedState state = run_single_repeater(repeater_for(s, spec.optimize_km));
        g.P = state.P;
        g.k = secret_key_rate(state, spec.beta).k;
        if (state.cutoff_suspect()) g.status = "tail_mass";
        res.grid.push_back(g);
        if (g.k <= 0.0) continue;
        if (!res.best || g.k > res.best->k || (g.k == res.best->k && g.P > res.best->P)) res.best = g;
      }
  return res;
}

void write_grid_csv(std::ostream& out, const OptimizeResult& result) {
  out << "chi,t_b,split,P,K,best,status\n";
  for (const auto& g : result.grid) {
    const bool best = result.best && g.chi == result.best->chi && g.t_b == result.best->t_b &&
                      g.split == result.best->split;
    out << fmt(g.chi) << ',' << fmt(g.t_b) << ',' << fmt(g.split) << ',' << fmt(g.P) << ',' << fmt(g.k) << ','
        << (best ? 1 : 0) << ',' << g.status << "\n";
  }
}

void write_bounds_csv(std::ostream& out, const SweepSpec& spec) {
  out << "distance_km,eta";
  for (int n : spec.links) out << ",bound_N" << n;
  out << ",status\n";
  for (double km : distances(spec)) {
    const double eta = transmissivity_of(km, spec.attenuation);
    std::string status = "ok";
    out << fmt(km) << ',' << fmt(eta);
    for (int n : spec.links) out << ',' << fmt(capped_bound(eta, n, status));
    out << ',' << status << "\n";
  }
}

std::optional<double> find_crossing(const std::function<double(double)>& margin, double lo, double hi, double step,
                                    double tol) {
  if (!(step > 0.0) || !(tol > 0.0)) throw std::invalid_argument("find_crossing needs positive step and tolerance");
  if (margin(lo) > 0.0) return lo;
  double prev = lo;
  for (double x = lo + step; x <= hi + 1e-9; x += step) {
    if (margin(x) > 0.0) {
      double a = prev, b = x;
      while (b - a > tol) {
        const double m = 0.5 * (a + b);
        (margin(m) > 0.0 ? b : a) = m;
      }
      return 0.5 * (a + b);
    }
    prev = x;
  }
  return std::nullopt;
}

}  // namespace cvrep
