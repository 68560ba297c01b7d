#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvrep/config.hpp"

namespace cvrep {

inline constexpr const char* kVersion = "1.0.0";
// Stand-in for a divergent bound (eta = 1); rows carrying it are flagged.
inline constexpr double kBoundCap = 1e300;

struct SweepRow {
  double distance_km = 0.0;
  double eta = 0.0;
  double rate = 0.0;  // P for one repeater, R for the chain, 1 for direct
  double i_ab = 0.0;
  double chi_eb = 0.0;
  double k_raw = 0.0;
  double k = 0.0;
  double plob_n1 = 0.0;
  double bound_n2 = 0.0;
  double bound_n4 = 0.0;
  bool tail_flag = false;
  std::optional<double> geof;
  std::optional<double> purity;
  std::string status = "ok";
};

const std::vector<std::string>& csv_columns();

RepeaterConfig repeater_for(const SweepSpec& spec, double km);
ChainConfig chain_for(const SweepSpec& spec, double km);

// One row; infeasible points come back with a non-ok status instead of throwing.
SweepRow evaluate_point(const SweepSpec& spec, double km);
std::vector<double> distances(const SweepSpec& spec);
// Points are evaluated on `threads` workers (0 = hardware concurrency); rows
// always come back in distance order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 0);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_json(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

struct GridPoint {
  double chi = 0.0;
  double t_b = 0.0;
  double split = 0.0;
  double P = 0.0;
  double k = 0.0;
  std::string status = "ok";
};
struct OptimizeResult {
  std::vector<GridPoint> grid;
  std::optional<GridPoint> best;  // empty when no grid point yields key
};
// Grid over optimize.chi x optimize.t_b x optimize.split at optimize.distance_km.
OptimizeResult optimize_grid(const SweepSpec& spec);
void write_grid_csv(std::ostream& out, const OptimizeResult& result);

void write_bounds_csv(std::ostream& out, const SweepSpec& spec);

// Smallest distance in [lo, hi] where margin(L) turns positive, located by a
// scan with the given step and refined by bisection to tol.
std::optional<double> find_crossing(const std::function<double(double)>& margin, double lo, double hi, double step,
                                    double tol = 1e-3);

}  // namespace cvrep
