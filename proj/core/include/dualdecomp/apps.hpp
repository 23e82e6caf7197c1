#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualdecomp/model.hpp"

namespace dualdecomp {

// ---------------------------------------------------------------------------
// Power systems

struct Bus {
  int id = 0;
  double load = 0.0;  ///< P^d in per unit
};

struct Generator {
  int bus = 0;
  double pmin = 0.0;  ///< per unit
  double pmax = 0.0;  ///< per unit
};

struct Branch {
  int from = 0;
  int to = 0;
  double reactance = 0.0;  ///< x in per unit, > 0
  double rate = kInf;      ///< |flow| limit in per unit; RATE_A = 0 means unlimited
};

/// Subset of a MATPOWER case needed by the DC model, already in per unit.
struct PowerSystemCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;

  /// Position of a bus id in `buses`; throws UnknownBusReference.
  int bus_index(int id) const;
};

/// Reads `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch` from MATPOWER
/// script text. Columns other than BUS_I, PD, GEN_BUS, PMAX, PMIN, F_BUS,
/// T_BUS, BR_X and RATE_A are ignored.
PowerSystemCase parse_matpower(std::string_view text);
PowerSystemCase load_matpower(const std::string& path);

/// Cost and box parameters shared by every bus unless overridden.
struct DcopfParams {
  double q = 2.0;      ///< weight on (θ − θ^ref)²
  double p = 10.0;     ///< weight on (P − P^ref)²
  double gamma = 2.0;
  double beta = 0.1;
  double theta_ref = 0.0;
  double theta_min = -1.5707963267948966;
  double theta_max = 1.5707963267948966;
  /// P^ref per generator bus; unset means the midpoint of [P_min, P_max].
  std::optional<double> pref;
  /// Per-bus θ^ref overrides keyed by bus id.
  std::vector<std::pair<int, double>> theta_ref_overrides;

  static DcopfParams from_json(std::string_view text);
  std::string to_json() const;
};

/// Everything one bus agent needs for its local subproblem, described in
/// network terms rather than through the assembled coupling blocks.
struct DcopfBusData {
  int bus = 0;          ///< position in the case
  bool has_generator = false;
  double q = 0.0, p = 0.0, gamma = 0.0, beta = 0.0;
  double theta_ref = 0.0, pref = 0.0;
  double theta_min = 0.0, theta_max = 0.0;
  double pmin = 0.0, pmax = 0.0;
  /// (balance row, Laplacian entry) for every row in S_i, including the bus's own.
  std::vector<std::pair<int, double>> laplacian;
  /// (branch, signed susceptance): +b when the bus is the from end, −b at the to end.
  std::vector<std::pair<int, double>> branches;
};

struct DcopfModel {
  ProblemInstance instance;
  std::vector<DcopfBusData> buses;
  int num_generators = 0;
};

/// Agents are buses. Blocks 0..M−1 are nodal balance rows, blocks M..M+L−1
/// hold the two flow-limit rows of each branch.
DcopfModel build_dcopf(const PowerSystemCase& grid, const DcopfParams& params = {});

struct DcopfLocalSolution {
  double theta = 0.0;
  std::optional<double> power;
};

/// Closed-form local solve: linear stationarity for θ, the positive root of the
/// generator's scalar quadratic for P, then box clamping. `nu` holds one price
/// per balance row; `mu` holds two prices per branch (upper, lower).
DcopfLocalSolution dcopf_inner_closed_form(const DcopfBusData& bus, const Vector& nu, const Vector& mu);

// ---------------------------------------------------------------------------
// Network utility maximization

/// f(z) = ½σ(z − R)² − γ log(β + z) on [0, R]; plain quadratic when γ = 0.
struct NumUtility {
  double sigma = 1.0;
  double rate_cap = 1.0;  ///< R_i
  double gamma = 0.0;
  double beta = 0.1;
};

/// routes[i] lists the links used by source i.
ProblemInstance build_num(const Vector& capacities, const std::vector<std::vector<int>>& routes,
                          const std::vector<NumUtility>& utilities);

}  // namespace dualdecomp
