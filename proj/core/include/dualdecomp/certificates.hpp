#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualdecomp/algorithms.hpp"
#include "dualdecomp/model.hpp"
#include "dualdecomp/oracle.hpp"

namespace dualdecomp {

/// ‖[G z − g]_D‖_{W⁻¹}: equality residual as is, inequality residual clipped at zero.
double feasibility_violation(const ProblemInstance& instance, const WeightMatrix& metric, const Vector& z);

/// R = ‖λ* − λ⁰‖_W with λ⁰ = 0. Exact when the multiplier set is a singleton,
/// a lower estimate otherwise.
double estimate_R(const WeightMatrix& metric, const DualPoint& lambda_star);
double estimate_R(const WeightMatrix& metric, const std::optional<DualPoint>& lambda_star);

/// ∇⁺d(λ) = [λ + W⁻¹∇d(λ)]_D − λ, stacked.
Vector gradient_map(const ProblemInstance& instance, const WeightMatrix& metric, const DualPoint& lambda);

/// ‖λ − λ*‖_W / ‖∇⁺d(λ)‖_W.
double error_bound_ratio(const ProblemInstance& instance, const WeightMatrix& metric, const DualPoint& lambda,
                         const DualPoint& lambda_star);

struct BoundInputs {
  long k = 0;
  double R = 0.0;
  double sigma_f = 1.0;
  double d0 = 0.0;     ///< d(λ⁰)
  double fstar = 0.0;
  std::optional<double> lipschitz_f;  ///< |f(z) − f(y)| <= L_f ‖z − y‖
  std::optional<double> kappa;        ///< empirical error-bound constant
  // Inputs of the DG primal upper bound v(k); all three must be present.
  std::optional<double> G_norm;
  std::optional<double> w_min;
  std::optional<double> max_gradient_lipschitz;
};

struct TheoremBounds {
  // averaged primal point of the fast scheme
  double dfg_dual = 0.0;           ///< f* − d(λ̂^k)
  double dfg_feasibility = 0.0;    ///< ‖[G ẑ^k − g]_D‖_{W⁻¹}
  double dfg_primal_lower = 0.0;   ///< lower bound on f(ẑ^k) − f*
  double dfg_distance = 0.0;       ///< ‖ẑ^k − z*‖
  // last iterate of the hybrid scheme
  double hdfg_dual = 0.0;
  double hdfg_feasibility = 0.0;
  double hdfg_primal_lower = 0.0;
  double hdfg_distance = 0.0;
  std::optional<double> hdfg_primal_upper;
  // plain gradient scheme, only with a supplied κ
  std::optional<double> dg_rate;
  std::optional<double> dg_dual;  ///< f* − d(λ^{k+1})
  std::optional<double> dg_feasibility;
  std::optional<double> dg_primal_lower;
  std::optional<double> dg_distance;
  std::optional<double> dg_primal_upper;
};

TheoremBounds theoretical_bounds(const BoundInputs& in);

/// ρ = 4(1+κ) / (1 + 4(1+κ)).
double dg_contraction(double kappa);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;  ///< |Pearson r|; 1 when the data are exactly constant
  std::size_t points = 0;
};

/// Least-squares fit of log(gap) against k over the last 80% of the points
/// whose gap exceeds `floor`. Needs at least 10 such points.
LinearFit fit_linear_rate(const std::vector<long>& k, const std::vector<double>& gaps, double floor = 1e-14);
LinearFit fit_linear_rate(const SolverTrace& trace, double fstar, double floor = 1e-14);

struct CertificateRow {
  long k = 0;
  int phase = 0;
  double dual_value = 0.0;
  double dual_gap = 0.0;    ///< f* − d
  double primal_gap = 0.0;  ///< f(z) − f*
  double feasibility = 0.0;
  double gradmap = 0.0;
  double distance = 0.0;    ///< ‖z − z*‖, NaN when unknown
  TheoremBounds bounds;
};

struct CertificateReport {
  Method method = Method::kDfg;
  double fstar = 0.0;
  double R = 0.0;
  bool R_approximate = false;
  double sigma_f = 0.0;
  std::optional<double> kappa_hat;
  std::vector<CertificateRow> rows;
};

struct ReportContext {
  Method method = Method::kDfg;
  double fstar = 0.0;
  double R = 0.0;
  bool R_approximate = false;
  double sigma_f = 1.0;
  double d0 = 0.0;
  std::optional<double> kappa_hat;
};

CertificateReport build_report(const SolverTrace& trace, const ReportContext& context);

/// One row per record: k, phase, d, dual_gap, primal_gap, feas, gradmap, dist,
/// then the bounds relevant to the method. 17 significant digits, LF endings.
std::string report_csv(const CertificateReport& report);
/// Same content as a JSON document.
std::string report_json(const CertificateReport& report);

/// Shortest round-trip-safe decimal text used by every serializer.
std::string format_number(double value);

}  // namespace dualdecomp
