#include "dualdecomp/certificates.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dualdecomp/error.hpp"

namespace dualdecomp {

double feasibility_violation(const ProblemInstance& instance, const WeightMatrix& metric, const Vector& z) {
  const ConstraintResidual r = apply_G(instance, z);
  Vector stacked(instance.p() + instance.q());
  stacked.head(instance.p()) = r.eq;
  stacked.tail(instance.q()) = r.ineq;
  return projected_residual_norm(stacked, instance.p(), metric);
}

double estimate_R(const WeightMatrix& metric, const DualPoint& lambda_star) {
  if (lambda_star.size() != metric.diag.size()) throw Error(ErrorCode::kDimensionMismatch, "λ* has wrong shape");
  return metric.norm(lambda_star.values());
}

double estimate_R(const WeightMatrix& metric, const std::optional<DualPoint>& lambda_star) {
  if (!lambda_star) throw Error(ErrorCode::kMissingReference, "R needs a reference multiplier");
  return estimate_R(metric, *lambda_star);
}

Vector gradient_map(const ProblemInstance& instance, const WeightMatrix& metric, const DualPoint& lambda) {
  const DualEvaluation eval = dual_value_grad(instance, lambda);
  Vector stepped = lambda.values() + eval.gradient.cwiseQuotient(metric.diag);
  project_dual_inplace(stepped, instance.p());
  return stepped - lambda.values();
}

double error_bound_ratio(const ProblemInstance& instance, const WeightMatrix& metric, const DualPoint& lambda,
                         const DualPoint& lambda_star) {
  const double denom = metric.norm(gradient_map(instance, metric, lambda));
  if (!(denom > 1e-14)) throw Error(ErrorCode::kDegenerateDenominator, "gradient map vanishes at λ");
  return metric.norm(lambda.values() - lambda_star.values()) / denom;
}

double dg_contraction(double kappa) {
  const double a = 4.0 * (1.0 + kappa);
  return a / (1.0 + a);
}

TheoremBounds theoretical_bounds(const BoundInputs& in) {
  TheoremBounds b;
  const double k1 = static_cast<double>(in.k) + 1.0;
  const double R = in.R;
  const double root_sigma = std::sqrt(in.sigma_f);
  b.dfg_dual = 2.0 * R * R / (k1 * k1);
  b.dfg_feasibility = 8.0 * R / (k1 * k1);
  b.dfg_primal_lower = -8.0 * R * R / (k1 * k1);
  b.dfg_distance = 4.0 * R / (root_sigma * k1);
  b.hdfg_dual = 2.0 * R * R / (k1 * k1);
  b.hdfg_feasibility = 2.0 * R / (k1 * std::sqrt(k1));
  b.hdfg_primal_lower = -2.0 * R * R / (k1 * std::sqrt(k1));
  b.hdfg_distance = 2.0 * R / (root_sigma * k1);
  if (in.lipschitz_f) b.hdfg_primal_upper = 2.0 * *in.lipschitz_f * R / (root_sigma * k1);

  if (in.kappa) {
    const double rho = dg_contraction(*in.kappa);
    const double gap0 = std::max(0.0, in.fstar - in.d0);
    const double k = static_cast<double>(in.k);
    b.dg_rate = rho;
    b.dg_dual = std::pow(rho, k) * gap0;
    b.dg_feasibility = std::pow(rho, (k - 1.0) / 2.0) * std::sqrt(2.0 * gap0);
    b.dg_primal_lower = -std::pow(rho, (k - 1.0) / 2.0) * R * std::sqrt(2.0 * gap0);
    const double dist = std::pow(rho, k / 2.0) * std::sqrt(2.0 / in.sigma_f * gap0);
    b.dg_distance = dist;
    if (in.G_norm && in.w_min && in.max_gradient_lipschitz) {
      b.dg_primal_upper = R / *in.w_min * *in.G_norm * dist +
                          *in.max_gradient_lipschitz / 2.0 * std::pow(rho, k) * 2.0 / in.sigma_f * gap0;
    }
  }
  return b;
}

LinearFit fit_linear_rate(const std::vector<long>& k, const std::vector<double>& gaps, double floor) {
  if (k.size() != gaps.size()) throw Error(ErrorCode::kDimensionMismatch, "k and gap series differ in length");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t t = 0; t < k.size(); ++t) {
    if (gaps[t] > floor && std::isfinite(gaps[t])) {
      xs.push_back(static_cast<double>(k[t]));
      ys.push_back(std::log(gaps[t]));
    }
  }
  if (xs.size() < 10) throw Error(ErrorCode::kInsufficientData, "need at least 10 points above the floor");
  const std::size_t skip = xs.size() / 5;  // keep the last 80%
  const std::size_t n = xs.size() - skip;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t t = skip; t < xs.size(); ++t) {
    mx += xs[t];
    my += ys[t];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t t = skip; t < xs.size(); ++t) {
    const double dx = xs[t] - mx;
    const double dy = ys[t] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInsufficientData, "all points share the same k");
  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const auto [lo, hi] = std::minmax_element(ys.begin() + static_cast<std::ptrdiff_t>(skip), ys.end());
  fit.correlation = *lo == *hi ? 1.0 : std::abs(sxy) / std::sqrt(sxx * syy);
  if (*lo == *hi) fit.slope = 0.0;
  return fit;
}

LinearFit fit_linear_rate(const SolverTrace& trace, double fstar, double floor) {
  std::vector<long> k;
  std::vector<double> gaps;
  for (const TraceRecord& r : trace.records) {
    k.push_back(r.k);
    gaps.push_back(fstar - r.dual_value);
  }
  return fit_linear_rate(k, gaps, floor);
}

CertificateReport build_report(const SolverTrace& trace, const ReportContext& context) {
  CertificateReport report;
  report.method = context.method;
  report.fstar = context.fstar;
  report.R = context.R;
  report.R_approximate = context.R_approximate;
  report.sigma_f = context.sigma_f;
  report.kappa_hat = context.kappa_hat;
  report.rows.reserve(trace.records.size());
  for (const TraceRecord& r : trace.records) {
    CertificateRow row;
    row.k = r.k;
    row.phase = r.phase;
    row.dual_value = r.dual_value;
    row.dual_gap = context.fstar - r.dual_value;
    row.primal_gap = r.primal_value - context.fstar;
    row.feasibility = r.feasibility;
    row.gradmap = r.gradmap;
    row.distance = r.dist_to_ref;
    BoundInputs in;
    in.k = r.k;
    in.R = context.R;
    in.sigma_f = context.sigma_f;
    in.d0 = context.d0;
    in.fstar = context.fstar;
    in.kappa = context.kappa_hat;
    row.bounds = theoretical_bounds(in);
    report.rows.push_back(row);
  }
  return report;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

namespace {

struct Column {
  std::string name;
  double (*get)(const CertificateRow&);
};

double opt(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

std::vector<Column> bound_columns(Method method) {
  switch (method) {
    case Method::kDfg:
      return {{"bound_dual", [](const CertificateRow& r) { return r.bounds.dfg_dual; }},
              {"bound_feas", [](const CertificateRow& r) { return r.bounds.dfg_feasibility; }},
              {"bound_primal_lower", [](const CertificateRow& r) { return r.bounds.dfg_primal_lower; }},
              {"bound_dist", [](const CertificateRow& r) { return r.bounds.dfg_distance; }}};
    case Method::kHdfg:
      return {{"bound_dual", [](const CertificateRow& r) { return r.bounds.hdfg_dual; }},
              {"bound_feas", [](const CertificateRow& r) { return r.bounds.hdfg_feasibility; }},
              {"bound_primal_lower", [](const CertificateRow& r) { return r.bounds.hdfg_primal_lower; }},
              {"bound_dist", [](const CertificateRow& r) { return r.bounds.hdfg_distance; }}};
    case Method::kDg:
      return {{"bound_dual", [](const CertificateRow& r) { return opt(r.bounds.dg_dual); }},
              {"bound_feas", [](const CertificateRow& r) { return opt(r.bounds.dg_feasibility); }},
              {"bound_primal_lower", [](const CertificateRow& r) { return opt(r.bounds.dg_primal_lower); }},
              {"bound_dist", [](const CertificateRow& r) { return opt(r.bounds.dg_distance); }}};
  }
  return {};
}

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

std::string report_csv(const CertificateReport& report) {
  const auto bounds = bound_columns(report.method);
  std::string out = "k,phase,d,dual_gap,primal_gap,feas,gradmap,dist";
  for (const Column& c : bounds) out += "," + c.name;
  out += "\n";
  for (const CertificateRow& row : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}", row.k, row.phase, format_number(row.dual_value),
                       format_number(row.dual_gap), format_number(row.primal_gap), format_number(row.feasibility),
                       format_number(row.gradmap), format_number(row.distance));
    for (const Column& c : bounds) out += "," + format_number(c.get(row));
    out += "\n";
  }
  return out;
}

std::string report_json(const CertificateReport& report) {
  nlohmann::json doc;
  doc["method"] = std::string(to_string(report.method));
  doc["fstar"] = number_json(report.fstar);
  doc["R"] = number_json(report.R);
  doc["R_approximate"] = report.R_approximate;
  doc["sigma_f"] = number_json(report.sigma_f);
  doc["kappa_hat"] = report.kappa_hat ? number_json(*report.kappa_hat) : nlohmann::json(nullptr);
  const auto bounds = bound_columns(report.method);
  nlohmann::json rows = nlohmann::json::array();
  for (const CertificateRow& row : report.rows) {
    nlohmann::json r;
    r["k"] = row.k;
    r["phase"] = row.phase;
    r["d"] = number_json(row.dual_value);
    r["dual_gap"] = number_json(row.dual_gap);
    r["primal_gap"] = number_json(row.primal_gap);
    r["feas"] = number_json(row.feasibility);
    r["gradmap"] = number_json(row.gradmap);
    r["dist"] = number_json(row.distance);
    for (const Column& c : bounds) r[c.name] = number_json(c.get(row));
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace dualdecomp
