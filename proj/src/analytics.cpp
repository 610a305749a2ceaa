#include "market/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "market/rng.hpp"
#include "market/types.hpp"

namespace market {
namespace {

void check_rate(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) fail(ErrorCode::NonpositiveRate, "lambda must be positive");
}

void check_pareto(const ParetoModel& m) {
  if (!(m.alpha > 0) || !(m.xmin > 0) || !std::isfinite(m.alpha) || !std::isfinite(m.xmin)) {
    fail(ErrorCode::InvalidParams, "pareto alpha and xmin must be positive");
  }
}

}  // namespace

ExpStats exp_stats(double lambda) {
  check_rate(lambda);
  return {1.0 / lambda, std::log(2.0) / lambda, -std::expm1(-1.0)};
}

ParetoStats pareto_stats(const ParetoModel& m) {
  check_pareto(m);
  ParetoStats s;
  s.median = m.xmin * std::exp2(1.0 / m.alpha);
  if (m.alpha > 1) s.mean = m.alpha * m.xmin / (m.alpha - 1);
  return s;
}

double model_cdf(const ValueModel& model, double x) {
  if (const auto* e = std::get_if<ExpModel>(&model)) {
    check_rate(e->lambda);
    return x <= 0 ? 0.0 : -std::expm1(-e->lambda * x);
  }
  const auto& p = std::get<ParetoModel>(model);
  check_pareto(p);
  return x <= p.xmin ? 0.0 : 1.0 - std::pow(x / p.xmin, -p.alpha);
}

std::vector<double> sample_values(const ValueModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  if (const auto* e = std::get_if<ExpModel>(&model)) {
    check_rate(e->lambda);
    for (std::size_t i = 0; i < n; ++i) out.push_back(-std::log(rng.unit_open_zero()) / e->lambda);
  } else {
    const auto& p = std::get<ParetoModel>(model);
    check_pareto(p);
    for (std::size_t i = 0; i < n; ++i) out.push_back(p.xmin * std::pow(rng.unit_open_zero(), -1.0 / p.alpha));
  }
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) fail(ErrorCode::EmptyInput, "no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

nlohmann::json CostModel::to_json() const {
  return {{"internal_fixed", internal_fixed},
          {"internal_liability", internal_liability},
          {"external_fee", external_fee},
          {"dispute_probability", dispute_probability}};
}

CostModel CostModel::from_json(const nlohmann::json& j) {
  CostModel c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number()) fail(ErrorCode::ValidationError, it.key() + " must be a number");
    const double v = it->get<double>();
    if (!(v >= 0)) fail(ErrorCode::ValidationError, it.key() + " must be non-negative");
    if (it.key() == "internal_fixed") c.internal_fixed = v;
    else if (it.key() == "internal_liability") c.internal_liability = v;
    else if (it.key() == "external_fee") c.external_fee = v;
    else if (it.key() == "dispute_probability") c.dispute_probability = v;
    else fail(ErrorCode::ValidationError, "unknown cost field " + it.key());
  }
  if (c.dispute_probability > 1) fail(ErrorCode::ValidationError, "dispute_probability must be at most 1");
  return c;
}

double expected_cost(const std::vector<double>& sorted, double t, const CostModel& cost) {
  const auto below = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
  double internal = 0;
  for (std::size_t i = 0; i < below; ++i) internal += cost.internal_fixed + cost.internal_liability * sorted[i];
  const double external = static_cast<double>(sorted.size() - below) * cost.external_fee;
  return cost.dispute_probability * (internal + external) / static_cast<double>(sorted.size());
}

ThresholdReport threshold_report(const std::vector<double>& values, double threshold, const CostModel& cost) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "no values");
  if (!(threshold >= 0)) fail(ErrorCode::ValidationError, "threshold must be non-negative");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  ThresholdReport r;
  r.threshold = threshold;
  r.n = sorted.size();
  r.count_below = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin());
  r.fraction_below = static_cast<double>(r.count_below) / static_cast<double>(r.n);
  const double p = cost.dispute_probability / static_cast<double>(r.n);
  for (std::size_t i = 0; i < r.count_below; ++i) {
    r.expected_internal_cost += p * (cost.internal_fixed + cost.internal_liability * sorted[i]);
  }
  r.expected_external_cost = p * static_cast<double>(r.n - r.count_below) * cost.external_fee;
  r.expected_cost = r.expected_internal_cost + r.expected_external_cost;

  // $1 grid over [0, p99]; incremental so the sweep stays linear.
  const std::size_t p99_index = std::min(r.n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(r.n))) - 1);
  const double p99 = sorted[p99_index];
  std::size_t idx = 0;
  double internal_sum = 0;
  r.recommended_threshold = 0;
  r.recommended_cost = std::numeric_limits<double>::infinity();
  for (double t = 0; t <= p99 + 1e-9; t += 1.0) {
    while (idx < r.n && sorted[idx] <= t) {
      internal_sum += cost.internal_fixed + cost.internal_liability * sorted[idx];
      ++idx;
    }
    const double c = p * (internal_sum + static_cast<double>(r.n - idx) * cost.external_fee);
    if (c < r.recommended_cost) {
      r.recommended_cost = c;
      r.recommended_threshold = t;
    }
  }
  return r;
}

nlohmann::json ThresholdReport::to_json() const {
  return {{"threshold", threshold},
          {"n", n},
          {"count_below", count_below},
          {"fraction_below", fraction_below},
          {"expected_internal_cost", expected_internal_cost},
          {"expected_external_cost", expected_external_cost},
          {"expected_cost", expected_cost},
          {"recommended_threshold", recommended_threshold},
          {"recommended_cost", recommended_cost}};
}

TraceValues values_from_trace(const std::vector<nlohmann::json>& events) {
  TraceValues out;
  for (const auto& e : events) {
    const auto& kind = e.at("kind");
    const auto& p = e.at("payload");
    if (e.at("module") == "exchange" && kind == "session_opened") {
      out.exchange_values_usd.push_back(static_cast<double>(p.at("value_usd").get<Amount>()) / kMicro);
    } else if (e.at("module") == "arbitration" && kind == "case_opened") {
      out.case_values_usd.push_back(static_cast<double>(p.at("value_usd").get<Amount>()) / kMicro);
      const bool internal = p.at("tier") == "internal";
      (internal ? out.internal_cases : out.external_cases)++;
      if (internal && p.at("route_basis") == "at-or-below-threshold") ++out.internal_at_or_below;
      if (!internal && p.at("route_basis") == "above-threshold") ++out.external_above;
    }
  }
  return out;
}

std::string render_threshold_text(const nlohmann::json& report) {
  std::ostringstream os;
  char line[200];
  if (report.contains("model")) {
    const auto& m = report.at("model");
    std::snprintf(line, sizeof line, "model: exponential lambda=%.6g  mean=%.6g  median=%.6g  frac_below_mean=%.6f\n",
                  m.at("lambda").get<double>(), m.at("mean").get<double>(), m.at("median").get<double>(),
                  m.at("frac_below_mean").get<double>());
    os << line;
  }
  if (report.contains("routing")) {
    const auto& r = report.at("routing");
    os << "routings: internal=" << r.at("internal").get<std::int64_t>()
       << " external=" << r.at("external").get<std::int64_t>() << '\n';
  }
  os << "threshold  n         below     fraction  exp.cost   recommended  rec.cost\n";
  for (const auto& t : report.at("thresholds")) {
    std::snprintf(line, sizeof line, "%-9.2f  %-8zu  %-8zu  %-8.4f  %-9.4f  %-11.2f  %.4f\n",
                  t.at("threshold").get<double>(), t.at("n").get<std::size_t>(),
                  t.at("count_below").get<std::size_t>(), t.at("fraction_below").get<double>(),
                  t.at("expected_cost").get<double>(), t.at("recommended_threshold").get<double>(),
                  t.at("recommended_cost").get<double>());
    os << line;
  }
  return os.str();
}

}  // namespace market
