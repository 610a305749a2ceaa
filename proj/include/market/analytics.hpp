#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace market {

/// p(x) = lambda * exp(-lambda x), x >= 0.
struct ExpModel {
  double lambda = 1.0;
};

/// Survival (x / xmin)^-alpha for x >= xmin.
struct ParetoModel {
  double alpha = 2.0;
  double xmin = 1.0;
};

using ValueModel = std::variant<ExpModel, ParetoModel>;

struct ExpStats {
  double mean = 0;
  double median = 0;
  double frac_below_mean = 0;
};

ExpStats exp_stats(double lambda);

struct ParetoStats {
  double median = 0;
  std::optional<double> mean;  // finite only for alpha > 1
};

ParetoStats pareto_stats(const ParetoModel& model);

double model_cdf(const ValueModel& model, double x);

/// Inverse-CDF sampling from a seeded generator.
std::vector<double> sample_values(const ValueModel& model, std::size_t n, std::uint64_t seed);

/// sup |F_n(x) - F(x)| over the sample.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic two-sided Kolmogorov-Smirnov critical value at 1%.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Dispute-handling cost, in USD per exchange.
struct CostModel {
  double internal_fixed = 2.0;     // handling one case internally
  double internal_liability = 0.05;  // per USD of case value, risk borne by the platform
  double external_fee = 3.0;       // court fees for one case
  double dispute_probability = 0.05;

  nlohmann::json to_json() const;
  static CostModel from_json(const nlohmann::json& j);
};

struct ThresholdReport {
  double threshold = 0;
  std::size_t n = 0;
  std::size_t count_below = 0;  // v <= threshold
  double fraction_below = 0;
  double expected_internal_cost = 0;
  double expected_external_cost = 0;
  double expected_cost = 0;
  double recommended_threshold = 0;
  double recommended_cost = 0;

  nlohmann::json to_json() const;
};

/// Expected per-exchange cost of routing values <= t internally.
double expected_cost(const std::vector<double>& sorted_values, double t, const CostModel& cost);

ThresholdReport threshold_report(const std::vector<double>& values, double threshold, const CostModel& cost);

/// Dispute values and routings recounted from a trace.
struct TraceValues {
  std::vector<double> exchange_values_usd;
  std::vector<double> case_values_usd;
  std::int64_t internal_cases = 0;
  std::int64_t external_cases = 0;
  std::int64_t internal_at_or_below = 0;
  std::int64_t external_above = 0;
};

TraceValues values_from_trace(const std::vector<nlohmann::json>& events);

std::string render_threshold_text(const nlohmann::json& report);

}  // namespace market
