#pragma once

#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "persist/random.hpp"

namespace persist {

struct Gaussian {
  double mean = 0.0;
  double std = 1.0;
};

// Density (1/(2 scale)) exp(-|x|/scale).
struct Laplace {
  double scale = 1.0;
};

struct Uniform {
  double lo = -1.0;
  double hi = 1.0;
};

// Exponential left half and Pareto right half, each carrying mass 1/2:
//   x <  0:  (1/2) left_rate exp(left_rate x)
//   x >= 0:  (1/2) r scale^r / (x + scale)^(r+1)
// so that P(xi > x) = (1/2) (scale / (x + scale))^r for x >= 0.
struct TwoSidedPareto {
  double tail_index = 1.0;
  double scale = 1.0;
  double left_rate = 1.0;
};

using InnovationModel = std::variant<Gaussian, Laplace, Uniform, TwoSidedPareto>;

enum class TailClass { BoundedAbove, AllMomentsFinite, RegularlyVarying };

std::string to_string(TailClass cls);

struct TailInfo {
  TailClass tail_class = TailClass::AllMomentsFinite;
  double tail_index = 0.0;  // r for RegularlyVarying, 0 otherwise
  double ess_sup = 0.0;     // R; +inf unless BoundedAbove
  double r_star = 0.0;      // R / (1 - a); +inf unless BoundedAbove
  // E(xi^+)^t < inf for every t > 0.
  bool all_power_moments = true;
};

// Throws InvalidModel on bad parameters (nonpositive scales, empty support).
void validate(const InnovationModel& model);

// Throws InvalidModel unless P(xi > 0) > 0 and P(xi < 0) > 0.
void require_nondegenerate(const InnovationModel& model);

double density(const InnovationModel& model, double x);
double cdf(const InnovationModel& model, double x);
// P(xi > x), computed without cancellation in the right tail.
double survival(const InnovationModel& model, double x);
// Inverse CDF on (0,1).
double quantile(const InnovationModel& model, double p);
double quantile(const Gaussian& g, double p);
double quantile(const Laplace& l, double p);
double quantile(const Uniform& u, double p);
double quantile(const TwoSidedPareto& t, double p);

// One uniform per draw; inverse-CDF for every kind.
double sample(const InnovationModel& model, RandomStream& stream);

TailInfo classify_tail(const InnovationModel& model, double a);

std::optional<double> mean(const InnovationModel& model);
std::optional<double> variance(const InnovationModel& model);
double interquartile_range(const InnovationModel& model);

// Support endpoints (possibly infinite); used by quadrature checks.
std::pair<double, double> support(const InnovationModel& model);

std::string describe(const InnovationModel& model);

// Key-value form: { kind = "gaussian", mean = 0.0, std = 1.0 }.
nlohmann::json to_json(const InnovationModel& model);
InnovationModel model_from_json(const nlohmann::json& j);

}  // namespace persist
