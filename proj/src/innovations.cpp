#include "persist/innovations.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "persist/errors.hpp"

namespace persist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void fail(const std::string& what) { throw Error(ErrorKind::InvalidModel, what); }

double number_field(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(std::string("innovation field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

std::string to_string(TailClass cls) {
  switch (cls) {
    case TailClass::BoundedAbove: return "BoundedAbove";
    case TailClass::AllMomentsFinite: return "AllMomentsFinite";
    case TailClass::RegularlyVarying: return "RegularlyVarying";
  }
  return "?";
}

void validate(const InnovationModel& model) {
  std::visit(overloaded{
                 [](const Gaussian& g) {
                   if (!std::isfinite(g.mean)) fail("gaussian mean must be finite");
                   if (!(g.std > 0.0) || !std::isfinite(g.std)) fail("gaussian std must be positive");
                 },
                 [](const Laplace& l) {
                   if (!(l.scale > 0.0) || !std::isfinite(l.scale)) fail("laplace scale must be positive");
                 },
                 [](const Uniform& u) {
                   if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi))
                     fail("uniform needs finite lo < hi");
                 },
                 [](const TwoSidedPareto& p) {
                   if (!(p.tail_index > 0.0) || !std::isfinite(p.tail_index)) fail("pareto tail_index must be positive");
                   if (!(p.scale > 0.0) || !std::isfinite(p.scale)) fail("pareto scale must be positive");
                   if (!(p.left_rate > 0.0) || !std::isfinite(p.left_rate)) fail("pareto left_rate must be positive");
                 },
             },
             model);
}

void require_nondegenerate(const InnovationModel& model) {
  validate(model);
  if (!(cdf(model, 0.0) > 0.0))
    fail("P(xi < 0) = 0: the chain is never killed (T_0 = inf a.s.), the killed kernel is stochastic");
  if (!(survival(model, 0.0) > 0.0)) fail("P(xi > 0) = 0: the chain is monotone before absorption");
}

double density(const InnovationModel& model, double x) {
  return std::visit(
      overloaded{
          [x](const Gaussian& g) {
            const double z = (x - g.mean) / g.std;
            return std::exp(-0.5 * z * z) / (g.std * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const Laplace& l) { return std::exp(-std::abs(x) / l.scale) / (2.0 * l.scale); },
          [x](const Uniform& u) { return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
          [x](const TwoSidedPareto& p) {
            if (x < 0.0) return 0.5 * p.left_rate * std::exp(p.left_rate * x);
            return 0.5 * p.tail_index * std::pow(p.scale, p.tail_index) / std::pow(x + p.scale, p.tail_index + 1.0);
          },
      },
      model);
}

double cdf(const InnovationModel& model, double x) {
  return std::visit(overloaded{
                        [x](const Gaussian& g) { return 0.5 * std::erfc(-(x - g.mean) / (g.std * std::numbers::sqrt2)); },
                        [x](const Laplace& l) {
                          return x < 0.0 ? 0.5 * std::exp(x / l.scale) : 1.0 - 0.5 * std::exp(-x / l.scale);
                        },
                        [x](const Uniform& u) {
                          if (x <= u.lo) return 0.0;
                          if (x >= u.hi) return 1.0;
                          return (x - u.lo) / (u.hi - u.lo);
                        },
                        [x](const TwoSidedPareto& p) {
                          if (x < 0.0) return 0.5 * std::exp(p.left_rate * x);
                          return 1.0 - 0.5 * std::pow(p.scale / (x + p.scale), p.tail_index);
                        },
                    },
                    model);
}

double survival(const InnovationModel& model, double x) {
  return std::visit(overloaded{
                        [x](const Gaussian& g) { return 0.5 * std::erfc((x - g.mean) / (g.std * std::numbers::sqrt2)); },
                        [x](const Laplace& l) {
                          return x < 0.0 ? 1.0 - 0.5 * std::exp(x / l.scale) : 0.5 * std::exp(-x / l.scale);
                        },
                        [&model, x](const Uniform&) { return 1.0 - cdf(model, x); },
                        [x](const TwoSidedPareto& p) {
                          if (x < 0.0) return 1.0 - 0.5 * std::exp(p.left_rate * x);
                          return 0.5 * std::pow(p.scale / (x + p.scale), p.tail_index);
                        },
                    },
                    model);
}

double quantile(const Gaussian& g, double p) {
  return g.mean - g.std * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double quantile(const Laplace& l, double p) {
  return p < 0.5 ? l.scale * std::log(2.0 * p) : -l.scale * std::log(2.0 * (1.0 - p));
}

double quantile(const Uniform& u, double p) { return u.lo + p * (u.hi - u.lo); }

double quantile(const TwoSidedPareto& t, double p) {
  if (p < 0.5) return std::log(2.0 * p) / t.left_rate;
  return t.scale * (std::pow(2.0 * (1.0 - p), -1.0 / t.tail_index) - 1.0);
}

double quantile(const InnovationModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return support(model).first;
    if (p == 1.0) return support(model).second;
    throw Error(ErrorKind::OutOfRange, "quantile level must lie in [0,1]");
  }
  return std::visit([p](const auto& m) { return quantile(m, p); }, model);
}

double sample(const InnovationModel& model, RandomStream& stream) { return quantile(model, stream.uniform()); }

TailInfo classify_tail(const InnovationModel& model, double a) {
  TailInfo info;
  info.ess_sup = kInf;
  info.r_star = kInf;
  std::visit(overloaded{
                 [&](const Uniform& u) {
                   info.tail_class = TailClass::BoundedAbove;
                   info.ess_sup = u.hi;
                   info.r_star = u.hi / (1.0 - a);
                 },
                 [&](const TwoSidedPareto& p) {
                   info.tail_class = TailClass::RegularlyVarying;
                   info.tail_index = p.tail_index;
                   info.all_power_moments = false;
                 },
                 [&](const auto&) { info.tail_class = TailClass::AllMomentsFinite; },
             },
             model);
  return info;
}

std::optional<double> mean(const InnovationModel& model) {
  return std::visit(overloaded{
                        [](const Gaussian& g) -> std::optional<double> { return g.mean; },
                        [](const Laplace&) -> std::optional<double> { return 0.0; },
                        [](const Uniform& u) -> std::optional<double> { return 0.5 * (u.lo + u.hi); },
                        [](const TwoSidedPareto& p) -> std::optional<double> {
                          if (p.tail_index <= 1.0) return std::nullopt;
                          return 0.5 * p.scale / (p.tail_index - 1.0) - 0.5 / p.left_rate;
                        },
                    },
                    model);
}

std::optional<double> variance(const InnovationModel& model) {
  return std::visit(overloaded{
                        [](const Gaussian& g) -> std::optional<double> { return g.std * g.std; },
                        [](const Laplace& l) -> std::optional<double> { return 2.0 * l.scale * l.scale; },
                        [](const Uniform& u) -> std::optional<double> { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; },
                        [](const TwoSidedPareto& p) -> std::optional<double> {
                          const double r = p.tail_index;
                          if (r <= 2.0) return std::nullopt;
                          const double second = p.scale * p.scale / ((r - 1.0) * (r - 2.0)) + 1.0 / (p.left_rate * p.left_rate);
                          const double m = 0.5 * p.scale / (r - 1.0) - 0.5 / p.left_rate;
                          return second - m * m;
                        },
                    },
                    model);
}

double interquartile_range(const InnovationModel& model) { return quantile(model, 0.75) - quantile(model, 0.25); }

std::pair<double, double> support(const InnovationModel& model) {
  if (const auto* u = std::get_if<Uniform>(&model)) return {u->lo, u->hi};
  return {-kInf, kInf};
}

std::string describe(const InnovationModel& model) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Gaussian& g) { os << "Gaussian(" << g.mean << ", " << g.std << ")"; },
                 [&](const Laplace& l) { os << "Laplace(" << l.scale << ")"; },
                 [&](const Uniform& u) { os << "Uniform(" << u.lo << ", " << u.hi << ")"; },
                 [&](const TwoSidedPareto& p) {
                   os << "TwoSidedPareto(r=" << p.tail_index << ", scale=" << p.scale << ", left_rate=" << p.left_rate << ")";
                 },
             },
             model);
  return os.str();
}

nlohmann::json to_json(const InnovationModel& model) {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return nlohmann::json{{"kind", "gaussian"}, {"mean", g.mean}, {"std", g.std}}; },
                        [](const Laplace& l) { return nlohmann::json{{"kind", "laplace"}, {"scale", l.scale}}; },
                        [](const Uniform& u) { return nlohmann::json{{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}; },
                        [](const TwoSidedPareto& p) {
                          return nlohmann::json{{"kind", "pareto"},
                                                {"tail_index", p.tail_index},
                                                {"scale", p.scale},
                                                {"left_rate", p.left_rate}};
                        },
                    },
                    model);
}

InnovationModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("innovation must be a key-value block");
  if (!j.contains("kind") || !j.at("kind").is_string()) fail("innovation needs a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();

  auto only = [&](std::set<std::string> allowed) {
    allowed.insert("kind");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) fail("unknown innovation key '" + key + "' for kind '" + kind + "'");
    }
  };

  InnovationModel model;
  if (kind == "gaussian") {
    only({"mean", "std"});
    model = Gaussian{number_field(j, "mean", 0.0), number_field(j, "std", 1.0)};
  } else if (kind == "laplace") {
    only({"scale"});
    model = Laplace{number_field(j, "scale", 1.0)};
  } else if (kind == "uniform") {
    only({"lo", "hi"});
    model = Uniform{number_field(j, "lo", -1.0), number_field(j, "hi", 1.0)};
  } else if (kind == "pareto" || kind == "two_sided_pareto") {
    only({"tail_index", "r", "scale", "left_rate"});
    double r = number_field(j, "tail_index", 1.0);
    if (j.contains("r")) r = number_field(j, "r", 1.0);
    model = TwoSidedPareto{r, number_field(j, "scale", 1.0), number_field(j, "left_rate", 1.0)};
  } else {
    fail("unknown innovation kind '" + kind + "'");
  }
  validate(model);
  return model;
}

}  // namespace persist
