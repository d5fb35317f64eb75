#include "persist/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "persist/errors.hpp"
#include "persist/linalg.hpp"

namespace persist {

namespace {

std::size_t pilot_nodes(const GridSettings& s) {
  const std::size_t n = std::min<std::size_t>(s.n_nodes, 200);
  return s.scheme == QuadratureScheme::GaussLegendreComposite ? std::max<std::size_t>(16, n / 4 * 4) : std::max<std::size_t>(16, n);
}

// lambda_hat and e^{lambda_hat + pad} r(Q_BB) on a coarse grid
std::pair<double, double> pilot(const ChainParams& params, double r, double cap, const GridSettings& s) {
  const Grid g = build_grid(params, r, cap, pilot_nodes(s), s.scheme);
  const KernelBlocks b = assemble_blocks(params, g, s.policy);
  const double lambda = leading_eigentriple(b, 1e-8).lambda_a;
  const double radius = perron_root(b.Q_BB(), 1e-10).radius;
  return {lambda, std::exp(lambda + s.lambda_pad) * radius};
}

}  // namespace

void require_spectral_model(const ChainParams& params) {
  validate(params);
  if (!(cdf(params.innovation, 0.0) > 0.0))
    throw Error(ErrorKind::DegenerateKernel,
                "P(xi < 0) = 0: the chain is never killed, the kernel is stochastic and lambda_a = 0");
  if (!(survival(params.innovation, 0.0) > 0.0))
    throw Error(ErrorKind::DegenerateKernel, "P(xi > 0) = 0: the chain cannot stay positive, no leading eigenvalue");
  const TailInfo tail = classify_tail(params.innovation, params.a);
  if (tail.tail_class == TailClass::RegularlyVarying)
    throw Error(ErrorKind::SeriesDiverges,
                "B: regularly varying innovations lack power moments of every order; the excursion series above r "
                "diverges at lambda_a, use the Monte Carlo slope instead");
}

SpectrumPlan plan_spectrum(const ChainParams& params, const GridSettings& s) {
  require_spectral_model(params);
  const TailInfo tail = classify_tail(params.innovation, params.a);
  SpectrumPlan plan;
  plan.n_nodes = s.n_nodes;
  plan.scheme = s.scheme;
  plan.policy = s.policy;
  plan.bounded = tail.tail_class == TailClass::BoundedAbove;

  auto evaluate = [&](double r, double cap) {
    plan.r = r;
    plan.cap = cap;
    const auto [lambda, scaled] = pilot(params, r, cap, s);
    plan.lambda_estimate = lambda;
    plan.scaled_radius_B = scaled;
    plan.margin_met = scaled < s.margin;
    return plan.margin_met;
  };

  if (plan.bounded) {
    const double cap = s.cap.value_or(tail.r_star);
    if (s.r) {
      evaluate(*s.r, cap);
    } else {
      bool ok = false;
      for (int k = 1; k <= 12 && !ok; ++k) ok = evaluate(cap * (1.0 - std::ldexp(1.0, -k)), cap);
    }
  } else {
    double r = s.r.value_or(std::max(0.5, interquartile_range(params.innovation)));
    for (int step = 0; step < 16; ++step) {
      const double cap = s.cap.value_or(select_cap(params, r, s.overflow_tol));
      if (evaluate(r, cap) || s.r) break;
      r *= 1.5;
    }
  }
  if (!plan.margin_met) {
    std::ostringstream os;
    os << "r = " << plan.r << " misses the B-block margin: e^{lambda+" << s.lambda_pad << "} r(Q_BB) = "
       << plan.scaled_radius_B << " >= " << s.margin;
    plan.notes.push_back(os.str());
  }
  return plan;
}

Grid plan_grid(const ChainParams& params, const SpectrumPlan& plan) {
  return build_grid(params, plan.r, plan.cap, plan.n_nodes, plan.scheme);
}

KernelBlocks plan_blocks(const ChainParams& params, const SpectrumPlan& plan) {
  return assemble_blocks(params, plan_grid(params, plan), plan.policy);
}

std::vector<ConvergenceRow> convergence_trace(const ChainParams& params, const SpectrumPlan& plan, double tol) {
  std::vector<std::pair<double, std::size_t>> sizes{{plan.cap, plan.n_nodes}, {plan.cap, 2 * plan.n_nodes}};
  if (!plan.bounded) sizes.emplace_back(2.0 * plan.cap, 2 * plan.n_nodes);
  std::vector<ConvergenceRow> rows;
  for (const auto& [cap, n] : sizes) {
    const Grid g = build_grid(params, plan.r, cap, n, plan.scheme);
    for (OverflowPolicy policy : {OverflowPolicy::Kill, OverflowPolicy::ReflectTop}) {
      const KernelBlocks b = assemble_blocks(params, g, policy);
      rows.push_back({cap, n, policy, leading_eigentriple(b, tol).lambda_a, b.max_overflow()});
    }
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "cap,n_nodes,policy,lambda_a,max_overflow\n";
  for (const auto& row : rows)
    os << row.cap << ',' << row.n_nodes << ',' << to_string(row.policy) << ',' << row.lambda_a << ',' << row.max_overflow
       << '\n';
  return os.str();
}

}  // namespace persist
