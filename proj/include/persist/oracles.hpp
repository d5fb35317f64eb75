#pragma once

#include <utility>

#include "persist/kernel.hpp"
#include "persist/spectral.hpp"

namespace persist {

struct QPochhammerEval {
  double u = 0.0;
  double q = 0.0;
  double value = 0.0;
  long terms_used = 0;
  double truncation_bound = 0.0;  // |value - (u,q)_inf| <= truncation_bound
};

// (u; q)_inf = prod_{k>=0} (1 - u q^k) for 0 <= q < 1.
QPochhammerEval q_pochhammer(double u, double q);

// E_0[s^{T_0}] = s (as; a^2)_inf / ((as; a^2)_inf + (s; a^2)_inf) for Laplace
// innovations. T_0 does not change when the innovations are rescaled, so this
// holds for every Laplace scale. Throws PastPole once the denominator is <= 0.
double laplace_gf(double s, double a);

// Denominator (as; a^2)_inf + (s; a^2)_inf of laplace_gf.
double laplace_denominator(double s, double a);

struct LaplaceRoot {
  double lambda_a = 0.0;  // log s*
  double s_star = 0.0;
  double s_lo = 0.0;  // bisection bracket around s*
  double s_hi = 0.0;
};

// Smallest zero s* of the denominator; it lies in (1, 1/a).
LaplaceRoot laplace_lambda_a(double a);

struct OuParams {
  double theta = 0.0;
  double sigma_sq = 0.0;
};

// Ornstein-Uhlenbeck process sampled at unit times that reproduces the chain
// with standard normal innovations: e^{-theta} = a, stationary variance 1/(1-a^2).
OuParams gaussian_ou_params(double a);

// -r log a.
double pareto_lambda_a(double r, double a);

struct FiniteChainOracle {
  KernelBlocks blocks;     // Q = [[0.4, 0.2], [0.1, 0.5]], kill = (0.4, 0.4), A = {1}
  EigenTriple exact;       // rho = 0.6, V = (1, 1), nu = (1/3, 2/3)
  double renewal_root = 0.0;  // log(5/3)
};

FiniteChainOracle finite_chain_oracle();

}  // namespace persist
