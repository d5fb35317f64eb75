#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "persist/kernel.hpp"

namespace persist {

// Leading eigentriple of the discretized killed kernel Q:
//   Q V = rho V,  nu Q = rho nu,  sum(nu) = 1,  nu . V = 1.
// With this normalization Q^n ~ rho^n V nu^T, so P_x(T_0 > n) ~ V(x) rho^n.
struct EigenTriple {
  double rho = 0.0;
  double lambda_a = 0.0;  // -log rho
  Eigen::VectorXd V;
  Eigen::VectorXd nu;
  double residual = 0.0;       // ||Q V - rho V||_inf / ||V||_inf
  double left_residual = 0.0;  // same for nu
  int iterations = 0;
  double gap_proxy = 0.0;  // observed residual contraction per step, a crude |rho_2 / rho|
};

EigenTriple leading_eigentriple(const Eigen::MatrixXd& q, double tol = 1e-10, int max_iter = 100000);
EigenTriple leading_eigentriple(const KernelBlocks& blocks, double tol = 1e-10, int max_iter = 100000);

// V scaled to the prefactor of P_x(T_0 = n) ~ V(x) e^{-lambda_a (n+1)}.
double first_passage_prefactor(const EigenTriple& triple, double v_value);

// Linear interpolation of V on the grid (linear extrapolation below the first
// node). Throws OutOfRange outside [0, cap].
double interpolate_V(const EigenTriple& triple, const Grid& grid, double x);

// Tail prediction for P_x(T_0 > n) = P_x(T_0 >= n+1):
//   W(x) e^{-lambda_a (n+2)} / (1 - e^{-lambda_a}),  W = first_passage_prefactor(V(x)).
double survival_prediction(const EigenTriple& triple, const Grid& grid, double x, long n);

// ||e^{lambda_a} Q V - V||_inf / ||V||_inf.
double harmonic_residual(const EigenTriple& triple, const Eigen::MatrixXd& q);
double harmonic_residual(const EigenTriple& triple, const KernelBlocks& blocks);

// ||nu Q / (nu Q 1) - nu||_1: nu is quasi-stationary when this vanishes.
double quasi_stationarity_residual(const EigenTriple& triple, const Eigen::MatrixXd& q);

// Largest drop V_i - V_{i+1} relative to max V (0 when V is nondecreasing).
double monotonicity_defect(const Eigen::VectorXd& v);

std::string eigentriple_csv(const EigenTriple& triple, const Grid& grid);
nlohmann::json eigentriple_scalars(const EigenTriple& triple);

}  // namespace persist
