#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ifslab/model.hpp"

namespace ifslab {

// Finite-state surrogate of the transition kernel; exact ground truth for
// the Monte Carlo modules.
struct DiscreteKernel {
    std::vector<StateVector> states;
    Eigen::MatrixXd matrix;  // row-stochastic
    std::vector<double> weights;
    double renormalization_defect = 0.0;
};

// Quadrature discretization over a 1-d cell grid; throws when the mass
// falling outside the grid exceeds 1e-3.
DiscreteKernel discretize(const ModelSpec& model, double lo, double hi, int cells,
                          int t_nodes = 4096);

// pi P = pi, pi >= 0, sum pi = 1; residual below 1e-12.  Throws on
// reducible kernels (stationary vector not unique).
Eigen::VectorXd exact_stationary(const DiscreteKernel& kernel);

// chi solving (I - P) chi = g on the centered subspace, <chi, pi> = 0.
// Requires <g, pi> = 0 within 1e-12.
Eigen::VectorXd exact_chi(const DiscreteKernel& kernel, const Eigen::VectorXd& g);

// sigma^2 = sum_x pi_x sum_y P_xy (chi_y - chi_x + g_x)^2.
double exact_sigma2(const DiscreteKernel& kernel, const Eigen::VectorXd& g,
                    const Eigen::VectorXd& chi);

// Var_pi(g) + 2 sum_{i=1..lag_max} <g, P^i g>_pi; equals exact_sigma2 in
// the lag_max -> infinity limit.
double exact_green_kubo(const DiscreteKernel& kernel, const Eigen::VectorXd& g, int lag_max);

// Model whose step samples the kernel row exactly: T = 1, p uniform,
// S(x, t) = inverse CDF of the row of the state nearest x, eps = 0.
ModelSpec embed_kernel_as_model(const DiscreteKernel& kernel);
ObservableSpec embed_observable(const DiscreteKernel& kernel, const Eigen::VectorXd& g);

// Square row-stochastic matrix from CSV (states placed at 0, 1, 2, ...).
DiscreteKernel kernel_from_csv(const std::string& csv_text);
DiscreteKernel kernel_from_matrix(const std::vector<std::vector<double>>& rows);

}  // namespace ifslab
