#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ifslab/model.hpp"

namespace ifslab {

struct AuditReport {
    AssumptionConstants constants;
    std::string grid_spec;
    // keyed "I".."VI"; "IV" is a heuristic decay probe, not a certificate
    // of the integral condition on the modulus.
    std::map<std::string, bool> pass;
    std::vector<std::pair<double, double>> dini_samples;  // (distance, modulus)
    double a1_error = 0.0, a2_error = 0.0, a_2pd_error = 0.0;

    bool all_pass() const {
        for (const auto& [k, v] : pass)
            if (!v) return false;
        return true;
    }
    std::string to_json() const;
};

// x-grid over the model's audit window, `per_dim` points per dimension.
std::vector<StateVector> audit_grid(const ModelSpec& model, int per_dim = 33);

// sup over the grid of \int_0^T lambda^j p dt; returns (value, quadrature
// refinement error estimate).  t_panels >= 8 composite Gauss-Legendre panels.
std::pair<double, double> estimate_a_j(const ModelSpec& model, double j,
                                       const std::vector<StateVector>& x_grid,
                                       int t_panels = 64);

// max over the grid of |\int_0^T p(x,t)dt - 1|.
double check_normalization(const ModelSpec& model, const std::vector<StateVector>& x_grid,
                           int t_panels = 64);

// sup_t rho(S(xbar,t), xbar) + eps_star.
double estimate_c(const ModelSpec& model, int t_nodes = 4096);

// grid (min, max) of p; the inf excludes t = 0 (Assumption boundary
// convention: infimum over t in (0,T]).
std::pair<double, double> density_bounds(const ModelSpec& model,
                                         const std::vector<StateVector>& x_grid,
                                         int t_nodes = 256);

// Random pairs with log-spaced distances; returns (rho(x,y), \int |p(x,.)-p(y,.)| dt).
std::vector<std::pair<double, double>> dini_probe(const ModelSpec& model, int pair_count,
                                                  SeededStream stream = {20240131, 0});

AuditReport audit(const ModelSpec& model);

}  // namespace ifslab
