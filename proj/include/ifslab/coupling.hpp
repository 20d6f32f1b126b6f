#pragma once

#include <string>
#include <vector>

#include "ifslab/model.hpp"
#include "ifslab/rng.hpp"
#include "ifslab/simulator.hpp"

namespace ifslab {

struct CoupledState {
    StateVector x, y;
    int bit = 1;  // 1 iff the last step used shared randomness (common t and h)
};

struct CoupledTrajectory {
    std::vector<CoupledState> states;
    SeededStream stream;
};

struct DecayFit {
    double q_hat = 0.0;
    double C_hat = 0.0;
    double r_squared = 0.0;
    int n_lo = 0, n_hi = 0;  // fitted range
    std::string to_json() const;
};

// \int_0^T min(p(x,t), p(y,t)) dt.  Crossings of the two densities are
// located first so every sub-integral is smooth.
double overlap_mass(const ModelSpec& model, const StateVector& x, const StateVector& y);

// Per-step coupled transition: with probability overlap_mass both chains
// share one t (bit'=1), otherwise each draws from its residual density
// (bit'=0); the additive noise h is always shared.
class CoupledStepper {
  public:
    CoupledStepper(const ModelSpec& model, const AssumptionConstants& constants);
    CoupledState step(const CoupledState& cs, RandomStream& rng) const;

  private:
    double sample_min_density(const StateVector& x, const StateVector& y,
                              RandomStream& rng) const;
    double sample_residual(const StateVector& x, const StateVector& y,
                           RandomStream& rng) const;
    const ModelSpec* model_;
    double M2_;
    TimeSampler sampler_;
};

CoupledTrajectory coupled_trajectory(const ModelSpec& model, const AssumptionConstants& constants,
                                     const StateVector& x0, const StateVector& y0, int n,
                                     SeededStream stream);

// Fits log D_n = log(G C (1 + rho(x) + rho(y))) + n log q to the replica
// means D_n of |g(x_n) - g(y_n)| along coupled trajectories.
DecayFit fit_decay(const ModelSpec& model, const AssumptionConstants& constants,
                   const ObservableSpec& obs,
                   const std::vector<std::pair<StateVector, StateVector>>& start_pairs, int n_max,
                   int replicas, SeededStream stream, int threads = 1);

struct CurvePoint {
    int n = 0;
    double value = 0.0;
    double stderr_est = 0.0;
};

// Upper bound on ||P^n delta_x0 - mu*||_FM: E min(1, rho(x_n, y_n)) with
// y_0 drawn from stationary samples, coupled paths.
std::vector<CurvePoint> fm_distance_curve(const ModelSpec& model,
                                          const AssumptionConstants& constants,
                                          const StateVector& x0,
                                          const std::vector<StateVector>& stationary, int n_max,
                                          int replicas, SeededStream stream, int threads = 1);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

}  // namespace ifslab
