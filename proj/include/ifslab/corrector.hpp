#pragma once

#include <string>
#include <vector>

#include "ifslab/coupling.hpp"
#include "ifslab/model.hpp"
#include "ifslab/simulator.hpp"

namespace ifslab {

struct GMeanEstimate {
    double value = 0.0;
    double stderr_est = 0.0;
};

// Sample mean of g over stationary draws; downstream uses subtract it.
GMeanEstimate estimate_g_mean(const ObservableSpec& obs,
                              const std::vector<StateVector>& stationary);

// Time-averaged mean over segments off stationary starts.  The pool mean
// above has standard error sd(g)/sqrt(pool); partial sums downstream pick
// up a linear drift n * error, so LIL-scale runs need far more g samples
// than chi-node accuracy does.  total_steps spread over the starts.
GMeanEstimate estimate_g_mean(const ModelSpec& model, const ObservableSpec& obs,
                              const std::vector<StateVector>& stationary, long total_steps,
                              SeededStream stream, int threads = 1);

struct ChiPoint {
    double value = 0.0;
    double stderr_est = 0.0;
    int truncation_N = 0;
    double tail_bound = 0.0;
};

// chi(x) = sum_{i<=N} E[g(x_i) - g(y_i)] along coupled paths with y_0
// stationary; the coupled difference self-centers and its variance decays
// geometrically.  N from the fitted tail bound, replica count grown until
// the Monte Carlo standard error is below tol.
ChiPoint estimate_chi(const ModelSpec& model, const AssumptionConstants& constants,
                      const ObservableSpec& obs, const DecayFit& decay,
                      const std::vector<StateVector>& stationary, const StateVector& x,
                      double tol, SeededStream stream);

// Tabulated chi-hat: exact per-state values for kernel-embedded models,
// cubic interpolation on a window grid otherwise.  Deterministic given
// its internal seed.
class CorrectorEstimate {
  public:
    static CorrectorEstimate build(const ModelSpec& model, const AssumptionConstants& constants,
                                   const ObservableSpec& obs, const DecayFit& decay,
                                   const std::vector<StateVector>& stationary, double tol,
                                   SeededStream stream, int threads = 1, int grid_points = 129,
                                   long g_mean_steps = 1'000'000);

    double evaluate(const StateVector& x) const;
    // Monte Carlo standard error of the node backing evaluate(x).
    double stderr_at(const StateVector& x) const;
    double g_centered(const StateVector& x) const { return obs_g_(x) - g_mean_.value; }

    int truncation_N() const { return truncation_N_; }
    double tail_bound() const { return tail_bound_; }
    const GMeanEstimate& g_mean() const { return g_mean_; }
    double max_node_stderr() const { return max_node_stderr_; }
    std::string stderr_profile() const;

  private:
    bool discrete_ = false;
    std::vector<StateVector> nodes_;
    std::vector<double> values_, node_stderr_;
    int truncation_N_ = 0;
    double tail_bound_ = 0.0;
    double max_node_stderr_ = 0.0;
    GMeanEstimate g_mean_;
    std::function<double(const StateVector&)> obs_g_;
};

struct MartingaleDecomposition {
    std::vector<double> M;  // M[0] = 0
    std::vector<double> Z;  // Z[0] = 0, Z[n] = M[n] - M[n-1]
    std::string to_csv() const;
};

MartingaleDecomposition martingale_decompose(const Trajectory& traj,
                                             const CorrectorEstimate& chi);

// max over test points of |E[chi(x_1) - chi(x) + g(x)]| / SE at `replicas`
// one-step draws per point; the SE combines the one-step Monte Carlo error
// with the chi-hat node and g-mean standard errors, which are common
// across replicas.  `perturbation` added to chi-hat lets tests inject a
// known bias (negative control).
double martingale_drift_test(const ModelSpec& model, const CorrectorEstimate& chi,
                             const std::vector<StateVector>& test_points, int replicas,
                             SeededStream stream, int threads = 1,
                             std::function<double(const StateVector&)> perturbation = nullptr);

struct LipschitzCheck {
    bool pass = true;
    double worst_margin = 0.0;  // bound - |difference|, minimum over pairs
};

// |chi(x) - chi(y)| <= G C/(1-q) (1 + rho(x) + rho(y)), inflated by three
// combined standard errors.
LipschitzCheck chi_lipschitz_check(const ModelSpec& model, const CorrectorEstimate& chi,
                                   const DecayFit& decay, const ObservableSpec& obs,
                                   const std::vector<std::pair<StateVector, StateVector>>& pairs);

}  // namespace ifslab
