#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ifslab/model.hpp"
#include "ifslab/rng.hpp"

namespace ifslab {

struct Trajectory {
    std::vector<StateVector> states;
    std::vector<double> times;  // times.size() == states.size() - 1
    SeededStream stream;
    std::string to_csv() const;  // header n,t,x_0..x_{d-1}
};

// Inverse-CDF sampler for t ~ p(x,.): bisection on a cached cumulative
// quadrature, absolute tolerance 1e-10.  When the density does not depend
// on x the table is built once and shared.
class TimeSampler {
  public:
    explicit TimeSampler(const ModelSpec& model, int panels = 512);

    // t solving \int_0^t p(x,s)ds = u, u in [0,1).
    double sample(const StateVector& x, double u) const;

  private:
    struct Table {
        std::vector<double> cum;  // prefix integrals at panel boundaries
        double total = 0.0;
    };
    Table build(const StateVector& x) const;
    double invert(const Table& table, const StateVector& x, double u) const;

    const ModelSpec* model_;
    int panels_;
    std::optional<Table> shared_;
};

struct StepResult {
    StateVector x;
    double t = 0.0;
    StateVector h;
};

StepResult step(const ModelSpec& model, const TimeSampler& sampler, const StateVector& x,
                RandomStream& rng);

Trajectory simulate(const ModelSpec& model, const StateVector& x0, int n, SeededStream stream);

// `count` approximate draws from mu*: independent replicas by default
// (replica i runs burn_in + thinning steps on substream stream_id + i).
std::vector<StateVector> stationary_samples(const ModelSpec& model, int burn_in, int count,
                                            int thinning, SeededStream stream, int threads = 1);

// Default burn-in from a fitted coupling rate: ceil(log(1e-6)/log(q_hat)).
int default_burn_in(double q_hat);

struct MomentPoint {
    int n = 0;
    double estimate = 0.0;
    double stderr_est = 0.0;
    double bound = 0.0;  // (a_j^{n/j} m0^{1/j} + c (1 - a_j^{1/j})^{-1})^j
};

std::vector<MomentPoint> moment_curve(const ModelSpec& model,
                                      const std::vector<StateVector>& initial_samples, double j,
                                      int n_max, const AssumptionConstants& constants,
                                      SeededStream stream, int threads = 1);

}  // namespace ifslab
