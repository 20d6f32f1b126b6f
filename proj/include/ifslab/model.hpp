#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ifslab/rng.hpp"
#include "ifslab/types.hpp"

namespace ifslab {

// Noise law nu^eps; every sample h satisfies |h| <= epsilon.
struct NoiseSpec {
    enum class Law { UniformBall, TruncatedGaussian, PointMassZero };
    Law law = Law::PointMassZero;
    double epsilon = 0.0;
    double sigma = 0.0;  // scale of the untruncated Gaussian
};

// One system (S, p, lambda, T, eps, noise, delta).  Immutable after
// construction; safe to share across workers.
struct ModelSpec {
    std::string name;
    int dimension = 1;
    double horizon = 1.0;  // T
    double epsilon_star = 0.0;
    NoiseSpec noise;
    double delta = 0.5;

    std::function<StateVector(const StateVector&, double)> map_S;
    std::function<double(const StateVector&, double)> density_p;
    std::function<double(const StateVector&, double)> lipschitz_lambda;
    StateVector base_point;
    std::function<double(double)> dini_modulus;  // optional

    // Bounded window the audit sweeps; recorded in reports.
    std::vector<double> window_lo, window_hi;

    // p(x,.) identical for all x: lets samplers share one CDF table and
    // makes the per-step coupling overlap exactly 1.
    bool density_x_independent = false;

    // Set when the model wraps a finite-state kernel; the corrector then
    // tabulates on exactly these states.
    std::optional<std::vector<StateVector>> discrete_states;

    void check_time(double t) const {
        if (!(t >= 0.0 && t <= horizon))
            throw std::domain_error("t outside [0, T]");
    }
};

struct ObservableSpec {
    std::string name;
    std::function<double(const StateVector&)> g;
    double lipschitz_constant = 1.0;
    double sup_bound = 1.0;
    double G() const { return std::max(lipschitz_constant, sup_bound); }
};

struct AssumptionConstants {
    double a1 = 0.0, a2 = 0.0, a_2pd = 0.0;
    double c = 0.0;
    double M1 = 0.0, M2 = 0.0;
    double normalization_defect = 0.0;
};

// --- pure evaluation -------------------------------------------------------

StateVector evaluate_S(const ModelSpec& model, const StateVector& x, double t);
double evaluate_p(const ModelSpec& model, const StateVector& x, double t);
double evaluate_lambda(const ModelSpec& model, const StateVector& x, double t);
double evaluate_g(const ObservableSpec& obs, const StateVector& x);

// Draw h from the noise law; |h| <= epsilon guaranteed.
StateVector sample_noise(const NoiseSpec& noise, int dimension, RandomStream& rng);

// --- registry --------------------------------------------------------------

// Names: exp-contraction, affine-uniform, tilted-density, cell-cycle-like,
// expanding-diagnostic (a deliberate audit-failure case).
std::pair<ModelSpec, ObservableSpec> builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

}  // namespace ifslab
