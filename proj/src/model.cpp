#include "ifslab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ifslab {

StateVector evaluate_S(const ModelSpec& model, const StateVector& x, double t) {
    model.check_time(t);
    StateVector y = model.map_S(x, t);
    if (!all_finite(y)) throw ModelDefinitionError("S returned non-finite value");
    return y;
}

double evaluate_p(const ModelSpec& model, const StateVector& x, double t) {
    model.check_time(t);
    const double v = model.density_p(x, t);
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ModelDefinitionError("density p returned negative or non-finite value");
    return v;
}

double evaluate_lambda(const ModelSpec& model, const StateVector& x, double t) {
    model.check_time(t);
    const double v = model.lipschitz_lambda(x, t);
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ModelDefinitionError("lambda returned negative or non-finite value");
    return v;
}

double evaluate_g(const ObservableSpec& obs, const StateVector& x) { return obs.g(x); }

StateVector sample_noise(const NoiseSpec& noise, int dimension, RandomStream& rng) {
    StateVector h(static_cast<std::size_t>(dimension), 0.0);
    switch (noise.law) {
        case NoiseSpec::Law::PointMassZero:
            return h;
        case NoiseSpec::Law::UniformBall: {
            if (noise.epsilon == 0.0) return h;
            if (dimension == 1) {
                h[0] = noise.epsilon * (2.0 * rng.uniform() - 1.0);
                return h;
            }
            // Gaussian direction, radius ~ eps * U^{1/d}.
            double n2 = 0.0;
            for (double& v : h) {
                v = rng.normal();
                n2 += v * v;
            }
            const double r =
                noise.epsilon * std::pow(rng.uniform(), 1.0 / dimension) / std::sqrt(n2);
            for (double& v : h) v *= r;
            return h;
        }
        case NoiseSpec::Law::TruncatedGaussian: {
            if (noise.epsilon == 0.0) return h;
            for (long iter = 0; iter < 1000000; ++iter) {
                double n2 = 0.0;
                for (double& v : h) {
                    v = noise.sigma * rng.normal();
                    n2 += v * v;
                }
                if (n2 <= noise.epsilon * noise.epsilon) return h;
            }
            throw ModelDefinitionError("truncated-gaussian rejection cap exceeded");
        }
    }
    throw std::logic_error("unknown noise law");
}

namespace {

std::pair<ModelSpec, ObservableSpec> make_exp_contraction() {
    ModelSpec m;
    m.name = "exp-contraction";
    m.dimension = 1;
    m.horizon = 1.0;
    m.epsilon_star = 0.1;
    m.noise = {NoiseSpec::Law::UniformBall, 0.1, 0.0};
    m.map_S = [](const StateVector& x, double t) { return StateVector{std::exp(-t) * x[0]}; };
    m.density_p = [](const StateVector&, double) { return 1.0; };
    m.lipschitz_lambda = [](const StateVector&, double t) { return std::exp(-t); };
    m.base_point = {0.0};
    m.window_lo = {-3.0};
    m.window_hi = {3.0};
    m.density_x_independent = true;
    m.dini_modulus = [](double) { return 0.0; };

    ObservableSpec obs;
    obs.name = "tanh";
    obs.g = [](const StateVector& x) { return std::tanh(x[0]); };
    obs.lipschitz_constant = 1.0;
    obs.sup_bound = 1.0;
    return {m, obs};
}

std::pair<ModelSpec, ObservableSpec> make_affine_uniform() {
    ModelSpec m;
    m.name = "affine-uniform";
    m.dimension = 1;
    m.horizon = 1.0;
    m.epsilon_star = 0.0;
    m.noise = {NoiseSpec::Law::PointMassZero, 0.0, 0.0};
    m.map_S = [](const StateVector& x, double t) { return StateVector{0.5 * x[0] + t}; };
    m.density_p = [](const StateVector&, double) { return 1.0; };
    m.lipschitz_lambda = [](const StateVector&, double) { return 0.5; };
    m.base_point = {0.0};
    m.window_lo = {-1.0};
    m.window_hi = {3.0};
    m.density_x_independent = true;
    m.dini_modulus = [](double) { return 0.0; };

    ObservableSpec obs;
    obs.name = "tanh-centered-at-1";
    obs.g = [](const StateVector& x) { return std::tanh(x[0] - 1.0); };
    obs.lipschitz_constant = 1.0;
    obs.sup_bound = 1.0;
    return {m, obs};
}

std::pair<ModelSpec, ObservableSpec> make_tilted_density() {
    ModelSpec m;
    m.name = "tilted-density";
    m.dimension = 1;
    m.horizon = 1.0;
    m.epsilon_star = 0.1;
    m.noise = {NoiseSpec::Law::UniformBall, 0.1, 0.0};
    m.map_S = [](const StateVector& x, double t) { return StateVector{std::exp(-t) * x[0]}; };
    // p(x,t) = (1 + t tanh x) / Z(x), Z(x) = 1 + tanh(x)/2.
    m.density_p = [](const StateVector& x, double t) {
        const double a = std::tanh(x[0]);
        return (1.0 + t * a) / (1.0 + 0.5 * a);
    };
    m.lipschitz_lambda = [](const StateVector&, double t) { return std::exp(-t); };
    m.base_point = {0.0};
    m.window_lo = {-2.0};
    m.window_hi = {2.0};
    m.density_x_independent = false;
    // |dp/dx| <= sup |d/dx tanh| * (t/Z + Z'/Z^2) <= 3 on the window.
    m.dini_modulus = [](double r) { return 3.0 * r; };

    ObservableSpec obs;
    obs.name = "tanh";
    obs.g = [](const StateVector& x) { return std::tanh(x[0]); };
    obs.lipschitz_constant = 1.0;
    obs.sup_bound = 1.0;
    return {m, obs};
}

// Deliberately violates the contraction-in-mean assumption (a_1 = 1.05 > 1);
// kept in the registry so the audit-failure and degenerate-fit paths stay
// reachable from a config file.
std::pair<ModelSpec, ObservableSpec> make_expanding_diagnostic() {
    ModelSpec m;
    m.name = "expanding-diagnostic";
    m.dimension = 1;
    m.horizon = 1.0;
    m.epsilon_star = 0.0;
    m.noise = {NoiseSpec::Law::PointMassZero, 0.0, 0.0};
    m.map_S = [](const StateVector& x, double) { return StateVector{1.05 * x[0]}; };
    m.density_p = [](const StateVector&, double) { return 1.0; };
    m.lipschitz_lambda = [](const StateVector&, double) { return 1.05; };
    m.base_point = {0.0};
    m.window_lo = {-3.0};
    m.window_hi = {3.0};
    m.density_x_independent = true;
    m.dini_modulus = [](double) { return 0.0; };

    ObservableSpec obs;
    obs.name = "identity";
    obs.g = [](const StateVector& x) { return x[0]; };
    obs.lipschitz_constant = 1.0;
    obs.sup_bound = 3.0;
    return {m, obs};
}

std::pair<ModelSpec, ObservableSpec> make_cell_cycle_like() {
    ModelSpec m;
    m.name = "cell-cycle-like";
    m.dimension = 1;
    m.horizon = 2.0;
    m.epsilon_star = 0.05;
    m.noise = {NoiseSpec::Law::TruncatedGaussian, 0.05, 0.025};
    m.map_S = [](const StateVector& x, double t) {
        return StateVector{0.3 * x[0] + 0.5 * std::sin(1.5707963267948966 * t)};
    };
    m.density_p = [](const StateVector&, double) { return 0.5; };
    m.lipschitz_lambda = [](const StateVector&, double) { return 0.3; };
    m.base_point = {0.0};
    m.window_lo = {-1.0};
    m.window_hi = {1.5};
    m.density_x_independent = true;
    m.dini_modulus = [](double) { return 0.0; };

    ObservableSpec obs;
    obs.name = "tanh-centered";
    obs.g = [](const StateVector& x) { return std::tanh(x[0] - 0.35); };
    obs.lipschitz_constant = 1.0;
    obs.sup_bound = 1.0;
    return {m, obs};
}

}  // namespace

std::pair<ModelSpec, ObservableSpec> builtin_model(const std::string& name) {
    if (name == "exp-contraction") return make_exp_contraction();
    if (name == "affine-uniform") return make_affine_uniform();
    if (name == "tilted-density") return make_tilted_density();
    if (name == "cell-cycle-like") return make_cell_cycle_like();
    if (name == "expanding-diagnostic") return make_expanding_diagnostic();
    throw ModelDefinitionError("unknown builtin model: " + name);
}

std::vector<std::string> builtin_model_names() {
    return {"exp-contraction", "affine-uniform", "tilted-density", "cell-cycle-like",
            "expanding-diagnostic"};
}

}  // namespace ifslab
