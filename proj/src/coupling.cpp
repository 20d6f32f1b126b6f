#include "ifslab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ifslab/parallel.hpp"
#include "ifslab/quadrature.hpp"
#include "ifslab/stats.hpp"
#include "json.hpp"

namespace ifslab {

double overlap_mass(const ModelSpec& model, const StateVector& x, const StateVector& y) {
    if (model.density_x_independent || dist(x, y) == 0.0) return 1.0;
    auto diff = [&](double t) { return model.density_p(x, t) - model.density_p(y, t); };
    auto mn = [&](double t) { return std::min(model.density_p(x, t), model.density_p(y, t)); };

    // locate density crossings so each sub-integral is smooth
    std::vector<double> cuts{0.0};
    const int scan = 256;
    double prev = diff(0.0);
    for (int k = 1; k <= scan; ++k) {
        const double t = model.horizon * k / scan;
        const double cur = diff(t);
        if ((prev < 0.0) != (cur < 0.0) && prev != 0.0) {
            double lo = model.horizon * (k - 1) / scan, hi = t;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                ((diff(mid) < 0.0) == (prev < 0.0) ? lo : hi) = mid;
            }
            cuts.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    cuts.push_back(model.horizon);

    double mass = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        mass += integrate(mn, cuts[s], cuts[s + 1], 64);
    return mass;
}

CoupledStepper::CoupledStepper(const ModelSpec& model, const AssumptionConstants& constants)
    : model_(&model), M2_(constants.M2), sampler_(model) {}

double CoupledStepper::sample_min_density(const StateVector& x, const StateVector& y,
                                          RandomStream& rng) const {
    for (long iter = 0; iter < 1000000; ++iter) {
        const double t = model_->horizon * rng.uniform();
        const double m = std::min(model_->density_p(x, t), model_->density_p(y, t));
        if (rng.uniform() * M2_ <= m) return t;
    }
    throw ModelDefinitionError("min-density rejection cap exceeded");
}

double CoupledStepper::sample_residual(const StateVector& x, const StateVector& y,
                                       RandomStream& rng) const {
    for (long iter = 0; iter < 1000000; ++iter) {
        const double t = model_->horizon * rng.uniform();
        const double r = model_->density_p(x, t) -
                         std::min(model_->density_p(x, t), model_->density_p(y, t));
        if (rng.uniform() * M2_ <= r) return t;
    }
    throw ModelDefinitionError("residual-density rejection cap exceeded");
}

CoupledState CoupledStepper::step(const CoupledState& cs, RandomStream& rng) const {
    const double alpha =
        model_->density_x_independent ? 1.0 : overlap_mass(*model_, cs.x, cs.y);
    CoupledState next;
    double tx, ty;
    if (alpha >= 1.0 || rng.uniform() < alpha) {
        tx = ty = (alpha >= 1.0) ? sampler_.sample(cs.x, rng.uniform())
                                 : sample_min_density(cs.x, cs.y, rng);
        next.bit = 1;
    } else {
        tx = sample_residual(cs.x, cs.y, rng);
        ty = sample_residual(cs.y, cs.x, rng);
        next.bit = 0;
    }
    const StateVector h = sample_noise(model_->noise, model_->dimension, rng);
    next.x = model_->map_S(cs.x, tx);
    next.y = model_->map_S(cs.y, ty);
    for (std::size_t i = 0; i < next.x.size(); ++i) {
        next.x[i] += h[i];
        next.y[i] += h[i];
    }
    return next;
}

CoupledTrajectory coupled_trajectory(const ModelSpec& model, const AssumptionConstants& constants,
                                     const StateVector& x0, const StateVector& y0, int n,
                                     SeededStream stream) {
    CoupledStepper stepper(model, constants);
    RandomStream rng(stream);
    CoupledTrajectory traj;
    traj.stream = stream;
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    traj.states.push_back({x0, y0, 1});
    for (int k = 0; k < n; ++k) traj.states.push_back(stepper.step(traj.states.back(), rng));
    return traj;
}

DecayFit fit_decay(const ModelSpec& model, const AssumptionConstants& constants,
                   const ObservableSpec& obs,
                   const std::vector<std::pair<StateVector, StateVector>>& start_pairs, int n_max,
                   int replicas, SeededStream stream, int threads) {
    if (start_pairs.empty()) throw std::invalid_argument("fit_decay: no start pairs");
    if (replicas < 32) throw std::invalid_argument("fit_decay: need >= 32 replicas");

    const std::size_t pairs = start_pairs.size();
    // diffs[pair][n][replica] = |g(x_n) - g(y_n)|
    std::vector<std::vector<std::vector<double>>> diffs(
        pairs, std::vector<std::vector<double>>(static_cast<std::size_t>(n_max) + 1,
                                                std::vector<double>(
                                                    static_cast<std::size_t>(replicas))));
    CoupledStepper stepper(model, constants);
    parallel_for(pairs * static_cast<std::size_t>(replicas), threads, [&](std::size_t idx) {
        const std::size_t p = idx / static_cast<std::size_t>(replicas);
        const std::size_t r = idx % static_cast<std::size_t>(replicas);
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + idx});
        CoupledState cs{start_pairs[p].first, start_pairs[p].second, 1};
        diffs[p][0][r] = std::abs(obs.g(cs.x) - obs.g(cs.y));
        for (int n = 1; n <= n_max; ++n) {
            cs = stepper.step(cs, rng);
            diffs[p][static_cast<std::size_t>(n)][r] = std::abs(obs.g(cs.x) - obs.g(cs.y));
        }
    });

    std::vector<double> ns, logs;
    int n_lo = n_max, n_hi = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const double scale = obs.G() * (1.0 + dist(start_pairs[p].first, model.base_point) +
                                        dist(start_pairs[p].second, model.base_point));
        for (int n = 1; n <= n_max; ++n) {
            const auto& v = diffs[p][static_cast<std::size_t>(n)];
            const double m = mean(v);
            const double se = stderr_of_mean(v);
            if (m <= 0.0 || se > 0.5 * m) break;  // Monte Carlo noise floor
            ns.push_back(static_cast<double>(n));
            logs.push_back(std::log(m / scale));
            n_lo = std::min(n_lo, n);
            n_hi = std::max(n_hi, n);
        }
    }
    if (ns.size() < 3) throw FitDegenerateError("decay fit: all D_n at noise floor");

    const LineFit line = least_squares(ns, logs);
    DecayFit fit;
    fit.q_hat = std::exp(line.slope);
    fit.C_hat = std::exp(line.intercept);
    fit.r_squared = line.r_squared;
    fit.n_lo = n_lo;
    fit.n_hi = n_hi;
    if (!(fit.q_hat > 0.0 && fit.q_hat < 1.0))
        throw FitDegenerateError("decay fit: q_hat outside (0,1)");
    return fit;
}

std::vector<CurvePoint> fm_distance_curve(const ModelSpec& model,
                                          const AssumptionConstants& constants,
                                          const StateVector& x0,
                                          const std::vector<StateVector>& stationary, int n_max,
                                          int replicas, SeededStream stream, int threads) {
    if (stationary.empty()) throw std::invalid_argument("fm_distance_curve: no stationary pool");
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(n_max) + 1,
                                          std::vector<double>(static_cast<std::size_t>(replicas)));
    CoupledStepper stepper(model, constants);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        CoupledState cs{x0, stationary[r % stationary.size()], 1};
        vals[0][r] = std::min(1.0, dist(cs.x, cs.y));
        for (int n = 1; n <= n_max; ++n) {
            cs = stepper.step(cs, rng);
            vals[static_cast<std::size_t>(n)][r] = std::min(1.0, dist(cs.x, cs.y));
        }
    });
    std::vector<CurvePoint> curve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        curve[static_cast<std::size_t>(n)] = {n, mean(vals[static_cast<std::size_t>(n)]),
                                              stderr_of_mean(vals[static_cast<std::size_t>(n)])};
    }
    return curve;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << "n,value,stderr\n";
    char buf[80];
    for (const auto& pt : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", pt.n, pt.value, pt.stderr_est);
        out << buf;
    }
    return out.str();
}

std::string DecayFit::to_json() const {
    nlohmann::json j{{"q_hat", q_hat},
                     {"C_hat", C_hat},
                     {"r_squared", r_squared},
                     {"n_range", {n_lo, n_hi}}};
    return j.dump(2);
}

}  // namespace ifslab
