#include "ifslab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ifslab/parallel.hpp"
#include "ifslab/quadrature.hpp"
#include "ifslab/stats.hpp"

namespace ifslab {

std::string Trajectory::to_csv() const {
    std::ostringstream out;
    out << "n,t";
    const std::size_t d = states.empty() ? 0 : states.front().size();
    for (std::size_t i = 0; i < d; ++i) out << ",x_" << i;
    out << "\n";
    char buf[32];
    for (std::size_t n = 0; n < states.size(); ++n) {
        out << n << ",";
        if (n == 0)
            out << "nan";
        else {
            std::snprintf(buf, sizeof buf, "%.17g", times[n - 1]);
            out << buf;
        }
        for (double v : states[n]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
    return out.str();
}

TimeSampler::TimeSampler(const ModelSpec& model, int panels)
    : model_(&model), panels_(panels) {
    if (model.density_x_independent) shared_ = build(model.base_point);
}

TimeSampler::Table TimeSampler::build(const StateVector& x) const {
    Table table;
    table.cum.resize(static_cast<std::size_t>(panels_) + 1, 0.0);
    const double h = model_->horizon / panels_;
    for (int k = 0; k < panels_; ++k) {
        const double inc =
            gauss8([&](double t) { return model_->density_p(x, t); }, k * h, (k + 1) * h);
        table.cum[static_cast<std::size_t>(k) + 1] = table.cum[static_cast<std::size_t>(k)] + inc;
    }
    table.total = table.cum.back();
    if (std::abs(table.total - 1.0) > 1e-6)
        throw ModelDefinitionError("density does not normalize to 1 on [0,T]");
    return table;
}

double TimeSampler::invert(const Table& table, const StateVector& x, double u) const {
    const double target = u * table.total;
    const auto it = std::upper_bound(table.cum.begin(), table.cum.end(), target);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        0, std::distance(table.cum.begin(), it) - 1));
    k = std::min(k, table.cum.size() - 2);
    const double h = model_->horizon / panels_;
    const double t0 = static_cast<double>(k) * h;
    double lo = t0, hi = t0 + h;
    const double base = table.cum[k];
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double f =
            base + gauss8([&](double t) { return model_->density_p(x, t); }, t0, mid);
        (f < target ? lo : hi) = mid;
    }
    return std::clamp(0.5 * (lo + hi), 0.0, model_->horizon);
}

double TimeSampler::sample(const StateVector& x, double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("sample_t: u outside [0,1)");
    if (shared_) return invert(*shared_, x, u);
    return invert(build(x), x, u);
}

StepResult step(const ModelSpec& model, const TimeSampler& sampler, const StateVector& x,
                RandomStream& rng) {
    StepResult r;
    r.t = sampler.sample(x, rng.uniform());
    r.h = sample_noise(model.noise, model.dimension, rng);
    r.x = model.map_S(x, r.t);
    for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] += r.h[i];
    if (!all_finite(r.x)) throw ModelDefinitionError("step left the state space");
    return r;
}

Trajectory simulate(const ModelSpec& model, const StateVector& x0, int n, SeededStream stream) {
    TimeSampler sampler(model);
    RandomStream rng(stream);
    Trajectory traj;
    traj.stream = stream;
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    traj.times.reserve(static_cast<std::size_t>(n));
    traj.states.push_back(x0);
    for (int k = 0; k < n; ++k) {
        StepResult r = step(model, sampler, traj.states.back(), rng);
        traj.states.push_back(std::move(r.x));
        traj.times.push_back(r.t);
    }
    return traj;
}

std::vector<StateVector> stationary_samples(const ModelSpec& model, int burn_in, int count,
                                            int thinning, SeededStream stream, int threads) {
    if (burn_in < 0 || thinning < 1) throw std::invalid_argument("stationary_samples: bad args");
    std::vector<StateVector> out(static_cast<std::size_t>(count));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + i});
        StateVector x = model.base_point;
        for (int k = 0; k < burn_in + thinning; ++k) x = step(model, sampler, x, rng).x;
        out[i] = std::move(x);
    });
    return out;
}

int default_burn_in(double q_hat) {
    if (!(q_hat > 0.0 && q_hat < 1.0)) return 400;
    return static_cast<int>(std::ceil(std::log(1e-6) / std::log(q_hat)));
}

std::vector<MomentPoint> moment_curve(const ModelSpec& model,
                                      const std::vector<StateVector>& initial_samples, double j,
                                      int n_max, const AssumptionConstants& constants,
                                      SeededStream stream, int threads) {
    const std::size_t replicas = initial_samples.size();
    std::vector<std::vector<double>> rho_j(static_cast<std::size_t>(n_max) + 1,
                                           std::vector<double>(replicas));
    TimeSampler sampler(model);
    parallel_for(replicas, threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = initial_samples[r];
        rho_j[0][r] = std::pow(dist(x, model.base_point), j);
        for (int n = 1; n <= n_max; ++n) {
            x = step(model, sampler, x, rng).x;
            rho_j[static_cast<std::size_t>(n)][r] = std::pow(dist(x, model.base_point), j);
        }
    });

    const double a_j = (j == 1.0)   ? constants.a1
                       : (j == 2.0) ? constants.a2
                                    : constants.a_2pd;
    double m0 = 0.0;
    for (const auto& x : initial_samples) m0 += std::pow(dist(x, model.base_point), j);
    m0 /= static_cast<double>(replicas);

    const double tail = constants.c / (1.0 - std::pow(a_j, 1.0 / j));
    std::vector<MomentPoint> curve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        auto& pt = curve[static_cast<std::size_t>(n)];
        pt.n = n;
        pt.estimate = mean(rho_j[static_cast<std::size_t>(n)]);
        pt.stderr_est = stderr_of_mean(rho_j[static_cast<std::size_t>(n)]);
        pt.bound = std::pow(std::pow(a_j, n / j) * std::pow(m0, 1.0 / j) + tail, j);
    }
    return curve;
}

}  // namespace ifslab
