#include "ifslab/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ifslab/parallel.hpp"
#include "ifslab/stats.hpp"

namespace ifslab {

GMeanEstimate estimate_g_mean(const ObservableSpec& obs,
                              const std::vector<StateVector>& stationary) {
    if (stationary.empty()) throw std::invalid_argument("estimate_g_mean: empty sample set");
    std::vector<double> vals(stationary.size());
    for (std::size_t i = 0; i < stationary.size(); ++i) vals[i] = obs.g(stationary[i]);
    return {mean(vals), stderr_of_mean(vals)};
}

GMeanEstimate estimate_g_mean(const ModelSpec& model, const ObservableSpec& obs,
                              const std::vector<StateVector>& stationary, long total_steps,
                              SeededStream stream, int threads) {
    if (stationary.empty()) throw std::invalid_argument("estimate_g_mean: empty sample set");
    const std::size_t replicas = std::min<std::size_t>(stationary.size(), 256);
    const long per = std::max<long>(1, total_steps / static_cast<long>(replicas));
    std::vector<double> replica_means(replicas);
    TimeSampler sampler(model);
    parallel_for(replicas, threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r];
        double s = 0.0;
        for (long i = 0; i < per; ++i) {
            s += obs.g(x);
            x = step(model, sampler, x, rng).x;
        }
        replica_means[r] = s / static_cast<double>(per);
    });
    return {mean(replica_means), stderr_of_mean(replica_means)};
}

namespace {

double mean_rho(const ModelSpec& model, const std::vector<StateVector>& pool) {
    double s = 0.0;
    for (const auto& y : pool) s += dist(y, model.base_point);
    return s / static_cast<double>(pool.size());
}

int truncation_index(const ObservableSpec& obs, const DecayFit& decay, double rho_x,
                     double rho_bar, double tol) {
    const double scale = obs.G() * decay.C_hat * (1.0 + rho_x + rho_bar);
    int N = 1;
    while (scale * std::pow(decay.q_hat, N + 1) / (1.0 - decay.q_hat) >= tol && N < 4000) ++N;
    return N;
}

}  // namespace

ChiPoint estimate_chi(const ModelSpec& model, const AssumptionConstants& constants,
                      const ObservableSpec& obs, const DecayFit& decay,
                      const std::vector<StateVector>& stationary, const StateVector& x,
                      double tol, SeededStream stream) {
    if (!(decay.q_hat > 0.0 && decay.q_hat < 1.0))
        throw FitDegenerateError("estimate_chi: no valid decay fit, cannot truncate");
    if (stationary.empty()) throw std::invalid_argument("estimate_chi: empty stationary pool");

    ChiPoint result;
    const double rho_bar = mean_rho(model, stationary);
    result.truncation_N =
        truncation_index(obs, decay, dist(x, model.base_point), rho_bar, tol);
    result.tail_bound = obs.G() * decay.C_hat *
                        std::pow(decay.q_hat, result.truncation_N + 1) / (1.0 - decay.q_hat);

    CoupledStepper stepper(model, constants);
    std::vector<double> sums;
    std::uint64_t rep = 0;
    std::size_t batch = 256;
    for (;;) {
        for (std::size_t b = 0; b < batch; ++b, ++rep) {
            RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + rep});
            CoupledState cs{x, stationary[rep % stationary.size()], 1};
            double acc = obs.g(cs.x) - obs.g(cs.y);
            for (int i = 1; i <= result.truncation_N; ++i) {
                cs = stepper.step(cs, rng);
                acc += obs.g(cs.x) - obs.g(cs.y);
            }
            sums.push_back(acc);
        }
        result.value = mean(sums);
        result.stderr_est = stderr_of_mean(sums);
        if (result.stderr_est < tol || sums.size() >= 65536) break;
        batch = sums.size();  // double each round
    }
    return result;
}

CorrectorEstimate CorrectorEstimate::build(const ModelSpec& model,
                                           const AssumptionConstants& constants,
                                           const ObservableSpec& obs, const DecayFit& decay,
                                           const std::vector<StateVector>& stationary, double tol,
                                           SeededStream stream, int threads, int grid_points,
                                           long g_mean_steps) {
    CorrectorEstimate ce;
    ce.obs_g_ = obs.g;
    ce.g_mean_ = g_mean_steps > 0
                     ? estimate_g_mean(model, obs, stationary, g_mean_steps,
                                       SeededStream{stream.master_seed,
                                                    stream.stream_id ^ 0x8000000000000000ULL},
                                       threads)
                     : estimate_g_mean(obs, stationary);

    if (model.discrete_states) {
        ce.discrete_ = true;
        ce.nodes_ = *model.discrete_states;
    } else {
        if (model.dimension != 1)
            throw std::invalid_argument("corrector tabulation supports d = 1 models");
        ce.nodes_.reserve(static_cast<std::size_t>(grid_points));
        for (int i = 0; i < grid_points; ++i)
            ce.nodes_.push_back({model.window_lo[0] + (model.window_hi[0] - model.window_lo[0]) *
                                                          i / (grid_points - 1.0)});
    }

    const std::size_t n = ce.nodes_.size();
    ce.values_.resize(n);
    ce.node_stderr_.resize(n);
    std::vector<int> trunc(n);
    std::vector<double> tails(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const ChiPoint pt =
            estimate_chi(model, constants, obs, decay, stationary, ce.nodes_[i], tol,
                         SeededStream{stream.master_seed, stream.stream_id + (i << 24)});
        ce.values_[i] = pt.value;
        ce.node_stderr_[i] = pt.stderr_est;
        trunc[i] = pt.truncation_N;
        tails[i] = pt.tail_bound;
    });
    ce.truncation_N_ = *std::max_element(trunc.begin(), trunc.end());
    ce.tail_bound_ = *std::max_element(tails.begin(), tails.end());
    ce.max_node_stderr_ = *std::max_element(ce.node_stderr_.begin(), ce.node_stderr_.end());
    return ce;
}

double CorrectorEstimate::evaluate(const StateVector& x) const {
    if (discrete_) {
        std::size_t best = 0;
        double bd = dist(nodes_[0], x);
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            const double d = dist(nodes_[i], x);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return values_[best];
    }
    // 1-d Catmull-Rom on the grid, linear extrapolation past the edges
    const double lo = nodes_.front()[0], hi = nodes_.back()[0];
    const double h = (hi - lo) / static_cast<double>(nodes_.size() - 1);
    const double v = x[0];
    if (v <= lo) return values_.front() + (v - lo) * (values_[1] - values_[0]) / h;
    if (v >= hi)
        return values_.back() +
               (v - hi) * (values_[values_.size() - 1] - values_[values_.size() - 2]) / h;
    const std::size_t k =
        std::min(static_cast<std::size_t>((v - lo) / h), nodes_.size() - 2);
    const double s = (v - (lo + k * h)) / h;
    const double y1 = values_[k], y2 = values_[k + 1];
    const double m1 = (k == 0) ? (y2 - y1) : 0.5 * (y2 - values_[k - 1]);
    const double m2 = (k + 2 >= values_.size()) ? (y2 - y1) : 0.5 * (values_[k + 2] - y1);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y1 + (s3 - 2 * s2 + s) * m1 + (-2 * s3 + 3 * s2) * y2 +
           (s3 - s2) * m2;
}

double CorrectorEstimate::stderr_at(const StateVector& x) const {
    std::size_t best = 0;
    double bd = dist(nodes_[0], x);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double d = dist(nodes_[i], x);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return node_stderr_[best];
}

std::string CorrectorEstimate::stderr_profile() const {
    std::ostringstream out;
    out << nodes_.size() << " nodes, max node SE " << max_node_stderr_ << ", tail bound "
        << tail_bound_ << ", truncation N " << truncation_N_;
    return out.str();
}

MartingaleDecomposition martingale_decompose(const Trajectory& traj,
                                             const CorrectorEstimate& chi) {
    if (traj.states.empty()) throw std::invalid_argument("martingale_decompose: empty trajectory");
    const std::size_t n = traj.states.size() - 1;
    MartingaleDecomposition d;
    d.M.resize(n + 1);
    d.Z.resize(n + 1);
    d.M[0] = 0.0;
    d.Z[0] = 0.0;
    double prev_chi = chi.evaluate(traj.states[0]);
    for (std::size_t k = 1; k <= n; ++k) {
        const double cur_chi = chi.evaluate(traj.states[k]);
        d.Z[k] = cur_chi - prev_chi + chi.g_centered(traj.states[k - 1]);
        d.M[k] = d.M[k - 1] + d.Z[k];
        prev_chi = cur_chi;
    }
    return d;
}

std::string MartingaleDecomposition::to_csv() const {
    std::ostringstream out;
    out << "n,M,Z\n";
    char buf[80];
    for (std::size_t n = 0; n < M.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", n, M[n], Z[n]);
        out << buf;
    }
    return out.str();
}

double martingale_drift_test(const ModelSpec& model, const CorrectorEstimate& chi,
                             const std::vector<StateVector>& test_points, int replicas,
                             SeededStream stream, int threads,
                             std::function<double(const StateVector&)> perturbation) {
    auto chi_hat = [&](const StateVector& x) {
        return chi.evaluate(x) + (perturbation ? perturbation(x) : 0.0);
    };
    TimeSampler sampler(model);
    std::vector<double> stat(test_points.size());
    parallel_for(test_points.size(), threads, [&](std::size_t p) {
        const StateVector& x = test_points[p];
        const double base = -chi_hat(x) + chi.g_centered(x);
        RandomStream rng(SeededStream{stream.master_seed,
                                      stream.stream_id + (static_cast<std::uint64_t>(p) << 32)});
        std::vector<double> drifts(static_cast<std::size_t>(replicas));
        double image_se = 0.0;
        for (int r = 0; r < replicas; ++r) {
            const StateVector x1 = step(model, sampler, x, rng).x;
            drifts[static_cast<std::size_t>(r)] = chi_hat(x1) + base;
            image_se += chi.stderr_at(x1);
        }
        image_se /= static_cast<double>(replicas);
        // chi-hat node errors are common across replicas, so they cap the
        // resolution of the test no matter how many one-step draws we take
        const double se =
            std::sqrt(variance(drifts) / static_cast<double>(replicas) +
                      chi.stderr_at(x) * chi.stderr_at(x) + image_se * image_se +
                      chi.g_mean().stderr_est * chi.g_mean().stderr_est);
        stat[p] = se > 0.0 ? std::abs(mean(drifts)) / se : 0.0;
    });
    return *std::max_element(stat.begin(), stat.end());
}

LipschitzCheck chi_lipschitz_check(const ModelSpec& model, const CorrectorEstimate& chi,
                                   const DecayFit& decay, const ObservableSpec& obs,
                                   const std::vector<std::pair<StateVector, StateVector>>& pairs) {
    LipschitzCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    const double k = obs.G() * decay.C_hat / (1.0 - decay.q_hat);
    for (const auto& [x, y] : pairs) {
        const double bound = k * (1.0 + dist(x, model.base_point) + dist(y, model.base_point)) +
                             3.0 * 2.0 * chi.max_node_stderr();
        const double margin = bound - std::abs(chi.evaluate(x) - chi.evaluate(y));
        out.worst_margin = std::min(out.worst_margin, margin);
        if (margin < 0.0) out.pass = false;
    }
    return out;
}

}  // namespace ifslab
