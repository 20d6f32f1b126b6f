#include "ifslab/lil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ifslab/parallel.hpp"
#include "ifslab/simulator.hpp"
#include "json.hpp"

namespace ifslab {

namespace {

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<long> dyadic_checkpoints(long n, long first = 1) {
    std::vector<long> ks;
    for (long k = first; k <= n; k *= 2) ks.push_back(k);
    if (ks.empty() || ks.back() != n) ks.push_back(n);
    return ks;
}

}  // namespace

SigmaEstimate sigma2_stationary(const ModelSpec& model, const CorrectorEstimate& chi,
                                const std::vector<StateVector>& stationary, SeededStream stream,
                                int threads) {
    const std::size_t n = stationary.size();
    std::vector<double> z2(n);
    TimeSampler sampler(model);
    parallel_for(n, threads, [&](std::size_t i) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + i});
        const StateVector& x0 = stationary[i];
        const StateVector x1 = step(model, sampler, x0, rng).x;
        const double z = chi.evaluate(x1) - chi.evaluate(x0) + chi.g_centered(x0);
        z2[i] = z * z;
    });
    SigmaEstimate est;
    est.method = "stationary-Z";
    est.value = mean(z2);
    RandomStream boot(SeededStream{stream.master_seed, stream.stream_id + 0xb001ULL});
    est.ci95 = bootstrap_ci_mean(z2, boot);
    est.n_used = static_cast<long>(n);
    est.replicas = static_cast<int>(n);
    return est;
}

SigmaEstimate sigma2_sn_over_n(const ModelSpec& model, const CorrectorEstimate& chi, long n,
                               int replicas, const std::vector<StateVector>& stationary,
                               SeededStream stream, int threads, int segment_length) {
    const long L = std::min<long>(segment_length, n);
    const long segments = n / L;
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(replicas));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r % stationary.size()];
        double prev_chi = chi.evaluate(x);
        auto& out = samples[r];
        out.reserve(static_cast<std::size_t>(segments));
        for (long s = 0; s < segments; ++s) {
            double m = 0.0;
            for (long k = 0; k < L; ++k) {
                const double g0 = chi.g_centered(x);
                x = step(model, sampler, x, rng).x;
                const double cur_chi = chi.evaluate(x);
                m += cur_chi - prev_chi + g0;
                prev_chi = cur_chi;
            }
            out.push_back(m * m / static_cast<double>(L));
        }
    });
    std::vector<double> all;
    for (const auto& v : samples) all.insert(all.end(), v.begin(), v.end());
    SigmaEstimate est;
    est.method = "sn-over-n";
    est.value = mean(all);
    const double se = stderr_of_mean(all);
    est.ci95 = {est.value - 1.96 * se, est.value + 1.96 * se};
    est.n_used = n;
    est.replicas = replicas;
    return est;
}

SigmaEstimate sigma2_green_kubo(const ModelSpec& model, const CorrectorEstimate& chi, long n,
                                int replicas, int lag_max, const DecayFit& decay,
                                const std::vector<StateVector>& stationary, SeededStream stream,
                                int threads) {
    if (lag_max <= 0) {
        lag_max = 20;
        if (decay.q_hat > 0.0 && decay.q_hat < 1.0)
            lag_max = static_cast<int>(std::ceil(std::log(1e-4) / std::log(decay.q_hat)));
    }
    std::vector<double> per_replica(static_cast<std::size_t>(replicas));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r % stationary.size()];
        std::vector<double> g(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            g[static_cast<std::size_t>(i)] = chi.g_centered(x);
            x = step(model, sampler, x, rng).x;
        }
        double acc = 0.0;
        for (double v : g) acc += v * v;
        acc /= static_cast<double>(n);
        for (int lag = 1; lag <= lag_max; ++lag) {
            double c = 0.0;
            for (long i = 0; i + lag < n; ++i)
                c += g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i + lag)];
            acc += 2.0 * c / static_cast<double>(n - lag);
        }
        per_replica[r] = acc;
    });
    SigmaEstimate est;
    est.method = "green-kubo";
    est.value = mean(per_replica);
    const double se = stderr_of_mean(per_replica);
    est.ci95 = {est.value - 1.96 * se, est.value + 1.96 * se};
    est.n_used = n;
    est.replicas = replicas;
    return est;
}

std::vector<QvarPoint> quadratic_variation_curve(const ModelSpec& model,
                                                 const CorrectorEstimate& chi, long n,
                                                 int replicas,
                                                 const std::vector<StateVector>& stationary,
                                                 SeededStream stream, int threads) {
    const std::vector<long> ks = dyadic_checkpoints(n);
    std::vector<std::vector<double>> at(ks.size(),
                                        std::vector<double>(static_cast<std::size_t>(replicas)));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r % stationary.size()];
        double prev_chi = chi.evaluate(x);
        double sum_z2 = 0.0;
        std::size_t next = 0;
        for (long k = 1; k <= n; ++k) {
            const double g0 = chi.g_centered(x);
            x = step(model, sampler, x, rng).x;
            const double cur_chi = chi.evaluate(x);
            const double z = cur_chi - prev_chi + g0;
            prev_chi = cur_chi;
            sum_z2 += z * z;
            while (next < ks.size() && ks[next] == k) {
                at[next][r] = sum_z2 / static_cast<double>(k);
                ++next;
            }
        }
    });
    std::vector<QvarPoint> curve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        curve[i] = {ks[i], percentile(at[i], 0.5), percentile(at[i], 0.25),
                    percentile(at[i], 0.75)};
    }
    return curve;
}

HsCurves heyde_scott_sums(const ModelSpec& model, const CorrectorEstimate& chi, double sigma2,
                          double gamma, double vartheta, long n, int replicas,
                          const std::vector<StateVector>& stationary, SeededStream stream,
                          int threads, bool empirical_sn) {
    // Z[r][m-1] for m = 1..n
    std::vector<std::vector<double>> Z(static_cast<std::size_t>(replicas),
                                       std::vector<double>(static_cast<std::size_t>(n)));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r % stationary.size()];
        double prev_chi = chi.evaluate(x);
        for (long m = 0; m < n; ++m) {
            const double g0 = chi.g_centered(x);
            x = step(model, sampler, x, rng).x;
            const double cur_chi = chi.evaluate(x);
            Z[r][static_cast<std::size_t>(m)] = cur_chi - prev_chi + g0;
            prev_chi = cur_chi;
        }
    });

    std::vector<double> sn2(static_cast<std::size_t>(n));
    if (empirical_sn) {
        std::vector<double> m_acc(static_cast<std::size_t>(replicas), 0.0);
        for (long m = 0; m < n; ++m) {
            double s = 0.0;
            for (int r = 0; r < replicas; ++r) {
                m_acc[static_cast<std::size_t>(r)] += Z[static_cast<std::size_t>(r)]
                                                       [static_cast<std::size_t>(m)];
                s += m_acc[static_cast<std::size_t>(r)] * m_acc[static_cast<std::size_t>(r)];
            }
            sn2[static_cast<std::size_t>(m)] = s / replicas;
        }
    } else {
        for (long m = 0; m < n; ++m)
            sn2[static_cast<std::size_t>(m)] = static_cast<double>(m + 1) * sigma2;
    }

    HsCurves out;
    const std::vector<long> ks = dyadic_checkpoints(n);
    std::size_t next = 0;
    double sum1 = 0.0, sum2 = 0.0;
    double sum1_q3 = 0.0, sum2_q3 = 0.0;
    const long q3 = 3 * n / 4;
    for (long m = 1; m <= n; ++m) {
        const double s2 = sn2[static_cast<std::size_t>(m - 1)];
        const double s = std::sqrt(s2);
        double t1 = 0.0, t2 = 0.0;
        for (int r = 0; r < replicas; ++r) {
            const double z = Z[static_cast<std::size_t>(r)][static_cast<std::size_t>(m - 1)];
            const double az = std::abs(z);
            if (az < gamma * s) t1 += z * z * z * z;
            if (az >= vartheta * s) t2 += az;
        }
        if (s2 > 0.0) {
            sum1 += t1 / replicas / (s2 * s2);
            sum2 += t2 / replicas / s;
        }
        if (m == q3) {
            sum1_q3 = sum1;
            sum2_q3 = sum2;
        }
        while (next < ks.size() && ks[next] == m) {
            out.th1.emplace_back(m, sum1);
            out.th2.emplace_back(m, sum2);
            ++next;
        }
    }
    out.th1_total = sum1;
    out.th2_total = sum2;
    out.th1_last_quarter = sum1 - sum1_q3;
    out.th2_last_quarter = sum2 - sum2_q3;
    return out;
}

PiecewisePath build_theta_path(const Trajectory& traj, const CorrectorEstimate& chi, double sigma,
                               long n) {
    PiecewisePath path;
    path.kind = PiecewisePath::Kind::Theta;
    const double loglog = n > 1 ? std::log(std::log(static_cast<double>(n))) : -1.0;
    if (loglog <= 0.0) {  // theta_n = 0 for n <= e
        path.node_values.assign(2, 0.0);
        return path;
    }
    if (static_cast<long>(traj.states.size()) < n + 1)
        throw std::invalid_argument("build_theta_path: trajectory shorter than n + 1");
    path.normalization = sigma * std::sqrt(2.0 * static_cast<double>(n) * loglog);
    path.node_values.resize(static_cast<std::size_t>(n) + 1);
    path.node_values[0] = 0.0;
    double s = 0.0;
    for (long k = 1; k <= n; ++k) {
        s += chi.g_centered(traj.states[static_cast<std::size_t>(k)]);
        path.node_values[static_cast<std::size_t>(k)] = s / path.normalization;
    }
    return path;
}

PiecewisePath build_eta_path(const MartingaleDecomposition& decomp,
                             const std::vector<double>& s_squared) {
    const std::size_t n = decomp.M.size() - 1;
    if (s_squared.size() < n + 1)
        throw std::invalid_argument("build_eta_path: s_squared too short");
    for (std::size_t k = 2; k <= n; ++k)
        if (!(s_squared[k] > s_squared[k - 1]))
            throw std::invalid_argument("build_eta_path: s_squared not strictly increasing");

    PiecewisePath path;
    path.kind = PiecewisePath::Kind::Eta;
    const double sn2 = s_squared[n];
    if (sn2 <= std::exp(1.0)) {  // n <= F(e)
        path.node_values.assign(2, 0.0);
        return path;
    }
    path.normalization = std::sqrt(2.0 * sn2 * std::log(std::log(sn2)));
    path.node_values.resize(n + 1);
    path.abscissae.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        path.abscissae[k] = s_squared[k] / sn2;
        path.node_values[k] = decomp.M[k] / path.normalization;
    }
    return path;
}

double strassen_distance(const PiecewisePath& path) {
    const std::size_t n = path.node_values.size() - 1;
    double energy = 0.0, sup = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        sup = std::max(sup, std::abs(path.node_values[k]));
        if (k == 0) continue;
        const double dt = path.abscissae.empty()
                              ? 1.0 / static_cast<double>(n)
                              : path.abscissae[k] - path.abscissae[k - 1];
        const double dv = path.node_values[k] - path.node_values[k - 1];
        if (dt > 0.0) energy += dv * dv / dt;
    }
    const double e = std::max(1.0, std::sqrt(energy));
    return (1.0 - 1.0 / e) * sup;
}

std::string PiecewisePath::to_csv() const {
    std::ostringstream out;
    out << "t,value\n";
    char buf[80];
    const std::size_t n = node_values.size() - 1;
    for (std::size_t k = 0; k < node_values.size(); ++k) {
        const double t = abscissae.empty() ? static_cast<double>(k) / static_cast<double>(n)
                                           : abscissae[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, node_values[k]);
        out << buf;
    }
    return out.str();
}

double clt_ks_pvalue(const ModelSpec& model, const CorrectorEstimate& chi, double sigma, long n,
                     int replicas, const std::vector<StateVector>& stationary,
                     SeededStream stream, int threads) {
    if (!(sigma > 0.0)) throw std::invalid_argument("clt_ks_pvalue: sigma must be positive");
    std::vector<double> s_star(static_cast<std::size_t>(replicas));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
        RandomStream rng(SeededStream{stream.master_seed, stream.stream_id + r});
        StateVector x = stationary[r % stationary.size()];
        double s = 0.0;
        for (long i = 0; i < n; ++i) {
            s += chi.g_centered(x);
            x = step(model, sampler, x, rng).x;
        }
        s_star[r] = s / (sigma * std::sqrt(static_cast<double>(n)));
    });
    return ks_test(std::move(s_star), [](double x) { return normal_cdf(x); }).second;
}

LilReport lil_report(const ModelSpec& model, const CorrectorEstimate& chi,
                     const SigmaEstimate& sigma, long n_max, int seed_count, SeededStream stream,
                     int threads, int first_dyadic_exponent) {
    LilReport rep;
    rep.sigma = sigma;
    rep.master_seed = stream.master_seed;
    if (!(sigma.value > 0.0) || sigma.ci95.contains(0.0)) {
        rep.degenerate = true;  // refuse LIL normalization
        return rep;
    }
    const double sg = std::sqrt(sigma.value);
    const long first_dyadic = 1L << first_dyadic_exponent;
    const long n_star = std::max<long>(1, n_max / 16);

    rep.seeds.resize(static_cast<std::size_t>(seed_count));
    TimeSampler sampler(model);
    parallel_for(static_cast<std::size_t>(seed_count), threads, [&](std::size_t s) {
        LilSeedTrace trace;
        trace.stream_id = stream.stream_id + s;
        RandomStream rng(SeededStream{stream.master_seed, trace.stream_id});
        StateVector x = model.base_point;
        for (int b = 0; b < 512; ++b) x = step(model, sampler, x, rng).x;  // burn-in

        double sum_g = 0.0, sum_g2 = 0.0, max_abs_sum = 0.0, running_max = 0.0;
        long next_dyadic = first_dyadic;
        for (long k = 1; k <= n_max; ++k) {
            x = step(model, sampler, x, rng).x;
            const double g = chi.g_centered(x);
            sum_g += g;
            sum_g2 += g * g;
            max_abs_sum = std::max(max_abs_sum, std::abs(sum_g));
            if (k == n_star) trace.s_star = sum_g / (sg * std::sqrt(static_cast<double>(k)));
            if (k == next_dyadic || k == n_max) {
                const double loglog = std::log(std::log(static_cast<double>(k)));
                if (loglog > 0.0) {
                    const double denom =
                        sg * std::sqrt(2.0 * static_cast<double>(k) * loglog);
                    running_max = std::max(running_max, std::abs(sum_g) / denom);
                    trace.theta1_running_max.emplace_back(k, running_max);
                    const double energy = sum_g2 / (2.0 * loglog * sigma.value);
                    const double sup = max_abs_sum / denom;
                    const double bound =
                        (1.0 - 1.0 / std::max(1.0, std::sqrt(energy))) * sup;
                    trace.strassen_dist.emplace_back(k, bound);
                }
                if (k == next_dyadic) next_dyadic *= 2;
            }
        }
        trace.final_running_max = running_max;
        trace.final_strassen = trace.strassen_dist.back().second;
        rep.seeds[s] = std::move(trace);
    });

    std::vector<double> stars;
    for (const auto& t : rep.seeds) stars.push_back(t.s_star);
    const double spread = *std::max_element(stars.begin(), stars.end()) -
                          *std::min_element(stars.begin(), stars.end());
    if (spread <= 0.0)
        rep.degenerate = true;
    else
        rep.clt_ks = ks_test(stars, [](double x) { return normal_cdf(x); }).second;
    return rep;
}

std::string LilReport::to_json() const {
    nlohmann::json j;
    j["sigma"] = {{"value", sigma.value},
                  {"method", sigma.method},
                  {"ci95", {sigma.ci95.lo, sigma.ci95.hi}},
                  {"n_used", sigma.n_used},
                  {"replicas", sigma.replicas}};
    j["degenerate"] = degenerate;
    j["clt_ks_pvalue"] = clt_ks;
    j["master_seed"] = master_seed;
    nlohmann::json seeds_json = nlohmann::json::array();
    for (const auto& t : seeds) {
        nlohmann::json s;
        s["stream_id"] = t.stream_id;
        s["final_running_max"] = t.final_running_max;
        s["final_strassen"] = t.final_strassen;
        s["s_star"] = t.s_star;
        nlohmann::json rm = nlohmann::json::array(), sd = nlohmann::json::array();
        for (const auto& [n, v] : t.theta1_running_max) rm.push_back({n, v});
        for (const auto& [n, v] : t.strassen_dist) sd.push_back({n, v});
        s["theta1_running_max"] = rm;
        s["strassen_dist"] = sd;
        seeds_json.push_back(std::move(s));
    }
    j["seeds"] = seeds_json;
    return j.dump(2);
}

}  // namespace ifslab
