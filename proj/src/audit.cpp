#include "ifslab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ifslab/quadrature.hpp"
#include "json.hpp"

namespace ifslab {

std::vector<StateVector> audit_grid(const ModelSpec& model, int per_dim) {
    const int d = model.dimension;
    std::vector<StateVector> grid;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
        StateVector x(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            const double lo = model.window_lo[static_cast<std::size_t>(k)];
            const double hi = model.window_hi[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(k)] =
                lo + (hi - lo) * idx[static_cast<std::size_t>(k)] / (per_dim - 1.0);
        }
        grid.push_back(std::move(x));
        int k = 0;
        while (k < d && ++idx[static_cast<std::size_t>(k)] == per_dim) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == d) break;
    }
    return grid;
}

std::pair<double, double> estimate_a_j(const ModelSpec& model, double j,
                                       const std::vector<StateVector>& x_grid, int t_panels) {
    if (x_grid.empty()) throw std::invalid_argument("estimate_a_j: empty grid");
    double sup = 0.0, err = 0.0;
    for (const auto& x : x_grid) {
        auto integrand = [&](double t) {
            const double v =
                std::pow(model.lipschitz_lambda(x, t), j) * model.density_p(x, t);
            if (!std::isfinite(v)) throw ModelDefinitionError("non-finite a_j integrand");
            return v;
        };
        const auto [val, e] = integrate_with_error(integrand, 0.0, model.horizon, t_panels);
        if (val > sup) {
            sup = val;
            err = e;
        }
    }
    return {sup, err};
}

double check_normalization(const ModelSpec& model, const std::vector<StateVector>& x_grid,
                           int t_panels) {
    double worst = 0.0;
    for (const auto& x : x_grid) {
        const double mass = integrate([&](double t) { return model.density_p(x, t); }, 0.0,
                                      model.horizon, t_panels);
        worst = std::max(worst, std::abs(mass - 1.0));
        if (model.density_x_independent) break;
    }
    return worst;
}

double estimate_c(const ModelSpec& model, int t_nodes) {
    double sup = 0.0;
    for (int i = 0; i <= t_nodes; ++i) {
        const double t = model.horizon * i / t_nodes;
        sup = std::max(sup, dist(model.map_S(model.base_point, t), model.base_point));
    }
    return sup + model.epsilon_star;
}

std::pair<double, double> density_bounds(const ModelSpec& model,
                                         const std::vector<StateVector>& x_grid, int t_nodes) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& x : x_grid) {
        for (int i = 1; i <= t_nodes; ++i) {  // t=0 excluded from the infimum
            const double t = model.horizon * i / t_nodes;
            const double v = model.density_p(x, t);
            lo = std::min(lo, v);
            hi = std::max(hi, std::max(v, model.density_p(x, 0.0)));
        }
        if (model.density_x_independent) break;
    }
    return {lo, hi};
}

std::vector<std::pair<double, double>> dini_probe(const ModelSpec& model, int pair_count,
                                                  SeededStream stream) {
    RandomStream rng(stream);
    // Fixed anchors (x_j, dir_j), reused at every distance: the empirical
    // modulus max_j int |p(x_j,.) - p(x_j + r dir_j,.)| dt is then a single
    // function of r, which is what the monotone-regression check assumes.
    constexpr int kAnchors = 8;
    std::vector<StateVector> anchors, dirs;
    for (int j = 0; j < kAnchors; ++j) {
        StateVector x(static_cast<std::size_t>(model.dimension));
        StateVector dir(static_cast<std::size_t>(model.dimension));
        double n2 = 0.0;
        for (int i = 0; i < model.dimension; ++i) {
            const double lo = model.window_lo[static_cast<std::size_t>(i)];
            const double hi = model.window_hi[static_cast<std::size_t>(i)];
            // inner half of the window: x + r dir stays inside for r <= 1
            x[static_cast<std::size_t>(i)] = lo + (hi - lo) * (0.25 + 0.5 * rng.uniform());
            dir[static_cast<std::size_t>(i)] = rng.normal();
            n2 += dir[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < model.dimension; ++i)
            dir[static_cast<std::size_t>(i)] /= std::sqrt(n2);
        anchors.push_back(std::move(x));
        dirs.push_back(std::move(dir));
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(pair_count));
    for (int k = 0; k < pair_count; ++k) {
        const double r = std::pow(10.0, -4.0 + 4.0 * k / std::max(1, pair_count - 1));
        double modulus = 0.0;
        for (int j = 0; j < kAnchors; ++j) {
            StateVector y = anchors[static_cast<std::size_t>(j)];
            for (int i = 0; i < model.dimension; ++i) {
                const double lo = model.window_lo[static_cast<std::size_t>(i)];
                const double hi = model.window_hi[static_cast<std::size_t>(i)];
                y[static_cast<std::size_t>(i)] = std::clamp(
                    y[static_cast<std::size_t>(i)] +
                        r * dirs[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)],
                    lo, hi);
            }
            const StateVector& x = anchors[static_cast<std::size_t>(j)];
            if (dist(x, y) == 0.0) continue;
            modulus = std::max(
                modulus, adaptive_simpson(
                             [&](double t) {
                                 return std::abs(model.density_p(x, t) - model.density_p(y, t));
                             },
                             0.0, model.horizon, 1e-11));
        }
        out.emplace_back(r, modulus);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Pool-adjacent-violators isotonic fit; returns (rms residual, fitted value
// at the smallest distance).
std::pair<double, double> isotonic_fit(const std::vector<std::pair<double, double>>& samples) {
    const std::size_t n = samples.size();
    if (n == 0) return {0.0, 0.0};
    std::vector<double> level, weight;
    for (const auto& [d, m] : samples) {
        double lv = m, w = 1.0;
        while (!level.empty() && level.back() > lv) {
            lv = (lv * w + level.back() * weight.back()) / (w + weight.back());
            w += weight.back();
            level.pop_back();
            weight.pop_back();
        }
        level.push_back(lv);
        weight.push_back(w);
    }
    std::vector<double> fitted;
    fitted.reserve(n);
    for (std::size_t b = 0; b < level.size(); ++b)
        for (int k = 0; k < static_cast<int>(weight[b]); ++k) fitted.push_back(level[b]);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = samples[i].second - fitted[i];
        ss += r * r;
    }
    return {std::sqrt(ss / static_cast<double>(n)), fitted.front()};
}

}  // namespace

AuditReport audit(const ModelSpec& model) {
    AuditReport rep;
    const auto grid = audit_grid(model);

    rep.constants.normalization_defect = check_normalization(model, grid);
    rep.pass["I"] = rep.constants.normalization_defect < 1e-6;

    const auto [a1, e1] = estimate_a_j(model, 1.0, grid);
    const auto [a2, e2] = estimate_a_j(model, 2.0, grid);
    const auto [a2pd, e2pd] = estimate_a_j(model, 2.0 + model.delta, grid);
    rep.constants.a1 = a1;
    rep.constants.a2 = a2;
    rep.constants.a_2pd = a2pd;
    rep.a1_error = e1;
    rep.a2_error = e2;
    rep.a_2pd_error = e2pd;
    rep.pass["II"] = a2pd < 1.0;

    rep.constants.c = estimate_c(model);
    rep.pass["III"] = std::isfinite(rep.constants.c);

    rep.dini_samples = dini_probe(model, 128);
    const auto [rms, smallest] = isotonic_fit(rep.dini_samples);
    rep.pass["IV"] = rms < 1e-3 && smallest < 1e-3;

    const auto [m1, m2] = density_bounds(model, grid);
    rep.constants.M1 = m1;
    rep.constants.M2 = m2;
    rep.pass["V"] = m1 > 0.0;

    // (VI) sampled triples: the perturbed image must be a finite state and
    // the noise sample must respect its support.
    bool vi = true;
    RandomStream rng(SeededStream{20240131, 6});
    for (int k = 0; k < 256 && vi; ++k) {
        const auto& x = grid[static_cast<std::size_t>(rng.uniform() * grid.size())];
        const double t = model.horizon * rng.uniform();
        StateVector h = sample_noise(model.noise, model.dimension, rng);
        if (norm(h) > model.noise.epsilon + 1e-15) vi = false;
        StateVector y = model.map_S(x, t);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h[i];
        if (!all_finite(y)) vi = false;
    }
    rep.pass["VI"] = vi;

    std::ostringstream gs;
    gs << grid.size() << "-point grid on [";
    for (int i = 0; i < model.dimension; ++i)
        gs << (i ? " x [" : "") << model.window_lo[static_cast<std::size_t>(i)] << ","
           << model.window_hi[static_cast<std::size_t>(i)] << "]";
    gs << ", 64-panel composite Gauss-Legendre(8) in t";
    rep.grid_spec = gs.str();
    return rep;
}

std::string AuditReport::to_json() const {
    nlohmann::json j;
    j["constants"] = {{"a1", constants.a1},
                      {"a2", constants.a2},
                      {"a_2pd", constants.a_2pd},
                      {"c", constants.c},
                      {"M1", constants.M1},
                      {"M2", constants.M2},
                      {"normalization_defect", constants.normalization_defect}};
    j["quadrature_errors"] = {{"a1", a1_error}, {"a2", a2_error}, {"a_2pd", a_2pd_error}};
    nlohmann::json p;
    for (const auto& [k, v] : pass) p[k] = v;
    p["IV_note"] = "heuristic: modulus decay only, integral condition not certified";
    j["pass"] = p;
    j["grid_spec"] = grid_spec;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& [d, m] : dini_samples) ds.push_back({d, m});
    j["dini_samples"] = ds;
    return j.dump(2);
}

}  // namespace ifslab
