// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Every run is fully seeded, so a passing binary passes
// identically on re-run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ifslab/audit.hpp"
#include "ifslab/corrector.hpp"
#include "ifslab/coupling.hpp"
#include "ifslab/lil.hpp"
#include "ifslab/manifest.hpp"
#include "ifslab/model.hpp"
#include "ifslab/oracle.hpp"
#include "ifslab/parallel.hpp"
#include "ifslab/runner.hpp"
#include "ifslab/simulator.hpp"
#include "ifslab/stats.hpp"

using namespace ifslab;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 20260826;
constexpr int kThreads = 0;  // auto

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

// Shared fixtures are built lazily; the build cost lands in the first
// criterion that touches them (budgets below account for that).
struct ChainFixture {
    ModelSpec model;
    ObservableSpec obs;
    AssumptionConstants constants;
    DecayFit decay;
    std::vector<StateVector> pool;
    CorrectorEstimate chi;
    SigmaEstimate sigma_stat;
};

ChainFixture& oracle_fixture() {
    static ChainFixture f = [] {
        ChainFixture g;
        DiscreteKernel kernel = kernel_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
        Eigen::VectorXd gv(2);
        gv << 1.0, -2.0;
        g.model = embed_kernel_as_model(kernel);
        g.obs = embed_observable(kernel, gv);
        g.constants = audit(g.model).constants;
        g.decay = fit_decay(g.model, g.constants, g.obs,
                            {{g.model.discrete_states->at(0), g.model.discrete_states->at(1)}},
                            40, 512, {kSeed, 0x01000000}, kThreads);
        g.pool = stationary_samples(g.model, 60, 65536, 1, {kSeed, 0x02000000}, kThreads);
        // tight chi nodes + a long time-averaged g mean: partial sums pick
        // up a linear drift n * (mean error), which the LIL-scale run
        // (criterion 10, n = 2^20) can only absorb if the error is ~5e-4
        g.chi = CorrectorEstimate::build(g.model, g.constants, g.obs, g.decay, g.pool, 0.01,
                                         {kSeed, 0x03000000}, kThreads, 129, 40'000'000);
        g.sigma_stat = sigma2_stationary(g.model, g.chi, g.pool, {kSeed, 0x04000000}, kThreads);
        return g;
    }();
    return f;
}

ChainFixture& exp_fixture() {
    static ChainFixture f = [] {
        ChainFixture g;
        std::tie(g.model, g.obs) = builtin_model("exp-contraction");
        g.constants = audit(g.model).constants;
        const StateVector lo = g.model.window_lo, hi = g.model.window_hi;
        g.decay = fit_decay(g.model, g.constants, g.obs,
                            {{lo, hi}, {g.model.base_point, lo}, {g.model.base_point, hi}}, 40,
                            256, {kSeed, 0x10000000}, kThreads);
        g.pool = stationary_samples(g.model, default_burn_in(g.decay.q_hat), 65536, 1,
                                    {kSeed, 0x11000000}, kThreads);
        g.chi = CorrectorEstimate::build(g.model, g.constants, g.obs, g.decay, g.pool, 0.02,
                                         {kSeed, 0x12000000}, kThreads, 129, 20'000'000);
        g.sigma_stat = sigma2_stationary(g.model, g.chi, g.pool, {kSeed, 0x13000000}, kThreads);
        return g;
    }();
    return f;
}

std::vector<StateVector> window_points(const ModelSpec& model, int count) {
    std::vector<StateVector> pts;
    for (int i = 0; i < count; ++i) {
        const double u = (i + 0.5) / count;
        StateVector x(model.dimension);
        for (int d = 0; d < model.dimension; ++d)
            x[static_cast<std::size_t>(d)] =
                model.window_lo[static_cast<std::size_t>(d)] +
                u * (model.window_hi[static_cast<std::size_t>(d)] -
                     model.window_lo[static_cast<std::size_t>(d)]);
        pts.push_back(x);
    }
    return pts;
}

bool criterion(int id, double budget_s, const char* title,
               const std::function<bool(std::string&)>& body) {
    const auto t0 = clk::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const double secs = std::chrono::duration<double>(clk::now() - t0).count();
    if (secs > budget_s) {
        ok = false;
        detail += fmt(" [over budget: %.1f s]", secs);
    }
    std::printf("[%2d] %s  %s  (%.1f s / budget %.0f s)%s%s\n", id, ok ? "PASS" : "FAIL", title,
                secs, budget_s, detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    return ok;
}

}  // namespace

int main() {
    bool all = true;

    all &= criterion(1, 1.0, "audit closed forms a_1, a_2, a_2.5 within 1e-6", [](std::string& d) {
        auto [model, obs] = builtin_model("exp-contraction");
        const auto grid = audit_grid(model);
        const double e1 = std::abs(estimate_a_j(model, 1.0, grid).first - (1.0 - std::exp(-1.0)));
        const double e2 =
            std::abs(estimate_a_j(model, 2.0, grid).first - (1.0 - std::exp(-2.0)) / 2.0);
        const double e3 =
            std::abs(estimate_a_j(model, 2.5, grid).first - (1.0 - std::exp(-2.5)) / 2.5);
        d = fmt("errors %.2e %.2e %.2e", e1, e2, e3);
        return e1 < 1e-6 && e2 < 1e-6 && e3 < 1e-6;
    });

    all &= criterion(2, 1.0, "linear-algebra oracle: pi, chi, sigma^2, Green-Kubo to 1e-10",
                     [](std::string& d) {
        const DiscreteKernel k = kernel_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
        Eigen::VectorXd g(2);
        g << 1.0, -2.0;
        const Eigen::VectorXd pi = exact_stationary(k);
        const Eigen::VectorXd chi = exact_chi(k, g);
        const double s2 = exact_sigma2(k, g, chi);
        const double gk = exact_green_kubo(k, g, 400);
        const double err = std::max({std::abs(pi(0) - 2.0 / 3.0), std::abs(pi(1) - 1.0 / 3.0),
                                     std::abs(chi(0) - 10.0 / 3.0), std::abs(chi(1) + 20.0 / 3.0),
                                     std::abs(s2 - 34.0 / 3.0), std::abs(gk - s2)});
        d = fmt("max error %.2e", err);
        return err < 1e-10;
    });

    all &= criterion(3, 120.0, "three sigma^2 estimators bracket 34/3 with CI half-width < 2%",
                     [](std::string& d) {
        ChainFixture& f = oracle_fixture();
        const double target = 34.0 / 3.0;
        const SigmaEstimate e1 = f.sigma_stat;
        const SigmaEstimate e2 = sigma2_sn_over_n(f.model, f.chi, 100000, 64, f.pool,
                                                  {kSeed, 0x05000000}, kThreads);
        const SigmaEstimate e3 = sigma2_green_kubo(f.model, f.chi, 100000, 64, 0, f.decay,
                                                   f.pool, {kSeed, 0x06000000}, kThreads);
        bool ok = true;
        d = "";
        for (const SigmaEstimate* e : {&e1, &e2, &e3}) {
            const bool hit = e->ci95.contains(target);
            const bool tight = e->ci95.half_width() < 0.02 * target;
            ok = ok && hit && tight;
            d += e->method + fmt(" %.3f+-%.3f ", e->value, e->ci95.half_width());
        }
        return ok;
    });

    all &= criterion(4, 180.0,
                     "martingale drift stat <= 3 at 20 points (both chains); control > 3",
                     [](std::string& d) {
        ChainFixture& fe = exp_fixture();
        ChainFixture& fo = oracle_fixture();
        const auto pe = window_points(fe.model, 20);
        const auto po = window_points(fo.model, 20);
        const double se = martingale_drift_test(fe.model, fe.chi, pe, 10000,
                                                {kSeed, 0x07000000}, kThreads);
        const double so = martingale_drift_test(fo.model, fo.chi, po, 10000,
                                                {kSeed, 0x07100000}, kThreads);
        auto bias = [](const StateVector& x) { return 0.8 * x[0]; };
        const double ne = martingale_drift_test(fe.model, fe.chi, pe, 10000,
                                                {kSeed, 0x07200000}, kThreads, bias);
        const double no = martingale_drift_test(fo.model, fo.chi, po, 10000,
                                                {kSeed, 0x07300000}, kThreads, bias);
        d = fmt("stats %.2f %.2f, controls %.0f", se, so, std::min(ne, no));
        return se <= 3.0 && so <= 3.0 && ne > 3.0 && no > 3.0;
    });

    all &= criterion(5, 60.0, "second-moment curve from delta_8 stays under analytic bound",
                     [](std::string& d) {
        ChainFixture& f = exp_fixture();
        const std::vector<StateVector> init(8192, StateVector{8.0});
        const auto curve =
            moment_curve(f.model, init, 2.0, 100, f.constants, {kSeed, 0x08000000}, kThreads);
        double worst = -1e300;
        for (const auto& pt : curve)
            worst = std::max(worst, pt.estimate - (pt.bound + 3.0 * pt.stderr_est));
        d = fmt("worst excess %.3f (<= 0 required)", worst);
        return worst <= 0.0;
    });

    all &= criterion(6, 120.0, "coupled marginals match plain chain (KS 1%); decay fits clean",
                     [](std::string& d) {
        auto [tm, tobs] = builtin_model("tilted-density");
        const AssumptionConstants tc = audit(tm).constants;
        const StateVector x0{-1.5}, y0{1.5};
        const std::size_t R = 100000;
        const int steps = 3;
        std::vector<double> cx(R), cy(R), px(R), py(R);
        parallel_for(R, kThreads, [&](std::size_t i) {
            const auto ct = coupled_trajectory(tm, tc, x0, y0, steps,
                                               {kSeed, 0x09000000 + i});
            cx[i] = ct.states.back().x[0];
            cy[i] = ct.states.back().y[0];
            px[i] = simulate(tm, x0, steps, {kSeed, 0x09200000 + i}).states.back()[0];
            py[i] = simulate(tm, y0, steps, {kSeed, 0x09400000 + i}).states.back()[0];
        });
        const double p_x = ks_two_sample(cx, px).second;
        const double p_y = ks_two_sample(cy, py).second;

        bool fits_ok = true;
        double q_exp = 1.0;
        std::string fit_note;
        std::uint64_t sid = 0x09600000;
        for (const std::string& name : builtin_model_names()) {
            if (name == "expanding-diagnostic") continue;  // deliberate audit-failure case
            auto [m, o] = builtin_model(name);
            const AssumptionConstants c = audit(m).constants;
            const StateVector lo = m.window_lo, hi = m.window_hi;
            const DecayFit fit =
                fit_decay(m, c, o, {{lo, hi}, {m.base_point, lo}, {m.base_point, hi}}, 40, 256,
                          {kSeed, sid}, kThreads);
            sid += 0x100000;
            fits_ok = fits_ok && fit.q_hat < 1.0 && fit.r_squared > 0.95;
            fit_note += fmt(" q=%.3f r2=%.3f", fit.q_hat, fit.r_squared);
            if (name == "exp-contraction") q_exp = fit.q_hat;
        }
        const bool q_bound = q_exp <= 1.0 - std::exp(-1.0) + 0.05;
        d = fmt("KS p %.3f %.3f;", p_x, p_y) + fit_note;
        return p_x > 0.01 && p_y > 0.01 && fits_ok && q_bound;
    });

    all &= criterion(7, 180.0, "quadratic variation / sigma^2 in [0.95, 1.05] at k = 1e5",
                     [](std::string& d) {
        ChainFixture& f = oracle_fixture();
        const auto curve = quadratic_variation_curve(f.model, f.chi, 100000, 32, f.pool,
                                                     {kSeed, 0x0A000000}, kThreads);
        const auto& last = curve.back();
        const double ratio = last.median / f.sigma_stat.value;
        d = fmt("k=%g ratio %.4f", static_cast<double>(last.k), ratio);
        return last.k == 100000 && ratio >= 0.95 && ratio <= 1.05;
    });

    all &= criterion(8, 180.0, "moment-condition partial sums have Cauchy tails at n = 1e5",
                     [](std::string& d) {
        ChainFixture& f = oracle_fixture();
        const HsCurves hs = heyde_scott_sums(f.model, f.chi, 34.0 / 3.0, 1.0, 1.0, 100000, 16,
                                             f.pool, {kSeed, 0x0B000000}, kThreads);
        const double r1 = hs.th1_last_quarter / hs.th1_total;
        const double r2 = hs.th2_last_quarter / hs.th2_total;
        d = fmt("last-quarter fractions %.2e %.2e", r1, r2);
        return hs.th1_total > 0.0 && hs.th2_total > 0.0 && r1 < 0.01 && r2 < 0.01;
    });

    all &= criterion(9, 180.0, "normalized partial sums pass KS vs N(0,1) on both chains",
                     [](std::string& d) {
        ChainFixture& fe = exp_fixture();
        ChainFixture& fo = oracle_fixture();
        const double pe = clt_ks_pvalue(fe.model, fe.chi, std::sqrt(fe.sigma_stat.value), 10000,
                                        1000, fe.pool, {kSeed, 0x0C000000}, kThreads);
        const double po = clt_ks_pvalue(fo.model, fo.chi, std::sqrt(fo.sigma_stat.value), 10000,
                                        1000, fo.pool, {kSeed, 0x0D000000}, kThreads);
        d = fmt("p-values %.3f %.3f", pe, po);
        return pe > 0.01 && po > 0.01;
    });

    all &= criterion(10, 600.0,
                     "LIL band [0.55, 1.45] for >= 6/8 seeds at n = 2^20; Strassen median < 0.5",
                     [](std::string& d) {
        ChainFixture& f = oracle_fixture();
        const LilReport rep = lil_report(f.model, f.chi, f.sigma_stat, 1L << 20, 8,
                                         {kSeed, 0x0E000000}, kThreads, 8);
        int in_band = 0;
        std::vector<double> strassen;
        d = "rmax";
        for (const auto& s : rep.seeds) {
            if (s.final_running_max >= 0.55 && s.final_running_max <= 1.45) ++in_band;
            strassen.push_back(s.final_strassen);
            d += fmt(" %.2f", s.final_running_max);
        }
        std::sort(strassen.begin(), strassen.end());
        const double med = 0.5 * (strassen[3] + strassen[4]);
        d += fmt("; in-band %.0f/8, strassen median %.3f", static_cast<double>(in_band), med);
        return !rep.degenerate && in_band >= 6 && med < 0.5;
    });

    all &= criterion(11, 600.0, "full pipeline byte-identical across reruns and thread counts",
                     [](std::string& d) {
        const fs::path base = fs::temp_directory_path() / "ifslab-acceptance";
        fs::remove_all(base);
        ExperimentConfig cfg;
        cfg.command = "full";
        cfg.model = "exp-contraction";
        cfg.n = 4096;
        cfg.replicas = 8;
        cfg.seed_count = 2;
        cfg.master_seed = kSeed;
        cfg.chi_tol = 0.05;
        cfg.threads = 1;
        cfg.out_dir = (base / "a").string();
        if (run(cfg) != 0) {
            d = "first run failed";
            return false;
        }
        cfg.threads = 4;
        cfg.out_dir = (base / "b").string();
        if (run(cfg) != 0) {
            d = "second run failed";
            return false;
        }
        std::set<std::string> names_a, names_b;
        for (const auto& e : fs::directory_iterator(base / "a"))
            names_a.insert(e.path().filename().string());
        for (const auto& e : fs::directory_iterator(base / "b"))
            names_b.insert(e.path().filename().string());
        if (names_a != names_b || names_a.empty()) {
            d = "output file sets differ";
            return false;
        }
        for (const std::string& name : names_a) {
            if (read_text_file((base / "a" / name).string()) !=
                read_text_file((base / "b" / name).string())) {
                d = name + " differs";
                return false;
            }
        }
        d = fmt("%g files identical", static_cast<double>(names_a.size()));
        return true;
    });

    std::printf("%s\n", all ? "ACCEPTANCE: all 11 criteria passed"
                            : "ACCEPTANCE: at least one criterion failed");
    return all ? 0 : 1;
}
