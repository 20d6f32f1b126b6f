#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ifslab/audit.hpp"
#include "ifslab/simulator.hpp"
#include "ifslab/stats.hpp"

using namespace ifslab;

TEST_CASE("time sampler inverts a uniform density exactly") {
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    TimeSampler sampler(model);
    for (double u : {0.0, 0.1, 0.5, 0.9, 0.999})
        CHECK(sampler.sample(model.base_point, u) == doctest::Approx(u).epsilon(1e-9));
}

TEST_CASE("sampled times match the tilted density by KS") {
    const auto [model, obs] = builtin_model("tilted-density");
    (void)obs;
    TimeSampler sampler(model);
    const StateVector x{1.0};
    RandomStream rng({11, 0});
    std::vector<double> ts(20000);
    for (auto& t : ts) t = sampler.sample(x, rng.uniform());
    // CDF by quadrature of the same density the sampler inverts
    const auto cdf = [&](double t) {
        const int k = 2000;
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += evaluate_p(model, x, (i + 0.5) * t / k);
        return s * t / k;
    };
    const auto [stat, p] = ks_test(ts, cdf);
    INFO("ks stat " << stat);
    CHECK(p > 0.01);
}

TEST_CASE("unnormalized density makes the sampler throw") {
    auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    model.density_p = [](const StateVector&, double) { return 0.5; };
    CHECK_THROWS(TimeSampler{model});
}

TEST_CASE("trajectories are bit-identical for equal streams") {
    const auto [model, obs] = builtin_model("cell-cycle-like");
    (void)obs;
    const Trajectory a = simulate(model, model.base_point, 500, {99, 3});
    const Trajectory b = simulate(model, model.base_point, 500, {99, 3});
    CHECK(a.to_csv() == b.to_csv());
    const Trajectory c = simulate(model, model.base_point, 500, {99, 4});
    CHECK(a.to_csv() != c.to_csv());
}

TEST_CASE("stationary sampling is thread-count invariant") {
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    const auto s1 = stationary_samples(model, 50, 64, 1, {5, 0}, 1);
    const auto s4 = stationary_samples(model, 50, 64, 1, {5, 0}, 4);
    REQUIRE(s1.size() == s4.size());
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i][0] == s4[i][0]);
}

TEST_CASE("trajectory stays inside the invariant ball") {
    // |x_{n+1}| <= e^{-t}|x_n| + eps, so from |x_0| <= 1 the chain never
    // leaves |x| <= 1.
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    const Trajectory traj = simulate(model, {1.0}, 5000, {17, 0});
    for (const auto& x : traj.states) CHECK(std::abs(x[0]) <= 1.0 + 1e-12);
}

TEST_CASE("moment curve respects the analytic bound") {
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    const AuditReport report = audit(model);
    const auto curve = moment_curve(model, {StateVector{8.0}}, 2.0, 60, report.constants,
                                    {23, 0}, 2);
    for (const auto& pt : curve) {
        INFO("n = " << pt.n);
        CHECK(pt.estimate <= pt.bound + 3.0 * pt.stderr_est);
    }
    // the bound must actually bind early on: at n=0 it equals the moment
    CHECK(curve.front().estimate == doctest::Approx(64.0));
}

TEST_CASE("csv schema and formatting") {
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    const Trajectory traj = simulate(model, {0.5}, 3, {1, 0});
    const std::string csv = traj.to_csv();
    CHECK(csv.rfind("n,t,x_0", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 states
}

TEST_CASE("default burn-in from decay rate") {
    CHECK(default_burn_in(0.5) == 20);   // ceil(log 1e-6 / log 0.5)
    CHECK(default_burn_in(1.5) == 400);  // invalid rate -> fallback
}
