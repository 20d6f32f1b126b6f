#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ifslab/audit.hpp"
#include "ifslab/corrector.hpp"
#include "ifslab/oracle.hpp"

using namespace ifslab;

namespace {

// x_{n+1} = t + h: next state ignores the current one, so Pg is constant
// and chi reduces to the centered g itself.
std::pair<ModelSpec, ObservableSpec> forgetting_model() {
    auto [model, obs] = builtin_model("affine-uniform");
    model.name = "forgetting";
    model.map_S = [](const StateVector&, double t) { return StateVector{t}; };
    model.lipschitz_lambda = [](const StateVector&, double) { return 0.0; };
    model.window_lo = {0.0};
    model.window_hi = {1.0};
    model.base_point = {0.5};
    return {model, obs};
}

struct OracleFixture {
    DiscreteKernel kernel = kernel_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
    ModelSpec model;
    ObservableSpec obs;
    AssumptionConstants constants;
    DecayFit decay;
    std::vector<StateVector> pool;

    OracleFixture() {
        Eigen::VectorXd g(2);
        g << 1.0, -2.0;
        model = embed_kernel_as_model(kernel);
        obs = embed_observable(kernel, g);
        constants = audit(model).constants;
        decay = fit_decay(model, constants, obs,
                          {{model.discrete_states->at(0), model.discrete_states->at(1)}}, 40,
                          512, {81, 0}, 2);
        pool = stationary_samples(model, 60, 1024, 1, {82, 0}, 2);
    }
};

}  // namespace

TEST_CASE("chi equals centered g on a one-step-forgetting chain") {
    const auto [model, obs] = forgetting_model();
    const AssumptionConstants constants = audit(model).constants;
    const auto pool = stationary_samples(model, 10, 512, 1, {83, 0}, 2);
    const DecayFit decay{0.5, 1.0, 1.0, 1, 10};  // synthetic: paths merge in one step
    const GMeanEstimate gm = estimate_g_mean(obs, pool);
    for (double xv : {0.1, 0.5, 0.9}) {
        const ChiPoint pt =
            estimate_chi(model, constants, obs, decay, pool, {xv}, 0.01, {84, 0});
        const double expected = evaluate_g(obs, {xv}) - gm.value;
        CHECK(std::abs(pt.value - expected) < 3.0 * (pt.stderr_est + gm.stderr_est) + 0.01);
    }
}

TEST_CASE("tabulated chi on the embedded kernel matches the linear-algebra oracle") {
    OracleFixture f;
    CHECK(f.decay.q_hat < 1.0);
    CHECK(f.decay.q_hat > 0.3);
    const CorrectorEstimate chi =
        CorrectorEstimate::build(f.model, f.constants, f.obs, f.decay, f.pool, 0.03, {85, 0},
                                 2, 129, 200000);
    const double cA = chi.evaluate(f.model.discrete_states->at(0));
    const double cB = chi.evaluate(f.model.discrete_states->at(1));
    // oracle chi = (10/3, -20/3); estimated chi is centered the same way up
    // to the estimated mean
    CHECK(std::abs(cA - 10.0 / 3.0) < 0.15);
    CHECK(std::abs(cB + 20.0 / 3.0) < 0.3);
    CHECK(chi.tail_bound() < 0.05);
    CHECK(chi.truncation_N() > 5);
}

TEST_CASE("martingale decomposition telescopes exactly") {
    OracleFixture f;
    const CorrectorEstimate chi =
        CorrectorEstimate::build(f.model, f.constants, f.obs, f.decay, f.pool, 0.05, {86, 0}, 2);
    const Trajectory traj = simulate(f.model, f.pool[0], 200, {87, 0});
    const MartingaleDecomposition d = martingale_decompose(traj, chi);
    REQUIRE(d.M.size() == traj.states.size());
    CHECK(d.M[0] == 0.0);
    CHECK(d.Z[0] == 0.0);
    double acc = 0.0, gsum = 0.0;
    for (std::size_t k = 1; k < d.M.size(); ++k) {
        acc += d.Z[k];
        CHECK(std::abs(d.M[k] - acc) < 1e-12);
        gsum += chi.g_centered(traj.states[k - 1]);
        const double direct = chi.evaluate(traj.states[k]) - chi.evaluate(traj.states[0]) + gsum;
        CHECK(std::abs(d.M[k] - direct) < 1e-10);
    }
    CHECK(d.to_csv().rfind("n,M,Z", 0) == 0);
}

TEST_CASE("drift test accepts the fitted chi and rejects a perturbed one") {
    OracleFixture f;
    const CorrectorEstimate chi =
        CorrectorEstimate::build(f.model, f.constants, f.obs, f.decay, f.pool, 0.02, {88, 0},
                                 2, 129, 200000);
    const std::vector<StateVector> points = {f.model.discrete_states->at(0),
                                             f.model.discrete_states->at(1)};
    const double stat = martingale_drift_test(f.model, chi, points, 20000, {89, 0}, 2);
    CHECK(stat <= 3.0);
    // bias well above the chi-hat node SE floor in the test denominator
    const double bad = martingale_drift_test(
        f.model, chi, points, 20000, {89, 0}, 2,
        [](const StateVector& x) { return 2.0 * x[0]; });
    CHECK(bad > 3.0);
}

TEST_CASE("chi satisfies the decay-implied Lipschitz bound") {
    // note: on the 2-state kernel the bound is exactly tight (|chi_A - chi_B|
    // = G C (1+rho)/(1-q) = 10), so noise makes the sign arbitrary there; use
    // a model where the geometric-series bound has slack.
    const auto [model, obs] = builtin_model("exp-contraction");
    const AuditReport report = audit(model);
    const DecayFit decay = fit_decay(model, report.constants, obs,
                                     {{{3.0}, {-3.0}}, {{1.0}, {0.0}}}, 30, 256, {90, 0}, 2);
    const auto pool = stationary_samples(model, 40, 512, 1, {94, 0}, 2);
    const CorrectorEstimate chi =
        CorrectorEstimate::build(model, report.constants, obs, decay, pool, 0.03, {95, 0}, 2);
    const LipschitzCheck lc = chi_lipschitz_check(
        model, chi, decay, obs, {{{-2.0}, {2.0}}, {{0.0}, {1.0}}, {{-0.5}, {0.5}}});
    CHECK(lc.pass);
    CHECK(lc.worst_margin > 0.0);
}

TEST_CASE("grid interpolation is exact at nodes and smooth between") {
    const auto [model, obs] = builtin_model("exp-contraction");
    const AuditReport report = audit(model);
    const DecayFit decay = fit_decay(model, report.constants, obs, {{{3.0}, {-3.0}}}, 30, 256,
                                     {91, 0}, 2);
    const auto pool = stationary_samples(model, 40, 512, 1, {92, 0}, 2);
    const CorrectorEstimate chi =
        CorrectorEstimate::build(model, report.constants, obs, decay, pool, 0.05, {93, 0}, 2, 33);
    // evaluate at and between nodes: finite, continuous at small offsets
    const double v0 = chi.evaluate({0.0});
    CHECK(std::isfinite(v0));
    CHECK(std::abs(chi.evaluate({0.001}) - v0) < 0.05);
}
