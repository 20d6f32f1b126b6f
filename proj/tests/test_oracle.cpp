#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ifslab/oracle.hpp"
#include "ifslab/simulator.hpp"
#include "ifslab/stats.hpp"

using namespace ifslab;

namespace {

DiscreteKernel two_state() { return kernel_from_matrix({{0.9, 0.1}, {0.2, 0.8}}); }

Eigen::VectorXd two_state_g() {
    Eigen::VectorXd g(2);
    g << 1.0, -2.0;
    return g;
}

}  // namespace

TEST_CASE("two-state closed forms to 1e-10") {
    const DiscreteKernel kernel = two_state();
    const Eigen::VectorXd pi = exact_stationary(kernel);
    CHECK(std::abs(pi[0] - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(pi[1] - 1.0 / 3.0) < 1e-12);

    const Eigen::VectorXd g = two_state_g();
    CHECK(std::abs(pi.dot(g)) < 1e-12);  // already centered
    const Eigen::VectorXd chi = exact_chi(kernel, g);
    CHECK(std::abs(chi[0] - 10.0 / 3.0) < 1e-10);
    CHECK(std::abs(chi[1] + 20.0 / 3.0) < 1e-10);

    CHECK(std::abs(exact_sigma2(kernel, g, chi) - 34.0 / 3.0) < 1e-10);
    CHECK(std::abs(exact_green_kubo(kernel, g, 200) - 34.0 / 3.0) < 1e-10);
}

TEST_CASE("chi from the solve equals the truncated geometric series") {
    const DiscreteKernel kernel = two_state();
    const Eigen::VectorXd g = two_state_g();
    const Eigen::VectorXd chi = exact_chi(kernel, g);
    Eigen::VectorXd series = Eigen::VectorXd::Zero(2), pg = g;
    for (int i = 0; i <= 60; ++i) {
        series += pg;
        pg = kernel.matrix * pg;
    }
    // tail sum_{i>60} 0.7^i |g|_inf = 0.7^61 * 2 / 0.3
    CHECK((chi - series).cwiseAbs().maxCoeff() < 5.0 * std::pow(0.7, 60));
}

TEST_CASE("identity kernel is reducible; doubly stochastic is uniform") {
    CHECK_THROWS(exact_stationary(kernel_from_matrix({{1.0, 0.0}, {0.0, 1.0}})));
    const Eigen::VectorXd pi =
        exact_stationary(kernel_from_matrix({{0.3, 0.7}, {0.7, 0.3}}));
    CHECK(std::abs(pi[0] - 0.5) < 1e-12);
}

TEST_CASE("uncentered g is rejected; zero g gives zero chi") {
    const DiscreteKernel kernel = two_state();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    CHECK_THROWS(exact_chi(kernel, ones));
    CHECK(exact_chi(kernel, Eigen::VectorXd::Zero(2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(exact_sigma2(kernel, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)) == 0.0);
}

TEST_CASE("row sums must be 1") {
    CHECK_THROWS(kernel_from_matrix({{0.9, 0.2}, {0.2, 0.8}}));
}

TEST_CASE("kernel loads from csv") {
    const DiscreteKernel kernel = kernel_from_csv("0.9,0.1\n0.2,0.8\n");
    CHECK(kernel.matrix(0, 0) == 0.9);
    CHECK(kernel.matrix(1, 1) == 0.8);
}

TEST_CASE("embedded model reproduces kernel rows and stationary mean") {
    const DiscreteKernel kernel = two_state();
    const ModelSpec model = embed_kernel_as_model(kernel);
    REQUIRE(model.discrete_states.has_value());

    // one-step marginal from state 0: stay frequency ~ 0.9
    TimeSampler sampler(model);
    RandomStream rng({71, 0});
    const StateVector s0 = (*model.discrete_states)[0];
    int stay = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (dist(step(model, sampler, s0, rng).x, s0) < 1e-9) ++stay;
    const double se = std::sqrt(0.9 * 0.1 / n);
    CHECK(std::abs(stay / static_cast<double>(n) - 0.9) < 3.0 * se);

    // long-run occupancy of state 0 ~ pi_0 = 2/3
    const Trajectory traj = simulate(model, s0, 200000, {72, 0});
    double occ = 0.0;
    for (const auto& x : traj.states)
        if (dist(x, s0) < 1e-9) occ += 1.0;
    occ /= static_cast<double>(traj.states.size());
    CHECK(std::abs(occ - 2.0 / 3.0) < 0.01);
}

TEST_CASE("deterministic row gives a constant trajectory") {
    const DiscreteKernel kernel = kernel_from_matrix({{1.0, 0.0}, {1.0, 0.0}});
    const ModelSpec model = embed_kernel_as_model(kernel);
    const Trajectory traj = simulate(model, (*model.discrete_states)[0], 50, {73, 0});
    for (const auto& x : traj.states) CHECK(x[0] == traj.states[0][0]);
}

TEST_CASE("grids that leak image mass are rejected") {
    // exp-contraction noise pushes images past any window edge at t ~ 0
    const auto [model, obs] = builtin_model("exp-contraction");
    (void)obs;
    CHECK_THROWS(discretize(model, -1.0, 1.0, 200));
}

TEST_CASE("discretization of affine-uniform converges and matches simulation") {
    // S(x,t) = x/2 + t maps [0,2] onto itself exactly; no leakage
    const auto [model, obs] = builtin_model("affine-uniform");
    const DiscreteKernel coarse = discretize(model, 0.0, 2.0, 200);
    const DiscreteKernel fine = discretize(model, 0.0, 2.0, 400);
    CHECK(coarse.renormalization_defect < 1e-3);

    auto stationary_mean_g = [&](const DiscreteKernel& k) {
        const Eigen::VectorXd pi = exact_stationary(k);
        double m = 0.0;
        for (int i = 0; i < pi.size(); ++i) m += pi[i] * evaluate_g(obs, k.states[static_cast<std::size_t>(i)]);
        return m;
    };
    const double mc = stationary_mean_g(coarse), mf = stationary_mean_g(fine);
    CHECK(std::abs(mc - mf) < 5e-3);  // grid refinement stable

    // Monte Carlo cross-check of <g, mu*>
    const auto pool = stationary_samples(model, 60, 4000, 1, {74, 0}, 2);
    std::vector<double> vals(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) vals[i] = evaluate_g(obs, pool[i]);
    CHECK(std::abs(mean(vals) - mf) < 3.0 * stderr_of_mean(vals) + 5e-3);
}
