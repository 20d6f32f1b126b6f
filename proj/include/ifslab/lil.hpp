#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifslab/corrector.hpp"
#include "ifslab/model.hpp"
#include "ifslab/stats.hpp"

namespace ifslab {

struct SigmaEstimate {
    double value = 0.0;
    std::string method;  // stationary-Z | sn-over-n | green-kubo
    Interval ci95;
    long n_used = 0;
    int replicas = 0;
};

// E Z_1^2 from one-step transitions off stationary draws; bootstrap CI.
SigmaEstimate sigma2_stationary(const ModelSpec& model, const CorrectorEstimate& chi,
                                const std::vector<StateVector>& stationary, SeededStream stream,
                                int threads = 1);

// Average of M_L^2 / L over stationary-start segments.  The literal
// M_n^2/n at a single large n has variance 2 sigma^4 per replica; chopping
// each replica trajectory into length-L segments keeps the same
// expectation (martingale orthogonality from a stationary start) and
// meets tight CI targets.
SigmaEstimate sigma2_sn_over_n(const ModelSpec& model, const CorrectorEstimate& chi, long n,
                               int replicas, const std::vector<StateVector>& stationary,
                               SeededStream stream, int threads = 1, int segment_length = 256);

// Var(g) + 2 sum_{i<=lag_max} Cov(g_0, g_i) from stationary trajectories;
// lag_max <= 0 picks the default from the decay fit tail.
SigmaEstimate sigma2_green_kubo(const ModelSpec& model, const CorrectorEstimate& chi, long n,
                                int replicas, int lag_max, const DecayFit& decay,
                                const std::vector<StateVector>& stationary, SeededStream stream,
                                int threads = 1);

struct QvarPoint {
    long k = 0;
    double median = 0.0;
    double q25 = 0.0, q75 = 0.0;
};

// Running averages (1/k) sum_{l<=k} Z_l^2 at dyadic k; cross-replica
// median and quartiles.
std::vector<QvarPoint> quadratic_variation_curve(const ModelSpec& model,
                                                 const CorrectorEstimate& chi, long n,
                                                 int replicas,
                                                 const std::vector<StateVector>& stationary,
                                                 SeededStream stream, int threads = 1);

struct HsCurves {
    std::vector<std::pair<long, double>> th1, th2;  // partial sums at dyadic n
    double th1_total = 0.0, th2_total = 0.0;
    double th1_last_quarter = 0.0, th2_last_quarter = 0.0;  // increments
};

// Empirical partial sums of the two Heyde-Scott conditions with
// s_n^2 = n sigma2 (empirical_sn switches to replica-estimated E M_n^2).
HsCurves heyde_scott_sums(const ModelSpec& model, const CorrectorEstimate& chi, double sigma2,
                          double gamma, double vartheta, long n, int replicas,
                          const std::vector<StateVector>& stationary, SeededStream stream,
                          int threads = 1, bool empirical_sn = false);

struct PiecewisePath {
    enum class Kind { Theta, Eta };
    Kind kind = Kind::Theta;
    std::vector<double> node_values;  // node 0 is 0
    std::vector<double> abscissae;    // empty => uniform k/n
    double normalization = 0.0;       // denominator used
    std::string to_csv() const;       // t,value
};

// theta_n nodes: partial sums of g over i=1..k divided by
// sigma sqrt(2 n log log n); zero path when log log n <= 0.
PiecewisePath build_theta_path(const Trajectory& traj, const CorrectorEstimate& chi, double sigma,
                               long n);

// eta_n nodes at s_k^2/s_n^2; zero path while s_n^2 <= e.
PiecewisePath build_eta_path(const MartingaleDecomposition& decomp,
                             const std::vector<double>& s_squared);

// (1 - 1/max(1, sqrt(E))) * sup|f|: a valid upper bound on the sup
// distance to the Strassen set, since the rescaled path lies inside it.
double strassen_distance(const PiecewisePath& path);

// One-sample KS p-value of {S_n^*/sigma} against the standard normal.
double clt_ks_pvalue(const ModelSpec& model, const CorrectorEstimate& chi, double sigma, long n,
                     int replicas, const std::vector<StateVector>& stationary,
                     SeededStream stream, int threads = 1);

struct LilSeedTrace {
    std::uint64_t stream_id = 0;
    std::vector<std::pair<long, double>> theta1_running_max;  // dyadic n
    std::vector<std::pair<long, double>> strassen_dist;
    double final_running_max = 0.0;
    double final_strassen = 0.0;
    double s_star = 0.0;  // S_n^*/sigma at n = N_max/16
};

struct LilReport {
    SigmaEstimate sigma;
    std::vector<LilSeedTrace> seeds;
    double clt_ks = 0.0;  // across seeds at n = N_max/16
    bool degenerate = false;
    std::uint64_t master_seed = 0;
    std::string to_json() const;
};

LilReport lil_report(const ModelSpec& model, const CorrectorEstimate& chi,
                     const SigmaEstimate& sigma, long n_max, int seed_count, SeededStream stream,
                     int threads = 1, int first_dyadic_exponent = 8);

}  // namespace ifslab
