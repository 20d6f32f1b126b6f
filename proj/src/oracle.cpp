#include "ifslab/oracle.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace ifslab {

DiscreteKernel discretize(const ModelSpec& model, double lo, double hi, int cells, int t_nodes) {
    if (model.dimension != 1) throw std::invalid_argument("discretize: 1-d models only");
    DiscreteKernel k;
    const double h = (hi - lo) / cells;
    k.states.reserve(static_cast<std::size_t>(cells));
    for (int j = 0; j < cells; ++j) k.states.push_back({lo + (j + 0.5) * h});
    k.weights.assign(static_cast<std::size_t>(cells), h);
    k.matrix = Eigen::MatrixXd::Zero(cells, cells);

    const double eps = model.noise.epsilon;
    auto cell_of = [&](double y) {
        return std::clamp(static_cast<int>(std::floor((y - lo) / h)), 0, cells - 1);
    };
    // noise mass assigned to cell j around image y
    auto noise_mass = [&](double y, int j) {
        const double a = lo + j * h, b = a + h;
        switch (model.noise.law) {
            case NoiseSpec::Law::PointMassZero:
                return (y >= a && y < b) ? 1.0 : 0.0;
            case NoiseSpec::Law::UniformBall: {
                if (eps == 0.0) return (y >= a && y < b) ? 1.0 : 0.0;
                const double ov = std::min(b, y + eps) - std::max(a, y - eps);
                return std::max(0.0, ov) / (2.0 * eps);
            }
            case NoiseSpec::Law::TruncatedGaussian: {
                if (eps == 0.0) return (y >= a && y < b) ? 1.0 : 0.0;
                const double s = model.noise.sigma * std::sqrt(2.0);
                const double z = std::erf(eps / s);
                auto cdf = [&](double u) {
                    return (std::erf(std::clamp(u - y, -eps, eps) / s) + z) / (2.0 * z);
                };
                return cdf(b) - cdf(a);
            }
        }
        return 0.0;
    };

    double worst_defect = 0.0;
    const double dt = model.horizon / t_nodes;
    for (int i = 0; i < cells; ++i) {
        const StateVector& x = k.states[static_cast<std::size_t>(i)];
        for (int n = 0; n < t_nodes; ++n) {
            const double t = (n + 0.5) * dt;
            const double w = model.density_p(x, t) * dt;
            const double y = model.map_S(x, t)[0];
            if (eps == 0.0) {
                k.matrix(i, cell_of(y)) += w;
            } else {
                const int j0 = cell_of(y - eps), j1 = cell_of(y + eps);
                for (int j = j0; j <= j1; ++j) k.matrix(i, j) += w * noise_mass(y, j);
            }
        }
        const double row = k.matrix.row(i).sum();
        worst_defect = std::max(worst_defect, std::abs(row - 1.0));
        k.matrix.row(i) /= row;
    }
    k.renormalization_defect = worst_defect;
    if (worst_defect > 1e-3)
        throw std::runtime_error("discretize: grid too coarse (defect " +
                                 std::to_string(worst_defect) + ")");
    return k;
}

Eigen::VectorXd exact_stationary(const DiscreteKernel& kernel) {
    const Eigen::Index n = kernel.matrix.rows();
    const Eigen::MatrixXd A = kernel.matrix.transpose() - Eigen::MatrixXd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-9);
    if (lu.rank() != n - 1)
        throw std::runtime_error("exact_stationary: kernel reducible, stationary vector not unique"
                                 " (rank deficiency " + std::to_string(n - lu.rank()) + ")");
    Eigen::MatrixXd B = A;
    B.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = B.fullPivLu().solve(rhs);
    const double residual = (kernel.matrix.transpose() * pi - pi).cwiseAbs().maxCoeff();
    if (residual > 1e-12 || pi.minCoeff() < -1e-12)
        throw std::runtime_error("exact_stationary: residual too large");
    return pi;
}

Eigen::VectorXd exact_chi(const DiscreteKernel& kernel, const Eigen::VectorXd& g) {
    const Eigen::VectorXd pi = exact_stationary(kernel);
    if (std::abs(pi.dot(g)) > 1e-12)
        throw std::invalid_argument("exact_chi: g not centered against pi");
    const Eigen::Index n = kernel.matrix.rows();
    // rank-one shift pins <chi, pi> = 0 while preserving (I - P) chi = g
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - kernel.matrix +
                              Eigen::VectorXd::Ones(n) * pi.transpose();
    Eigen::VectorXd chi = A.fullPivLu().solve(g);
    const double residual =
        ((Eigen::MatrixXd::Identity(n, n) - kernel.matrix) * chi - g).cwiseAbs().maxCoeff();
    if (residual > 1e-10) throw std::runtime_error("exact_chi: singular beyond null direction");
    return chi;
}

double exact_sigma2(const DiscreteKernel& kernel, const Eigen::VectorXd& g,
                    const Eigen::VectorXd& chi) {
    const Eigen::VectorXd pi = exact_stationary(kernel);
    double s = 0.0;
    for (Eigen::Index i = 0; i < kernel.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < kernel.matrix.cols(); ++j) {
            const double z = chi(j) - chi(i) + g(i);
            s += pi(i) * kernel.matrix(i, j) * z * z;
        }
    return s;
}

double exact_green_kubo(const DiscreteKernel& kernel, const Eigen::VectorXd& g, int lag_max) {
    const Eigen::VectorXd pi = exact_stationary(kernel);
    const double mg = pi.dot(g);
    const Eigen::VectorXd gc = g.array() - mg;
    double s = gc.cwiseProduct(gc).dot(pi);
    Eigen::VectorXd pg = gc;
    for (int i = 1; i <= lag_max; ++i) {
        pg = kernel.matrix * pg;
        s += 2.0 * gc.cwiseProduct(pg).dot(pi);
    }
    return s;
}

namespace {

std::size_t nearest_state(const std::vector<StateVector>& states, const StateVector& x) {
    std::size_t best = 0;
    double bd = dist(states[0], x);
    for (std::size_t i = 1; i < states.size(); ++i) {
        const double d = dist(states[i], x);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

ModelSpec embed_kernel_as_model(const DiscreteKernel& kernel) {
    auto states = std::make_shared<std::vector<StateVector>>(kernel.states);
    auto cum = std::make_shared<std::vector<std::vector<double>>>();
    for (Eigen::Index i = 0; i < kernel.matrix.rows(); ++i) {
        std::vector<double> row;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < kernel.matrix.cols(); ++j) {
            acc += kernel.matrix(i, j);
            row.push_back(acc);
        }
        row.back() = 1.0;
        cum->push_back(std::move(row));
    }

    ModelSpec m;
    m.name = "embedded-kernel";
    m.dimension = static_cast<int>(kernel.states.front().size());
    m.horizon = 1.0;
    m.epsilon_star = 0.0;
    m.noise = {NoiseSpec::Law::PointMassZero, 0.0, 0.0};
    m.map_S = [states, cum](const StateVector& x, double t) {
        const std::size_t i = nearest_state(*states, x);
        const auto& row = (*cum)[i];
        std::size_t j = 0;
        while (j + 1 < row.size() && row[j] <= t) ++j;
        return (*states)[j];
    };
    m.density_p = [](const StateVector&, double) { return 1.0; };
    // the embedded map is not Lipschitz in the Euclidean metric; 1 is an
    // honest placeholder and the audit is expected to fail (II) here
    m.lipschitz_lambda = [](const StateVector&, double) { return 1.0; };
    m.base_point = StateVector(static_cast<std::size_t>(m.dimension), 0.0);
    m.window_lo = m.window_hi = m.base_point;
    for (const auto& s : kernel.states)
        for (std::size_t d = 0; d < s.size(); ++d) {
            m.window_lo[d] = std::min(m.window_lo[d], s[d]);
            m.window_hi[d] = std::max(m.window_hi[d], s[d]);
        }
    m.density_x_independent = true;
    m.discrete_states = kernel.states;
    m.dini_modulus = [](double) { return 0.0; };
    return m;
}

ObservableSpec embed_observable(const DiscreteKernel& kernel, const Eigen::VectorXd& g) {
    auto states = std::make_shared<std::vector<StateVector>>(kernel.states);
    auto vals = std::make_shared<Eigen::VectorXd>(g);
    ObservableSpec obs;
    obs.name = "embedded-g";
    obs.g = [states, vals](const StateVector& x) {
        return (*vals)(static_cast<Eigen::Index>(nearest_state(*states, x)));
    };
    double lip = 0.0;
    for (std::size_t i = 0; i < kernel.states.size(); ++i)
        for (std::size_t j = i + 1; j < kernel.states.size(); ++j) {
            const double d = dist(kernel.states[i], kernel.states[j]);
            if (d > 0.0)
                lip = std::max(lip, std::abs(g(static_cast<Eigen::Index>(i)) -
                                             g(static_cast<Eigen::Index>(j))) /
                                        d);
        }
    obs.lipschitz_constant = std::max(lip, 1e-12);
    obs.sup_bound = g.cwiseAbs().maxCoeff();
    return obs;
}

DiscreteKernel kernel_from_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    DiscreteKernel k;
    k.matrix = Eigen::MatrixXd(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw std::invalid_argument("kernel matrix not square");
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (rows[i][j] < 0.0) throw std::invalid_argument("kernel entry negative");
            k.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            sum += rows[i][j];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("kernel row does not sum to 1");
        k.states.push_back({static_cast<double>(i)});
    }
    k.weights.assign(n, 1.0);
    return k;
}

DiscreteKernel kernel_from_csv(const std::string& csv_text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(csv_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return kernel_from_matrix(rows);
}

}  // namespace ifslab
