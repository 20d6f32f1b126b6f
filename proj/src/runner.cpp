#include "ifslab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>

#include "ifslab/audit.hpp"
#include "ifslab/corrector.hpp"
#include "ifslab/coupling.hpp"
#include "ifslab/lil.hpp"
#include "ifslab/manifest.hpp"
#include "ifslab/oracle.hpp"
#include "ifslab/simulator.hpp"
#include "json.hpp"

namespace ifslab {

namespace {

const std::set<std::string> kCommands = {"audit", "simulate", "decay",  "sigma",
                                         "qvar",  "lil",      "oracle", "full"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

DiscreteKernel canonical_kernel() {
    return kernel_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
}

Eigen::VectorXd canonical_g() {
    Eigen::VectorXd g(2);
    g << 1.0, -2.0;
    return g;
}

std::pair<ModelSpec, ObservableSpec> resolve_model(const ExperimentConfig& cfg) {
    if (cfg.model == "oracle-2state") {
        const DiscreteKernel kernel = canonical_kernel();
        return {embed_kernel_as_model(kernel), embed_observable(kernel, canonical_g())};
    }
    return builtin_model(cfg.model);
}

std::vector<std::pair<StateVector, StateVector>> start_pairs(const ModelSpec& model) {
    std::vector<std::pair<StateVector, StateVector>> pairs;
    const StateVector a = model.window_lo, b = model.window_hi;
    StateVector mid(model.dimension);
    for (int i = 0; i < model.dimension; ++i)
        mid[static_cast<std::size_t>(i)] =
            0.5 * (a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)]);
    pairs.emplace_back(a, b);
    pairs.emplace_back(model.base_point, a);
    pairs.emplace_back(model.base_point, mid);
    return pairs;
}

nlohmann::json sigma_json(const SigmaEstimate& e) {
    return {{"method", e.method},
            {"value", e.value},
            {"ci95", {e.ci95.lo, e.ci95.hi}},
            {"n_used", e.n_used},
            {"replicas", e.replicas}};
}

struct Pipeline {
    AuditReport report;
    DecayFit decay;
    std::vector<StateVector> stationary;
};

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "command")
                cfg.command = value;
            else if (key == "model")
                cfg.model = value;
            else if (key == "n")
                cfg.n = std::stol(value);
            else if (key == "replicas")
                cfg.replicas = std::stoi(value);
            else if (key == "seed_count")
                cfg.seed_count = std::stoi(value);
            else if (key == "seed")
                cfg.master_seed = std::stoull(value);
            else if (key == "threads")
                cfg.threads = std::stoi(value);
            else if (key == "chi_tol")
                cfg.chi_tol = std::stod(value);
            else if (key == "out")
                cfg.out_dir = value;
            else
                throw ConfigError("unknown key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for " + key + ": " + value);
        } catch (const std::out_of_range&) {
            throw ConfigError("value out of range for " + key + ": " + value);
        }
    }
    if (!kCommands.count(cfg.command)) throw ConfigError("unknown command: " + cfg.command);
    if (cfg.model != "oracle-2state") {
        const auto names = builtin_model_names();
        if (std::find(names.begin(), names.end(), cfg.model) == names.end())
            throw ConfigError("unknown model: " + cfg.model);
    }
    if (cfg.n <= 0 || cfg.replicas <= 0 || cfg.seed_count <= 0 || cfg.threads < 0 ||
        cfg.chi_tol <= 0.0)
        throw ConfigError("numeric fields must be positive (threads may be 0 = auto)");
    return cfg;
}

std::string ExperimentConfig::echo() const {
    // Results never depend on the thread count or the output directory, so
    // the manifest echo pins both to defaults; the echo (and hence every
    // output byte) is then identical across thread counts.
    ExperimentConfig c = *this;
    c.threads = 0;
    c.out_dir = "out";
    return c.serialize();
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    out << "command = " << command << "\n"
        << "model = " << model << "\n"
        << "n = " << n << "\n"
        << "replicas = " << replicas << "\n"
        << "seed_count = " << seed_count << "\n"
        << "seed = " << master_seed << "\n"
        << "threads = " << threads << "\n"
        << "chi_tol = " << format_g17(chi_tol) << "\n"
        << "out = " << out_dir << "\n";
    return out.str();
}

int run(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    RunManifest manifest;
    manifest.command = cfg.command;
    manifest.master_seed = cfg.master_seed;
    manifest.config_echo = cfg.echo();

    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file(cfg.out_dir + "/" + name, content);
        manifest.record(name, content);
    };
    auto finish = [&](int code) {
        write_text_file(cfg.out_dir + "/manifest.json", manifest.to_json());
        return code;
    };

    const auto [model, obs] = resolve_model(cfg);
    try {
        if (cfg.command == "oracle") {
            const DiscreteKernel kernel = canonical_kernel();
            const Eigen::VectorXd g = canonical_g();
            const Eigen::VectorXd pi = exact_stationary(kernel);
            Eigen::VectorXd gc = g;
            gc.array() -= pi.dot(g);
            const Eigen::VectorXd chi = exact_chi(kernel, gc);
            nlohmann::json j;
            j["stationary"] = std::vector<double>(pi.data(), pi.data() + pi.size());
            j["chi"] = std::vector<double>(chi.data(), chi.data() + chi.size());
            j["sigma2"] = exact_sigma2(kernel, gc, chi);
            j["green_kubo"] = exact_green_kubo(kernel, gc, 200);
            emit("oracle.json", j.dump(2));
            return finish(kExitOk);
        }

        if (cfg.command == "audit") {
            const AuditReport report = audit(model);
            emit("audit.json", report.to_json());
            return finish(report.all_pass() ? kExitOk : kExitAuditFailure);
        }

        if (cfg.command == "simulate") {
            const AuditReport report = audit(model);
            const Trajectory traj =
                simulate(model, model.base_point, static_cast<int>(cfg.n),
                         SeededStream{cfg.master_seed, 1});
            emit("trajectory.csv", traj.to_csv());
            const auto curve =
                moment_curve(model, {model.base_point}, 2.0, 100, report.constants,
                             SeededStream{cfg.master_seed, 0x300}, cfg.threads);
            std::ostringstream csv;
            csv << "n,estimate,stderr,bound\n";
            for (const auto& pt : curve)
                csv << pt.n << ',' << format_g17(pt.estimate) << ',' << format_g17(pt.stderr_est)
                    << ',' << format_g17(pt.bound) << '\n';
            emit("moments.csv", csv.str());
            return finish(kExitOk);
        }

        // Everything below needs the audit constants; full fails fast here.
        const AuditReport report = audit(model);
        if (cfg.command == "full") {
            emit("audit.json", report.to_json());
            if (!report.all_pass()) return finish(kExitAuditFailure);
        }

        Pipeline p;
        p.report = report;
        p.decay = fit_decay(model, report.constants, obs, start_pairs(model), 40, 256,
                            SeededStream{cfg.master_seed, 0x100}, cfg.threads);
        const int burn = default_burn_in(p.decay.q_hat);
        p.stationary = stationary_samples(model, burn, 2048, 1,
                                          SeededStream{cfg.master_seed, 0x2000}, cfg.threads);

        if (cfg.command == "decay" || cfg.command == "full") {
            emit("decay.json", p.decay.to_json());
            const auto curve = fm_distance_curve(model, report.constants, model.base_point,
                                                 p.stationary, 40, 256,
                                                 SeededStream{cfg.master_seed, 0x400},
                                                 cfg.threads);
            emit("fm_curve.csv", curve_to_csv(curve));
            if (cfg.command == "decay") return finish(kExitOk);
        }

        const CorrectorEstimate chi =
            CorrectorEstimate::build(model, report.constants, obs, p.decay, p.stationary,
                                     cfg.chi_tol, SeededStream{cfg.master_seed, 0x1000},
                                     cfg.threads);

        if (cfg.command == "sigma" || cfg.command == "full") {
            const SigmaEstimate s1 = sigma2_stationary(model, chi, p.stationary,
                                                       SeededStream{cfg.master_seed, 0x500},
                                                       cfg.threads);
            const SigmaEstimate s2 =
                sigma2_sn_over_n(model, chi, cfg.n, cfg.replicas, p.stationary,
                                 SeededStream{cfg.master_seed, 0x600}, cfg.threads);
            const SigmaEstimate s3 =
                sigma2_green_kubo(model, chi, cfg.n, cfg.replicas, 0, p.decay, p.stationary,
                                  SeededStream{cfg.master_seed, 0x700}, cfg.threads);
            nlohmann::json j;
            j["stationary_Z"] = sigma_json(s1);
            j["sn_over_n"] = sigma_json(s2);
            j["green_kubo"] = sigma_json(s3);
            emit("sigma.json", j.dump(2));
            if (cfg.command == "sigma") return finish(kExitOk);
        }

        if (cfg.command == "qvar" || cfg.command == "full") {
            const auto curve =
                quadratic_variation_curve(model, chi, cfg.n, cfg.replicas, p.stationary,
                                          SeededStream{cfg.master_seed, 0x800}, cfg.threads);
            std::ostringstream csv;
            csv << "k,median,q25,q75\n";
            for (const auto& pt : curve)
                csv << pt.k << ',' << format_g17(pt.median) << ',' << format_g17(pt.q25) << ','
                    << format_g17(pt.q75) << '\n';
            emit("qvar.csv", csv.str());
            if (cfg.command == "qvar") return finish(kExitOk);
        }

        // lil or full
        const SigmaEstimate sigma = sigma2_stationary(model, chi, p.stationary,
                                                      SeededStream{cfg.master_seed, 0x500},
                                                      cfg.threads);
        const LilReport lil = lil_report(model, chi, sigma, cfg.n, cfg.seed_count,
                                         SeededStream{cfg.master_seed, 0x900}, cfg.threads);
        emit("lil.json", lil.to_json());
        if (lil.degenerate) return finish(kExitDegenerateFit);
        return finish(kExitOk);
    } catch (const FitDegenerateError&) {
        return finish(kExitDegenerateFit);
    }
}

}  // namespace ifslab
