#include "cirsplit/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cirsplit/errors.hpp"
#include "cirsplit/toml_lite.hpp"

namespace cirsplit {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void deep_merge(nlohmann::json& base, const nlohmann::json& patch) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

Eigen::VectorXd to_vector(const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

std::vector<std::size_t> to_indices(const nlohmann::json& arr) {
    std::vector<std::size_t> out;
    for (const auto& e : arr) out.push_back(e.get<std::size_t>());
    return out;
}

template <typename T>
void maybe(const nlohmann::json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::string& scale) {
    nlohmann::json doc;
    const std::string ext = path.extension().string();
    if (ext == ".toml") {
        doc = parse_toml_lite(read_file(path));
    } else if (ext == ".json") {
        doc = nlohmann::json::parse(read_file(path));
    } else {
        throw config_error("config must be .toml or .json: " + path.string());
    }

    if (!scale.empty()) {
        if (doc.contains("scale") && doc["scale"].contains(scale)) {
            nlohmann::json patch = doc["scale"][scale];
            deep_merge(doc, patch);
        } else if (scale != "desk" && scale != "paper") {
            throw config_error("unknown scale: " + scale);
        }
    }

    ExperimentConfig cfg;
    maybe(doc, "model", cfg.model);
    maybe(doc, "scheme", cfg.scheme);
    maybe(doc, "seed", cfg.seed);
    maybe(doc, "out", cfg.out_dir);
    if (doc.contains("theta_true")) cfg.theta_true = to_vector(doc["theta_true"]);
    if (doc.contains("x0")) cfg.x0 = to_vector(doc["x0"]);

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        maybe(g, "t0", cfg.grid.t0);
        maybe(g, "n", cfg.grid.n);
        maybe(g, "delta", cfg.grid.delta);
        maybe(g, "a_sub", cfg.grid.a_sub);
    }

    if (doc.contains("observation")) {
        const auto& o = doc["observation"];
        if (o.contains("observed")) cfg.observed = to_indices(o["observed"]);
        maybe(o, "noisy", cfg.noisy);
        maybe(o, "sigma_known", cfg.sigma_known);
        maybe(o, "sigma_err", cfg.sigma_err);
        maybe(o, "sigma_theta_index", cfg.sigma_theta_index);
    }

    if (doc.contains("prior")) {
        const auto& p = doc["prior"];
        if (p.contains("low")) cfg.prior_low = to_vector(p["low"]);
        if (p.contains("high")) cfg.prior_high = to_vector(p["high"]);
        if (p.contains("infer_indices")) cfg.infer_indices = to_indices(p["infer_indices"]);
    }

    if (doc.contains("abc")) {
        const auto& a = doc["abc"];
        maybe(a, "m_particles", cfg.abc.m_particles);
        maybe(a, "r_max", cfg.abc.r_max);
        maybe(a, "alpha", cfg.abc.alpha_quantile);
        maybe(a, "acceptance_floor", cfg.abc.acceptance_floor);
        maybe(a, "pretrain", cfg.abc.pretrain);
        maybe(a, "p_dc", cfg.abc.dc.p_particles);
        maybe(a, "c_scale", cfg.abc.dc.c_scale);
        maybe(a, "ridge", cfg.abc.ridge);
        maybe(a, "retrain_summaries", cfg.abc.retrain_summaries);
        maybe(a, "run", cfg.abc_run);
        if (a.contains("dataset_file")) cfg.dataset_file = a["dataset_file"].get<std::string>();
    }

    if (doc.contains("simulate")) {
        const auto& s = doc["simulate"];
        maybe(s, "paths", cfg.simulate.paths);
        maybe(s, "fine_output", cfg.simulate.fine_output);
    }

    if (doc.contains("dist_preserve")) {
        const auto& d = doc["dist_preserve"];
        if (d.contains("h_grid")) {
            cfg.dist_preserve.h_grid.clear();
            for (const auto& e : d["h_grid"]) cfg.dist_preserve.h_grid.push_back(e.get<double>());
        }
        if (d.contains("times")) {
            cfg.dist_preserve.times.clear();
            for (const auto& e : d["times"]) cfg.dist_preserve.times.push_back(e.get<double>());
        }
        maybe(d, "paths", cfg.dist_preserve.paths);
        maybe(d, "component", cfg.dist_preserve.component);
        maybe(d, "ref_h", cfg.dist_preserve.ref_h);
        if (d.contains("schemes"))
            cfg.dist_preserve.schemes = d["schemes"].get<std::vector<std::string>>();
    }

    if (doc.contains("phase_portrait")) {
        const auto& p = doc["phase_portrait"];
        if (p.contains("h_grid")) {
            cfg.phase_portrait.h_grid.clear();
            for (const auto& e : p["h_grid"]) cfg.phase_portrait.h_grid.push_back(e.get<double>());
        }
        maybe(p, "t_end", cfg.phase_portrait.t_end);
        maybe(p, "paths", cfg.phase_portrait.paths);
        maybe(p, "trajectories_per_h", cfg.phase_portrait.trajectories_per_h);
    }

    return cfg;
}

SchemeKind default_scheme(const ReactionNetwork& net) {
    switch (net.model_id()) {
        case ModelId::Repressilator: return SchemeKind::SplitRepressilatorStrang;
        case ModelId::LotkaVolterra: return SchemeKind::SplitLotkaVolterraStrang;
        case ModelId::TwoPool: return SchemeKind::SplitTwoPoolLieTrotter;
        case ModelId::Generic: return SchemeKind::SplitGenericLieTrotter;
    }
    return SchemeKind::SplitGenericLieTrotter;
}

BuiltExperiment build_experiment(const ExperimentConfig& config) {
    BuiltExperiment built;
    if (config.model == "repressilator") {
        built.net = std::make_shared<ReactionNetwork>(repressilator());
    } else if (config.model == "lotka_volterra") {
        built.net = std::make_shared<ReactionNetwork>(lotka_volterra());
    } else if (config.model == "two_pool") {
        built.net = std::make_shared<ReactionNetwork>(two_pool());
    } else {
        built.net = std::make_shared<ReactionNetwork>(network_from_json(read_file(config.model)));
    }

    built.scheme = config.scheme.empty() ? default_scheme(*built.net)
                                         : scheme_from_string(config.scheme);

    if (config.theta_true.size() == 0) throw config_error("config needs theta_true");
    if (config.x0.size() == 0) throw config_error("config needs x0");

    built.theta_true.values = config.theta_true;
    built.theta_true.kinetic_count = built.net->reaction_count();

    SimulationProblem prob;
    prob.net = built.net.get();
    prob.scheme = built.scheme;
    prob.grid = config.grid;
    prob.x0 = config.x0;
    prob.theta_template = config.theta_true;
    prob.kinetic_count = built.theta_true.kinetic_count;
    prob.infer_indices = config.infer_indices;
    prob.observed = config.observed;
    prob.noisy = config.noisy;
    prob.sigma_from_theta = !config.sigma_known;
    prob.sigma_theta_index = config.sigma_theta_index;
    prob.sigma_fixed = config.sigma_err;
    built.problem = prob;

    if (config.prior_low.size() > 0) {
        built.prior.low = config.prior_low;
        built.prior.high = config.prior_high;
        built.prior.validate();
        if (built.prior.dim() != config.infer_indices.size())
            throw config_error("prior dimension must match infer_indices");
    }
    return built;
}

} // namespace cirsplit
