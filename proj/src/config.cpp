#include "dkvkoga/config.hpp"

#include <fstream>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/model_io.hpp"

namespace dkv {

using nlohmann::json;

std::string problem_kind_name(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::model_problem: return "model_problem";
        case ProblemKind::ode_dt: return "ode_dt";
        case ProblemKind::ode_ct: return "ode_ct";
        case ProblemKind::breakthrough_synthetic: return "breakthrough_synthetic";
    }
    return "model_problem";
}

ProblemKind problem_kind_from_name(const std::string& name) {
    if (name == "model_problem") return ProblemKind::model_problem;
    if (name == "ode_dt") return ProblemKind::ode_dt;
    if (name == "ode_ct") return ProblemKind::ode_ct;
    if (name == "breakthrough_synthetic") return ProblemKind::breakthrough_synthetic;
    throw SchemaError("unknown problem type: " + name);
}

DeepKernelArchitecture ArchitectureConfig::resolve(std::size_t input_dim,
                                                   std::size_t out_dim) const {
    if (!deep) {
        DeepKernelArchitecture arch;
        arch.layers = 1;
        arch.dims = {input_dim};
        arch.outer = shallow_kernel;
        arch.activation = shallow_kernel;
        arch.out_dim = out_dim;
        arch.center_count = 1;
        return arch;
    }
    return DeepKernelArchitecture::uniform(layers, input_dim, hidden, center_count, activation,
                                           outer, out_dim);
}

void ExperimentConfig::validate() const {
    train.validate();
    greedy.validate();
    if (data.n_train == 0 || data.n_test == 0) {
        throw SchemaError("config: n_train and n_test must be positive");
    }
    if (cv && (cv->folds < 2 || cv->grid.empty())) {
        throw SchemaError("config: cross-validation needs >= 2 folds and a nonempty grid");
    }
    if (timing_runs == 0) throw SchemaError("config: timing_runs must be >= 1");
}

json ExperimentConfig::to_json() const {
    json j;
    j["format_version"] = kConfigFormatVersion;
    json problem_j{{"type", problem_kind_name(problem.kind)}};
    switch (problem.kind) {
        case ProblemKind::model_problem:
            problem_j["target"] = model_problem_name(problem.target);
            break;
        case ProblemKind::ode_dt:
        case ProblemKind::ode_ct:
            problem_j["system"] = ode_system_name(problem.system);
            break;
        case ProblemKind::breakthrough_synthetic:
            problem_j["resolution"] = problem.resolution;
            problem_j["pca_features"] = problem.pca_features;
            break;
    }
    j["problem"] = std::move(problem_j);
    j["data"] = json{{"n_train", data.n_train}, {"n_test", data.n_test}, {"seed", data.seed}};
    json arch_j;
    if (architecture.deep) {
        arch_j["type"] = "deep";
        arch_j["layers"] = architecture.layers;
        arch_j["hidden"] = architecture.hidden;
        arch_j["center_count"] = architecture.center_count;
        arch_j["activation"] = kernel_to_json(architecture.activation);
        arch_j["outer"] = kernel_to_json(architecture.outer);
    } else {
        arch_j["type"] = "shallow";
        arch_j["kernel"] = kernel_to_json(architecture.shallow_kernel);
    }
    j["architecture"] = std::move(arch_j);
    j["train"] = json{{"epochs", train.epochs},       {"batch_size", train.batch_size},
                      {"gamma_rippa", train.gamma_rippa}, {"lr", train.lr},
                      {"beta1", train.adam_beta1},    {"beta2", train.adam_beta2},
                      {"adam_eps", train.adam_eps},   {"seed", train.seed}};
    j["greedy"] = json{{"n_max", greedy.n_max},
                       {"f_tol", greedy.f_tol},
                       {"stability_tol", greedy.stability_tol},
                       {"gamma", greedy.gamma}};
    if (cv) {
        json grid = json::array();
        for (const auto& [key, values] : cv->grid) {
            grid.push_back(json{{"key", key}, {"values", values}});
        }
        j["cv"] = json{{"folds", cv->folds}, {"grid", std::move(grid)}};
    }
    j["timing_runs"] = timing_runs;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    try {
        if (!j.is_object()) throw SchemaError("config: expected an object");
        if (j.contains("format_version") && j.at("format_version").get<int>() != kConfigFormatVersion) {
            throw VersionMismatch("config: unsupported format_version");
        }
        ExperimentConfig cfg;
        const json& problem_j = j.at("problem");
        cfg.problem.kind = problem_kind_from_name(problem_j.at("type").get<std::string>());
        switch (cfg.problem.kind) {
            case ProblemKind::model_problem:
                cfg.problem.target = model_problem_from_name(problem_j.at("target").get<std::string>());
                break;
            case ProblemKind::ode_dt:
            case ProblemKind::ode_ct:
                cfg.problem.system = ode_system_from_name(problem_j.at("system").get<std::string>());
                break;
            case ProblemKind::breakthrough_synthetic:
                if (problem_j.contains("resolution")) {
                    cfg.problem.resolution = problem_j.at("resolution").get<std::size_t>();
                }
                if (problem_j.contains("pca_features")) {
                    cfg.problem.pca_features = problem_j.at("pca_features").get<std::size_t>();
                }
                break;
        }
        if (j.contains("data")) {
            const json& d = j.at("data");
            if (d.contains("n_train")) cfg.data.n_train = d.at("n_train").get<std::size_t>();
            if (d.contains("n_test")) cfg.data.n_test = d.at("n_test").get<std::size_t>();
            if (d.contains("seed")) cfg.data.seed = d.at("seed").get<std::uint64_t>();
        }
        const json& arch_j = j.at("architecture");
        const std::string arch_type = arch_j.at("type").get<std::string>();
        if (arch_type == "deep") {
            cfg.architecture.deep = true;
            cfg.architecture.layers = arch_j.at("layers").get<std::size_t>();
            if (arch_j.contains("hidden")) cfg.architecture.hidden = arch_j.at("hidden").get<std::size_t>();
            if (arch_j.contains("center_count")) {
                cfg.architecture.center_count = arch_j.at("center_count").get<std::size_t>();
            }
            cfg.architecture.activation = kernel_from_json(arch_j.at("activation"));
            cfg.architecture.outer = kernel_from_json(arch_j.at("outer"));
            if (cfg.architecture.layers == 1) cfg.architecture.deep = false;
            if (!cfg.architecture.deep) cfg.architecture.shallow_kernel = cfg.architecture.outer;
        } else if (arch_type == "shallow") {
            cfg.architecture.deep = false;
            cfg.architecture.shallow_kernel = kernel_from_json(arch_j.at("kernel"));
        } else {
            throw SchemaError("config: unknown architecture type " + arch_type);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<std::size_t>();
            if (t.contains("batch_size")) cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
            if (t.contains("gamma_rippa")) cfg.train.gamma_rippa = t.at("gamma_rippa").get<double>();
            if (t.contains("lr")) cfg.train.lr = t.at("lr").get<double>();
            if (t.contains("beta1")) cfg.train.adam_beta1 = t.at("beta1").get<double>();
            if (t.contains("beta2")) cfg.train.adam_beta2 = t.at("beta2").get<double>();
            if (t.contains("adam_eps")) cfg.train.adam_eps = t.at("adam_eps").get<double>();
            if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
        }
        if (j.contains("greedy")) {
            const json& g = j.at("greedy");
            if (g.contains("n_max")) cfg.greedy.n_max = g.at("n_max").get<std::size_t>();
            if (g.contains("f_tol")) cfg.greedy.f_tol = g.at("f_tol").get<double>();
            if (g.contains("stability_tol")) cfg.greedy.stability_tol = g.at("stability_tol").get<double>();
            if (g.contains("gamma")) cfg.greedy.gamma = g.at("gamma").get<double>();
        }
        if (j.contains("cv") && !j.at("cv").is_null()) {
            CvConfig cv;
            const json& c = j.at("cv");
            if (c.contains("folds")) cv.folds = c.at("folds").get<std::size_t>();
            for (const json& entry : c.at("grid")) {
                cv.grid.emplace_back(entry.at("key").get<std::string>(),
                                     entry.at("values").get<std::vector<json>>());
            }
            cfg.cv = std::move(cv);
        }
        if (j.contains("timing_runs")) cfg.timing_runs = j.at("timing_runs").get<std::size_t>();
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config parse: ") + e.what());
    }
    return ExperimentConfig::from_json(j);
}

void apply_override(json& config, const std::string& dotted_key, const json& value) {
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot - start);
        if (part.empty()) throw SchemaError("override: empty path segment in " + dotted_key);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

} // namespace dkv
