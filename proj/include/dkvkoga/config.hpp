#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dkvkoga/datagen.hpp"
#include "dkvkoga/deepkernel.hpp"
#include "dkvkoga/greedy.hpp"
#include "dkvkoga/training.hpp"

namespace dkv {

inline constexpr int kConfigFormatVersion = 1;

enum class ProblemKind { model_problem, ode_dt, ode_ct, breakthrough_synthetic };

std::string problem_kind_name(ProblemKind kind);
ProblemKind problem_kind_from_name(const std::string& name);

struct ProblemConfig {
    ProblemKind kind = ProblemKind::model_problem;
    ModelProblem target = ModelProblem::f2;            // model_problem
    OdeSystem system = OdeSystem::lotka_volterra;      // ode_dt / ode_ct
    std::size_t resolution = 30;                       // breakthrough voxel grid
    std::size_t pca_features = 6;                      // breakthrough
};

struct DataConfig {
    std::size_t n_train = 1000;
    std::size_t n_test = 500;
    std::uint64_t seed = 42;
};

/// Either a shallow kernel or a uniform-width deep architecture; the input
/// and output dimensions are filled in from the dataset at run time.
struct ArchitectureConfig {
    bool deep = false;
    ScalarKernel shallow_kernel;       // when !deep
    std::size_t layers = 2;            // when deep
    std::size_t hidden = 10;
    std::size_t center_count = 50;
    ScalarKernel activation;
    ScalarKernel outer;

    DeepKernelArchitecture resolve(std::size_t input_dim, std::size_t out_dim) const;
};

/// Hyperparameter grid: ordered (dotted config key, candidate values) pairs.
/// Combinations enumerate with the first key varying slowest; ties in the
/// cross-validation score go to the earliest combination.
struct CvConfig {
    std::size_t folds = 5;
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;
};

struct ExperimentConfig {
    ProblemConfig problem;
    DataConfig data;
    ArchitectureConfig architecture;
    TrainConfig train;
    GreedyConfig greedy;
    std::optional<CvConfig> cv;
    std::size_t timing_runs = 5;

    void validate() const;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::string& path);

/// Sets config[dotted.path] = value, creating intermediate objects.
void apply_override(nlohmann::json& config, const std::string& dotted_key,
                    const nlohmann::json& value);

} // namespace dkv
