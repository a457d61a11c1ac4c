#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dkvkoga/config.hpp"
#include "dkvkoga/dataset.hpp"
#include "dkvkoga/greedy.hpp"
#include "dkvkoga/metrics.hpp"

namespace dkv {

/// Train/test material for one experiment. Two-equation ODE problems carry a
/// dataset per equation; their test datasets are always in trajectory layout
/// (one row of N_t values per test parameter), which is what the error
/// measure norms. CT problems train on (t, mu) rows, rows_per_sample of them
/// per parameter sample.
struct ProblemData {
    std::vector<Dataset> train;
    std::vector<Dataset> test;
    bool pair = false;
    bool ct = false;
    std::size_t rows_per_sample = 1;
    TimeGrid grid;
};

ProblemData make_problem_data(const ExperimentConfig& cfg);

struct Evaluation {
    double e_rel = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
    std::vector<double> per_point;
};

/// Relative test error of the fitted models on the problem's test data; for
/// CT models the grid-time predictions are assembled per sample before
/// norming. Percentiles are taken over the per-point relative errors.
Evaluation evaluate_models(const std::vector<SurrogateModel>& models, const ProblemData& pd);

struct FitOutput {
    SurrogateModel model;
    LossHistory loss_history;
    std::vector<double> residual_history;
};

/// Stage one (skipped for shallow kernels) followed by f-greedy selection.
FitOutput train_and_fit(const ExperimentConfig& cfg, const Dataset& train,
                        std::uint64_t train_seed);

/// Shuffled balanced fold assignment: fold -> sample indices.
std::vector<std::vector<std::size_t>> cv_fold_split(std::size_t n_samples, std::size_t folds,
                                                    std::uint64_t seed);

/// Grid search over cfg.cv: every combination is scored by the mean
/// validation error across folds, and the winning resolved config (cv
/// stripped) is returned. Grid keys must target architecture.*, train.* or
/// greedy.*, so the generated data is shared across combinations.
nlohmann::json cross_validate(const ExperimentConfig& cfg);

struct ResultRecord {
    double e_rel = 0.0;
    double e_rel_p10 = 0.0;
    double e_rel_p90 = 0.0;
    std::vector<LossHistory> loss_histories;
    std::vector<std::vector<double>> residual_histories;
    double t_offline = 0.0; // seconds, mean over timing runs
    double t_online = 0.0;  // seconds, mean single prediction
    nlohmann::json selected_config;

    nlohmann::json to_json() const;
    static ResultRecord from_json(const nlohmann::json& j);
};

struct ExperimentOutcome {
    ResultRecord record;
    std::vector<SurrogateModel> models;
};

/// Full pipeline without file output.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);
/// Full pipeline writing result.json, loss/residual CSVs and model files
/// into out_dir; partially written files are removed when the run fails.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// --- file helpers ---------------------------------------------------------

/// Two-column CSV with a header row; doubles are written round-trip exact.
void write_series_csv(const std::string& path, const std::string& col0, const std::string& col1,
                      const std::vector<double>& values);
std::vector<double> read_series_csv(const std::string& path);

void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& meta_path);
Dataset read_dataset_csv(const std::string& csv_path, std::size_t input_dim);

} // namespace dkv
