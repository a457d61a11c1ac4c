#include "dkvkoga/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/model_io.hpp"
#include "dkvkoga/rng.hpp"

namespace dkv {

using nlohmann::json;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::size_t integer_sqrt(std::size_t n) {
    std::size_t root = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    while (root * root > n) --root;
    while ((root + 1) * (root + 1) <= n) ++root;
    return root;
}

std::uint64_t equation_seed(std::uint64_t base, std::size_t equation) {
    return equation == 0 ? base : SeededRng(base).derive(equation).seed();
}

} // namespace

ProblemData make_problem_data(const ExperimentConfig& cfg) {
    ProblemData pd;
    SeededRng seeds(cfg.data.seed);
    switch (cfg.problem.kind) {
        case ProblemKind::model_problem: {
            pd.train.push_back(model_problem_dataset(cfg.problem.target, cfg.data.n_train,
                                                     seeds.derive(1).seed()));
            pd.test.push_back(model_problem_dataset(cfg.problem.target, cfg.data.n_test,
                                                    seeds.derive(2).seed()));
            break;
        }
        case ProblemKind::ode_dt:
        case ProblemKind::ode_ct: {
            pd.pair = true;
            pd.ct = cfg.problem.kind == ProblemKind::ode_ct;
            pd.grid = TimeGrid::standard();
            Matrix mu_train;
            if (cfg.problem.system == OdeSystem::lotka_volterra) {
                const std::size_t side = integer_sqrt(cfg.data.n_train);
                if (side * side != cfg.data.n_train) {
                    throw SchemaError("ode data: n_train must be a perfect square for the LV grid");
                }
                mu_train = lv_parameter_grid(side);
            } else {
                mu_train = brusselator_parameter_grid(cfg.data.n_train);
            }
            const Matrix mu_test =
                random_parameters(cfg.problem.system, cfg.data.n_test, seeds.derive(2).seed());

            auto [test1, test2] = build_dt_dataset(cfg.problem.system, mu_test, pd.grid);
            pd.test.push_back(std::move(test1));
            pd.test.push_back(std::move(test2));
            if (pd.ct) {
                auto [train1, train2] = build_ct_dataset(cfg.problem.system, mu_train, pd.grid);
                pd.train.push_back(std::move(train1));
                pd.train.push_back(std::move(train2));
                pd.rows_per_sample = pd.grid.size();
            } else {
                auto [train1, train2] = build_dt_dataset(cfg.problem.system, mu_train, pd.grid);
                pd.train.push_back(std::move(train1));
                pd.train.push_back(std::move(train2));
            }
            break;
        }
        case ProblemKind::breakthrough_synthetic: {
            const std::size_t total = cfg.data.n_train + cfg.data.n_test;
            BreakthroughData data = breakthrough_synthetic(total, cfg.problem.resolution,
                                                           cfg.problem.pca_features,
                                                           seeds.derive(1).seed());
            std::vector<std::size_t> order(total);
            for (std::size_t i = 0; i < total; ++i) order[i] = i;
            SeededRng split_rng = seeds.derive(3);
            split_rng.shuffle(order);
            std::vector<std::size_t> train_idx(order.begin(), order.begin() + cfg.data.n_train);
            std::vector<std::size_t> test_idx(order.begin() + cfg.data.n_train, order.end());
            pd.train.push_back(data.dataset.rows(train_idx));
            pd.test.push_back(data.dataset.rows(test_idx));
            break;
        }
    }
    for (auto& ds : pd.train) ds.validate();
    for (auto& ds : pd.test) ds.validate();
    return pd;
}

namespace {

// CT surrogate predictions on the grid, one trajectory row per test sample.
Matrix assemble_ct_predictions(const SurrogateModel& model, const Matrix& mu_rows,
                               const TimeGrid& grid) {
    const std::size_t nt = grid.size(), p = mu_rows.cols();
    Matrix out(mu_rows.rows(), nt);
    Matrix block(nt, 1 + p);
    for (std::size_t s = 0; s < mu_rows.rows(); ++s) {
        for (std::size_t k = 0; k < nt; ++k) {
            block(k, 0) = grid.t[k];
            for (std::size_t c = 0; c < p; ++c) block(k, 1 + c) = mu_rows(s, c);
        }
        const Matrix pred = predict(model, block);
        for (std::size_t k = 0; k < nt; ++k) out(s, k) = pred(k, 0);
    }
    return out;
}

} // namespace

Evaluation evaluate_models(const std::vector<SurrogateModel>& models, const ProblemData& pd) {
    if (models.size() != pd.test.size()) {
        throw DimensionMismatch("evaluate: model count differs from test datasets");
    }
    Evaluation eval;
    for (std::size_t j = 0; j < models.size(); ++j) {
        const Dataset& test = pd.test[j];
        const Matrix pred = pd.ct ? assemble_ct_predictions(models[j], test.x, pd.grid)
                                  : predict(models[j], test.x);
        const auto errors = per_point_relative_errors(pred, test.y);
        eval.per_point.insert(eval.per_point.end(), errors.begin(), errors.end());
    }
    double sum = 0.0;
    for (double e : eval.per_point) sum += e;
    eval.e_rel = sum / static_cast<double>(eval.per_point.size());
    eval.p10 = percentile(eval.per_point, 0.10);
    eval.p90 = percentile(eval.per_point, 0.90);
    return eval;
}

FitOutput train_and_fit(const ExperimentConfig& cfg, const Dataset& train,
                        std::uint64_t train_seed) {
    FitOutput out;
    SurrogateKernel kernel;
    if (cfg.architecture.deep) {
        const DeepKernelArchitecture arch =
            cfg.architecture.resolve(train.input_dim(), train.output_dim());
        TrainConfig tc = cfg.train;
        tc.seed = train_seed;
        TrainResult trained = train_deep_kernel(train, arch, tc);
        out.loss_history = std::move(trained.history);
        kernel = DeepKernelModel{arch, std::move(trained.params)};
    } else {
        kernel = cfg.architecture.shallow_kernel;
    }
    GreedyResult greedy = fit_greedy(kernel, train.x, train.y, cfg.greedy);
    out.model = std::move(greedy.model);
    out.residual_history = std::move(greedy.residual_history);
    return out;
}

std::vector<std::vector<std::size_t>> cv_fold_split(std::size_t n_samples, std::size_t folds,
                                                    std::uint64_t seed) {
    if (folds < 2 || folds > n_samples) {
        throw std::invalid_argument("cv_fold_split: need 2 <= folds <= samples");
    }
    std::vector<std::size_t> order(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
    SeededRng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> assignment(folds);
    for (std::size_t pos = 0; pos < n_samples; ++pos) {
        assignment[pos % folds].push_back(order[pos]);
    }
    return assignment;
}

namespace {

std::vector<std::size_t> sample_rows(const std::vector<std::size_t>& samples,
                                     std::size_t rows_per_sample) {
    if (rows_per_sample == 1) return samples;
    std::vector<std::size_t> rows;
    rows.reserve(samples.size() * rows_per_sample);
    for (std::size_t s : samples) {
        for (std::size_t r = 0; r < rows_per_sample; ++r) rows.push_back(s * rows_per_sample + r);
    }
    return rows;
}

// Restricts pd to (train_samples, val_samples); validation data is emitted in
// the trajectory layout the error measure expects.
ProblemData fold_problem(const ProblemData& pd, const std::vector<std::size_t>& train_samples,
                         const std::vector<std::size_t>& val_samples) {
    ProblemData fold;
    fold.pair = pd.pair;
    fold.ct = pd.ct;
    fold.rows_per_sample = pd.rows_per_sample;
    fold.grid = pd.grid;
    const auto train_rows = sample_rows(train_samples, pd.rows_per_sample);
    for (std::size_t j = 0; j < pd.train.size(); ++j) {
        fold.train.push_back(pd.train[j].rows(train_rows));
        if (!pd.ct) {
            fold.test.push_back(pd.train[j].rows(val_samples));
        } else {
            // Rebuild (mu -> trajectory) rows from the CT training table.
            const Dataset& src = pd.train[j];
            const std::size_t nt = pd.rows_per_sample;
            const std::size_t p = src.input_dim() - 1;
            Dataset val;
            val.x = Matrix(val_samples.size(), p);
            val.y = Matrix(val_samples.size(), nt);
            for (std::size_t vi = 0; vi < val_samples.size(); ++vi) {
                const std::size_t base = val_samples[vi] * nt;
                for (std::size_t c = 0; c < p; ++c) val.x(vi, c) = src.x(base, 1 + c);
                for (std::size_t k = 0; k < nt; ++k) val.y(vi, k) = src.y(base + k, 0);
            }
            fold.test.push_back(std::move(val));
        }
    }
    return fold;
}

std::vector<std::size_t> combo_shape(const CvConfig& cv) {
    std::vector<std::size_t> shape;
    for (const auto& [key, values] : cv.grid) {
        if (values.empty()) throw SchemaError("cv grid: empty value list for " + key);
        if (key.rfind("architecture.", 0) != 0 && key.rfind("train.", 0) != 0 &&
            key.rfind("greedy.", 0) != 0) {
            throw SchemaError("cv grid: key must target architecture/train/greedy: " + key);
        }
        shape.push_back(values.size());
    }
    return shape;
}

json resolved_base(const ExperimentConfig& cfg) {
    json j = cfg.to_json();
    j.erase("cv");
    return j;
}

} // namespace

json cross_validate(const ExperimentConfig& cfg) {
    if (!cfg.cv) throw std::invalid_argument("cross_validate: config has no cv section");
    const CvConfig& cv = *cfg.cv;
    const auto shape = combo_shape(cv);
    const ProblemData pd = make_problem_data(cfg);
    const std::size_t n_samples = pd.train[0].size() / pd.rows_per_sample;
    const auto folds = cv_fold_split(n_samples, cv.folds,
                                     SeededRng(cfg.data.seed).derive(0xCF01).seed());

    std::size_t combos = 1;
    for (std::size_t s : shape) combos *= s;

    const json base = resolved_base(cfg);
    json best_config;
    double best_score = 0.0;
    bool have_best = false;

    for (std::size_t combo = 0; combo < combos; ++combo) {
        // First grid key varies slowest.
        json candidate = base;
        std::size_t rest = combo;
        for (std::size_t k = shape.size(); k-- > 0;) {
            const std::size_t pick = rest % shape[k];
            rest /= shape[k];
            apply_override(candidate, cv.grid[k].first, cv.grid[k].second[pick]);
        }
        const ExperimentConfig combo_cfg = ExperimentConfig::from_json(candidate);

        double score = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<std::size_t> train_samples;
            for (std::size_t g = 0; g < folds.size(); ++g) {
                if (g == f) continue;
                train_samples.insert(train_samples.end(), folds[g].begin(), folds[g].end());
            }
            const ProblemData fold = fold_problem(pd, train_samples, folds[f]);
            std::vector<SurrogateModel> models;
            for (std::size_t j = 0; j < fold.train.size(); ++j) {
                models.push_back(train_and_fit(combo_cfg, fold.train[j],
                                               equation_seed(combo_cfg.train.seed, j))
                                     .model);
            }
            score += evaluate_models(models, fold).e_rel;
        }
        score /= static_cast<double>(folds.size());

        if (!have_best || score < best_score) {
            have_best = true;
            best_score = score;
            best_config = candidate;
        }
    }
    return best_config;
}

json ResultRecord::to_json() const {
    return json{{"format_version", 1},
                {"e_rel", e_rel},
                {"e_rel_p10", e_rel_p10},
                {"e_rel_p90", e_rel_p90},
                {"loss_histories", loss_histories},
                {"residual_histories", residual_histories},
                {"t_offline", t_offline},
                {"t_online", t_online},
                {"selected_config", selected_config}};
}

ResultRecord ResultRecord::from_json(const json& j) {
    try {
        ResultRecord r;
        r.e_rel = j.at("e_rel").get<double>();
        r.e_rel_p10 = j.at("e_rel_p10").get<double>();
        r.e_rel_p90 = j.at("e_rel_p90").get<double>();
        r.loss_histories = j.at("loss_histories").get<std::vector<LossHistory>>();
        r.residual_histories = j.at("residual_histories").get<std::vector<std::vector<double>>>();
        r.t_offline = j.at("t_offline").get<double>();
        r.t_online = j.at("t_online").get<double>();
        r.selected_config = j.at("selected_config");
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("result record: ") + e.what());
    }
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentConfig run_cfg = cfg;
    json resolved = resolved_base(cfg);
    if (cfg.cv) {
        resolved = cross_validate(cfg);
        run_cfg = ExperimentConfig::from_json(resolved);
        run_cfg.cv.reset();
    }
    const ProblemData pd = make_problem_data(run_cfg);

    ExperimentOutcome outcome;
    outcome.record.selected_config = resolved;

    const double t_fit_start = now_seconds();
    std::vector<FitOutput> fits;
    for (std::size_t j = 0; j < pd.train.size(); ++j) {
        fits.push_back(
            train_and_fit(run_cfg, pd.train[j], equation_seed(run_cfg.train.seed, j)));
    }
    double offline_total = now_seconds() - t_fit_start;

    // Extra offline timing runs with derived seeds; models are discarded.
    for (std::size_t run = 1; run < run_cfg.timing_runs; ++run) {
        const double t0 = now_seconds();
        for (std::size_t j = 0; j < pd.train.size(); ++j) {
            (void)train_and_fit(run_cfg, pd.train[j],
                                SeededRng(run_cfg.train.seed).derive(1000 + run * 8 + j).seed());
        }
        offline_total += now_seconds() - t0;
    }
    outcome.record.t_offline = offline_total / static_cast<double>(run_cfg.timing_runs);

    for (FitOutput& fit : fits) {
        outcome.record.loss_histories.push_back(std::move(fit.loss_history));
        outcome.record.residual_histories.push_back(std::move(fit.residual_history));
        outcome.models.push_back(std::move(fit.model));
    }

    const Evaluation eval = evaluate_models(outcome.models, pd);
    outcome.record.e_rel = eval.e_rel;
    outcome.record.e_rel_p10 = eval.p10;
    outcome.record.e_rel_p90 = eval.p90;

    // Online: mean wall time of single-row predictions.
    std::size_t predictions = 0;
    const double t_on_start = now_seconds();
    for (std::size_t j = 0; j < outcome.models.size(); ++j) {
        const Matrix& tx = pd.test[j].x;
        const std::size_t budget = std::min<std::size_t>(tx.rows(), 256);
        Matrix row(1, pd.ct ? tx.cols() + 1 : tx.cols());
        for (std::size_t i = 0; i < budget; ++i) {
            if (pd.ct) {
                row(0, 0) = pd.grid.t[i % pd.grid.size()];
                for (std::size_t c = 0; c < tx.cols(); ++c) row(0, 1 + c) = tx(i, c);
            } else {
                for (std::size_t c = 0; c < tx.cols(); ++c) row(0, c) = tx(i, c);
            }
            (void)predict(outcome.models[j], row);
            ++predictions;
        }
    }
    outcome.record.t_online = (now_seconds() - t_on_start) / static_cast<double>(predictions);
    return outcome;
}

// --- file helpers -----------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_series_csv(const std::string& path, const std::string& col0, const std::string& col1,
                      const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << col0 << ',' << col1 << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << i << ',' << format_double(values[i]) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<double> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("series csv: missing header");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw SchemaError("series csv: malformed row");
        values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    return values;
}

void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& meta_path) {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot open for writing: " + csv_path);
    for (std::size_t c = 0; c < ds.input_dim(); ++c) out << (c ? "," : "") << "x_" << c;
    for (std::size_t c = 0; c < ds.output_dim(); ++c) out << ",y_" << c;
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t c = 0; c < ds.input_dim(); ++c) {
            out << (c ? "," : "") << format_double(ds.x(i, c));
        }
        for (std::size_t c = 0; c < ds.output_dim(); ++c) out << ',' << format_double(ds.y(i, c));
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + csv_path);

    std::ofstream meta(meta_path);
    if (!meta) throw IoError("cannot open for writing: " + meta_path);
    meta << json{{"generator", ds.meta.generator},
                 {"seed", ds.meta.seed},
                 {"low", ds.meta.low},
                 {"high", ds.meta.high},
                 {"rows", ds.size()},
                 {"input_dim", ds.input_dim()},
                 {"output_dim", ds.output_dim()}}
                .dump(2)
         << '\n';
}

Dataset read_dataset_csv(const std::string& csv_path, std::size_t input_dim) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open for reading: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("dataset csv: missing header");
    std::size_t columns = 1;
    for (char ch : line) columns += ch == ',';
    if (input_dim >= columns) throw SchemaError("dataset csv: input_dim exceeds column count");
    const std::size_t output_dim = columns - input_dim;

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t got = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::strtod(cell.c_str(), nullptr));
            ++got;
        }
        if (got != columns) throw SchemaError("dataset csv: ragged row");
        ++rows;
    }
    Dataset ds;
    ds.x = Matrix(rows, input_dim);
    ds.y = Matrix(rows, output_dim);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < input_dim; ++c) ds.x(i, c) = values[i * columns + c];
        for (std::size_t c = 0; c < output_dim; ++c) {
            ds.y(i, c) = values[i * columns + input_dim + c];
        }
    }
    ds.validate();
    return ds;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    auto track = [&](const fs::path& p) -> std::string {
        written.push_back(p);
        return p.string();
    };
    try {
        ExperimentOutcome outcome = run_experiment(cfg);
        const bool pair = outcome.models.size() > 1;
        for (std::size_t j = 0; j < outcome.models.size(); ++j) {
            const std::string suffix = pair ? "_eq" + std::to_string(j + 1) : "";
            save_model(outcome.models[j], track(fs::path(out_dir) / ("model" + suffix + ".json")));
            write_series_csv(track(fs::path(out_dir) / ("loss" + suffix + ".csv")), "epoch",
                             "mean_loss", outcome.record.loss_histories[j]);
            write_series_csv(track(fs::path(out_dir) / ("residuals" + suffix + ".csv")),
                             "iteration", "max_residual", outcome.record.residual_histories[j]);
        }
        {
            const std::string path = track(fs::path(out_dir) / "result.json");
            std::ofstream out(path);
            if (!out) throw IoError("cannot open for writing: " + path);
            out << outcome.record.to_json().dump(2) << '\n';
            if (!out) throw IoError("write failed: " + path);
        }
        return outcome;
    } catch (...) {
        std::error_code ec;
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }
}

} // namespace dkv
