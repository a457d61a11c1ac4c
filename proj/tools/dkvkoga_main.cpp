#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dkvkoga/config.hpp"
#include "dkvkoga/experiment.hpp"
#include "dkvkoga/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")
        ->required(config_required);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--override", args.overrides, "config override key=value (dotted path)");
    cmd->add_option("--seed", args.seed, "override data and train seeds");
}

json parse_override_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return json(text); // bare strings need no quoting on the command line
    }
}

dkv::ExperimentConfig resolve_config(const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) throw dkv::IoError("cannot open config: " + args.config_path);
    json j;
    in >> j;
    for (const std::string& ov : args.overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            throw dkv::SchemaError("override must look like key=value: " + ov);
        }
        dkv::apply_override(j, ov.substr(0, eq), parse_override_value(ov.substr(eq + 1)));
    }
    if (args.seed >= 0) {
        dkv::apply_override(j, "data.seed", json(static_cast<std::uint64_t>(args.seed)));
        dkv::apply_override(j, "train.seed", json(static_cast<std::uint64_t>(args.seed)));
    }
    return dkv::ExperimentConfig::from_json(j);
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw dkv::IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

std::string dataset_stub(const dkv::ProblemData& pd, std::size_t j) {
    if (pd.train.size() == 1) return "";
    return "_eq" + std::to_string(j + 1);
}

int cmd_gen_data(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto pd = dkv::make_problem_data(cfg);
    fs::create_directories(args.out_dir);
    for (std::size_t j = 0; j < pd.train.size(); ++j) {
        const std::string stub = dataset_stub(pd, j);
        dkv::write_dataset_csv(pd.train[j], (fs::path(args.out_dir) / ("train" + stub + ".csv")).string(),
                               (fs::path(args.out_dir) / ("train" + stub + ".meta.json")).string());
        dkv::write_dataset_csv(pd.test[j], (fs::path(args.out_dir) / ("test" + stub + ".csv")).string(),
                               (fs::path(args.out_dir) / ("test" + stub + ".meta.json")).string());
    }
    std::printf("gen-data ok datasets=%zu train_rows=%zu test_rows=%zu out=%s\n", pd.train.size(),
                pd.train[0].size(), pd.test[0].size(), args.out_dir.c_str());
    return 0;
}

int cmd_train(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    if (!cfg.architecture.deep) {
        std::printf("train ok skipped=shallow out=%s\n", args.out_dir.c_str());
        return 0;
    }
    const auto pd = dkv::make_problem_data(cfg);
    fs::create_directories(args.out_dir);
    double final_loss = 0.0;
    for (std::size_t j = 0; j < pd.train.size(); ++j) {
        const std::string stub = dataset_stub(pd, j);
        const auto arch = cfg.architecture.resolve(pd.train[j].input_dim(), pd.train[j].output_dim());
        dkv::TrainConfig tc = cfg.train;
        if (j > 0) tc.seed = dkv::SeededRng(tc.seed).derive(j).seed();
        const auto trained = dkv::train_deep_kernel(pd.train[j], arch, tc);
        // Kernel-only model file: no centers selected yet.
        dkv::SurrogateModel kernel_only;
        kernel_only.kernel = dkv::DeepKernelModel{arch, trained.params};
        kernel_only.centers = dkv::Matrix(0, pd.train[j].input_dim());
        kernel_only.coefficients = dkv::Matrix(0, pd.train[j].output_dim());
        kernel_only.out_dim = pd.train[j].output_dim();
        dkv::save_model(kernel_only, (fs::path(args.out_dir) / ("kernel" + stub + ".json")).string());
        dkv::write_series_csv((fs::path(args.out_dir) / ("loss" + stub + ".csv")).string(), "epoch",
                              "mean_loss", trained.history);
        final_loss = trained.history.empty() ? 0.0 : trained.history.back();
    }
    std::printf("train ok models=%zu final_loss=%.6e out=%s\n", pd.train.size(), final_loss,
                args.out_dir.c_str());
    return 0;
}

int cmd_greedy(const CommonArgs& args, const std::string& kernel_path) {
    const auto cfg = resolve_config(args);
    const auto pd = dkv::make_problem_data(cfg);
    fs::create_directories(args.out_dir);
    double last_residual = 0.0;
    for (std::size_t j = 0; j < pd.train.size(); ++j) {
        const std::string stub = dataset_stub(pd, j);
        dkv::SurrogateKernel kernel;
        if (!kernel_path.empty()) {
            fs::path base(kernel_path);
            fs::path path = base;
            if (pd.train.size() > 1) {
                path = base.parent_path() / (base.stem().string() + stub + base.extension().string());
            }
            kernel = dkv::load_model(path.string()).kernel;
        } else if (cfg.architecture.deep) {
            const auto arch =
                cfg.architecture.resolve(pd.train[j].input_dim(), pd.train[j].output_dim());
            dkv::SeededRng rng(cfg.train.seed);
            kernel = dkv::DeepKernelModel{arch, dkv::init_params(arch, pd.train[j].x, rng)};
        } else {
            kernel = cfg.architecture.shallow_kernel;
        }
        const auto result = dkv::fit_greedy(kernel, pd.train[j].x, pd.train[j].y, cfg.greedy);
        dkv::save_model(result.model, (fs::path(args.out_dir) / ("model" + stub + ".json")).string());
        dkv::write_series_csv((fs::path(args.out_dir) / ("residuals" + stub + ".csv")).string(),
                              "iteration", "max_residual", result.residual_history);
        last_residual = result.residual_history.empty() ? 0.0 : result.residual_history.back();
    }
    std::printf("greedy ok models=%zu last_max_residual=%.6e out=%s\n", pd.train.size(),
                last_residual, args.out_dir.c_str());
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& model_path) {
    const auto cfg = resolve_config(args);
    const auto pd = dkv::make_problem_data(cfg);
    std::vector<dkv::SurrogateModel> models;
    for (std::size_t j = 0; j < pd.test.size(); ++j) {
        fs::path base(model_path);
        fs::path path = base;
        if (pd.test.size() > 1) {
            path = base.parent_path() /
                   (base.stem().string() + dataset_stub(pd, j) + base.extension().string());
        }
        models.push_back(dkv::load_model(path.string()));
    }
    const auto eval = dkv::evaluate_models(models, pd);
    fs::create_directories(args.out_dir);
    write_json(json{{"e_rel", eval.e_rel}, {"e_rel_p10", eval.p10}, {"e_rel_p90", eval.p90}},
               fs::path(args.out_dir) / "eval.json");
    std::printf("evaluate ok e_rel=%.6e p10=%.6e p90=%.6e out=%s\n", eval.e_rel, eval.p10, eval.p90,
                args.out_dir.c_str());
    return 0;
}

int cmd_cv(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const json selected = dkv::cross_validate(cfg);
    fs::create_directories(args.out_dir);
    write_json(selected, fs::path(args.out_dir) / "selected.json");
    std::printf("cv ok out=%s/selected.json\n", args.out_dir.c_str());
    return 0;
}

int cmd_experiment(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto outcome = dkv::run_experiment(cfg, args.out_dir);
    std::printf("experiment ok e_rel=%.6e t_offline=%.3e t_online=%.3e out=%s\n",
                outcome.record.e_rel, outcome.record.t_offline, outcome.record.t_online,
                args.out_dir.c_str());
    return 0;
}

int cmd_export(const std::string& result_path, const std::string& out_dir) {
    std::ifstream in(result_path);
    if (!in) throw dkv::IoError("cannot open result: " + result_path);
    json j;
    in >> j;
    const auto record = dkv::ResultRecord::from_json(j);
    fs::create_directories(out_dir);
    const bool pair = record.loss_histories.size() > 1;
    for (std::size_t k = 0; k < record.loss_histories.size(); ++k) {
        const std::string stub = pair ? "_eq" + std::to_string(k + 1) : "";
        dkv::write_series_csv((fs::path(out_dir) / ("loss" + stub + ".csv")).string(), "epoch",
                              "mean_loss", record.loss_histories[k]);
        dkv::write_series_csv((fs::path(out_dir) / ("residuals" + stub + ".csv")).string(),
                              "iteration", "max_residual", record.residual_histories[k]);
    }
    std::printf("export ok histories=%zu out=%s\n", record.loss_histories.size(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"greedy deep-kernel surrogate modeling"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, greedy_args, eval_args, cv_args, exp_args;
    std::string kernel_path, model_path = "model.json", result_path, export_out = ".";

    add_common(app.add_subcommand("gen-data", "generate train/test datasets"), gen_args);
    add_common(app.add_subcommand("train", "stage one: optimize the deep kernel"), train_args);
    auto* greedy_cmd = app.add_subcommand("greedy", "stage two: f-greedy center selection");
    add_common(greedy_cmd, greedy_args);
    greedy_cmd->add_option("--kernel", kernel_path, "kernel/model JSON from a train run");
    auto* eval_cmd = app.add_subcommand("evaluate", "relative test error of a saved model");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--model", model_path, "model JSON path")->required();
    add_common(app.add_subcommand("cv", "cross-validate the hyperparameter grid"), cv_args);
    add_common(app.add_subcommand("experiment", "full pipeline with metrics and timing"), exp_args);
    auto* export_cmd = app.add_subcommand("export", "re-emit history CSVs from a result.json");
    export_cmd->add_option("--result", result_path, "result.json path")->required();
    export_cmd->add_option("--out", export_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gen-data")) return cmd_gen_data(gen_args);
        if (app.got_subcommand("train")) return cmd_train(train_args);
        if (app.got_subcommand("greedy")) return cmd_greedy(greedy_args, kernel_path);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_args, model_path);
        if (app.got_subcommand("cv")) return cmd_cv(cv_args);
        if (app.got_subcommand("experiment")) return cmd_experiment(exp_args);
        if (app.got_subcommand("export")) return cmd_export(result_path, export_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
