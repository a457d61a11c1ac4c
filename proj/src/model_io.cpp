#include "dkvkoga/model_io.hpp"

#include <fstream>

#include "dkvkoga/errors.hpp"

namespace dkv {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        throw SchemaError("matrix: expected object with rows/cols/data");
    }
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const json& data = j.at("data");
    if (!data.is_array() || data.size() != rows) throw SchemaError("matrix: bad row count");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = data[i];
        if (!row.is_array() || row.size() != cols) throw SchemaError("matrix: bad column count");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
    }
    m.require_finite("matrix from json");
    return m;
}

json kernel_to_json(const ScalarKernel& k) {
    return json{{"family", family_name(k.family)}, {"epsilon", k.epsilon}};
}

ScalarKernel kernel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family") || !j.contains("epsilon")) {
        throw SchemaError("kernel: expected {family, epsilon}");
    }
    ScalarKernel k;
    k.family = family_from_name(j.at("family").get<std::string>());
    k.epsilon = j.at("epsilon").get<double>();
    if (!(k.epsilon > 0.0)) throw SchemaError("kernel: epsilon must be positive");
    return k;
}

namespace {

json deep_kernel_to_json(const DeepKernelModel& deep) {
    json j;
    j["type"] = "deep";
    j["layers"] = deep.arch.layers;
    j["dims"] = deep.arch.dims;
    j["center_count"] = deep.arch.center_count;
    j["out_dim"] = deep.arch.out_dim;
    j["activation"] = kernel_to_json(deep.arch.activation);
    j["outer"] = kernel_to_json(deep.arch.outer);
    j["w"] = json::array();
    for (const Matrix& w : deep.params.w) j["w"].push_back(matrix_to_json(w));
    j["a"] = json::array();
    for (const Matrix& a : deep.params.a) j["a"].push_back(matrix_to_json(a));
    j["z1"] = matrix_to_json(deep.params.z1);
    return j;
}

DeepKernelModel deep_kernel_from_json(const json& j) {
    DeepKernelModel deep;
    deep.arch.layers = j.at("layers").get<std::size_t>();
    deep.arch.dims = j.at("dims").get<std::vector<std::size_t>>();
    deep.arch.center_count = j.at("center_count").get<std::size_t>();
    deep.arch.out_dim = j.at("out_dim").get<std::size_t>();
    deep.arch.activation = kernel_from_json(j.at("activation"));
    deep.arch.outer = kernel_from_json(j.at("outer"));
    deep.arch.validate();
    for (const json& w : j.at("w")) deep.params.w.push_back(matrix_from_json(w));
    for (const json& a : j.at("a")) deep.params.a.push_back(matrix_from_json(a));
    deep.params.z1 = matrix_from_json(j.at("z1"));
    return deep;
}

} // namespace

json model_to_json(const SurrogateModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    if (const auto* shallow = std::get_if<ScalarKernel>(&model.kernel)) {
        j["kernel"] = json{{"type", "shallow"}, {"spec", kernel_to_json(*shallow)}};
    } else {
        j["kernel"] = deep_kernel_to_json(std::get<DeepKernelModel>(model.kernel));
    }
    j["centers"] = matrix_to_json(model.centers);
    j["coefficients"] = matrix_to_json(model.coefficients);
    j["gamma"] = model.gamma;
    j["out_dim"] = model.out_dim;
    return j;
}

SurrogateModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("format_version")) {
        throw SchemaError("model: missing format_version");
    }
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
        throw VersionMismatch("model: unsupported format_version");
    }
    try {
        SurrogateModel model;
        const json& kernel = j.at("kernel");
        const std::string type = kernel.at("type").get<std::string>();
        if (type == "shallow") {
            model.kernel = kernel_from_json(kernel.at("spec"));
        } else if (type == "deep") {
            model.kernel = deep_kernel_from_json(kernel);
        } else {
            throw SchemaError("model: unknown kernel type " + type);
        }
        model.centers = matrix_from_json(j.at("centers"));
        model.coefficients = matrix_from_json(j.at("coefficients"));
        model.gamma = j.at("gamma").get<double>();
        model.out_dim = j.at("out_dim").get<std::size_t>();
        if (model.coefficients.rows() != model.centers.rows()) {
            throw SchemaError("model: coefficient rows differ from centers");
        }
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model: ") + e.what());
    }
}

void save_model(const SurrogateModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

SurrogateModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model parse: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace dkv
