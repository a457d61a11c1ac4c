#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "dkvkoga/dataset.hpp"
#include "dkvkoga/linalg.hpp"
#include "dkvkoga/matrix.hpp"
#include "dkvkoga/rng.hpp"

namespace dkv {

// ---------------------------------------------------------------------------
// Model problems
// ---------------------------------------------------------------------------

enum class ModelProblem { f2, f3, f4 };

ModelProblem model_problem_from_name(const std::string& name);
std::string model_problem_name(ModelProblem id);
std::size_t model_problem_dim(ModelProblem id);

/// Closed forms on [0,1]^d:
///   f2(x) = exp(-4 sum (x_i - 1/2)^2),                          d = 2
///   f3(x) = exp(-4 sum (x_i - 1/2)^2) + 2|x_1 - 1/2|,           d = 3
///   f4(x) = exp(-4 sum (x_i - 1/2)^2)
///         + exp(-9 sum_{i<=2} (x_i - 3/10)^2),                  d = 4
double eval_model_problem(ModelProblem id, std::span<const double> x);

/// n uniform samples on [0,1]^d with targets from the closed form.
Dataset model_problem_dataset(ModelProblem id, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Parametrized ODEs
// ---------------------------------------------------------------------------

enum class OdeSystem { lotka_volterra, brusselator };

OdeSystem ode_system_from_name(const std::string& name);
std::string ode_system_name(OdeSystem system);
std::size_t ode_param_dim(OdeSystem system);
std::pair<std::vector<double>, std::vector<double>> ode_param_domain(OdeSystem system);

struct OdeSpec {
    OdeSystem system = OdeSystem::lotka_volterra;
    std::vector<double> mu;
    std::array<double, 2> y0{0.0, 0.0};
    std::array<double, 2> t_span{0.0, 30.0};
};

/// Canonical specs: Lotka-Volterra starts at (2, 4) with mu in [0.8, 1.2]^2;
/// Brusselator starts at (1, 1) with mu in [0, 5].
OdeSpec lotka_volterra_spec(double mu1, double mu2);
OdeSpec brusselator_spec(double mu);

std::array<double, 2> ode_rhs(const OdeSpec& spec, double t, std::array<double, 2> u);

/// Equidistant grid t_i = i/10 for i = 0..300.
struct TimeGrid {
    std::vector<double> t;
    static TimeGrid standard();
    std::size_t size() const { return t.size(); }
};

/// Adaptive Dormand-Prince 5(4) trajectory, linearly interpolated onto the
/// grid. Row i holds the state at grid.t[i]; row 0 is y0 exactly.
Matrix integrate(const OdeSpec& spec, const TimeGrid& grid, double rtol = 1e-8,
                 double atol = 1e-10);

using OdeRhsFn = std::function<std::array<double, 2>(double, std::array<double, 2>)>;

/// Same integrator over an arbitrary right-hand side.
Matrix integrate_rhs(const OdeRhsFn& rhs, std::array<double, 2> y0, const TimeGrid& grid,
                     double rtol = 1e-8, double atol = 1e-10);

/// Equidistant tensor grid of side x side points over the LV parameter box.
Matrix lv_parameter_grid(std::size_t side);
/// n equidistant points over the Brusselator parameter interval.
Matrix brusselator_parameter_grid(std::size_t n);
/// Uniform random parameters inside the system's domain.
Matrix random_parameters(OdeSystem system, std::size_t n, std::uint64_t seed);

/// Discrete-time datasets: one per equation, mapping mu to the full grid
/// trajectory of that component.
std::pair<Dataset, Dataset> build_dt_dataset(OdeSystem system, const Matrix& mu_grid,
                                             const TimeGrid& grid);
/// Continuous-time datasets: one per equation, mapping (t, mu) to the scalar
/// component value; rows iterate mu outer, grid time inner.
std::pair<Dataset, Dataset> build_ct_dataset(OdeSystem system, const Matrix& mu_grid,
                                             const TimeGrid& grid);

// ---------------------------------------------------------------------------
// Synthetic breakthrough curves
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCurveSteps = 500;

/// Synthetic stand-in for pore-scale geometry data: two boolean channels
/// (pore, washcoat) from thresholding a smooth random field on an n^3 grid,
/// and a saturating breakthrough curve whose onset moves earlier and whose
/// rise steepens as porosity grows.
struct VoxelSample {
    std::vector<std::uint8_t> geometry; // 2 * n^3, channel-major
    std::vector<double> curve;          // kCurveSteps values in [0, 1)
    double porosity = 0.0;
    double washcoat_fraction = 0.0;
};

VoxelSample synthetic_voxel_sample(SeededRng& rng, std::size_t n);

/// Linear feature map x -> U_r^T x from the truncated SVD of the column-wise
/// sample matrix Z.
struct PcaFeatureMap {
    Matrix u; // D x r
    std::vector<double> singular_values;

    std::size_t feature_count() const { return u.cols(); }
    std::vector<double> transform(std::span<const double> x) const;
    /// N x D row-wise samples to N x r features.
    Matrix transform_rows(const Matrix& samples) const;
};

/// z holds one flattened sample per column.
PcaFeatureMap pca_feature_map(const Matrix& z, std::size_t r = 6);
PcaFeatureMap pca_feature_map(const std::vector<VoxelSample>& samples, std::size_t r = 6);

Matrix geometry_rows(const std::vector<VoxelSample>& samples);

/// Full synthetic pipeline: sample geometries, fit the PCA map on all of
/// them, and emit the feature/curve dataset.
struct BreakthroughData {
    std::vector<VoxelSample> samples;
    PcaFeatureMap pca;
    Dataset dataset; // X: N x r features, Y: N x kCurveSteps curves
};

BreakthroughData breakthrough_synthetic(std::size_t n_samples, std::size_t resolution,
                                        std::size_t pca_features, std::uint64_t seed);

} // namespace dkv
