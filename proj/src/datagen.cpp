#include "dkvkoga/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "dkvkoga/errors.hpp"

namespace dkv {

// ---------------------------------------------------------------------------
// Model problems
// ---------------------------------------------------------------------------

ModelProblem model_problem_from_name(const std::string& name) {
    if (name == "f2") return ModelProblem::f2;
    if (name == "f3") return ModelProblem::f3;
    if (name == "f4") return ModelProblem::f4;
    throw SchemaError("unknown model problem: " + name);
}

std::string model_problem_name(ModelProblem id) {
    switch (id) {
        case ModelProblem::f2: return "f2";
        case ModelProblem::f3: return "f3";
        case ModelProblem::f4: return "f4";
    }
    return "f2";
}

std::size_t model_problem_dim(ModelProblem id) {
    switch (id) {
        case ModelProblem::f2: return 2;
        case ModelProblem::f3: return 3;
        case ModelProblem::f4: return 4;
    }
    return 2;
}

double eval_model_problem(ModelProblem id, std::span<const double> x) {
    if (x.size() != model_problem_dim(id)) {
        throw DimensionMismatch("eval_model_problem: wrong input dimension");
    }
    double bump = 0.0;
    for (double xi : x) bump += (xi - 0.5) * (xi - 0.5);
    bump = std::exp(-4.0 * bump);
    switch (id) {
        case ModelProblem::f2:
            return bump;
        case ModelProblem::f3:
            return bump + 2.0 * std::fabs(x[0] - 0.5);
        case ModelProblem::f4: {
            const double q = (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.3) * (x[1] - 0.3);
            return bump + std::exp(-9.0 * q);
        }
    }
    return bump;
}

Dataset model_problem_dataset(ModelProblem id, std::size_t n, std::uint64_t seed) {
    const std::size_t d = model_problem_dim(id);
    SeededRng rng(seed);
    const std::vector<double> low(d, 0.0), high(d, 1.0);
    Dataset ds;
    ds.x = sample_uniform(rng, low, high, n);
    ds.y = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) ds.y(i, 0) = eval_model_problem(id, ds.x.row_span(i));
    ds.meta = {model_problem_name(id), seed, low, high};
    return ds;
}

// ---------------------------------------------------------------------------
// Parametrized ODEs
// ---------------------------------------------------------------------------

OdeSystem ode_system_from_name(const std::string& name) {
    if (name == "lotka_volterra") return OdeSystem::lotka_volterra;
    if (name == "brusselator") return OdeSystem::brusselator;
    throw SchemaError("unknown ODE system: " + name);
}

std::string ode_system_name(OdeSystem system) {
    return system == OdeSystem::lotka_volterra ? "lotka_volterra" : "brusselator";
}

std::size_t ode_param_dim(OdeSystem system) {
    return system == OdeSystem::lotka_volterra ? 2 : 1;
}

std::pair<std::vector<double>, std::vector<double>> ode_param_domain(OdeSystem system) {
    if (system == OdeSystem::lotka_volterra) return {{0.8, 0.8}, {1.2, 1.2}};
    return {{0.0}, {5.0}};
}

OdeSpec lotka_volterra_spec(double mu1, double mu2) {
    constexpr double slack = 1e-12;
    if (mu1 < 0.8 - slack || mu1 > 1.2 + slack || mu2 < 0.8 - slack || mu2 > 1.2 + slack) {
        throw InvalidBox("lotka_volterra_spec: mu outside [0.8, 1.2]^2");
    }
    OdeSpec spec;
    spec.system = OdeSystem::lotka_volterra;
    spec.mu = {mu1, mu2};
    spec.y0 = {2.0, 4.0};
    return spec;
}

OdeSpec brusselator_spec(double mu) {
    if (mu < 0.0 || mu > 5.0) throw InvalidBox("brusselator_spec: mu outside [0, 5]");
    OdeSpec spec;
    spec.system = OdeSystem::brusselator;
    spec.mu = {mu};
    spec.y0 = {1.0, 1.0};
    return spec;
}

std::array<double, 2> ode_rhs(const OdeSpec& spec, double /*t*/, std::array<double, 2> u) {
    if (spec.system == OdeSystem::lotka_volterra) {
        const double mu1 = spec.mu[0], mu2 = spec.mu[1];
        return {mu1 * u[0] - u[0] * u[1], -mu2 * u[1] + u[0] * u[1]};
    }
    const double mu = spec.mu[0];
    return {1.0 + u[0] * (u[0] * u[1] - 1.0 - mu), u[0] * (mu - u[0] * u[1])};
}

TimeGrid TimeGrid::standard() {
    TimeGrid grid;
    grid.t.resize(301);
    for (std::size_t i = 0; i < grid.t.size(); ++i) grid.t[i] = static_cast<double>(i) * 0.1;
    return grid;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 5179.0 / 57600.0, kE3 = 7571.0 / 16695.0, kE4 = 393.0 / 640.0,
                 kE5 = -92097.0 / 339200.0, kE6 = 187.0 / 2100.0, kE7 = 1.0 / 40.0;

using State = std::array<double, 2>;

State axpy2(State y, double a, State x) {
    return {y[0] + a * x[0], y[1] + a * x[1]};
}

} // namespace

Matrix integrate(const OdeSpec& spec, const TimeGrid& grid, double rtol, double atol) {
    return integrate_rhs([&spec](double t, State u) { return ode_rhs(spec, t, u); }, spec.y0, grid,
                         rtol, atol);
}

Matrix integrate_rhs(const OdeRhsFn& rhs, State y0, const TimeGrid& grid, double rtol,
                     double atol) {
    if (grid.t.empty()) throw std::invalid_argument("integrate: empty time grid");
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw std::invalid_argument("integrate: tolerances must be positive");
    }
    const double t0 = grid.t.front();
    const double t_end = grid.t.back();

    std::vector<double> knots_t{t0};
    std::vector<State> knots_y{y0};

    double t = t0;
    State y = y0;
    double h = (t_end - t0) / 100.0;
    const double h_min = 1e-14 * std::max(t_end - t0, 1.0);
    // Never step across a grid time: grid values then come from accepted
    // integrator states rather than from wide-interval interpolation.
    std::size_t next_grid = 1;

    while (t < t_end) {
        while (next_grid + 1 < grid.t.size() && grid.t[next_grid] <= t + h_min) ++next_grid;
        h = std::min(h, t_end - t);
        if (grid.t[next_grid] > t) h = std::min(h, grid.t[next_grid] - t);
        if (h < h_min) throw StepSizeUnderflow("integrate: step size underflow");

        const State k1 = rhs(t, y);
        const State k2 = rhs(t + 0.2 * h, axpy2(y, h * kA21, k1));
        State u = axpy2(axpy2(y, h * kA31, k1), h * kA32, k2);
        const State k3 = rhs(t + 0.3 * h, u);
        u = axpy2(axpy2(axpy2(y, h * kA41, k1), h * kA42, k2), h * kA43, k3);
        const State k4 = rhs(t + 0.8 * h, u);
        u = axpy2(axpy2(axpy2(axpy2(y, h * kA51, k1), h * kA52, k2), h * kA53, k3), h * kA54, k4);
        const State k5 = rhs(t + 8.0 / 9.0 * h, u);
        u = axpy2(axpy2(axpy2(axpy2(axpy2(y, h * kA61, k1), h * kA62, k2), h * kA63, k3),
                        h * kA64, k4),
                  h * kA65, k5);
        const State k6 = rhs(t + h, u);

        State y5 = y;
        y5 = axpy2(y5, h * kB1, k1);
        y5 = axpy2(y5, h * kB3, k3);
        y5 = axpy2(y5, h * kB4, k4);
        y5 = axpy2(y5, h * kB5, k5);
        y5 = axpy2(y5, h * kB6, k6);
        const State k7 = rhs(t + h, y5);

        State y4 = y;
        y4 = axpy2(y4, h * kE1, k1);
        y4 = axpy2(y4, h * kE3, k3);
        y4 = axpy2(y4, h * kE4, k4);
        y4 = axpy2(y4, h * kE5, k5);
        y4 = axpy2(y4, h * kE6, k6);
        y4 = axpy2(y4, h * kE7, k7);

        double err = 0.0;
        for (std::size_t c = 0; c < 2; ++c) {
            const double scale = atol + rtol * std::max(std::fabs(y[c]), std::fabs(y5[c]));
            const double e = (y5[c] - y4[c]) / scale;
            err += e * e;
        }
        err = std::sqrt(err / 2.0);

        if (err <= 1.0) {
            t += h;
            y = y5;
            knots_t.push_back(t);
            knots_y.push_back(y);
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }

    Matrix out(grid.size(), 2);
    if (knots_t.size() == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out(i, 0) = y0[0];
            out(i, 1) = y0[1];
        }
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ti = grid.t[i];
        while (seg + 2 < knots_t.size() && knots_t[seg + 1] < ti) ++seg;
        const double ta = knots_t[seg], tb = knots_t[seg + 1];
        const double wgt = ta == tb ? 0.0 : (ti - ta) / (tb - ta);
        for (std::size_t c = 0; c < 2; ++c) {
            out(i, c) = wgt == 0.0 ? knots_y[seg][c]
                                   : knots_y[seg][c] + wgt * (knots_y[seg + 1][c] - knots_y[seg][c]);
        }
    }
    return out;
}

Matrix lv_parameter_grid(std::size_t side) {
    if (side < 1) throw std::invalid_argument("lv_parameter_grid: side must be >= 1");
    Matrix grid(side * side, 2);
    const auto lerp = [&](std::size_t i) {
        if (side == 1) return 1.0;
        const double w = static_cast<double>(i) / static_cast<double>(side - 1);
        return 0.8 * (1.0 - w) + 1.2 * w; // endpoints exact
    };
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            grid(i * side + j, 0) = lerp(i);
            grid(i * side + j, 1) = lerp(j);
        }
    }
    return grid;
}

Matrix brusselator_parameter_grid(std::size_t n) {
    if (n < 1) throw std::invalid_argument("brusselator_parameter_grid: n must be >= 1");
    Matrix grid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid(i, 0) = n == 1 ? 2.5 : 5.0 * static_cast<double>(i) / (n - 1);
    }
    return grid;
}

Matrix random_parameters(OdeSystem system, std::size_t n, std::uint64_t seed) {
    SeededRng rng(seed);
    const auto [low, high] = ode_param_domain(system);
    return sample_uniform(rng, low, high, n);
}

namespace {

OdeSpec spec_for(OdeSystem system, const Matrix& mu_grid, std::size_t row) {
    if (system == OdeSystem::lotka_volterra) {
        return lotka_volterra_spec(mu_grid(row, 0), mu_grid(row, 1));
    }
    return brusselator_spec(mu_grid(row, 0));
}

} // namespace

std::pair<Dataset, Dataset> build_dt_dataset(OdeSystem system, const Matrix& mu_grid,
                                             const TimeGrid& grid) {
    if (mu_grid.cols() != ode_param_dim(system)) {
        throw DimensionMismatch("build_dt_dataset: parameter width mismatch");
    }
    const std::size_t n = mu_grid.rows(), nt = grid.size();
    Dataset eq1, eq2;
    eq1.x = mu_grid;
    eq2.x = mu_grid;
    eq1.y = Matrix(n, nt);
    eq2.y = Matrix(n, nt);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix traj = integrate(spec_for(system, mu_grid, i), grid);
        for (std::size_t k = 0; k < nt; ++k) {
            eq1.y(i, k) = traj(k, 0);
            eq2.y(i, k) = traj(k, 1);
        }
    }
    eq1.meta.generator = "ode_dt:" + ode_system_name(system) + ":eq1";
    eq2.meta.generator = "ode_dt:" + ode_system_name(system) + ":eq2";
    return {std::move(eq1), std::move(eq2)};
}

std::pair<Dataset, Dataset> build_ct_dataset(OdeSystem system, const Matrix& mu_grid,
                                             const TimeGrid& grid) {
    if (mu_grid.cols() != ode_param_dim(system)) {
        throw DimensionMismatch("build_ct_dataset: parameter width mismatch");
    }
    const std::size_t n = mu_grid.rows(), nt = grid.size(), p = mu_grid.cols();
    Dataset eq1, eq2;
    eq1.x = Matrix(n * nt, 1 + p);
    eq1.y = Matrix(n * nt, 1);
    eq2.y = Matrix(n * nt, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix traj = integrate(spec_for(system, mu_grid, i), grid);
        for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t r = i * nt + k;
            eq1.x(r, 0) = grid.t[k];
            for (std::size_t c = 0; c < p; ++c) eq1.x(r, 1 + c) = mu_grid(i, c);
            eq1.y(r, 0) = traj(k, 0);
            eq2.y(r, 0) = traj(k, 1);
        }
    }
    eq2.x = eq1.x;
    eq1.meta.generator = "ode_ct:" + ode_system_name(system) + ":eq1";
    eq2.meta.generator = "ode_ct:" + ode_system_name(system) + ":eq2";
    return {std::move(eq1), std::move(eq2)};
}

// ---------------------------------------------------------------------------
// Synthetic breakthrough curves
// ---------------------------------------------------------------------------

VoxelSample synthetic_voxel_sample(SeededRng& rng, std::size_t n) {
    if (n < 4) throw std::invalid_argument("synthetic_voxel_sample: resolution must be >= 4");
    const std::size_t voxels = n * n * n;

    // Smooth random field: a handful of Gaussian bumps.
    constexpr std::size_t kBumps = 8;
    std::array<std::array<double, 3>, kBumps> center;
    std::array<double, kBumps> inv_two_sigma2, weight;
    for (std::size_t b = 0; b < kBumps; ++b) {
        for (auto& c : center[b]) c = rng.uniform01();
        const double sigma = rng.uniform(0.15, 0.4);
        inv_two_sigma2[b] = 1.0 / (2.0 * sigma * sigma);
        weight[b] = rng.uniform(-1.0, 1.0);
    }
    const double tau_pore = rng.uniform(0.55, 0.8);
    const double tau_wash = tau_pore - rng.uniform(0.1, 0.3);

    std::vector<double> field(voxels);
    double fmin = 1e300, fmax = -1e300;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k, ++idx) {
                const double z = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
                double v = 0.0;
                for (std::size_t b = 0; b < kBumps; ++b) {
                    const double dx = x - center[b][0], dy = y - center[b][1], dz = z - center[b][2];
                    v += weight[b] * std::exp(-(dx * dx + dy * dy + dz * dz) * inv_two_sigma2[b]);
                }
                field[idx] = v;
                fmin = std::min(fmin, v);
                fmax = std::max(fmax, v);
            }
        }
    }

    VoxelSample sample;
    sample.geometry.assign(2 * voxels, 0);
    const double span = fmax > fmin ? fmax - fmin : 1.0;
    std::size_t pore_count = 0, wash_count = 0;
    for (std::size_t v = 0; v < voxels; ++v) {
        const double normalized = (field[v] - fmin) / span;
        if (normalized > tau_pore) {
            sample.geometry[v] = 1;
            ++pore_count;
        } else if (normalized > tau_wash) {
            sample.geometry[voxels + v] = 1;
            ++wash_count;
        }
    }
    sample.porosity = static_cast<double>(pore_count) / static_cast<double>(voxels);
    sample.washcoat_fraction = static_cast<double>(wash_count) / static_cast<double>(voxels);

    // Saturating curve: onset moves earlier and the rise steepens with
    // porosity, so more open geometries break through sooner.
    const double p_hat = std::min(sample.porosity / 0.5, 1.0);
    const double onset = 0.1 + 0.6 * (1.0 - p_hat);
    const double steepness = 6.0 + 18.0 * p_hat + 4.0 * sample.washcoat_fraction;
    sample.curve.resize(kCurveSteps);
    for (std::size_t j = 0; j < kCurveSteps; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(kCurveSteps - 1);
        sample.curve[j] = 1.0 - std::exp(-steepness * std::max(0.0, t - onset));
    }
    return sample;
}

std::vector<double> PcaFeatureMap::transform(std::span<const double> x) const {
    if (x.size() != u.rows()) throw DimensionMismatch("pca transform: input length differs");
    std::vector<double> out(u.cols(), 0.0);
    for (std::size_t i = 0; i < u.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < u.cols(); ++j) out[j] += u(i, j) * xi;
    }
    return out;
}

Matrix PcaFeatureMap::transform_rows(const Matrix& samples) const {
    return matmul(samples, u);
}

PcaFeatureMap pca_feature_map(const Matrix& z, std::size_t r) {
    if (z.cols() < r) throw TooFewTrainingPoints("pca_feature_map: fewer samples than features");
    TruncatedSvd svd = truncated_svd(z, r);
    return {std::move(svd.u), std::move(svd.sigma)};
}

Matrix geometry_rows(const std::vector<VoxelSample>& samples) {
    if (samples.empty()) throw EmptyTrainingSet("geometry_rows: no samples");
    const std::size_t d = samples[0].geometry.size();
    Matrix rows(samples.size(), d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].geometry.size() != d) {
            throw DimensionMismatch("geometry_rows: inconsistent sample sizes");
        }
        for (std::size_t j = 0; j < d; ++j) rows(i, j) = samples[i].geometry[j];
    }
    return rows;
}

PcaFeatureMap pca_feature_map(const std::vector<VoxelSample>& samples, std::size_t r) {
    return pca_feature_map(geometry_rows(samples).transposed(), r);
}

BreakthroughData breakthrough_synthetic(std::size_t n_samples, std::size_t resolution,
                                        std::size_t pca_features, std::uint64_t seed) {
    BreakthroughData data;
    SeededRng rng(seed);
    data.samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        data.samples.push_back(synthetic_voxel_sample(rng, resolution));
    }
    data.pca = pca_feature_map(data.samples, pca_features);
    data.dataset.x = data.pca.transform_rows(geometry_rows(data.samples));
    data.dataset.y = Matrix(n_samples, kCurveSteps);
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (std::size_t j = 0; j < kCurveSteps; ++j) data.dataset.y(i, j) = data.samples[i].curve[j];
    }
    data.dataset.meta.generator = "breakthrough_synthetic";
    data.dataset.meta.seed = seed;
    return data;
}

} // namespace dkv
