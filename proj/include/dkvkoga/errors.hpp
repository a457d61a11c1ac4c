#pragma once

#include <stdexcept>
#include <string>

namespace dkv {

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidBox : std::invalid_argument {
    explicit InvalidBox(const std::string& what) : std::invalid_argument(what) {}
};

struct ConvergenceFailure : std::runtime_error {
    explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};

struct TooFewTrainingPoints : std::invalid_argument {
    explicit TooFewTrainingPoints(const std::string& what) : std::invalid_argument(what) {}
};

struct GraphConstructionError : std::logic_error {
    explicit GraphConstructionError(const std::string& what) : std::logic_error(what) {}
};

struct EmptyTrainingSet : std::invalid_argument {
    explicit EmptyTrainingSet(const std::string& what) : std::invalid_argument(what) {}
};

struct DegenerateKernel : std::runtime_error {
    explicit DegenerateKernel(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroNormTarget : std::invalid_argument {
    explicit ZeroNormTarget(const std::string& what) : std::invalid_argument(what) {}
};

struct StepSizeUnderflow : std::runtime_error {
    explicit StepSizeUnderflow(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct VersionMismatch : std::runtime_error {
    explicit VersionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dkv
