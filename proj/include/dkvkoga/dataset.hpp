#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkvkoga/matrix.hpp"

namespace dkv {

struct DatasetMeta {
    std::string generator;
    std::uint64_t seed = 0;
    std::vector<double> low;  // domain box, when meaningful
    std::vector<double> high;
};

/// Paired inputs and targets; row i of x maps to row i of y.
struct Dataset {
    Matrix x;
    Matrix y;
    DatasetMeta meta;

    std::size_t size() const { return x.rows(); }
    std::size_t input_dim() const { return x.cols(); }
    std::size_t output_dim() const { return y.cols(); }
    void validate() const;

    Dataset rows(const std::vector<std::size_t>& indices) const;
};

} // namespace dkv
