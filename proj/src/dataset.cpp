#include "dkvkoga/dataset.hpp"

#include "dkvkoga/errors.hpp"

namespace dkv {

void Dataset::validate() const {
    if (x.rows() != y.rows()) throw DimensionMismatch("dataset: input and target row counts differ");
    x.require_finite("dataset inputs");
    y.require_finite("dataset targets");
}

Dataset Dataset::rows(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.meta = meta;
    out.x = Matrix(indices.size(), x.cols());
    out.y = Matrix(indices.size(), y.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out.x(r, c) = x(indices[r], c);
        for (std::size_t c = 0; c < y.cols(); ++c) out.y(r, c) = y(indices[r], c);
    }
    return out;
}

} // namespace dkv
