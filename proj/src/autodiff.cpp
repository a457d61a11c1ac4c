#include "dkvkoga/autodiff.hpp"

#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv::ad {

Var Tape::push(Node node) {
    for (int p : node.parent) {
        if (p >= 0 && nodes_[static_cast<std::size_t>(p)].needs_grad) node.needs_grad = true;
    }
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Var v) {
    if (!v.valid() || v.idx >= static_cast<int>(nodes_.size())) {
        throw GraphConstructionError("tape: invalid node handle");
    }
    return nodes_[static_cast<std::size_t>(v.idx)];
}

const Tape::Node& Tape::at(Var v) const {
    return const_cast<Tape*>(this)->at(v);
}

const Matrix& Tape::value(Var v) const { return at(v).value; }

Matrix Tape::gradient(Var v) const {
    const Node& n = at(v);
    if (n.adjoint.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.adjoint;
}

void Tape::accumulate(int idx, const Matrix& grad) {
    Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (!n.needs_grad && n.op != Op::leaf) return;
    if (n.adjoint.empty()) {
        n.adjoint = grad;
    } else {
        n.adjoint += grad;
    }
}

Var Tape::constant(Matrix value) {
    Node n{Op::constant, std::move(value)};
    return push(std::move(n));
}

Var Tape::leaf(Matrix value) {
    Node n{Op::leaf, std::move(value)};
    n.needs_grad = true;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    Node n{Op::add, at(a).value + at(b).value};
    n.parent[0] = a.idx;
    n.parent[1] = b.idx;
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    Node n{Op::sub, at(a).value - at(b).value};
    n.parent[0] = a.idx;
    n.parent[1] = b.idx;
    return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
    Node n{Op::scale, s * at(a).value};
    n.parent[0] = a.idx;
    n.scalar = s;
    return push(std::move(n));
}

Var Tape::add_scaled_identity(Var a, double s) {
    Matrix v = at(a).value;
    dkv::add_scaled_identity(v, s);
    Node n{Op::add_scaled_identity, std::move(v)};
    n.parent[0] = a.idx;
    n.scalar = s;
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    Node n{Op::matmul, dkv::matmul(at(a).value, at(b).value)};
    n.parent[0] = a.idx;
    n.parent[1] = b.idx;
    return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
    Node n{Op::matmul_nt, dkv::matmul_nt(at(a).value, at(b).value)};
    n.parent[0] = a.idx;
    n.parent[1] = b.idx;
    return push(std::move(n));
}

Var Tape::gram(Var features, const ScalarKernel& kernel) {
    Node n{Op::gram, dkv::gram(kernel, at(features).value)};
    n.parent[0] = features.idx;
    n.kernel = kernel;
    return push(std::move(n));
}

Var Tape::activation(Var z, Var centers, Var coef, const ScalarKernel& kernel) {
    const Matrix& zv = at(z).value;
    const Matrix& cv = at(centers).value;
    const Matrix& av = at(coef).value;
    const std::size_t rows = zv.rows(), d = zv.cols(), m = cv.rows();
    if (cv.cols() != d) throw GraphConstructionError("activation: center width differs from input");
    if (av.rows() != d || av.cols() != m) {
        throw GraphConstructionError("activation: coefficient shape must be (dim x centers)");
    }

    Node n{Op::activation};
    n.kernel = kernel;
    // Cache per (p, j, i): kernel value then slope/r, shared with backward.
    n.cache.resize(2 * rows * d * m);
    Matrix out(rows, d);
    std::size_t c = 0;
    for (std::size_t p = 0; p < rows; ++p) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double diff = zv(p, j) - cv(i, j);
                const auto [k, g] = kernel_value_and_slope(kernel, diff * diff);
                n.cache[c++] = k;
                n.cache[c++] = g;
                acc += k * av(j, i);
            }
            out(p, j) = acc;
        }
    }
    n.value = std::move(out);
    n.parent[0] = z.idx;
    n.parent[1] = centers.idx;
    n.parent[2] = coef.idx;
    return push(std::move(n));
}

std::shared_ptr<CholeskyFactor> Tape::factor_of(Var a, double max_jitter) {
    Node& n = at(a);
    if (!n.factor) {
        n.factor = std::make_shared<CholeskyFactor>(cholesky(n.value, max_jitter));
    }
    return n.factor;
}

Var Tape::spd_solve(Var a, Var b, double max_jitter) {
    auto factor = factor_of(a, max_jitter);
    Node n{Op::spd_solve, factor->solve(at(b).value)};
    n.parent[0] = a.idx;
    n.parent[1] = b.idx;
    n.factor = std::move(factor);
    return push(std::move(n));
}

Var Tape::inverse_diagonal(Var a, double max_jitter) {
    auto factor = factor_of(a, max_jitter);
    const auto diag = factor->inverse_diagonal();
    Node n{Op::inverse_diagonal, Matrix::column(diag)};
    n.parent[0] = a.idx;
    n.factor = std::move(factor);
    return push(std::move(n));
}

Var Tape::rowwise_divide(Var a, Var q) {
    const Matrix& av = at(a).value;
    const Matrix& qv = at(q).value;
    if (qv.cols() != 1 || qv.rows() != av.rows()) {
        throw GraphConstructionError("rowwise_divide: divisor must be a column of matching height");
    }
    Matrix out = av;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        simd::active().scal(1.0 / qv(i, 0), out.row(i), out.cols());
    }
    Node n{Op::rowwise_divide, std::move(out)};
    n.parent[0] = a.idx;
    n.parent[1] = q.idx;
    return push(std::move(n));
}

Var Tape::sum_squares(Var a) {
    const Matrix& av = at(a).value;
    Matrix out(1, 1);
    out(0, 0) = simd::active().sumsq(av.data(), av.size());
    Node n{Op::sum_squares, std::move(out)};
    n.parent[0] = a.idx;
    return push(std::move(n));
}

Var Tape::sum(Var a) {
    const Matrix& av = at(a).value;
    Matrix out(1, 1);
    out(0, 0) = simd::active().sum(av.data(), av.size());
    Node n{Op::sum, std::move(out)};
    n.parent[0] = a.idx;
    return push(std::move(n));
}

void Tape::backward(Var root) {
    Node& r = at(root);
    if (r.value.rows() != 1 || r.value.cols() != 1) {
        throw GraphConstructionError("backward: root must be scalar (1x1)");
    }
    for (Node& n : nodes_) n.adjoint = Matrix();
    r.adjoint = Matrix(1, 1);
    r.adjoint(0, 0) = 1.0;

    for (std::size_t rev = nodes_.size(); rev-- > 0;) {
        Node& n = nodes_[rev];
        if (n.adjoint.empty()) continue;
        const Matrix& out_bar = n.adjoint;
        switch (n.op) {
            case Op::constant:
            case Op::leaf:
                break;
            case Op::add:
                accumulate(n.parent[0], out_bar);
                accumulate(n.parent[1], out_bar);
                break;
            case Op::sub:
                accumulate(n.parent[0], out_bar);
                accumulate(n.parent[1], -1.0 * out_bar);
                break;
            case Op::scale:
                accumulate(n.parent[0], n.scalar * out_bar);
                break;
            case Op::add_scaled_identity:
                accumulate(n.parent[0], out_bar);
                break;
            case Op::matmul: {
                const Matrix& a = nodes_[n.parent[0]].value;
                const Matrix& b = nodes_[n.parent[1]].value;
                accumulate(n.parent[0], dkv::matmul_nt(out_bar, b));
                accumulate(n.parent[1], dkv::matmul_tn(a, out_bar));
                break;
            }
            case Op::matmul_nt: {
                const Matrix& a = nodes_[n.parent[0]].value;
                const Matrix& b = nodes_[n.parent[1]].value;
                accumulate(n.parent[0], dkv::matmul(out_bar, b));
                accumulate(n.parent[1], dkv::matmul_tn(out_bar, a));
                break;
            }
            case Op::gram: {
                const Matrix& f = nodes_[n.parent[0]].value;
                const std::size_t rows = f.rows(), d = f.cols();
                Matrix fbar(rows, d);
                const auto& ops = simd::active();
                for (std::size_t i = 0; i < rows; ++i) {
                    for (std::size_t j = 0; j < i; ++j) {
                        const double r2 = ops.sqdist(f.row(i), f.row(j), d);
                        const double g = kernel_slope_over_r(n.kernel, std::sqrt(r2));
                        const double w = g * (out_bar(i, j) + out_bar(j, i));
                        if (w == 0.0) continue;
                        for (std::size_t c = 0; c < d; ++c) {
                            const double diff = f(i, c) - f(j, c);
                            fbar(i, c) += w * diff;
                            fbar(j, c) -= w * diff;
                        }
                    }
                }
                accumulate(n.parent[0], fbar);
                break;
            }
            case Op::activation: {
                const Matrix& zv = nodes_[n.parent[0]].value;
                const Matrix& cv = nodes_[n.parent[1]].value;
                const Matrix& av = nodes_[n.parent[2]].value;
                const std::size_t rows = zv.rows(), d = zv.cols(), m = cv.rows();
                Matrix zbar(rows, d), cbar(m, d), abar(d, m);
                std::size_t c = 0;
                for (std::size_t p = 0; p < rows; ++p) {
                    for (std::size_t j = 0; j < d; ++j) {
                        const double ob = out_bar(p, j);
                        for (std::size_t i = 0; i < m; ++i) {
                            const double k = n.cache[c++];
                            const double g = n.cache[c++];
                            if (ob == 0.0) continue;
                            const double diff = zv(p, j) - cv(i, j);
                            const double gd = g * diff * av(j, i);
                            abar(j, i) += ob * k;
                            zbar(p, j) += ob * gd;
                            cbar(i, j) -= ob * gd;
                        }
                    }
                }
                accumulate(n.parent[0], zbar);
                accumulate(n.parent[1], cbar);
                accumulate(n.parent[2], abar);
                break;
            }
            case Op::spd_solve: {
                // X = A^{-1} B:  B_bar = A^{-1} X_bar,  A_bar = -B_bar X^T.
                const Matrix bbar = n.factor->solve(out_bar);
                accumulate(n.parent[1], bbar);
                accumulate(n.parent[0], -1.0 * dkv::matmul_nt(bbar, n.value));
                break;
            }
            case Op::inverse_diagonal: {
                // q = diag(A^{-1}):  A_bar = -A^{-1} diag(q_bar) A^{-1}.
                const std::size_t dim = n.factor->dim();
                const Matrix inv = n.factor->solve(Matrix::identity(dim));
                Matrix scaled = inv;
                for (std::size_t col = 0; col < dim; ++col) {
                    const double qb = out_bar(col, 0);
                    for (std::size_t row = 0; row < dim; ++row) scaled(row, col) *= qb;
                }
                accumulate(n.parent[0], -1.0 * dkv::matmul(scaled, inv));
                break;
            }
            case Op::rowwise_divide: {
                const Matrix& qv = nodes_[n.parent[1]].value;
                Matrix abar = out_bar;
                Matrix qbar(qv.rows(), 1);
                for (std::size_t i = 0; i < abar.rows(); ++i) {
                    const double inv_q = 1.0 / qv(i, 0);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < abar.cols(); ++j) {
                        acc += out_bar(i, j) * n.value(i, j);
                        abar(i, j) *= inv_q;
                    }
                    qbar(i, 0) = -acc * inv_q;
                }
                accumulate(n.parent[0], abar);
                accumulate(n.parent[1], qbar);
                break;
            }
            case Op::sum_squares: {
                const Matrix& a = nodes_[n.parent[0]].value;
                accumulate(n.parent[0], (2.0 * out_bar(0, 0)) * a);
                break;
            }
            case Op::sum: {
                const Matrix& a = nodes_[n.parent[0]].value;
                Matrix g(a.rows(), a.cols());
                const double s = out_bar(0, 0);
                for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = s;
                accumulate(n.parent[0], g);
                break;
            }
        }
    }
}

} // namespace dkv::ad
