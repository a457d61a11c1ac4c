#pragma once

#include <memory>
#include <vector>

#include "dkvkoga/kernels.hpp"
#include "dkvkoga/linalg.hpp"
#include "dkvkoga/matrix.hpp"

namespace dkv::ad {

/// Handle into a Tape.
struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

/// Define-by-run reverse-mode tape over matrix-valued nodes. Values are
/// computed eagerly as the graph is built; backward() replays the records in
/// reverse. The SPD solve and inverse-diagonal records carry their analytic
/// adjoints, so differentiation never descends into factorization internals;
/// both share one Cholesky factorization cached on their operand.
class Tape {
public:
    Var constant(Matrix value);
    /// Trainable input; its adjoint is the gradient after backward().
    Var leaf(Matrix value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    /// a + s*I.
    Var add_scaled_identity(Var a, double s);
    /// a * b.
    Var matmul(Var a, Var b);
    /// a * b^T.
    Var matmul_nt(Var a, Var b);
    /// Symmetric kernel matrix of the rows of features.
    Var gram(Var features, const ScalarKernel& kernel);
    /// Kernel activation layer: out(p,j) = sum_i k(z(p,j), centers(i,j)) * coef(j,i).
    Var activation(Var z, Var centers, Var coef, const ScalarKernel& kernel);
    /// X = a^{-1} b for symmetric positive definite a (jitter ladder applies).
    Var spd_solve(Var a, Var b, double max_jitter = 1e-6);
    /// Column vector diag(a^{-1}); reuses the factor computed by spd_solve(a, ...).
    Var inverse_diagonal(Var a, double max_jitter = 1e-6);
    /// Rows of a divided by the column vector q.
    Var rowwise_divide(Var a, Var q);
    /// 1x1 sum of squared entries.
    Var sum_squares(Var a);
    /// 1x1 sum of entries.
    Var sum(Var a);

    const Matrix& value(Var v) const;
    /// Gradient of the backward root w.r.t. v; zero-shaped matrix when no
    /// gradient flowed.
    Matrix gradient(Var v) const;

    /// Seeds d(root)/d(root) = 1 and accumulates adjoints; root must be 1x1.
    void backward(Var root);

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        constant,
        leaf,
        add,
        sub,
        scale,
        add_scaled_identity,
        matmul,
        matmul_nt,
        gram,
        activation,
        spd_solve,
        inverse_diagonal,
        rowwise_divide,
        sum_squares,
        sum,
    };

    struct Node {
        explicit Node(Op node_op, Matrix node_value = Matrix())
            : op(node_op), value(std::move(node_value)) {}

        Op op;
        Matrix value;
        Matrix adjoint; // allocated lazily
        int parent[3] = {-1, -1, -1};
        bool needs_grad = false;
        double scalar = 0.0;
        ScalarKernel kernel;
        std::shared_ptr<CholeskyFactor> factor; // cached on SPD operands
        std::vector<double> cache;              // activation: kernel values and slopes
    };

    Var push(Node node);
    Node& at(Var v);
    const Node& at(Var v) const;
    void accumulate(int idx, const Matrix& grad);
    std::shared_ptr<CholeskyFactor> factor_of(Var a, double max_jitter);

    std::vector<Node> nodes_;
};

} // namespace dkv::ad
