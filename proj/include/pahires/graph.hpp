#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

// Define-by-run reverse-mode tape. Node values are computed at construction
// time, so creation order is a valid topological order and backward() is a
// single reverse sweep touching each node once. A Graph is immutable once the
// forward pass is built; do not share one instance across concurrent
// backward passes.
class Graph {
public:
    enum class Op {
        leaf,
        matmul,
        add,        // same shape, row-vector bias, or scalar broadcast
        mul,        // elementwise or scalar broadcast
        sin_op,
        relu,
        concat,     // axis 0/1 for matrices, flat for vectors
        slice,      // half-open [begin, end) along an axis
        reshape,
        transpose,
        sum_all,
        sum_axis,
        mean_all,
        softmax,    // row-wise
        scale       // multiply by compile-time constant
    };

    struct Node {
        Op op = Op::leaf;
        std::vector<int> inputs;
        Tensor value;
        Tensor grad;
        bool trainable = false;
        std::string name;
        // op-specific attributes
        int axis = 0;
        std::size_t begin = 0, end = 0;
        double c = 0.0;
    };

    int input(Tensor v, std::string name = "") {
        return add_node(Op::leaf, {}, std::move(v), std::move(name), false);
    }

    int parameter(Tensor v, std::string name) {
        int id = add_node(Op::leaf, {}, std::move(v), std::move(name), true);
        parameters_.push_back(id);
        return id;
    }

    int constant(double v) { return input(Tensor::scalar(v)); }

    const Tensor& value(int id) const { return nodes_[id].value; }
    const Tensor& grad(int id) const { return nodes_[id].grad; }
    const Node& node(int id) const { return nodes_[id]; }
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<int>& parameters() const { return parameters_; }

    // ---- primitives ----------------------------------------------------

    int matmul(int a, int b) {
        const Tensor& A = nodes_[a].value;
        const Tensor& B = nodes_[b].value;
        if (A.rank() != 2 || B.rank() != 2 || A.shape()[1] != B.shape()[0])
            fail_shape("matmul", a, b);
        std::size_t m = A.shape()[0], k = A.shape()[1], n = B.shape()[1];
        Tensor C({m, n});
        matmul_raw(A.data(), B.data(), C.data(), m, k, n, false);
        return add_node(Op::matmul, {a, b}, std::move(C));
    }

    int add(int a, int b) {
        // canonical order: broadcast operand second
        if (nodes_[a].value.is_scalar() && !nodes_[b].value.is_scalar())
            std::swap(a, b);
        const Tensor& X = nodes_[a].value;
        const Tensor& Y = nodes_[b].value;
        Tensor out = X;
        if (X.same_shape(Y)) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += Y[i];
        } else if (Y.is_scalar()) {
            double s = Y[0];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += s;
        } else if (X.rank() == 2 && Y.size() == X.shape()[1] &&
                   (Y.rank() == 1 || Y.shape()[0] == 1)) {
            // row-vector bias
            std::size_t m = X.shape()[0], n = X.shape()[1];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) out(i, j) += Y[j];
        } else {
            fail_shape("add", a, b);
        }
        return add_node(Op::add, {a, b}, std::move(out));
    }

    int mul(int a, int b) {
        if (nodes_[a].value.is_scalar() && !nodes_[b].value.is_scalar())
            std::swap(a, b);
        const Tensor& X = nodes_[a].value;
        const Tensor& Y = nodes_[b].value;
        Tensor out = X;
        if (X.same_shape(Y)) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] *= Y[i];
        } else if (Y.is_scalar()) {
            double s = Y[0];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
        } else {
            fail_shape("mul", a, b);
        }
        return add_node(Op::mul, {a, b}, std::move(out));
    }

    int sub(int a, int b) { return add(a, scale(b, -1.0)); }

    int sin_(int a) {
        Tensor out = nodes_[a].value;
        for (double& v : out.storage()) v = std::sin(v);
        return add_node(Op::sin_op, {a}, std::move(out));
    }

    int relu(int a) {
        Tensor out = nodes_[a].value;
        for (double& v : out.storage()) v = v > 0.0 ? v : 0.0;
        return add_node(Op::relu, {a}, std::move(out));
    }

    int concat(const std::vector<int>& ids, int axis = 0) {
        if (ids.empty()) throw Error(ErrorKind::numeric, "concat: no inputs");
        const Tensor& first = nodes_[ids[0]].value;
        Tensor out;
        if (first.rank() == 1) {
            std::vector<double> data;
            for (int id : ids) {
                const Tensor& t = nodes_[id].value;
                if (t.rank() != 1) fail_shape("concat", ids[0], id);
                data.insert(data.end(), t.storage().begin(), t.storage().end());
            }
            out = Tensor::vector(std::move(data));
        } else if (axis == 0) {
            std::size_t n = first.shape()[1], m = 0;
            for (int id : ids) {
                const Tensor& t = nodes_[id].value;
                if (t.rank() != 2 || t.shape()[1] != n)
                    fail_shape("concat", ids[0], id);
                m += t.shape()[0];
            }
            out = Tensor({m, n});
            std::size_t r = 0;
            for (int id : ids) {
                const Tensor& t = nodes_[id].value;
                std::copy(t.data(), t.data() + t.size(), out.data() + r * n);
                r += t.shape()[0];
            }
        } else {
            std::size_t m = first.shape()[0], n = 0;
            for (int id : ids) {
                const Tensor& t = nodes_[id].value;
                if (t.rank() != 2 || t.shape()[0] != m)
                    fail_shape("concat", ids[0], id);
                n += t.shape()[1];
            }
            out = Tensor({m, n});
            std::size_t off = 0;
            for (int id : ids) {
                const Tensor& t = nodes_[id].value;
                std::size_t w = t.shape()[1];
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < w; ++j)
                        out(i, off + j) = t(i, j);
                off += w;
            }
        }
        int nid = add_node(Op::concat, ids, std::move(out));
        nodes_[nid].axis = axis;
        return nid;
    }

    int slice(int a, int axis, std::size_t begin, std::size_t end) {
        const Tensor& X = nodes_[a].value;
        std::size_t extent = X.rank() == 1 ? X.size() : X.shape()[axis];
        if (begin >= end || end > extent)
            throw Error(ErrorKind::numeric,
                        "slice: range out of bounds at node " + node_label(a));
        Tensor out;
        if (X.rank() == 1) {
            out = Tensor({end - begin});
            std::copy(X.data() + begin, X.data() + end, out.data());
        } else if (axis == 0) {
            std::size_t n = X.shape()[1];
            out = Tensor({end - begin, n});
            std::copy(X.data() + begin * n, X.data() + end * n, out.data());
        } else {
            std::size_t m = X.shape()[0];
            out = Tensor({m, end - begin});
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = begin; j < end; ++j)
                    out(i, j - begin) = X(i, j);
        }
        int nid = add_node(Op::slice, {a}, std::move(out));
        nodes_[nid].axis = axis;
        nodes_[nid].begin = begin;
        nodes_[nid].end = end;
        return nid;
    }

    int reshape(int a, std::vector<std::size_t> shape) {
        return add_node(Op::reshape, {a},
                        nodes_[a].value.reshaped(std::move(shape)));
    }

    int transpose(int a) {
        const Tensor& X = nodes_[a].value;
        if (X.rank() != 2) fail_shape("transpose", a, a);
        std::size_t m = X.shape()[0], n = X.shape()[1];
        Tensor out({n, m});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) out(j, i) = X(i, j);
        return add_node(Op::transpose, {a}, std::move(out));
    }

    int sum(int a) {
        double s = 0.0;
        for (double v : nodes_[a].value.storage()) s += v;
        return add_node(Op::sum_all, {a}, Tensor::scalar(s));
    }

    int sum(int a, int axis) {
        const Tensor& X = nodes_[a].value;
        if (X.rank() != 2) fail_shape("sum_axis", a, a);
        std::size_t m = X.shape()[0], n = X.shape()[1];
        Tensor out(axis == 0 ? std::vector<std::size_t>{n}
                             : std::vector<std::size_t>{m});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out[axis == 0 ? j : i] += X(i, j);
        int nid = add_node(Op::sum_axis, {a}, std::move(out));
        nodes_[nid].axis = axis;
        return nid;
    }

    int mean(int a) {
        double s = 0.0;
        for (double v : nodes_[a].value.storage()) s += v;
        return add_node(Op::mean_all, {a},
                        Tensor::scalar(s / double(nodes_[a].value.size())));
    }

    int softmax(int a) {
        const Tensor& X = nodes_[a].value;
        Tensor out = X;
        std::size_t m = X.rank() == 2 ? X.shape()[0] : 1;
        std::size_t n = X.rank() == 2 ? X.shape()[1] : X.size();
        for (std::size_t i = 0; i < m; ++i) {
            double* row = out.data() + i * n;
            double mx = row[0];
            for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
            double z = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = std::exp(row[j] - mx);
                z += row[j];
            }
            for (std::size_t j = 0; j < n; ++j) row[j] /= z;
        }
        return add_node(Op::softmax, {a}, std::move(out));
    }

    int scale(int a, double c) {
        Tensor out = nodes_[a].value;
        for (double& v : out.storage()) v *= c;
        int nid = add_node(Op::scale, {a}, std::move(out));
        nodes_[nid].c = c;
        return nid;
    }

    // ---- backward ------------------------------------------------------

    void backward(int loss) {
        if (!nodes_[loss].value.is_scalar())
            throw Error(ErrorKind::numeric,
                        "gradient: loss node " + node_label(loss) +
                            " is not scalar");
        for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
        nodes_[loss].grad[0] = 1.0;
        for (int id = loss; id >= 0; --id) {
            Node& n = nodes_[id];
            if (n.op == Op::leaf || n.grad.empty()) continue;
            backprop_node(id);
        }
    }

    // dLoss/dParam for every trainable leaf; zero tensors for unused ones.
    std::map<std::string, Tensor> gradient(int loss) {
        backward(loss);
        std::map<std::string, Tensor> out;
        for (int id : parameters_) out[nodes_[id].name] = nodes_[id].grad;
        return out;
    }

private:
    std::vector<Node> nodes_;
    std::vector<int> parameters_;

    static void matmul_raw(const double* A, const double* B, double* C,
                           std::size_t m, std::size_t k, std::size_t n,
                           bool accumulate) {
        if (!accumulate) std::fill(C, C + m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* a = A + i * k;
            double* c = C + i * n;
            for (std::size_t p = 0; p < k; ++p) {
                double av = a[p];
                if (av == 0.0) continue;
                const double* b = B + p * n;
                for (std::size_t j = 0; j < n; ++j) c[j] += av * b[j];
            }
        }
    }

    std::string node_label(int id) const {
        const Node& n = nodes_[id];
        std::string label = "#" + std::to_string(id);
        if (!n.name.empty()) label += " (" + n.name + ")";
        return label;
    }

    [[noreturn]] void fail_shape(const std::string& op, int a, int b) {
        throw Error(ErrorKind::numeric,
                    op + ": shape mismatch " +
                        nodes_[a].value.shape_string() + " vs " +
                        nodes_[b].value.shape_string() + " at node " +
                        node_label(a));
    }

    int add_node(Op op, std::vector<int> inputs, Tensor value,
                 std::string name = "", bool trainable = false) {
        if (!value.all_finite())
            throw Error(ErrorKind::numeric,
                        "non-finite value at node #" +
                            std::to_string(nodes_.size()) +
                            (name.empty() ? "" : " (" + name + ")"));
        Node n;
        n.op = op;
        n.inputs = std::move(inputs);
        n.value = std::move(value);
        n.name = std::move(name);
        n.trainable = trainable;
        nodes_.push_back(std::move(n));
        return int(nodes_.size()) - 1;
    }

    void accumulate(int id, const Tensor& g) {
        Tensor& dst = nodes_[id].grad;
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }

    void backprop_node(int id) {
        Node& n = nodes_[id];
        const Tensor& G = n.grad;
        switch (n.op) {
            case Op::matmul: {
                const Tensor& A = nodes_[n.inputs[0]].value;
                const Tensor& B = nodes_[n.inputs[1]].value;
                std::size_t m = A.shape()[0], k = A.shape()[1],
                            nn = B.shape()[1];
                // gA += G * B^T
                Tensor& gA = nodes_[n.inputs[0]].grad;
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < nn; ++j)
                            s += G(i, j) * B(p, j);
                        gA(i, p) += s;
                    }
                // gB += A^T * G
                Tensor& gB = nodes_[n.inputs[1]].grad;
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        double av = A(i, p);
                        if (av == 0.0) continue;
                        for (std::size_t j = 0; j < nn; ++j)
                            gB(p, j) += av * G(i, j);
                    }
                break;
            }
            case Op::add: {
                accumulate(n.inputs[0], G);
                Tensor& gY = nodes_[n.inputs[1]].grad;
                const Tensor& Y = nodes_[n.inputs[1]].value;
                if (Y.same_shape(n.value)) {
                    accumulate(n.inputs[1], G);
                } else if (Y.is_scalar()) {
                    double s = 0.0;
                    for (double v : G.storage()) s += v;
                    gY[0] += s;
                } else {
                    // row-vector bias: column sums
                    std::size_t m = n.value.shape()[0],
                                nn = n.value.shape()[1];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < nn; ++j)
                            gY[j] += G(i, j);
                }
                break;
            }
            case Op::mul: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                const Tensor& Y = nodes_[n.inputs[1]].value;
                Tensor& gX = nodes_[n.inputs[0]].grad;
                Tensor& gY = nodes_[n.inputs[1]].grad;
                if (Y.same_shape(X)) {
                    for (std::size_t i = 0; i < X.size(); ++i) {
                        gX[i] += G[i] * Y[i];
                        gY[i] += G[i] * X[i];
                    }
                } else {
                    double s = Y[0], acc = 0.0;
                    for (std::size_t i = 0; i < X.size(); ++i) {
                        gX[i] += G[i] * s;
                        acc += G[i] * X[i];
                    }
                    gY[0] += acc;
                }
                break;
            }
            case Op::sin_op: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                Tensor& gX = nodes_[n.inputs[0]].grad;
                for (std::size_t i = 0; i < X.size(); ++i)
                    gX[i] += G[i] * std::cos(X[i]);
                break;
            }
            case Op::relu: {
                const Tensor& X = nodes_[n.inputs[0]].value;
                Tensor& gX = nodes_[n.inputs[0]].grad;
                for (std::size_t i = 0; i < X.size(); ++i)
                    if (X[i] > 0.0) gX[i] += G[i];
                break;
            }
            case Op::concat: {
                if (n.value.rank() == 1 || n.axis == 0) {
                    std::size_t off = 0;
                    for (int in : n.inputs) {
                        Tensor& gX = nodes_[in].grad;
                        for (std::size_t i = 0; i < gX.size(); ++i)
                            gX[i] += G[off + i];
                        off += gX.size();
                    }
                } else {
                    std::size_t m = n.value.shape()[0], off = 0;
                    for (int in : n.inputs) {
                        Tensor& gX = nodes_[in].grad;
                        std::size_t w = gX.shape()[1];
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < w; ++j)
                                gX(i, j) += G(i, off + j);
                        off += w;
                    }
                }
                break;
            }
            case Op::slice: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                if (gX.rank() == 1) {
                    for (std::size_t i = n.begin; i < n.end; ++i)
                        gX[i] += G[i - n.begin];
                } else if (n.axis == 0) {
                    std::size_t nn = gX.shape()[1];
                    for (std::size_t i = n.begin; i < n.end; ++i)
                        for (std::size_t j = 0; j < nn; ++j)
                            gX(i, j) += G(i - n.begin, j);
                } else {
                    std::size_t m = gX.shape()[0];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = n.begin; j < n.end; ++j)
                            gX(i, j) += G(i, j - n.begin);
                }
                break;
            }
            case Op::reshape: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                for (std::size_t i = 0; i < gX.size(); ++i) gX[i] += G[i];
                break;
            }
            case Op::transpose: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                std::size_t m = gX.shape()[0], nn = gX.shape()[1];
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < nn; ++j)
                        gX(i, j) += G(j, i);
                break;
            }
            case Op::sum_all: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                double g = G[0];
                for (double& v : gX.storage()) v += g;
                break;
            }
            case Op::sum_axis: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                std::size_t m = gX.shape()[0], nn = gX.shape()[1];
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < nn; ++j)
                        gX(i, j) += G[n.axis == 0 ? j : i];
                break;
            }
            case Op::mean_all: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                double g = G[0] / double(gX.size());
                for (double& v : gX.storage()) v += g;
                break;
            }
            case Op::softmax: {
                const Tensor& Y = n.value;
                Tensor& gX = nodes_[n.inputs[0]].grad;
                std::size_t m = Y.rank() == 2 ? Y.shape()[0] : 1;
                std::size_t nn = Y.rank() == 2 ? Y.shape()[1] : Y.size();
                for (std::size_t i = 0; i < m; ++i) {
                    const double* y = Y.data() + i * nn;
                    const double* g = G.data() + i * nn;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < nn; ++j) dot += g[j] * y[j];
                    double* gx = gX.data() + i * nn;
                    for (std::size_t j = 0; j < nn; ++j)
                        gx[j] += y[j] * (g[j] - dot);
                }
                break;
            }
            case Op::scale: {
                Tensor& gX = nodes_[n.inputs[0]].grad;
                for (std::size_t i = 0; i < gX.size(); ++i)
                    gX[i] += n.c * G[i];
                break;
            }
            case Op::leaf:
                break;
        }
    }
};

}  // namespace pahires
