#include "gman/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gman {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    // log(1 + e^x) without overflow for large |x|.
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// C[m,n] += A[m,k] * B[k,n]
void matmul_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// dA[m,k] += G[m,n] * B^T, i.e. dA[i,l] += sum_j G[i,j] * B[l,j]
void matmul_acc_gbt(const double* g, const double* b, double* da, std::size_t m, std::size_t k,
                    std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        double* darow = da + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double* brow = b + l * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            darow[l] += acc;
        }
    }
}

// dB[k,n] += A^T * G, i.e. dB[l,j] += sum_i A[i,l] * G[i,j]
void matmul_acc_atg(const double* a, const double* g, double* db, std::size_t m, std::size_t k,
                    std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* grow = g + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            double av = arow[l];
            if (av == 0.0) continue;
            double* dbrow = db + l * n;
            for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * grow[j];
        }
    }
}

} // namespace

void Graph::check_id(NodeId id, const char* where) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw std::invalid_argument(std::string(where) + ": invalid node id " + std::to_string(id));
    }
}

NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(Tensor value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    check_id(a, "matmul");
    check_id(b, "matmul");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[1] != tb.shape[0]) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(ta) + " x " +
                                    shape_str(tb));
    }
    std::size_t m = ta.shape[0], k = ta.shape[1], nn = tb.shape[1];
    Node n;
    n.op = Op::MatMul;
    n.in0 = a;
    n.in1 = b;
    n.value = Tensor::zeros({m, nn});
    matmul_acc(ta.data.data(), tb.data.data(), n.value.data.data(), m, k, nn);
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
    check_id(a, "add");
    check_id(b, "add");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb)) {
        throw std::invalid_argument("add: shape mismatch " + shape_str(ta) + " vs " + shape_str(tb));
    }
    Node n;
    n.op = Op::Add;
    n.in0 = a;
    n.in1 = b;
    n.value = ta;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += tb.data[i];
    return push(std::move(n));
}

NodeId Graph::add_row(NodeId a, NodeId row) {
    check_id(a, "add_row");
    check_id(row, "add_row");
    const Tensor& ta = value(a);
    const Tensor& tr = value(row);
    if (ta.rank() != 2 || tr.rank() != 1 || ta.shape[1] != tr.shape[0]) {
        throw std::invalid_argument("add_row: incompatible shapes " + shape_str(ta) + " + " +
                                    shape_str(tr));
    }
    Node n;
    n.op = Op::AddRow;
    n.in0 = a;
    n.in1 = row;
    n.value = ta;
    std::size_t rows = ta.shape[0], cols = ta.shape[1];
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) n.value.data[i * cols + j] += tr.data[j];
    }
    return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
    check_id(a, "mul");
    check_id(b, "mul");
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb)) {
        throw std::invalid_argument("mul: shape mismatch " + shape_str(ta) + " vs " + shape_str(tb));
    }
    Node n;
    n.op = Op::Mul;
    n.in0 = a;
    n.in1 = b;
    n.value = ta;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] *= tb.data[i];
    return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double k) {
    check_id(a, "scale");
    Node n;
    n.op = Op::Scale;
    n.in0 = a;
    n.k = k;
    n.value = value(a);
    for (double& v : n.value.data) v *= k;
    return push(std::move(n));
}

NodeId Graph::add_const(NodeId a, double k) {
    check_id(a, "add_const");
    Node n;
    n.op = Op::AddConst;
    n.in0 = a;
    n.k = k;
    n.value = value(a);
    for (double& v : n.value.data) v += k;
    return push(std::move(n));
}

NodeId Graph::neg(NodeId a) {
    check_id(a, "neg");
    Node n;
    n.op = Op::Neg;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = -v;
    return push(std::move(n));
}

NodeId Graph::recip(NodeId a) {
    check_id(a, "recip");
    Node n;
    n.op = Op::Recip;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = 1.0 / v;
    return push(std::move(n));
}

NodeId Graph::relu(NodeId a) {
    check_id(a, "relu");
    Node n;
    n.op = Op::Relu;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

NodeId Graph::tanh(NodeId a) {
    check_id(a, "tanh");
    Node n;
    n.op = Op::Tanh;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = std::tanh(v);
    return push(std::move(n));
}

NodeId Graph::exp(NodeId a) {
    check_id(a, "exp");
    Node n;
    n.op = Op::Exp;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = std::exp(v);
    return push(std::move(n));
}

NodeId Graph::log(NodeId a) {
    check_id(a, "log");
    Node n;
    n.op = Op::Log;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = std::log(v);
    return push(std::move(n));
}

NodeId Graph::sigmoid(NodeId a) {
    check_id(a, "sigmoid");
    Node n;
    n.op = Op::Sigmoid;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = stable_sigmoid(v);
    return push(std::move(n));
}

NodeId Graph::softplus(NodeId a) {
    check_id(a, "softplus");
    Node n;
    n.op = Op::Softplus;
    n.in0 = a;
    n.value = value(a);
    for (double& v : n.value.data) v = stable_softplus(v);
    return push(std::move(n));
}

NodeId Graph::mean_all(NodeId a) {
    check_id(a, "mean_all");
    const Tensor& ta = value(a);
    if (ta.numel() == 0) throw std::invalid_argument("mean_all: empty tensor");
    double s = 0.0;
    for (double v : ta.data) s += v;
    Node n;
    n.op = Op::MeanAll;
    n.in0 = a;
    n.value = Tensor::scalar(s / static_cast<double>(ta.numel()));
    return push(std::move(n));
}

NodeId Graph::sum_all(NodeId a) {
    check_id(a, "sum_all");
    const Tensor& ta = value(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    Node n;
    n.op = Op::SumAll;
    n.in0 = a;
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

NodeId Graph::concat(std::span<const NodeId> parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    for (NodeId p : parts) check_id(p, "concat");
    const Tensor& first = value(parts[0]);
    std::vector<std::size_t> tail(first.shape.begin() + 1, first.shape.end());
    std::size_t rows = 0;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        if (t.rank() != first.rank() ||
            !std::equal(tail.begin(), tail.end(), t.shape.begin() + 1)) {
            throw std::invalid_argument("concat: trailing dimensions differ: " + shape_str(first) +
                                        " vs " + shape_str(t));
        }
        rows += t.shape[0];
    }
    std::vector<std::size_t> out_shape = first.shape;
    out_shape[0] = rows;
    Node n;
    n.op = Op::Concat;
    n.extra_in.assign(parts.begin(), parts.end());
    n.value = Tensor::zeros(out_shape);
    std::size_t off = 0;
    for (NodeId p : parts) {
        const Tensor& t = value(p);
        std::copy(t.data.begin(), t.data.end(), n.value.data.begin() + static_cast<long>(off));
        off += t.numel();
    }
    return push(std::move(n));
}

NodeId Graph::dropout(NodeId a, double rate, RngStream& rng) {
    check_id(a, "dropout");
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    }
    if (rate == 0.0) return a;
    const Tensor& ta = value(a);
    Node n;
    n.op = Op::Dropout;
    n.in0 = a;
    n.value = ta;
    n.aux = std::make_unique<Aux>();
    n.aux->vec.resize(ta.numel());
    double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < ta.numel(); ++i) {
        double m = rng.bernoulli(rate) ? 0.0 : keep_scale;
        n.aux->vec[i] = m;
        n.value.data[i] *= m;
    }
    return push(std::move(n));
}

NodeId Graph::batchnorm_train(NodeId x, NodeId gamma, NodeId beta, Tensor& running_mean,
                              Tensor& running_var, double eps, double momentum) {
    check_id(x, "batchnorm");
    check_id(gamma, "batchnorm");
    check_id(beta, "batchnorm");
    const Tensor& tx = value(x);
    if (tx.rank() != 2) throw std::invalid_argument("batchnorm: input must be [B,F], got " + shape_str(tx));
    std::size_t b = tx.shape[0], f = tx.shape[1];
    if (b < 2) throw std::invalid_argument("batchnorm: train mode needs batch size >= 2, got " + std::to_string(b));
    const Tensor& tg = value(gamma);
    const Tensor& tb = value(beta);
    if (tg.rank() != 1 || tg.shape[0] != f || !tg.same_shape(tb) || running_mean.shape != tg.shape ||
        running_var.shape != tg.shape) {
        throw std::invalid_argument("batchnorm: gamma/beta/running stats must be [F] with F=" +
                                    std::to_string(f));
    }

    Node n;
    n.op = Op::BatchNormTrain;
    n.in0 = x;
    n.in1 = gamma;
    n.in2 = beta;
    n.value = Tensor::zeros({b, f});
    n.aux = std::make_unique<Aux>();
    n.aux->vec.resize(f);
    n.aux->xhat = Tensor::zeros({b, f});

    for (std::size_t j = 0; j < f; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < b; ++i) mean += tx.data[i * f + j];
        mean /= static_cast<double>(b);
        double var = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            double d = tx.data[i * f + j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(b); // population variance
        double inv_std = 1.0 / std::sqrt(var + eps);
        n.aux->vec[j] = inv_std;
        for (std::size_t i = 0; i < b; ++i) {
            double xh = (tx.data[i * f + j] - mean) * inv_std;
            n.aux->xhat.data[i * f + j] = xh;
            n.value.data[i * f + j] = tg.data[j] * xh + tb.data[j];
        }
        running_mean.data[j] = momentum * running_mean.data[j] + (1.0 - momentum) * mean;
        running_var.data[j] = momentum * running_var.data[j] + (1.0 - momentum) * var;
    }
    return push(std::move(n));
}

NodeId Graph::batchnorm_eval(NodeId x, NodeId gamma, NodeId beta, const Tensor& running_mean,
                             const Tensor& running_var, double eps) {
    check_id(x, "batchnorm");
    check_id(gamma, "batchnorm");
    check_id(beta, "batchnorm");
    const Tensor& tx = value(x);
    if (tx.rank() != 2) throw std::invalid_argument("batchnorm: input must be [B,F], got " + shape_str(tx));
    std::size_t b = tx.shape[0], f = tx.shape[1];
    const Tensor& tg = value(gamma);
    const Tensor& tb = value(beta);
    if (tg.rank() != 1 || tg.shape[0] != f || !tg.same_shape(tb) || running_mean.shape != tg.shape ||
        running_var.shape != tg.shape) {
        throw std::invalid_argument("batchnorm: gamma/beta/running stats must be [F] with F=" +
                                    std::to_string(f));
    }
    Node n;
    n.op = Op::BatchNormEval;
    n.in0 = x;
    n.in1 = gamma;
    n.in2 = beta;
    n.value = Tensor::zeros({b, f});
    n.aux = std::make_unique<Aux>();
    n.aux->vec.resize(f);
    n.aux->xhat = Tensor::zeros({b, f});
    for (std::size_t j = 0; j < f; ++j) {
        double inv_std = 1.0 / std::sqrt(running_var.data[j] + eps);
        n.aux->vec[j] = inv_std;
        for (std::size_t i = 0; i < b; ++i) {
            double xh = (tx.data[i * f + j] - running_mean.data[j]) * inv_std;
            n.aux->xhat.data[i * f + j] = xh;
            n.value.data[i * f + j] = tg.data[j] * xh + tb.data[j];
        }
    }
    return push(std::move(n));
}

const Tensor& Graph::grad(NodeId id) const {
    check_id(id, "grad");
    if (!has_grads_) throw std::logic_error("grad: backward() has not run on this graph");
    return node(id).grad;
}

void Graph::backward(NodeId loss) {
    check_id(loss, "backward");
    if (!value(loss).is_scalar()) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(value(loss)));
    }
    for (Node& n : nodes_) {
        n.grad = Tensor::zeros(n.value.shape);
    }
    node(loss).grad.data[0] = 1.0;
    has_grads_ = true;

    for (std::size_t idx = nodes_.size(); idx-- > 0;) {
        Node& n = nodes_[idx];
        const std::vector<double>& g = n.grad.data;
        switch (n.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const Tensor& a = node(n.in0).value;
            const Tensor& b = node(n.in1).value;
            std::size_t m = a.shape[0], k = a.shape[1], nn = b.shape[1];
            matmul_acc_gbt(g.data(), b.data.data(), node(n.in0).grad.data.data(), m, k, nn);
            matmul_acc_atg(a.data.data(), g.data(), node(n.in1).grad.data.data(), m, k, nn);
            break;
        }
        case Op::Add: {
            auto& ga = node(n.in0).grad.data;
            auto& gb = node(n.in1).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
            break;
        }
        case Op::AddRow: {
            auto& ga = node(n.in0).grad.data;
            auto& gr = node(n.in1).grad.data;
            std::size_t rows = n.value.shape[0], cols = n.value.shape[1];
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j) {
                    ga[i * cols + j] += g[i * cols + j];
                    gr[j] += g[i * cols + j];
                }
            }
            break;
        }
        case Op::Mul: {
            const auto& a = node(n.in0).value.data;
            const auto& b = node(n.in1).value.data;
            auto& ga = node(n.in0).grad.data;
            auto& gb = node(n.in1).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * b[i];
                gb[i] += g[i] * a[i];
            }
            break;
        }
        case Op::Scale: {
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.k * g[i];
            break;
        }
        case Op::AddConst: {
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            break;
        }
        case Op::Neg: {
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
            break;
        }
        case Op::Recip: {
            const auto& y = n.value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i] * y[i] * y[i];
            break;
        }
        case Op::Relu: {
            const auto& x = node(n.in0).value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (x[i] > 0.0) ga[i] += g[i];
            }
            break;
        }
        case Op::Tanh: {
            const auto& y = n.value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
        }
        case Op::Exp: {
            const auto& y = n.value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
            break;
        }
        case Op::Log: {
            const auto& x = node(n.in0).value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
            break;
        }
        case Op::Sigmoid: {
            const auto& y = n.value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
            break;
        }
        case Op::Softplus: {
            const auto& x = node(n.in0).value.data;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * stable_sigmoid(x[i]);
            break;
        }
        case Op::MeanAll: {
            auto& ga = node(n.in0).grad.data;
            double gv = g[0] / static_cast<double>(ga.size());
            for (double& v : ga) v += gv;
            break;
        }
        case Op::SumAll: {
            auto& ga = node(n.in0).grad.data;
            for (double& v : ga) v += g[0];
            break;
        }
        case Op::Concat: {
            std::size_t off = 0;
            for (NodeId p : n.extra_in) {
                auto& gp = node(p).grad.data;
                for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
                off += gp.size();
            }
            break;
        }
        case Op::Dropout: {
            const auto& mask = n.aux->vec;
            auto& ga = node(n.in0).grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
            break;
        }
        case Op::BatchNormTrain: {
            std::size_t b = n.value.shape[0], f = n.value.shape[1];
            const Tensor& tg = node(n.in1).value;
            auto& gx = node(n.in0).grad.data;
            auto& ggamma = node(n.in1).grad.data;
            auto& gbeta = node(n.in2).grad.data;
            const auto& xhat = n.aux->xhat.data;
            for (std::size_t j = 0; j < f; ++j) {
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (std::size_t i = 0; i < b; ++i) {
                    double dy = g[i * f + j];
                    sum_dy += dy;
                    sum_dy_xhat += dy * xhat[i * f + j];
                }
                ggamma[j] += sum_dy_xhat;
                gbeta[j] += sum_dy;
                double inv_std = n.aux->vec[j];
                double gammaj = tg.data[j];
                double bn = static_cast<double>(b);
                for (std::size_t i = 0; i < b; ++i) {
                    double dxhat = g[i * f + j] * gammaj;
                    gx[i * f + j] += inv_std / bn *
                                     (bn * dxhat - sum_dy * gammaj - xhat[i * f + j] * sum_dy_xhat * gammaj);
                }
            }
            break;
        }
        case Op::BatchNormEval: {
            std::size_t b = n.value.shape[0], f = n.value.shape[1];
            const Tensor& tg = node(n.in1).value;
            auto& gx = node(n.in0).grad.data;
            auto& ggamma = node(n.in1).grad.data;
            auto& gbeta = node(n.in2).grad.data;
            const auto& xhat = n.aux->xhat.data;
            for (std::size_t j = 0; j < f; ++j) {
                double inv_std = n.aux->vec[j];
                double gammaj = tg.data[j];
                for (std::size_t i = 0; i < b; ++i) {
                    double dy = g[i * f + j];
                    gx[i * f + j] += dy * gammaj * inv_std;
                    ggamma[j] += dy * xhat[i * f + j];
                    gbeta[j] += dy;
                }
            }
            break;
        }
        }
    }
}

} // namespace gman
