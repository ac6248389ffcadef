#include "gman/net.hpp"

#include <cmath>
#include <stdexcept>

namespace gman {

void NetworkSpec::validate() const {
    if (widths.size() < 2) {
        throw std::invalid_argument("NetworkSpec: need at least input and output widths");
    }
    for (std::size_t w : widths) {
        if (w == 0) throw std::invalid_argument("NetworkSpec: zero layer width");
    }
    if (dropout.size() > hidden_count()) {
        throw std::invalid_argument("NetworkSpec: more dropout rates than hidden layers");
    }
    for (double r : dropout) {
        if (r < 0.0 || r >= 1.0) {
            throw std::invalid_argument("NetworkSpec: dropout rate must lie in [0,1), got " +
                                        std::to_string(r));
        }
    }
    if (batchnorm.size() > hidden_count()) {
        throw std::invalid_argument("NetworkSpec: more batchnorm flags than hidden layers");
    }
}

Tensor& Parameters::get(std::string_view name) {
    if (Tensor* t = find(name)) return *t;
    throw std::out_of_range("Parameters: no tensor named '" + std::string(name) + "'");
}

const Tensor& Parameters::get(std::string_view name) const {
    return const_cast<Parameters*>(this)->get(name);
}

Tensor* Parameters::find(std::string_view name) {
    for (auto& it : items) {
        if (it.name == name) return &it.value;
    }
    return nullptr;
}

std::size_t Parameters::trainable_count() const {
    std::size_t n = 0;
    for (const auto& it : items) n += it.trainable ? 1 : 0;
    return n;
}

void Parameters::add(std::string name, Tensor value, bool trainable) {
    if (find(name)) throw std::invalid_argument("Parameters: duplicate tensor name '" + name + "'");
    items.push_back({std::move(name), std::move(value), trainable});
}

namespace {
std::string layer_prefix(std::size_t l) { return "L" + std::to_string(l) + "."; }
} // namespace

Parameters init_mlp_parameters(const NetworkSpec& spec, RngStream& init) {
    spec.validate();
    Parameters p;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        std::size_t fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        if (l + 1 == spec.layer_count()) bound *= spec.output_init_gain;
        Tensor w = Tensor::zeros({fan_in, fan_out});
        for (double& v : w.data) v = init.uniform(-bound, bound);
        p.add(layer_prefix(l) + "W", std::move(w));
        p.add(layer_prefix(l) + "b", Tensor::zeros({fan_out}));
        if (l < spec.hidden_count() && spec.batchnorm_at(l)) {
            p.add(layer_prefix(l) + "bn.gamma", Tensor::full({fan_out}, 1.0));
            p.add(layer_prefix(l) + "bn.beta", Tensor::zeros({fan_out}));
            p.add(layer_prefix(l) + "bn.mean", Tensor::zeros({fan_out}), /*trainable=*/false);
            p.add(layer_prefix(l) + "bn.var", Tensor::full({fan_out}, 1.0), /*trainable=*/false);
        }
    }
    return p;
}

BoundMlp::BoundMlp(Graph& g, const NetworkSpec& spec, Parameters& params, Mode mode)
    : g_(&g), spec_(&spec), params_(&params), mode_(mode) {
    spec.validate();
    item_leaf_.assign(params.items.size(), -1);
    for (std::size_t i = 0; i < params.items.size(); ++i) {
        if (!params.items[i].trainable) continue;
        item_leaf_[i] = static_cast<std::int32_t>(leaves_.size());
        leaves_.push_back(g.leaf(params.items[i].value));
    }
}

NodeId BoundMlp::leaf(std::string_view name) const {
    for (std::size_t i = 0; i < params_->items.size(); ++i) {
        if (params_->items[i].name == name) {
            std::int32_t slot = item_leaf_[i];
            if (slot < 0) break;
            return leaves_[static_cast<std::size_t>(slot)];
        }
    }
    throw std::out_of_range("BoundMlp: no trainable tensor named '" + std::string(name) + "'");
}

NodeId BoundMlp::apply(NodeId x, RngStream* dropout_rng) {
    const NetworkSpec& spec = *spec_;
    const Tensor& tx = g_->value(x);
    if (tx.rank() != 2 || tx.shape[1] != spec.input_dim()) {
        throw std::invalid_argument("mlp forward: input shape " + shape_str(tx) +
                                    " does not match spec input width " +
                                    std::to_string(spec.input_dim()));
    }
    NodeId cur = x;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        std::string pre = layer_prefix(l);
        cur = g_->add_row(g_->matmul(cur, leaf(pre + "W")), leaf(pre + "b"));
        bool is_hidden = l < spec.hidden_count();
        if (is_hidden) {
            if (spec.batchnorm_at(l)) {
                cur = batchnorm_forward(*g_, cur, leaf(pre + "bn.gamma"), leaf(pre + "bn.beta"),
                                        params_->get(pre + "bn.mean"), params_->get(pre + "bn.var"),
                                        mode_);
            }
            cur = g_->relu(cur);
            double rate = spec.dropout_at(l);
            if (rate > 0.0 && mode_ == Mode::Train) {
                if (!dropout_rng) {
                    throw std::invalid_argument("mlp forward: train mode with dropout requires an RNG stream");
                }
                cur = g_->dropout(cur, rate, *dropout_rng);
            }
        } else if (spec.output == OutputActivation::Tanh) {
            cur = g_->tanh(cur);
        }
    }
    return cur;
}

std::vector<Tensor> BoundMlp::trainable_grads() const {
    std::vector<Tensor> out;
    out.reserve(leaves_.size());
    for (NodeId id : leaves_) out.push_back(g_->grad(id));
    return out;
}

NodeId mlp_forward(Graph& g, NodeId input, const NetworkSpec& spec, Parameters& params, Mode mode,
                   RngStream* dropout_rng) {
    BoundMlp bound(g, spec, params, mode);
    return bound.apply(input, dropout_rng);
}

NodeId dropout_apply(Graph& g, NodeId x, double rate, RngStream& rng, Mode mode) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    }
    if (mode == Mode::Eval) return x;
    return g.dropout(x, rate, rng);
}

NodeId batchnorm_forward(Graph& g, NodeId x, NodeId gamma, NodeId beta, Tensor& running_mean,
                         Tensor& running_var, Mode mode, double eps, double momentum) {
    if (mode == Mode::Train) {
        return g.batchnorm_train(x, gamma, beta, running_mean, running_var, eps, momentum);
    }
    return g.batchnorm_eval(x, gamma, beta, running_mean, running_var, eps);
}

} // namespace gman
