#include "qoc/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qoc::nn {

Tensor::Tensor(std::string name, std::vector<int> shape) : name_(std::move(name)), shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int d : shape_) {
        if (d < 0) throw ShapeError("negative tensor dimension");
        n *= static_cast<std::size_t>(d);
    }
    values_.assign(n, 0.0);
    grad_.assign(n, 0.0);
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::span<const double> Var::value() const { return tape_->value(id_); }

std::span<const double> Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
    const auto v = value();
    if (v.size() != 1) throw ShapeError("item() on a node of size " + std::to_string(v.size()));
    return v[0];
}

void Tape::check_owned(Var v) const {
    if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
        throw std::logic_error("Var does not belong to this tape");
    }
}

Var Tape::constant(std::vector<double> value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Tensor& tensor) {
    Node n;
    n.value = tensor.values();
    n.param = &tensor;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(std::vector<double> value, std::vector<Var> inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    n.inputs.reserve(inputs.size());
    for (const Var& in : inputs) {
        check_owned(in);
        n.inputs.push_back(in.id_);
        n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(in.id_)].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::backward(Var root) {
    check_owned(root);
    auto& r = nodes_[static_cast<std::size_t>(root.id_)];
    if (r.value.size() != 1) throw ShapeError("backward() needs a scalar root");

    for (auto& n : nodes_) {
        n.grad.assign(n.value.size(), 0.0);
        n.reached = false;
    }
    r.grad[0] = 1.0;
    r.reached = true;

    std::vector<std::span<double>> in_grads;
    for (std::size_t i = static_cast<std::size_t>(root.id_) + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.reached) continue;
        if (n.param != nullptr) {
            auto& g = n.param->grad();
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
            continue;
        }
        if (!n.backward) continue;
        in_grads.clear();
        for (int in : n.inputs) {
            Node& src = nodes_[static_cast<std::size_t>(in)];
            src.reached = true;
            in_grads.emplace_back(src.grad);
        }
        n.backward(n.grad, in_grads);
    }
}

void Tape::clear() { nodes_.clear(); }

namespace {

void require_same_size(Var a, Var b) {
    if (a.size() != b.size()) throw ShapeError("operand sizes differ");
}

std::vector<double> copy(Var a) { return {a.value().begin(), a.value().end()}; }

}  // namespace

Var add(Var a, Var b) {
    require_same_size(a, b);
    auto out = copy(a);
    const auto bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return a.tape().record(std::move(out), {a, b}, [](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            in[0][i] += g[i];
            in[1][i] += g[i];
        }
    });
}

Var sub(Var a, Var b) {
    require_same_size(a, b);
    auto out = copy(a);
    const auto bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return a.tape().record(std::move(out), {a, b}, [](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            in[0][i] += g[i];
            in[1][i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    require_same_size(a, b);
    auto av = copy(a);
    auto bv = copy(b);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return a.tape().record(std::move(out), {a, b}, [av, bv](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            in[0][i] += g[i] * bv[i];
            in[1][i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, double k) {
    auto out = copy(a);
    for (double& v : out) v *= k;
    return a.tape().record(std::move(out), {a}, [k](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += k * g[i];
    });
}

Var add_scalar(Var a, double k) {
    auto out = copy(a);
    for (double& v : out) v += k;
    return a.tape().record(std::move(out), {a}, [](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
    });
}

Var sum(Var a) {
    const auto v = a.value();
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    return a.tape().record({s}, {a}, [](auto g, auto in) {
        for (double& x : in[0]) x += g[0];
    });
}

Var pick(Var a, std::size_t index) {
    if (index >= a.size()) throw ShapeError("pick index out of range");
    return a.tape().record({a.value()[index]}, {a}, [index](auto g, auto in) { in[0][index] += g[0]; });
}

Var square(Var a) {
    auto av = copy(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * av[i];
    return a.tape().record(std::move(out), {a}, [av](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += 2.0 * av[i] * g[i];
    });
}

Var relu(Var a) {
    auto out = copy(a);
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    auto pre = copy(a);
    return a.tape().record(std::move(out), {a}, [pre](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (pre[i] > 0.0) in[0][i] += g[i];
        }
    });
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var sigmoid(Var a) {
    auto out = copy(a);
    for (double& v : out) v = sigmoid(v);
    auto y = out;
    return a.tape().record(std::move(out), {a}, [y](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

Var softmax(Var logits) {
    auto p = softmax(logits.value());
    auto y = p;
    return logits.tape().record(std::move(p), {logits}, [y](auto g, auto in) {
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += y[i] * (g[i] - dot);
    });
}

Var log_softmax(Var logits) {
    const auto z = logits.value();
    const double mx = *std::max_element(z.begin(), z.end());
    double se = 0.0;
    for (double v : z) se += std::exp(v - mx);
    const double lse = mx + std::log(se);
    std::vector<double> out(z.size());
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i] - lse;
        p[i] = std::exp(out[i]);
    }
    return logits.tape().record(std::move(out), {logits}, [p](auto g, auto in) {
        double gs = 0.0;
        for (double v : g) gs += v;
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] - p[i] * gs;
    });
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

Var entropy(Var probs) {
    auto p = copy(probs);
    return probs.tape().record({entropy(std::span<const double>(p))}, {probs}, [p](auto g, auto in) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) in[0][i] += -g[0] * (std::log(p[i]) + 1.0);
        }
    });
}

Var two_arctan(Var a) {
    auto x = copy(a);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * std::atan(x[i]);
    return a.tape().record(std::move(out), {a}, [x](auto g, auto in) {
        for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * 2.0 / (1.0 + x[i] * x[i]);
    });
}

Var affine(Var x, Var weight, Var bias, int in_dim, int out_dim) {
    const auto in = static_cast<std::size_t>(in_dim);
    const auto out_n = static_cast<std::size_t>(out_dim);
    if (x.size() != in || weight.size() != in * out_n || bias.size() != out_n) {
        throw ShapeError("affine: shape mismatch (x=" + std::to_string(x.size()) + ", in=" + std::to_string(in) +
                         ", out=" + std::to_string(out_n) + ")");
    }
    auto xv = copy(x);
    auto wv = copy(weight);
    std::vector<double> y(bias.value().begin(), bias.value().end());
    for (std::size_t o = 0; o < out_n; ++o) {
        for (std::size_t i = 0; i < in; ++i) y[o] += wv[o * in + i] * xv[i];
    }
    return x.tape().record(std::move(y), {x, weight, bias}, [xv, wv, in, out_n](auto g, auto grads) {
        for (std::size_t o = 0; o < out_n; ++o) {
            const double go = g[o];
            if (go == 0.0) continue;
            for (std::size_t i = 0; i < in; ++i) {
                grads[0][i] += wv[o * in + i] * go;
                grads[1][o * in + i] += xv[i] * go;
            }
            grads[2][o] += go;
        }
    });
}

Var detach(Var a) { return a.tape().constant(copy(a)); }

Linear::Linear(const std::string& name, int in_dim, int out_dim)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      weight_(name + ".weight", {out_dim, in_dim}),
      bias_(name + ".bias", {out_dim}) {
    if (in_dim <= 0 || out_dim <= 0) throw ShapeError("Linear dimensions must be positive");
}

void Linear::init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim_));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : weight_.values()) w = dist(rng);
    bias_.fill(0.0);
}

Var Linear::forward(Tape& tape, Var x) {
    return affine(x, tape.parameter(weight_), tape.parameter(bias_), in_dim_, out_dim_);
}

Mlp::Mlp(const std::string& name, int in_dim, int hidden_dim, int out_dim)
    : hidden_(name + ".0", in_dim, hidden_dim), out_(name + ".1", hidden_dim, out_dim) {}

void Mlp::init(std::mt19937_64& rng) {
    hidden_.init(rng);
    out_.init(rng);
}

Var Mlp::forward(Tape& tape, Var x) { return out_.forward(tape, relu(hidden_.forward(tape, x))); }

std::vector<Tensor*> Mlp::parameters() {
    auto p = hidden_.parameters();
    for (Tensor* t : out_.parameters()) p.push_back(t);
    return p;
}

Adam::Adam(std::vector<Tensor*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor* p : params_) {
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (Tensor* p : params_) p->zero_grad();
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& w = params_[k]->values();
        const auto& g = params_[k]->grad();
        auto& m = m_[k];
        auto& v = v_[k];
        if (w.size() != m.size()) throw ShapeError("parameter " + params_[k]->name() + " changed size");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

int count_parameters(std::span<Tensor* const> params) {
    std::size_t n = 0;
    for (const Tensor* p : params) n += p->size();
    return static_cast<int>(n);
}

}  // namespace qoc::nn
