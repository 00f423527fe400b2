#pragma once

// Minimal reverse-mode differentiation for the classical parts of the agent,
// plus the Adam optimizer.
//
// A Tape records nodes in evaluation order. Every node only refers to nodes
// recorded before it, so the graph is acyclic by construction and backward()
// is a single reverse scan. Trainable state lives in Tensor objects owned by
// layers; Tape::parameter binds a Tensor as a leaf and backward() accumulates
// into Tensor::grad().

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qoc::nn {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Tensor {
public:
    Tensor() = default;
    Tensor(std::string name, std::vector<int> shape);

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& grad() { return grad_; }
    const std::vector<double>& grad() const { return grad_; }

    void zero_grad();
    void fill(double v);

private:
    std::string name_;
    std::vector<int> shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape is alive
/// and not cleared.
class Var {
public:
    Var() = default;

    std::span<const double> value() const;
    std::span<const double> grad() const;
    double item() const;  // value of a size-1 node
    double operator[](std::size_t i) const { return value()[i]; }
    std::size_t size() const { return value().size(); }
    Tape& tape() const { return *tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

class Tape {
public:
    /// Receives the node's gradient and one writable span per input, into
    /// which it must *add* its contribution.
    using BackwardFn = std::function<void(std::span<const double> out_grad, std::span<std::span<double>> in_grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(std::vector<double> value);
    Var parameter(Tensor& tensor);
    Var record(std::vector<double> value, std::vector<Var> inputs, BackwardFn backward);

    /// Seeds d(root)/d(root) = 1 and propagates to every reachable node and
    /// bound Tensor. `root` must hold a single value.
    void backward(Var root);

    void clear();
    std::size_t size() const { return nodes_.size(); }

    std::span<const double> value(int id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
    std::span<const double> grad(int id) const { return nodes_.at(static_cast<std::size_t>(id)).grad; }

private:
    struct Node {
        std::vector<double> value;
        std::vector<double> grad;
        std::vector<int> inputs;
        BackwardFn backward;
        Tensor* param = nullptr;
        bool requires_grad = false;
        bool reached = false;
    };
    void check_owned(Var v) const;

    std::vector<Node> nodes_;
};

// Elementwise and reduction ops. All inputs must live on the same tape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise, equal sizes
Var scale(Var a, double k);
Var add_scalar(Var a, double k);
Var sum(Var a);
Var pick(Var a, std::size_t index);
Var square(Var a);
Var relu(Var a);  // subgradient 0 at exactly 0
Var sigmoid(Var a);
Var softmax(Var logits);
Var log_softmax(Var logits);
Var entropy(Var probs);  // -sum p ln p; zero-probability entries contribute 0
Var two_arctan(Var a);   // 2 * atan(x), maps R onto (-pi, pi)
/// y = W x + b with W row-major [out x in].
Var affine(Var x, Var weight, Var bias, int in_dim, int out_dim);
/// Copies the value onto the tape as a constant; no gradient flows back.
Var detach(Var a);

// Scalar helpers that do not touch a tape.
std::vector<double> softmax(std::span<const double> logits);
double sigmoid(double x);
double entropy(std::span<const double> probs);

class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, int in_dim, int out_dim);

    /// Weights uniform in [-1/sqrt(in), 1/sqrt(in)], bias zero.
    void init(std::mt19937_64& rng);
    Var forward(Tape& tape, Var x);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    int param_count() const { return in_dim_ * out_dim_ + out_dim_; }
    std::vector<Tensor*> parameters() { return {&weight_, &bias_}; }
    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }

private:
    int in_dim_ = 0;
    int out_dim_ = 0;
    Tensor weight_;
    Tensor bias_;
};

/// Single hidden layer with ReLU.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::string& name, int in_dim, int hidden_dim, int out_dim);

    void init(std::mt19937_64& rng);
    Var forward(Tape& tape, Var x);

    int param_count() const { return hidden_.param_count() + out_.param_count(); }
    std::vector<Tensor*> parameters();
    Linear& hidden() { return hidden_; }
    Linear& output() { return out_; }

private:
    Linear hidden_;
    Linear out_;
};

struct AdamConfig {
    double lr = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over a fixed set of tensors. Tensors must
/// outlive the optimizer and keep their sizes.
class Adam {
public:
    Adam(std::vector<Tensor*> params, AdamConfig config = {});

    void zero_grad();
    void step();
    long steps() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Tensor*> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig config_;
    long t_ = 0;
};

int count_parameters(std::span<Tensor* const> params);

}  // namespace qoc::nn
