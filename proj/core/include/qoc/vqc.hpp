#pragma once

// Data re-uploading circuit used for every quantum component.
//
// One layer on n qubits:
//   RX(lambda[l,i] * angle[i])              on every qubit i
//   CNOT(i -> i+1) for i < n-1, CNOT(n-1 -> 0)   (when entangling)
//   RY(theta_ry[l,i]) then RZ(theta_rz[l,i])  on every qubit i
// The output is <Z_k> for k < out_dim, i.e. the lowest-index qubits.

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qoc/diffnet.hpp"
#include "qoc/qsim.hpp"

namespace qoc::vqc {

struct Architecture {
    int n_qubits = 4;
    int n_layers = 1;
    bool entangling = true;
    int out_dim = 4;
    bool learnable_scaling = true;

    int param_count() const;
    void validate() const;
};

int param_count(const Architecture& arch);

enum class InputKind { Unbounded, Bounded, Latent };

struct InputEncoding {
    InputKind kind = InputKind::Unbounded;
    double bound = 0.0;  // c for Bounded

    static InputEncoding unbounded() { return {InputKind::Unbounded, 0.0}; }
    static InputEncoding bounded(double c) { return {InputKind::Bounded, c}; }
    static InputEncoding latent() { return {InputKind::Latent, 0.0}; }
};

using EncodingSpec = std::vector<InputEncoding>;

/// Maps raw inputs to rotation angles in [-pi, pi]: 2*atan(x) for unbounded
/// and latent entries, (pi/c)*clamp(x, -c, c) for bounded ones.
std::vector<double> normalize_input(std::span<const double> raw, const EncodingSpec& spec);

/// Row-major [layer][qubit] angle tables.
struct Params {
    std::vector<double> lambda;
    std::vector<double> theta_ry;
    std::vector<double> theta_rz;

    static Params zeros(const Architecture& arch);
    void validate(const Architecture& arch) const;
};

/// lambda = 1, theta i.i.d. uniform on [-pi, pi].
void init_params(Params& params, std::mt19937_64& rng);

qsim::Circuit build_circuit(const Architecture& arch, const Params& params, std::span<const double> angles);

/// Everything backward() needs from a forward evaluation.
struct Trace {
    Architecture arch;
    std::vector<double> angles;
    std::vector<double> lambda;
    qsim::Circuit circuit;
    qsim::StateVector final_state = qsim::StateVector::ground(1);
};

struct Forward {
    std::vector<double> outputs;
    Trace trace;
};

Forward forward(const Architecture& arch, const Params& params, std::span<const double> angles);

struct Gradients {
    std::vector<double> lambda;
    std::vector<double> theta_ry;
    std::vector<double> theta_rz;
    std::vector<double> inputs;
};

/// Gradients of sum_k upstream[k] * outputs[k].
Gradients backward(const Trace& trace, std::span<const double> upstream);

/// A VQC bound to trainable tensors so it can sit on a Tape. With
/// learnable_scaling off, lambda stays at 1 and is not a parameter.
class Layer {
public:
    Layer() = default;
    Layer(const std::string& name, Architecture arch);

    void init(std::mt19937_64& rng);
    /// `angles` must already be normalized rotation angles.
    nn::Var forward(nn::Tape& tape, nn::Var angles);

    const Architecture& arch() const { return arch_; }
    int param_count() const { return arch_.param_count(); }
    std::vector<nn::Tensor*> parameters();
    Params snapshot() const;

private:
    Architecture arch_;
    nn::Tensor lambda_;
    nn::Tensor theta_ry_;
    nn::Tensor theta_rz_;
};

}  // namespace qoc::vqc
