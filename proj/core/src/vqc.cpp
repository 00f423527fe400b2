#include "qoc/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qoc::vqc {

namespace {

std::size_t table_size(const Architecture& arch) {
    return static_cast<std::size_t>(arch.n_layers) * static_cast<std::size_t>(arch.n_qubits);
}

}  // namespace

int Architecture::param_count() const { return n_layers * (learnable_scaling ? 3 : 2) * n_qubits; }

int param_count(const Architecture& arch) { return arch.param_count(); }

void Architecture::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) throw nn::ShapeError("VQC qubit count out of range");
    if (n_layers < 1) throw nn::ShapeError("VQC needs at least one layer");
    if (out_dim < 1 || out_dim > n_qubits) throw nn::ShapeError("VQC out_dim must be in [1, n_qubits]");
}

std::vector<double> normalize_input(std::span<const double> raw, const EncodingSpec& spec) {
    if (raw.size() != spec.size()) {
        throw nn::ShapeError("normalize_input: got " + std::to_string(raw.size()) + " values for " +
                             std::to_string(spec.size()) + " encodings");
    }
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& e = spec[i];
        if (e.kind == InputKind::Bounded) {
            if (!(e.bound > 0.0)) throw nn::ShapeError("bounded encoding needs c > 0");
            out[i] = std::numbers::pi / e.bound * std::clamp(raw[i], -e.bound, e.bound);
        } else {
            out[i] = 2.0 * std::atan(raw[i]);
        }
    }
    return out;
}

Params Params::zeros(const Architecture& arch) {
    const auto n = table_size(arch);
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

void Params::validate(const Architecture& arch) const {
    const auto n = table_size(arch);
    if (lambda.size() != n || theta_ry.size() != n || theta_rz.size() != n) {
        throw nn::ShapeError("VQC parameter tables do not match the architecture");
    }
    for (const auto* t : {&lambda, &theta_ry, &theta_rz}) {
        for (double v : *t) {
            if (!std::isfinite(v)) throw nn::ShapeError("non-finite VQC parameter");
        }
    }
}

void init_params(Params& params, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::fill(params.lambda.begin(), params.lambda.end(), 1.0);
    for (double& v : params.theta_ry) v = angle(rng);
    for (double& v : params.theta_rz) v = angle(rng);
}

// Gate parameter ids: RX at l*n+i, RY at (L+l)*n+i, RZ at (2L+l)*n+i.
qsim::Circuit build_circuit(const Architecture& arch, const Params& params, std::span<const double> angles) {
    arch.validate();
    params.validate(arch);
    const int n = arch.n_qubits;
    const int layers = arch.n_layers;
    if (angles.size() != static_cast<std::size_t>(n)) {
        throw nn::ShapeError("VQC expects " + std::to_string(n) + " input angles, got " +
                             std::to_string(angles.size()));
    }
    qsim::Circuit c;
    c.n_qubits = n;
    c.n_params = 3 * layers * n;
    c.gates.reserve(static_cast<std::size_t>(layers * (4 * n)));
    for (int l = 0; l < layers; ++l) {
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(l * n + i);
            const double scale = arch.learnable_scaling ? params.lambda[idx] : 1.0;
            c.gates.push_back(qsim::GateOp::rx(i, scale * angles[static_cast<std::size_t>(i)], l * n + i));
        }
        if (arch.entangling && n > 1) {
            for (int i = 0; i + 1 < n; ++i) c.gates.push_back(qsim::GateOp::cnot(i, i + 1));
            c.gates.push_back(qsim::GateOp::cnot(n - 1, 0));
        }
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(l * n + i);
            c.gates.push_back(qsim::GateOp::ry(i, params.theta_ry[idx], (layers + l) * n + i));
            c.gates.push_back(qsim::GateOp::rz(i, params.theta_rz[idx], (2 * layers + l) * n + i));
        }
    }
    return c;
}

Forward forward(const Architecture& arch, const Params& params, std::span<const double> angles) {
    Forward f;
    f.trace.arch = arch;
    f.trace.angles.assign(angles.begin(), angles.end());
    if (arch.learnable_scaling) {
        f.trace.lambda = params.lambda;
    } else {
        f.trace.lambda.assign(table_size(arch), 1.0);
    }
    f.trace.circuit = build_circuit(arch, params, angles);
    f.trace.final_state = f.trace.circuit.run();
    f.outputs.reserve(static_cast<std::size_t>(arch.out_dim));
    for (int k = 0; k < arch.out_dim; ++k) f.outputs.push_back(f.trace.final_state.expectation_z(k));
    return f;
}

Gradients backward(const Trace& trace, std::span<const double> upstream) {
    const auto& arch = trace.arch;
    if (upstream.size() != static_cast<std::size_t>(arch.out_dim)) {
        throw nn::ShapeError("upstream gradient length does not match out_dim");
    }
    if (trace.circuit.n_qubits != arch.n_qubits || trace.angles.size() != static_cast<std::size_t>(arch.n_qubits)) {
        throw nn::ShapeError("trace does not match its architecture");
    }
    std::vector<qsim::Observable> obs;
    obs.reserve(upstream.size());
    for (int k = 0; k < arch.out_dim; ++k) obs.push_back({k});
    const auto gate_grad = qsim::adjoint_vjp(trace.circuit, trace.final_state, obs, upstream);

    const auto n = static_cast<std::size_t>(arch.n_qubits);
    const auto cells = table_size(arch);
    Gradients g;
    g.lambda.assign(cells, 0.0);
    g.theta_ry.assign(gate_grad.begin() + static_cast<std::ptrdiff_t>(cells),
                      gate_grad.begin() + static_cast<std::ptrdiff_t>(2 * cells));
    g.theta_rz.assign(gate_grad.begin() + static_cast<std::ptrdiff_t>(2 * cells), gate_grad.end());
    g.inputs.assign(n, 0.0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        const std::size_t i = idx % n;
        const double d_rx = gate_grad[idx];
        if (arch.learnable_scaling) g.lambda[idx] = trace.angles[i] * d_rx;
        g.inputs[i] += trace.lambda[idx] * d_rx;
    }
    return g;
}

Layer::Layer(const std::string& name, Architecture arch) : arch_(arch) {
    arch_.validate();
    const std::vector<int> shape{arch_.n_layers, arch_.n_qubits};
    lambda_ = nn::Tensor(name + ".lambda", shape);
    theta_ry_ = nn::Tensor(name + ".theta_ry", shape);
    theta_rz_ = nn::Tensor(name + ".theta_rz", shape);
    lambda_.fill(1.0);
}

void Layer::init(std::mt19937_64& rng) {
    Params p = Params::zeros(arch_);
    init_params(p, rng);
    lambda_.values() = p.lambda;
    theta_ry_.values() = p.theta_ry;
    theta_rz_.values() = p.theta_rz;
}

std::vector<nn::Tensor*> Layer::parameters() {
    if (arch_.learnable_scaling) return {&lambda_, &theta_ry_, &theta_rz_};
    return {&theta_ry_, &theta_rz_};
}

Params Layer::snapshot() const { return {lambda_.values(), theta_ry_.values(), theta_rz_.values()}; }

nn::Var Layer::forward(nn::Tape& tape, nn::Var angles) {
    auto result = vqc::forward(arch_, snapshot(), angles.value());
    auto trace = std::make_shared<const Trace>(std::move(result.trace));

    std::vector<nn::Var> inputs{angles, tape.parameter(theta_ry_), tape.parameter(theta_rz_)};
    const bool scaling = arch_.learnable_scaling;
    if (scaling) inputs.push_back(tape.parameter(lambda_));

    return tape.record(std::move(result.outputs), std::move(inputs), [trace, scaling](auto g, auto in) {
        const Gradients grads = backward(*trace, g);
        auto add = [](std::span<double> dst, const std::vector<double>& src) {
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
        };
        add(in[0], grads.inputs);
        add(in[1], grads.theta_ry);
        add(in[2], grads.theta_rz);
        if (scaling) add(in[3], grads.lambda);
    });
}

}  // namespace qoc::vqc
