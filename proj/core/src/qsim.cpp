#include "qoc/qsim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qoc::qsim {

namespace {

constexpr Amplitude kI{0.0, 1.0};

// <lhs| P_q |rhs> for the Pauli generator of a rotation gate.
Amplitude pauli_inner(const StateVector& lhs, const StateVector& rhs, GateKind kind, std::size_t m) {
    const auto a = lhs.amplitudes();
    const auto b = rhs.amplitudes();
    Amplitude acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i & m) continue;
        const std::size_t j = i | m;
        switch (kind) {
            case GateKind::RX:
                acc += std::conj(a[i]) * b[j] + std::conj(a[j]) * b[i];
                break;
            case GateKind::RY:
                acc += std::conj(a[i]) * (-kI * b[j]) + std::conj(a[j]) * (kI * b[i]);
                break;
            case GateKind::RZ:
                acc += std::conj(a[i]) * b[i] - std::conj(a[j]) * b[j];
                break;
            case GateKind::CNOT:
                break;
        }
    }
    return acc;
}

}  // namespace

GateOp GateOp::inverse() const {
    GateOp inv = *this;
    if (is_rotation()) inv.angle = -angle;
    return inv;
}

StateVector StateVector::ground(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw SimError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                       std::to_string(n_qubits));
    }
    std::vector<Amplitude> amps(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
    amps[0] = 1.0;
    return StateVector(n_qubits, std::move(amps));
}

void StateVector::set_amplitudes(std::span<const Amplitude> amps) {
    if (amps.size() != amps_.size()) throw SimError("amplitude count mismatch");
    amps_.assign(amps.begin(), amps.end());
}

void StateVector::check_qubit(int qubit) const {
    if (qubit < 0 || qubit >= n_qubits_) {
        throw SimError("qubit index " + std::to_string(qubit) + " out of range for " +
                       std::to_string(n_qubits_) + " qubits");
    }
}

void StateVector::apply(const GateOp& gate) {
    check_qubit(gate.target);
    const std::size_t m = mask(gate.target);
    const std::size_t n = amps_.size();

    if (gate.kind == GateKind::CNOT) {
        check_qubit(gate.control);
        if (gate.control == gate.target) throw SimError("CNOT control equals target");
        const std::size_t cm = mask(gate.control);
        for (std::size_t i = 0; i < n; ++i) {
            if ((i & cm) && !(i & m)) std::swap(amps_[i], amps_[i | m]);
        }
        return;
    }

    const double c = std::cos(gate.angle / 2.0);
    const double s = std::sin(gate.angle / 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i & m) continue;
        const std::size_t j = i | m;
        const Amplitude a0 = amps_[i];
        const Amplitude a1 = amps_[j];
        switch (gate.kind) {
            case GateKind::RX:
                amps_[i] = c * a0 - kI * s * a1;
                amps_[j] = -kI * s * a0 + c * a1;
                break;
            case GateKind::RY:
                amps_[i] = c * a0 - s * a1;
                amps_[j] = s * a0 + c * a1;
                break;
            case GateKind::RZ:
                amps_[i] = Amplitude{c, -s} * a0;
                amps_[j] = Amplitude{c, s} * a1;
                break;
            case GateKind::CNOT:
                break;
        }
    }
}

double StateVector::expectation_z(int qubit) const {
    check_qubit(qubit);
    const std::size_t m = mask(qubit);
    double p0 = 0.0;
    double p1 = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        ((i & m) ? p1 : p0) += std::norm(amps_[i]);
    }
    // |p0 - p1| <= p0 + p1 survives rounding, so the ratio stays in [-1, 1].
    return (p0 - p1) / (p0 + p1);
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

Amplitude StateVector::inner(const StateVector& other) const {
    if (other.amps_.size() != amps_.size()) throw SimError("inner product dimension mismatch");
    Amplitude acc{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) acc += std::conj(amps_[i]) * other.amps_[i];
    return acc;
}

StateVector init_ground(int n_qubits) { return StateVector::ground(n_qubits); }

StateVector apply_gate(StateVector state, const GateOp& gate) {
    state.apply(gate);
    return state;
}

double expectation_z(const StateVector& state, int qubit) { return state.expectation_z(qubit); }

void Circuit::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw SimError("circuit qubit count out of range");
    if (n_params < 0) throw SimError("negative parameter count");
    for (const auto& g : gates) {
        if (g.target < 0 || g.target >= n_qubits) throw SimError("gate target out of range");
        if (g.kind == GateKind::CNOT) {
            if (g.control < 0 || g.control >= n_qubits) throw SimError("CNOT control out of range");
            if (g.control == g.target) throw SimError("CNOT control equals target");
            if (g.param_id) throw SimError("CNOT cannot carry a trainable parameter");
        } else if (g.param_id && (*g.param_id < 0 || *g.param_id >= n_params)) {
            throw SimError("param_id out of range");
        }
    }
}

StateVector Circuit::run() const {
    auto state = StateVector::ground(n_qubits);
    for (const auto& g : gates) state.apply(g);
    return state;
}

std::vector<double> expectations(const StateVector& state, std::span<const Observable> observables) {
    std::vector<double> out;
    out.reserve(observables.size());
    for (const auto& o : observables) out.push_back(state.expectation_z(o.qubit));
    return out;
}

std::vector<double> expectations(const Circuit& circuit, std::span<const Observable> observables) {
    circuit.validate();
    return expectations(circuit.run(), observables);
}

std::vector<double> adjoint_vjp(const Circuit& circuit, const StateVector& final_state,
                                std::span<const Observable> observables, std::span<const double> weights) {
    if (weights.size() != observables.size()) throw SimError("weights and observables differ in length");
    std::vector<double> grad(static_cast<std::size_t>(circuit.n_params), 0.0);

    bool any_weight = false;
    for (double w : weights) any_weight = any_weight || w != 0.0;
    if (!any_weight || circuit.n_params == 0) return grad;

    StateVector phi = final_state;
    // lambda = H phi with H = sum_k w_k Z_k (diagonal).
    StateVector lambda = final_state;
    {
        const int n = final_state.n_qubits();
        auto amps = lambda.amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i) {
            double h = 0.0;
            for (std::size_t k = 0; k < observables.size(); ++k) {
                const std::size_t m = std::size_t{1} << (n - 1 - observables[k].qubit);
                h += (i & m) ? -weights[k] : weights[k];
            }
            amps[i] *= h;
        }
    }

    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
        const GateOp& g = *it;
        if (g.param_id) {
            if (!g.is_rotation()) throw SimError("non-rotation gate carries a param_id");
            const std::size_t m = std::size_t{1} << (circuit.n_qubits - 1 - g.target);
            // d/dtheta <H> = Im <lambda| P psi_i>, psi_i the state right after this gate.
            grad[static_cast<std::size_t>(*g.param_id)] += pauli_inner(lambda, phi, g.kind, m).imag();
        }
        const GateOp inv = g.inverse();
        phi.apply(inv);
        lambda.apply(inv);
    }
    return grad;
}

Jacobian grad_expectations(const Circuit& circuit, std::span<const Observable> observables) {
    circuit.validate();
    const StateVector final_state = circuit.run();
    Jacobian jac;
    jac.reserve(observables.size());
    std::vector<double> w(observables.size(), 0.0);
    for (std::size_t k = 0; k < observables.size(); ++k) {
        std::fill(w.begin(), w.end(), 0.0);
        w[k] = 1.0;
        jac.push_back(adjoint_vjp(circuit, final_state, observables, w));
    }
    return jac;
}

Jacobian grad_expectations_param_shift(const Circuit& circuit, std::span<const Observable> observables) {
    circuit.validate();
    Jacobian jac(observables.size(), std::vector<double>(static_cast<std::size_t>(circuit.n_params), 0.0));
    constexpr double kShift = std::numbers::pi / 2.0;
    Circuit shifted = circuit;
    for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
        const GateOp& g = circuit.gates[gi];
        if (!g.param_id) continue;
        if (!g.is_rotation()) throw SimError("non-rotation gate carries a param_id");
        shifted.gates[gi].angle = g.angle + kShift;
        const auto plus = expectations(shifted.run(), observables);
        shifted.gates[gi].angle = g.angle - kShift;
        const auto minus = expectations(shifted.run(), observables);
        shifted.gates[gi].angle = g.angle;
        for (std::size_t k = 0; k < observables.size(); ++k) {
            jac[k][static_cast<std::size_t>(*g.param_id)] += 0.5 * (plus[k] - minus[k]);
        }
    }
    return jac;
}

}  // namespace qoc::qsim
