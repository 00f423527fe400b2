#pragma once

// Exact statevector simulation for few-qubit circuits built from
// {RX, RY, RZ, CNOT}, with Pauli-Z readout and analytic gradients.
//
// Qubit 0 is the most significant bit of the basis index: for n qubits,
// qubit q is bit (n - 1 - q). |10> on two qubits is index 2.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qoc::qsim {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 12;

class SimError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class GateKind { RX, RY, RZ, CNOT };

struct GateOp {
    GateKind kind = GateKind::RX;
    int target = 0;
    int control = -1;  // CNOT only
    double angle = 0.0;  // rotations only, radians
    std::optional<int> param_id;

    static GateOp rx(int q, double angle, std::optional<int> pid = std::nullopt) {
        return {GateKind::RX, q, -1, angle, pid};
    }
    static GateOp ry(int q, double angle, std::optional<int> pid = std::nullopt) {
        return {GateKind::RY, q, -1, angle, pid};
    }
    static GateOp rz(int q, double angle, std::optional<int> pid = std::nullopt) {
        return {GateKind::RZ, q, -1, angle, pid};
    }
    static GateOp cnot(int control, int target) { return {GateKind::CNOT, target, control, 0.0, {}}; }

    bool is_rotation() const { return kind != GateKind::CNOT; }
    GateOp inverse() const;
};

/// Pauli-Z on a single qubit.
struct Observable {
    int qubit = 0;
};

class StateVector {
public:
    /// |0...0> on n qubits. Throws SimError outside [1, kMaxQubits].
    static StateVector ground(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Amplitude> amplitudes() const { return amps_; }
    std::span<Amplitude> amplitudes() { return amps_; }

    /// Replace amplitudes wholesale (length must match). Not renormalized.
    void set_amplitudes(std::span<const Amplitude> amps);

    void apply(const GateOp& gate);
    double expectation_z(int qubit) const;
    double norm_squared() const;

    /// <this|other>
    Amplitude inner(const StateVector& other) const;

private:
    StateVector(int n, std::vector<Amplitude> amps) : n_qubits_(n), amps_(std::move(amps)) {}
    std::size_t mask(int qubit) const { return std::size_t{1} << (n_qubits_ - 1 - qubit); }
    void check_qubit(int qubit) const;

    int n_qubits_ = 0;
    std::vector<Amplitude> amps_;
};

StateVector init_ground(int n_qubits);
StateVector apply_gate(StateVector state, const GateOp& gate);
double expectation_z(const StateVector& state, int qubit);

/// An ordered gate list on a fixed register. Trainable gates carry a
/// param_id in [0, n_params).
struct Circuit {
    int n_qubits = 1;
    int n_params = 0;
    std::vector<GateOp> gates;

    /// Checks indices, CNOT control != target, and param_id ranges.
    void validate() const;
    StateVector run() const;
};

/// Row k holds d<O_k>/d(param j) for j in [0, n_params).
using Jacobian = std::vector<std::vector<double>>;

std::vector<double> expectations(const StateVector& state, std::span<const Observable> observables);
std::vector<double> expectations(const Circuit& circuit, std::span<const Observable> observables);

/// Adjoint differentiation of sum_k weights[k] * <O_k> given the final state
/// of `circuit`. One reverse sweep; gates sharing a param_id accumulate.
std::vector<double> adjoint_vjp(const Circuit& circuit, const StateVector& final_state,
                                std::span<const Observable> observables, std::span<const double> weights);

/// Full Jacobian by adjoint differentiation (one sweep per observable).
Jacobian grad_expectations(const Circuit& circuit, std::span<const Observable> observables);

/// Parameter-shift Jacobian, evaluated gate by gate with +-pi/2 shifts.
/// Independent of the adjoint path; kept as a test oracle.
Jacobian grad_expectations_param_shift(const Circuit& circuit, std::span<const Observable> observables);

}  // namespace qoc::qsim
