#pragma once

// CartPole-v1 and Acrobot-v1 classic-control tasks with the standard
// constants, integrators, termination rules and 500-step time limit.

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "qoc/vqc.hpp"

namespace qoc::envs {

enum class EnvId { CartPole, Acrobot };

EnvId parse_env(std::string_view name);
std::string_view env_name(EnvId id);

class EnvError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxEpisodeSteps = 500;

struct EnvStep {
    std::vector<double> observation;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    bool done() const { return terminated || truncated; }
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual EnvId id() const = 0;
    virtual int obs_dim() const = 0;
    virtual int n_actions() const = 0;

    /// Draws the initial state from `rng`.
    virtual std::vector<double> reset(std::mt19937_64& rng) = 0;
    std::vector<double> reset(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return reset(rng);
    }
    virtual EnvStep step(int action) = 0;
    virtual std::vector<double> observation() const = 0;

    int elapsed_steps() const { return elapsed_; }

protected:
    int elapsed_ = 0;
};

struct CartPoleState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
};

struct CartPoleConstants {
    static constexpr double gravity = 9.8;
    static constexpr double mass_cart = 1.0;
    static constexpr double mass_pole = 0.1;
    static constexpr double total_mass = mass_cart + mass_pole;
    static constexpr double half_length = 0.5;
    static constexpr double pole_mass_length = mass_pole * half_length;
    static constexpr double force_mag = 10.0;
    static constexpr double tau = 0.02;
    static constexpr double x_threshold = 2.4;
    static constexpr double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
};

/// One Euler step (positions advance with the old velocities).
CartPoleState cartpole_dynamics(const CartPoleState& s, int action);
bool cartpole_terminal(const CartPoleState& s);

class CartPole final : public Environment {
public:
    EnvId id() const override { return EnvId::CartPole; }
    int obs_dim() const override { return 4; }
    int n_actions() const override { return 2; }

    using Environment::reset;
    std::vector<double> reset(std::mt19937_64& rng) override;
    EnvStep step(int action) override;
    std::vector<double> observation() const override;

    const CartPoleState& state() const { return state_; }
    void set_state(const CartPoleState& s) { state_ = s; }

private:
    CartPoleState state_;
};

struct AcrobotState {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta1_dot = 0.0;
    double theta2_dot = 0.0;
};

struct AcrobotConstants {
    static constexpr double dt = 0.2;
    static constexpr double link_length_1 = 1.0;
    static constexpr double link_mass_1 = 1.0;
    static constexpr double link_mass_2 = 1.0;
    static constexpr double link_com_1 = 0.5;
    static constexpr double link_com_2 = 0.5;
    static constexpr double link_moi = 1.0;
    static constexpr double gravity = 9.8;
    static constexpr double max_vel_1 = 4.0 * 3.14159265358979323846;
    static constexpr double max_vel_2 = 9.0 * 3.14159265358979323846;
    static constexpr std::array<double, 3> torques{-1.0, 0.0, 1.0};
};

/// One RK4 step of dt with angle wrapping to [-pi, pi] and velocity clipping.
AcrobotState acrobot_dynamics(const AcrobotState& s, int action);
bool acrobot_terminal(const AcrobotState& s);

class Acrobot final : public Environment {
public:
    EnvId id() const override { return EnvId::Acrobot; }
    int obs_dim() const override { return 6; }
    int n_actions() const override { return 3; }

    using Environment::reset;
    std::vector<double> reset(std::mt19937_64& rng) override;
    EnvStep step(int action) override;
    std::vector<double> observation() const override;

    const AcrobotState& state() const { return state_; }
    void set_state(const AcrobotState& s) { state_ = s; }

private:
    AcrobotState state_;
};

std::unique_ptr<Environment> make_env(EnvId id);

/// Per-dimension input encoding for a quantum feature extractor reading
/// this environment's observations.
vqc::EncodingSpec encoding_spec(EnvId id);

/// Uniform-random policy; the baseline agent's only decision.
int random_action(int n_actions, std::mt19937_64& rng);

/// Plays `episodes` full episodes with uniform-random actions and returns
/// each undiscounted episode return.
std::vector<double> random_returns(EnvId id, int episodes, std::uint64_t seed);

}  // namespace qoc::envs
