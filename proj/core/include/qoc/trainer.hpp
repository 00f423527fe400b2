#pragma once

// DQN-style option-critic training: online actor losses every step, replay
// critic updates every n_critic steps, one joint Adam step, Bernoulli option
// termination, and a periodically synchronized target network.

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qoc/agent.hpp"
#include "qoc/diffnet.hpp"
#include "qoc/envs.hpp"

namespace qoc::trainer {

struct Transition {
    std::vector<double> s;
    int omega = 0;
    int a = 0;
    double r = 0.0;
    std::vector<double> s_next;
    bool terminated = false;  // environment termination only; truncation bootstraps
};

/// FIFO ring; once full, each push evicts the oldest transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// Index 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const { return items_.at(i); }
    /// Uniform draws with replacement.
    std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct TrainConfig {
    double gamma = 0.99;
    double lr = 0.0005;
    int n_critic = 4;
    int n_target = 200;
    double eps_start = 1.0;
    double eps_min = 0.05;
    /// Per-step multiplicative decay; 0 means "reach eps_min at half of total_steps".
    double eps_decay_rate = 0.0;
    double term_reg = 0.01;
    double entropy_reg = 0.01;
    int batch_size = 32;
    int buffer_capacity = 10000;
    long total_steps = 100000;

    double decay_rate() const;
    void validate() const;
};

/// max(eps_min, eps_start * decay^t)
double epsilon_at(long t, const TrainConfig& config);

/// r + gamma * ((1 - beta) * Q'(s', omega) + beta * max Q'(s', .)), or r when terminated.
double td_target(double r, bool terminated, double beta_next, double q_next_omega, double q_next_max, double gamma);

/// Network-level target: beta from `net`, option values from `target`.
double td_target(agent::OptionCriticNet& net, agent::OptionCriticNet& target, const Transition& t, double gamma);

/// -log pi(a) * advantage - entropy_reg * H(pi); advantage is a constant.
nn::Var policy_loss(nn::Var logits, int action, double advantage, double entropy_reg);

/// beta_omega * (q_omega - q_max + term_reg); only beta carries gradient.
nn::Var termination_loss(nn::Var beta_omega, double q_omega, double q_max, double term_reg);

/// (1 / 2|B|) * sum_j (q_j - y_j)^2 with constant targets.
nn::Var critic_loss(std::span<const nn::Var> q_selected, std::span<const double> targets);

struct ActorLoss {
    nn::Var total;
    nn::Var policy;
    nn::Var termination;
    double entropy = 0.0;
};

/// Online actor loss for one transition. `h` and `logits` are the features
/// and active-policy logits for t.s already on `tape`.
ActorLoss actor_loss(nn::Tape& tape, agent::OptionCriticNet& net, nn::Var h, nn::Var logits, const Transition& t,
                     double y, const TrainConfig& config);

/// Replay critic loss, recomputing features for every sampled state.
nn::Var critic_loss(nn::Tape& tape, agent::OptionCriticNet& net, agent::OptionCriticNet& target,
                    std::span<const Transition* const> batch, const TrainConfig& config);

struct StepMetrics {
    long step = 0;
    std::optional<double> episode_return;
    double entropy = 0.0;
    double actor_loss = 0.0;
    std::optional<double> critic_loss;
    double epsilon = 0.0;
    int option = 0;
};

/// Independent per-consumer RNG streams derived from one master seed.
struct RngStreams {
    explicit RngStreams(std::uint64_t seed);
    std::mt19937_64 init;
    std::mt19937_64 env;
    std::mt19937_64 action;
    std::mt19937_64 option;
    std::mt19937_64 termination;
    std::mt19937_64 buffer;
};

class StepRunner {
public:
    virtual ~StepRunner() = default;
    virtual StepMetrics train_step() = 0;
    virtual long steps_done() const = 0;
};

class Trainer final : public StepRunner {
public:
    Trainer(envs::EnvId env, agent::VariantSpec variant, agent::NetOptions net_options, TrainConfig config,
            std::uint64_t seed);

    StepMetrics train_step() override;
    long steps_done() const override { return t_; }

    agent::OptionCriticNet& net() { return net_; }
    agent::OptionCriticNet& target() { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const TrainConfig& config() const { return config_; }
    int active_option() const { return omega_; }

private:
    double beta_of(std::span<const double> s, int omega);
    void select_option(std::span<const double> s);

    TrainConfig config_;
    RngStreams rng_;
    std::unique_ptr<envs::Environment> env_;
    agent::OptionCriticNet net_;
    agent::OptionCriticNet target_;
    nn::Adam adam_;
    ReplayBuffer buffer_;
    nn::Tape tape_;
    nn::Tape scratch_;
    std::vector<double> s_;
    int omega_ = 0;
    long t_ = 0;
    double episode_return_ = 0.0;
};

/// Uniform-random actions through the same episode loop; never learns.
class RandomBaseline final : public StepRunner {
public:
    RandomBaseline(envs::EnvId env, std::uint64_t seed);

    StepMetrics train_step() override;
    long steps_done() const override { return t_; }

private:
    RngStreams rng_;
    std::unique_ptr<envs::Environment> env_;
    long t_ = 0;
    double episode_return_ = 0.0;
};

}  // namespace qoc::trainer
