#include "qoc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qoc::trainer {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
    if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
    return out;
}

double TrainConfig::decay_rate() const {
    if (eps_decay_rate > 0.0) return eps_decay_rate;
    return std::exp(std::log(eps_min / eps_start) / (0.5 * static_cast<double>(total_steps)));
}

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (n_critic < 1 || n_target < 1) throw std::invalid_argument("update periods must be positive");
    if (!(eps_min > 0.0) || !(eps_start > 0.0) || eps_min > eps_start || eps_start > 1.0) {
        throw std::invalid_argument("need 0 < eps_min <= eps_start <= 1");
    }
    if (eps_decay_rate < 0.0 || eps_decay_rate > 1.0) throw std::invalid_argument("eps_decay_rate must be in [0, 1]");
    if (term_reg < 0.0 || entropy_reg < 0.0) throw std::invalid_argument("regularizers must be non-negative");
    if (batch_size < 1 || buffer_capacity < 1) throw std::invalid_argument("batch and buffer sizes must be positive");
    if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
}

double epsilon_at(long t, const TrainConfig& config) {
    return std::max(config.eps_min, config.eps_start * std::pow(config.decay_rate(), static_cast<double>(t)));
}

double td_target(double r, bool terminated, double beta_next, double q_next_omega, double q_next_max, double gamma) {
    if (terminated) return r;
    return r + gamma * ((1.0 - beta_next) * q_next_omega + beta_next * q_next_max);
}

double td_target(agent::OptionCriticNet& net, agent::OptionCriticNet& target, const Transition& t, double gamma) {
    if (t.terminated) return t.r;
    nn::Tape tape;
    const double beta = net.terminations(tape, net.features(tape, t.s_next))[static_cast<std::size_t>(t.omega)];
    const auto q = target.q_values(tape, target.features(tape, t.s_next)).value();
    const double q_max = *std::max_element(q.begin(), q.end());
    return td_target(t.r, false, beta, q[static_cast<std::size_t>(t.omega)], q_max, gamma);
}

nn::Var policy_loss(nn::Var logits, int action, double advantage, double entropy_reg) {
    const nn::Var log_p = nn::pick(nn::log_softmax(logits), static_cast<std::size_t>(action));
    const nn::Var pg = nn::scale(log_p, -advantage);
    if (entropy_reg == 0.0) return pg;
    return nn::sub(pg, nn::scale(nn::entropy(nn::softmax(logits)), entropy_reg));
}

nn::Var termination_loss(nn::Var beta_omega, double q_omega, double q_max, double term_reg) {
    return nn::scale(beta_omega, q_omega - q_max + term_reg);
}

nn::Var critic_loss(std::span<const nn::Var> q_selected, std::span<const double> targets) {
    if (q_selected.empty() || q_selected.size() != targets.size()) {
        throw std::invalid_argument("critic_loss needs one target per prediction");
    }
    nn::Tape& tape = q_selected.front().tape();
    nn::Var acc = tape.constant({0.0});
    for (std::size_t j = 0; j < q_selected.size(); ++j) {
        acc = nn::add(acc, nn::square(nn::add_scalar(q_selected[j], -targets[j])));
    }
    return nn::scale(acc, 1.0 / (2.0 * static_cast<double>(q_selected.size())));
}

ActorLoss actor_loss(nn::Tape& tape, agent::OptionCriticNet& net, nn::Var h, nn::Var logits, const Transition& t,
                     double y, const TrainConfig& config) {
    const auto omega = static_cast<std::size_t>(t.omega);
    // Option values enter only as constants here.
    const auto q = net.q_values(tape, h).value();
    const double q_omega = q[omega];
    const double q_max = *std::max_element(q.begin(), q.end());

    ActorLoss out;
    out.policy = policy_loss(logits, t.a, y - q_omega, config.entropy_reg);
    const nn::Var beta = nn::pick(net.terminations(tape, h), omega);
    out.termination = termination_loss(beta, q_omega, q_max, config.term_reg);
    out.total = nn::add(out.policy, out.termination);
    out.entropy = nn::entropy(nn::softmax(logits.value()));
    return out;
}

nn::Var critic_loss(nn::Tape& tape, agent::OptionCriticNet& net, agent::OptionCriticNet& target,
                    std::span<const Transition* const> batch, const TrainConfig& config) {
    std::vector<nn::Var> preds;
    std::vector<double> targets;
    preds.reserve(batch.size());
    targets.reserve(batch.size());
    for (const Transition* tr : batch) {
        targets.push_back(td_target(net, target, *tr, config.gamma));
        preds.push_back(nn::pick(net.q_values(tape, net.features(tape, tr->s)), static_cast<std::size_t>(tr->omega)));
    }
    return critic_loss(preds, targets);
}

namespace {

std::mt19937_64 derive(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

}  // namespace

RngStreams::RngStreams(std::uint64_t seed)
    : init(derive(seed, 1)),
      env(derive(seed, 2)),
      action(derive(seed, 3)),
      option(derive(seed, 4)),
      termination(derive(seed, 5)),
      buffer(derive(seed, 6)) {}

Trainer::Trainer(envs::EnvId env, agent::VariantSpec variant, agent::NetOptions net_options, TrainConfig config,
                 std::uint64_t seed)
    : config_(config),
      rng_(seed),
      env_(envs::make_env(env)),
      net_(env, variant, net_options),
      target_(env, variant, net_options),
      adam_(net_.parameters(), nn::AdamConfig{config.lr}),
      buffer_(static_cast<std::size_t>(config.buffer_capacity)) {
    config_.validate();
    net_.init(rng_.init);
    target_.copy_parameters_from(net_);
    s_ = env_->reset(rng_.env);
    select_option(s_);
}

double Trainer::beta_of(std::span<const double> s, int omega) {
    scratch_.clear();
    return net_.terminations(scratch_, net_.features(scratch_, s))[static_cast<std::size_t>(omega)];
}

void Trainer::select_option(std::span<const double> s) {
    scratch_.clear();
    const auto q = net_.q_values(scratch_, net_.features(scratch_, s)).value();
    omega_ = agent::choose_option(q, epsilon_at(t_, config_), rng_.option);
}

StepMetrics Trainer::train_step() {
    ++t_;
    StepMetrics m;
    m.step = t_;
    m.option = omega_;
    m.epsilon = epsilon_at(t_ - 1, config_);

    tape_.clear();
    const nn::Var h = net_.features(tape_, s_);
    const nn::Var logits = net_.policy_logits(tape_, h, omega_);
    const int action = agent::sample_action(nn::softmax(logits.value()), rng_.action);

    const envs::EnvStep st = env_->step(action);
    Transition tr{s_, omega_, action, st.reward, st.observation, st.terminated};
    buffer_.push(tr);

    const double y = td_target(net_, target_, tr, config_.gamma);
    const ActorLoss actor = actor_loss(tape_, net_, h, logits, tr, y, config_);
    m.entropy = actor.entropy;
    m.actor_loss = actor.total.item();
    nn::Var total = actor.total;

    if (t_ % config_.n_critic == 0 && buffer_.size() >= static_cast<std::size_t>(config_.batch_size)) {
        const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng_.buffer);
        const nn::Var critic = critic_loss(tape_, net_, target_, batch, config_);
        m.critic_loss = critic.item();
        total = nn::add(total, critic);
    }

    adam_.zero_grad();
    tape_.backward(total);
    adam_.step();

    episode_return_ += st.reward;
    if (st.done()) {
        m.episode_return = episode_return_;
        episode_return_ = 0.0;
        s_ = env_->reset(rng_.env);
        select_option(s_);
    } else {
        s_ = st.observation;
        std::bernoulli_distribution terminate(beta_of(s_, omega_));
        if (terminate(rng_.termination)) select_option(s_);
    }

    if (t_ % config_.n_target == 0) target_.copy_parameters_from(net_);
    return m;
}

RandomBaseline::RandomBaseline(envs::EnvId env, std::uint64_t seed) : rng_(seed), env_(envs::make_env(env)) {
    env_->reset(rng_.env);
}

StepMetrics RandomBaseline::train_step() {
    ++t_;
    StepMetrics m;
    m.step = t_;
    m.epsilon = 1.0;
    m.entropy = std::log(static_cast<double>(env_->n_actions()));
    const auto st = env_->step(envs::random_action(env_->n_actions(), rng_.action));
    episode_return_ += st.reward;
    if (st.done()) {
        m.episode_return = episode_return_;
        episode_return_ = 0.0;
        env_->reset(rng_.env);
    }
    return m;
}

}  // namespace qoc::trainer
