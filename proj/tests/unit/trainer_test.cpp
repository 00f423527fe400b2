#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qoc/trainer.hpp"

using namespace qoc;
using namespace qoc::trainer;
using envs::EnvId;

namespace {

double grad_norm(const std::vector<nn::Tensor*>& params) {
    double s = 0.0;
    for (const nn::Tensor* t : params)
        for (double g : t->grad()) s += g * g;
    return std::sqrt(s);
}

struct Probe {
    agent::OptionCriticNet net{EnvId::CartPole, agent::parse_variant("classical")};
    agent::OptionCriticNet target{EnvId::CartPole, agent::parse_variant("classical")};
    Transition tr{{0.02, -0.1, 0.03, 0.2}, 1, 0, 1.0, {0.01, 0.1, 0.02, -0.1}, false};

    Probe() {
        std::mt19937_64 rng(5);
        net.init(rng);
        target.copy_parameters_from(net);
        for (nn::Tensor* t : net.parameters()) t->zero_grad();
    }
    void expect_grads(bool fe, bool q, bool term, bool pol0, bool pol1) {
        EXPECT_EQ(grad_norm(net.feature_extractor().parameters()) > 0, fe);
        EXPECT_EQ(grad_norm(net.option_value_head().parameters()) > 0, q);
        EXPECT_EQ(grad_norm(net.termination_head().parameters()) > 0, term);
        EXPECT_EQ(grad_norm(net.policy_head(0).parameters()) > 0, pol0);
        EXPECT_EQ(grad_norm(net.policy_head(1).parameters()) > 0, pol1);
        for (nn::Tensor* t : target.parameters())
            for (double g : t->grad()) EXPECT_EQ(g, 0.0);
    }
};

}  // namespace

TEST(TdTarget, Arithmetic) {
    EXPECT_NEAR(td_target(1.0, false, 0.25, 2.0, 3.0, 0.99), 3.2275, 1e-12);
    EXPECT_EQ(td_target(1.0, true, 0.25, 2.0, 3.0, 0.99), 1.0);
    EXPECT_NEAR(td_target(-1.0, false, 0.0, 2.0, 3.0, 0.99), -1.0 + 0.99 * 2.0, 1e-12);
    EXPECT_NEAR(td_target(0.0, false, 1.0, 2.0, 3.0, 0.5), 1.5, 1e-12);
}

TEST(TdTarget, NetworkLevelUsesMainBetaAndTargetValues) {
    Probe p;
    nn::Tape tape;
    const double beta = p.net.terminations(tape, p.net.features(tape, p.tr.s_next))[1];
    // Perturb the target so its values differ from the main network's.
    for (nn::Tensor* t : p.target.option_value_head().parameters())
        for (double& v : t->values()) v += 0.3;
    const auto q = p.target.q_values(tape, p.target.features(tape, p.tr.s_next)).value();
    const double expect = 1.0 + 0.99 * ((1 - beta) * q[1] + beta * std::max(q[0], q[1]));
    EXPECT_NEAR(td_target(p.net, p.target, p.tr, 0.99), expect, 1e-12);
    Transition done = p.tr;
    done.terminated = true;
    EXPECT_EQ(td_target(p.net, p.target, done, 0.99), 1.0);
}

TEST(Losses, PolicyExamples) {
    nn::Tape tape;
    const auto uniform = tape.constant({0.0, 0.0});
    EXPECT_NEAR(policy_loss(uniform, 0, 1.0, 0.0).item(), std::log(2.0), 1e-12);
    EXPECT_NEAR(policy_loss(uniform, 1, 0.0, 0.01).item(), -0.01 * std::log(2.0), 1e-12);
    const auto sure = tape.constant({60.0, 0.0});
    EXPECT_NEAR(policy_loss(sure, 0, 1.0, 0.01).item(), 0.0, 1e-12);
}

TEST(Losses, TerminationExamples) {
    nn::Tape tape;
    const auto half = tape.constant({0.5});
    EXPECT_NEAR(termination_loss(half, 1.0, 1.5, 0.01).item(), -0.245, 1e-12);
    EXPECT_NEAR(termination_loss(half, 1.5, 1.5, 0.01).item(), 0.005, 1e-12);
    EXPECT_EQ(termination_loss(tape.constant({0.0}), 1.0, 1.5, 0.01).item(), 0.0);
}

TEST(Losses, CriticExamples) {
    nn::Tape tape;
    std::vector<nn::Var> one{tape.constant({2.0})};
    EXPECT_NEAR(critic_loss(one, std::vector<double>{3.0}).item(), 0.5, 1e-12);
    EXPECT_EQ(critic_loss(one, std::vector<double>{2.0}).item(), 0.0);
    std::vector<nn::Var> two{tape.constant({1.0}), tape.constant({-1.0})};
    EXPECT_NEAR(critic_loss(two, std::vector<double>{0.0, 0.0}).item(), 0.5, 1e-12);
    EXPECT_THROW(critic_loss(two, std::vector<double>{0.0}), std::invalid_argument);
}

TEST(GradientFlow, PolicyLossReachesActivePolicyAndExtractor) {
    Probe p;
    nn::Tape tape;
    const auto h = p.net.features(tape, p.tr.s);
    const auto logits = p.net.policy_logits(tape, h, p.tr.omega);
    const auto loss = actor_loss(tape, p.net, h, logits, p.tr, 2.0, TrainConfig{});
    tape.backward(loss.policy);
    p.expect_grads(true, false, false, false, true);
}

TEST(GradientFlow, TerminationLossReachesOnlyBetaPath) {
    Probe p;
    nn::Tape tape;
    const auto h = p.net.features(tape, p.tr.s);
    const auto logits = p.net.policy_logits(tape, h, p.tr.omega);
    const auto loss = actor_loss(tape, p.net, h, logits, p.tr, 2.0, TrainConfig{});
    tape.backward(loss.termination);
    p.expect_grads(true, false, true, false, false);
}

TEST(GradientFlow, CriticLossReachesValueHeadAndExtractor) {
    Probe p;
    ReplayBuffer buf(8);
    for (int i = 0; i < 4; ++i) buf.push(p.tr);
    std::mt19937_64 rng(1);
    const auto batch = buf.sample(4, rng);
    nn::Tape tape;
    tape.backward(critic_loss(tape, p.net, p.target, batch, TrainConfig{}));
    p.expect_grads(true, true, false, false, false);
}

TEST(ReplayBuffer, FifoEviction) {
    ReplayBuffer b(2);
    for (int i = 0; i < 3; ++i) {
        Transition t;
        t.a = i;
        b.push(t);
    }
    EXPECT_EQ(b.size(), 2u);
    EXPECT_EQ(b.at(0).a, 1);
    EXPECT_EQ(b.at(1).a, 2);
    std::mt19937_64 rng(1);
    for (const Transition* t : b.sample(50, rng)) EXPECT_NE(t->a, 0);
    EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
    EXPECT_THROW(ReplayBuffer(3).sample(1, rng), std::logic_error);
}

TEST(Epsilon, Schedule) {
    TrainConfig c;
    EXPECT_DOUBLE_EQ(epsilon_at(0, c), 1.0);
    EXPECT_NEAR(epsilon_at(c.total_steps / 2, c), 0.05, 1e-9);
    EXPECT_DOUBLE_EQ(epsilon_at(10 * c.total_steps, c), 0.05);
    c.eps_decay_rate = 0.999;
    EXPECT_NEAR(epsilon_at(1000, c), 0.3677, 1e-4);
    double prev = 2.0;
    for (long t = 0; t < 200000; t += 997) {
        const double e = epsilon_at(t, c);
        EXPECT_LE(e, prev);
        prev = e;
    }
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.gamma = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.eps_min = 0.5;
    c.eps_start = 0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Trainer, CriticCadenceAndTargetSync) {
    TrainConfig c;
    c.total_steps = 400;
    Trainer tr(EnvId::CartPole, agent::parse_variant("classical"), {}, c, 3);
    for (long t = 1; t <= 400; ++t) {
        const auto m = tr.train_step();
        EXPECT_EQ(m.step, t);
        EXPECT_EQ(m.critic_loss.has_value(), t % 4 == 0 && t >= 32) << "t=" << t;
        EXPECT_GE(m.entropy, 0.0);
        EXPECT_LE(m.entropy, std::log(2.0) + 1e-12);
        if (t == 200 || t == 400) {
            const auto a = tr.net().parameters();
            const auto b = tr.target().parameters();
            for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->values(), b[i]->values());
        }
        if (t == 201) {
            const auto a = tr.net().parameters();
            const auto b = tr.target().parameters();
            bool differ = false;
            for (std::size_t i = 0; i < a.size(); ++i) differ = differ || a[i]->values() != b[i]->values();
            EXPECT_TRUE(differ);
        }
    }
    EXPECT_EQ(tr.buffer().size(), 400u);
}

TEST(Trainer, TerminationFrequencyMatchesBeta) {
    // Frozen networks, uniform option choice: the option changes between two
    // steps of one episode with probability beta / 2.
    const double beta = 0.3;
    TrainConfig c;
    c.lr = 1e-300;
    c.eps_start = 1.0;
    c.eps_min = 1.0;
    Trainer tr(EnvId::CartPole, agent::parse_variant("classical"), {}, c, 11);
    for (nn::Tensor* t : tr.net().termination_head().parameters()) t->fill(0.0);
    tr.net().termination_head().parameters()[1]->fill(std::log(beta / (1 - beta)));

    const int n = 20000;
    int pairs = 0, switches = 0;
    auto prev = tr.train_step();
    for (int i = 0; i < n; ++i) {
        const auto m = tr.train_step();
        if (!prev.episode_return) {
            ++pairs;
            switches += m.option != prev.option;
        }
        prev = m;
    }
    const double p = beta / 2;
    EXPECT_NEAR(static_cast<double>(switches) / pairs, p, 3 * std::sqrt(p * (1 - p) / pairs));
}

TEST(Trainer, QuantumCriticBoundsTargets) {
    TrainConfig c;
    Trainer tr(EnvId::CartPole, agent::parse_variant("hybrid_o"), {}, c, 2);
    for (int i = 0; i < 300; ++i) tr.train_step();
    for (std::size_t i = 0; i < tr.buffer().size(); ++i) {
        const double y = td_target(tr.net(), tr.target(), tr.buffer().at(i), c.gamma);
        EXPECT_LE(std::abs(y), 1.0 + c.gamma);
    }
}

TEST(Trainer, SameSeedSameMetrics) {
    TrainConfig c;
    c.total_steps = 300;
    for (const char* v : {"classical", "hybrid_fotp"}) {
        Trainer a(EnvId::Acrobot, agent::parse_variant(v), {}, c, 42);
        Trainer b(EnvId::Acrobot, agent::parse_variant(v), {}, c, 42);
        for (int i = 0; i < 300; ++i) {
            const auto ma = a.train_step();
            const auto mb = b.train_step();
            ASSERT_EQ(ma.actor_loss, mb.actor_loss);
            ASSERT_EQ(ma.critic_loss, mb.critic_loss);
            ASSERT_EQ(ma.option, mb.option);
        }
    }
}

TEST(RandomBaseline, MaximalEntropyAndEpisodes) {
    RandomBaseline r(EnvId::CartPole, 1);
    int episodes = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto m = r.train_step();
        EXPECT_DOUBLE_EQ(m.entropy, std::log(2.0));
        episodes += m.episode_return.has_value();
    }
    EXPECT_GT(episodes, 30);
    EXPECT_EQ(r.steps_done(), 2000);
}
