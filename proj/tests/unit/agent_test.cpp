#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "qoc/agent.hpp"

using namespace qoc;
using namespace qoc::agent;
using envs::EnvId;

namespace {

ComponentCounts counts(EnvId env, const std::string& variant, NetOptions opt = {}) {
    return OptionCriticNet(env, parse_variant(variant), opt).component_counts();
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qoc_agent_test_" + name);
}

}  // namespace

TEST(Variant, ParseRoundTrip) {
    EXPECT_EQ(parse_variant("classical"), VariantSpec{});
    EXPECT_EQ(parse_variant("hybrid_f"), (VariantSpec{true, false, false, false}));
    EXPECT_EQ(parse_variant("hybrid_fotp"), (VariantSpec{true, true, true, true}));
    EXPECT_EQ(parse_variant("hybrid_fp"), (VariantSpec{true, false, false, true}));
    for (const auto& name : hybrid_variant_names()) EXPECT_EQ(variant_name(parse_variant(name)), name);
    EXPECT_EQ(hybrid_variant_names().size(), 8u);
    EXPECT_THROW(parse_variant("hybrid_x"), std::invalid_argument);
    EXPECT_THROW(parse_variant("hybrid_"), std::invalid_argument);
}

TEST(Counts, CartPoleComponents) {
    EXPECT_EQ(counts(EnvId::CartPole, "classical"), (ComponentCounts{76, 10, 10, 20}));
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_fotp"), (ComponentCounts{48, 12, 12, 24}));
}

TEST(Counts, AcrobotComponents) {
    EXPECT_EQ(counts(EnvId::Acrobot, "classical"), (ComponentCounts{110, 29, 29, 66}));
    EXPECT_EQ(counts(EnvId::Acrobot, "hybrid_fotp"), (ComponentCounts{90, 36, 36, 72}));
}

TEST(Counts, HybridFeatureExtractorTotals) {
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_f").total(), 88);
    EXPECT_EQ(counts(EnvId::Acrobot, "hybrid_f").total(), 214);
}

TEST(Counts, ScaledClassicalTotals) {
    const int cartpole[] = {188, 260, 332};
    const int acrobot[] = {338, 442, 546};
    int i = 0;
    for (int w : {16, 24, 32}) {
        NetOptions o;
        o.fe_width = w;
        EXPECT_EQ(counts(EnvId::CartPole, "classical", o).total(), cartpole[i]);
        EXPECT_EQ(counts(EnvId::Acrobot, "classical", o).total(), acrobot[i]);
        ++i;
    }
}

TEST(Counts, AblationsTouchOnlyTheirComponent) {
    NetOptions deeper;
    deeper.depth_delta = 2;
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_f", deeper), (ComponentCounts{72, 10, 10, 20}));
    NetOptions shallower;
    shallower.depth_delta = -2;
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_f", shallower).feature_extractor, 24);
    NetOptions fixed;
    fixed.learnable_scaling = false;
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_f", fixed).feature_extractor, 32);
    NetOptions flat;
    flat.entangling = false;
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_f", flat), counts(EnvId::CartPole, "hybrid_f"));
    NetOptions too_shallow;
    too_shallow.depth_delta = -4;
    EXPECT_THROW(OptionCriticNet(EnvId::CartPole, parse_variant("hybrid_f"), too_shallow), std::invalid_argument);
}

TEST(Counts, MoreOptions) {
    NetOptions o;
    o.n_options = 3;
    const auto c = counts(EnvId::CartPole, "classical", o);
    EXPECT_EQ(c.option_value, 15);
    EXPECT_EQ(c.policies, 30);
    NetOptions four;
    four.n_options = 4;
    EXPECT_EQ(counts(EnvId::CartPole, "hybrid_p", four).policies, 48);
    NetOptions one;
    one.n_options = 1;
    EXPECT_THROW(OptionCriticNet(EnvId::CartPole, VariantSpec{}, one), std::invalid_argument);
}

TEST(Net, ParametersMatchCounts) {
    for (auto env : {EnvId::CartPole, EnvId::Acrobot}) {
        for (const char* v : {"classical", "hybrid_f", "hybrid_fotp"}) {
            OptionCriticNet net(env, parse_variant(v));
            EXPECT_EQ(nn::count_parameters(net.parameters()), net.component_counts().total()) << v;
        }
    }
}

TEST(Net, OutputShapesAndRanges) {
    std::mt19937_64 rng(3);
    for (auto env : {EnvId::CartPole, EnvId::Acrobot}) {
        for (const char* v : {"classical", "hybrid_fotp"}) {
            OptionCriticNet net(env, parse_variant(v));
            net.init(rng);
            nn::Tape tape;
            const std::vector<double> obs(static_cast<std::size_t>(net.obs_dim()), 0.1);
            const auto h = net.features(tape, obs);
            EXPECT_EQ(net.q_values(tape, h).size(), 2u);
            for (double b : net.terminations(tape, h).value()) {
                EXPECT_GT(b, 0.0);
                EXPECT_LT(b, 1.0);
            }
            const auto p = net.policy_probs(tape, h, 1).value();
            EXPECT_EQ(p.size(), static_cast<std::size_t>(net.n_actions()));
            EXPECT_NEAR(p[0] + p[1] + (p.size() > 2 ? p[2] : 0.0), 1.0, 1e-12);
            EXPECT_THROW(net.policy_logits(tape, h, 2), std::out_of_range);
            EXPECT_THROW(net.features(tape, std::vector<double>{1.0}), nn::ShapeError);
        }
    }
}

TEST(Net, QuantumCriticIsBounded) {
    std::mt19937_64 rng(4);
    OptionCriticNet net(EnvId::CartPole, parse_variant("hybrid_o"));
    net.init(rng);
    std::normal_distribution<double> big(0.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        nn::Tape tape;
        const std::vector<double> obs{big(rng), big(rng), big(rng), big(rng)};
        for (double q : net.q_values(tape, net.features(tape, obs)).value()) EXPECT_LE(std::abs(q), 1.0);
    }
}

TEST(Net, CopyParameters) {
    std::mt19937_64 rng(5);
    OptionCriticNet a(EnvId::Acrobot, parse_variant("hybrid_ft"));
    OptionCriticNet b(EnvId::Acrobot, parse_variant("hybrid_ft"));
    a.init(rng);
    b.init(rng);
    b.copy_parameters_from(a);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->values(), pb[i]->values());
    OptionCriticNet c(EnvId::Acrobot, parse_variant("classical"));
    EXPECT_THROW(c.copy_parameters_from(a), std::invalid_argument);
}

TEST(Net, InitIsSeedDeterministic) {
    OptionCriticNet a(EnvId::CartPole, parse_variant("hybrid_fp"));
    OptionCriticNet b(EnvId::CartPole, parse_variant("hybrid_fp"));
    std::mt19937_64 r1(9), r2(9);
    a.init(r1);
    b.init(r2);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->values(), pb[i]->values());
}

TEST(ChooseOption, GreedyAndTies) {
    std::mt19937_64 rng(1);
    const std::vector<double> q{0.1, 0.7, 0.7};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(choose_option(q, 0.0, rng), 1);
    EXPECT_THROW(choose_option(std::vector<double>{}, 0.5, rng), std::invalid_argument);
}

TEST(ChooseOption, EpsilonFrequencies) {
    // P(option 1) = 1 - eps + eps/2 with two options and option 1 greedy.
    std::mt19937_64 rng(2);
    const std::vector<double> q{0.0, 1.0};
    const double eps = 0.4;
    const int n = 20000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += choose_option(q, eps, rng) == 1;
    const double p = 1.0 - eps / 2;
    EXPECT_NEAR(static_cast<double>(ones) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(SampleAction, MatchesDistribution) {
    std::mt19937_64 rng(3);
    const std::vector<double> probs{0.2, 0.5, 0.3};
    const int n = 30000;
    std::vector<int> c(3, 0);
    for (int i = 0; i < n; ++i) ++c[static_cast<std::size_t>(sample_action(probs, rng))];
    for (int k = 0; k < 3; ++k) {
        const double p = probs[k];
        EXPECT_NEAR(static_cast<double>(c[k]) / n, p, 3 * std::sqrt(p * (1 - p) / n));
    }
    const std::vector<double> sure{0.0, 1.0};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_action(sure, rng), 1);
}

TEST(Checkpoint, RoundTripIsExact) {
    std::mt19937_64 rng(6);
    OptionCriticNet a(EnvId::Acrobot, parse_variant("hybrid_fotp"));
    a.init(rng);
    const auto path = temp_file("roundtrip.txt");
    save_checkpoint(a, path);
    OptionCriticNet b(EnvId::Acrobot, parse_variant("hybrid_fotp"));
    load_checkpoint(b, path);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->values(), pb[i]->values());
    std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsMismatches) {
    OptionCriticNet a(EnvId::CartPole, parse_variant("classical"));
    const auto path = temp_file("mismatch.txt");
    save_checkpoint(a, path);
    OptionCriticNet b(EnvId::CartPole, parse_variant("hybrid_f"));
    EXPECT_THROW(load_checkpoint(b, path), std::runtime_error);
    std::ofstream(path) << "garbage 1\n";
    EXPECT_THROW(load_checkpoint(a, path), std::runtime_error);
    std::filesystem::remove(path);
    EXPECT_THROW(load_checkpoint(a, path), std::runtime_error);
}
