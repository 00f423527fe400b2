#pragma once

// Option-critic network: a shared feature extractor feeding an option-value
// head, a termination head and one intra-option policy head per option.
// Each of the four components is either classical or a VQC.

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qoc/diffnet.hpp"
#include "qoc/envs.hpp"
#include "qoc/vqc.hpp"

namespace qoc::agent {

/// Which components are quantum. All false is the classical baseline.
struct VariantSpec {
    bool quantum_f = false;
    bool quantum_o = false;
    bool quantum_t = false;
    bool quantum_p = false;

    bool operator==(const VariantSpec&) const = default;
};

/// "classical", "hybrid_f", ..., "hybrid_fotp". Throws on anything else.
VariantSpec parse_variant(std::string_view name);
std::string variant_name(const VariantSpec& v);
/// The eight hybrid variants in the order they are usually reported.
std::vector<std::string> hybrid_variant_names();

struct NetOptions {
    int n_options = 2;
    std::optional<int> fe_width;  // classical feature-extractor hidden width
    int depth_delta = 0;          // added to the quantum feature extractor's layer count
    bool learnable_scaling = true;
    bool entangling = true;
};

/// Table-driven per-environment architecture.
struct Layout {
    int fe_hidden = 8;
    int fe_layers = 4;
    int head_hidden = 0;  // 0: downstream classical heads are single linear layers
    int head_layers = 1;
};

Layout default_layout(envs::EnvId env);

class Component {
public:
    virtual ~Component() = default;
    virtual nn::Var forward(nn::Tape& tape, nn::Var x) = 0;
    virtual void init(std::mt19937_64& rng) = 0;
    virtual std::vector<nn::Tensor*> parameters() = 0;
    virtual int param_count() const = 0;
    virtual bool quantum() const = 0;
};

class LinearComponent final : public Component {
public:
    LinearComponent(const std::string& name, int in_dim, int out_dim) : layer_(name, in_dim, out_dim) {}
    nn::Var forward(nn::Tape& tape, nn::Var x) override { return layer_.forward(tape, x); }
    void init(std::mt19937_64& rng) override { layer_.init(rng); }
    std::vector<nn::Tensor*> parameters() override { return layer_.parameters(); }
    int param_count() const override { return layer_.param_count(); }
    bool quantum() const override { return false; }

private:
    nn::Linear layer_;
};

class MlpComponent final : public Component {
public:
    MlpComponent(const std::string& name, int in_dim, int hidden, int out_dim) : mlp_(name, in_dim, hidden, out_dim) {}
    nn::Var forward(nn::Tape& tape, nn::Var x) override { return mlp_.forward(tape, x); }
    void init(std::mt19937_64& rng) override { mlp_.init(rng); }
    std::vector<nn::Tensor*> parameters() override { return mlp_.parameters(); }
    int param_count() const override { return mlp_.param_count(); }
    bool quantum() const override { return false; }

private:
    nn::Mlp mlp_;
};

/// VQC reading raw observations through the environment's encoding.
class QuantumFeatureExtractor final : public Component {
public:
    QuantumFeatureExtractor(const std::string& name, vqc::Architecture arch, vqc::EncodingSpec encoding);
    nn::Var forward(nn::Tape& tape, nn::Var x) override;
    void init(std::mt19937_64& rng) override { layer_.init(rng); }
    std::vector<nn::Tensor*> parameters() override { return layer_.parameters(); }
    int param_count() const override { return layer_.param_count(); }
    bool quantum() const override { return true; }

private:
    vqc::Layer layer_;
    vqc::EncodingSpec encoding_;
};

/// VQC reading latent features through 2*atan(h).
class QuantumHead final : public Component {
public:
    QuantumHead(const std::string& name, vqc::Architecture arch) : layer_(name, arch) {}
    nn::Var forward(nn::Tape& tape, nn::Var x) override { return layer_.forward(tape, nn::two_arctan(x)); }
    void init(std::mt19937_64& rng) override { layer_.init(rng); }
    std::vector<nn::Tensor*> parameters() override { return layer_.parameters(); }
    int param_count() const override { return layer_.param_count(); }
    bool quantum() const override { return true; }

private:
    vqc::Layer layer_;
};

struct ComponentCounts {
    int feature_extractor = 0;
    int option_value = 0;
    int termination = 0;
    int policies = 0;

    int total() const { return feature_extractor + option_value + termination + policies; }
    bool operator==(const ComponentCounts&) const = default;
};

class OptionCriticNet {
public:
    OptionCriticNet(envs::EnvId env, VariantSpec variant, NetOptions options = {});

    OptionCriticNet(const OptionCriticNet&) = delete;
    OptionCriticNet& operator=(const OptionCriticNet&) = delete;
    OptionCriticNet(OptionCriticNet&&) = default;
    OptionCriticNet& operator=(OptionCriticNet&&) = default;

    void init(std::mt19937_64& rng);

    nn::Var features(nn::Tape& tape, std::span<const double> observation);
    nn::Var q_values(nn::Tape& tape, nn::Var h);
    /// Sigmoid of the termination head, one probability per option.
    nn::Var terminations(nn::Tape& tape, nn::Var h);
    nn::Var policy_logits(nn::Tape& tape, nn::Var h, int option);
    nn::Var policy_probs(nn::Tape& tape, nn::Var h, int option);

    std::vector<nn::Tensor*> parameters();
    ComponentCounts component_counts() const;

    /// Overwrites every parameter value with `other`'s; structures must match.
    void copy_parameters_from(OptionCriticNet& other);

    envs::EnvId env() const { return env_; }
    const VariantSpec& variant() const { return variant_; }
    const NetOptions& options() const { return options_; }
    int n_options() const { return options_.n_options; }
    int n_actions() const { return n_actions_; }
    int obs_dim() const { return obs_dim_; }

    Component& feature_extractor() { return *fe_; }
    Component& option_value_head() { return *q_head_; }
    Component& termination_head() { return *term_head_; }
    Component& policy_head(int option) { return *policies_.at(static_cast<std::size_t>(option)); }

private:
    void check_option(int option) const;

    envs::EnvId env_;
    VariantSpec variant_;
    NetOptions options_;
    int obs_dim_ = 0;
    int n_actions_ = 0;
    std::unique_ptr<Component> fe_;
    std::unique_ptr<Component> q_head_;
    std::unique_ptr<Component> term_head_;
    std::vector<std::unique_ptr<Component>> policies_;
};

/// Greedy with probability 1-epsilon (ties to the lowest index), otherwise
/// uniform over options.
int choose_option(std::span<const double> q, double epsilon, std::mt19937_64& rng);

/// Categorical draw from `probs`.
int sample_action(std::span<const double> probs, std::mt19937_64& rng);

inline constexpr int kCheckpointVersion = 1;

/// Text format: a version line, a tensor count, then per tensor a header
/// "<name> <rank> <dims...>" and a line of hex-float values.
void save_checkpoint(OptionCriticNet& net, const std::filesystem::path& path);
void load_checkpoint(OptionCriticNet& net, const std::filesystem::path& path);

}  // namespace qoc::agent
