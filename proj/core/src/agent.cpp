#include "qoc/agent.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qoc::agent {

VariantSpec parse_variant(std::string_view name) {
    if (name == "classical") return {};
    constexpr std::string_view prefix = "hybrid_";
    if (!name.starts_with(prefix) || name.size() == prefix.size()) {
        throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
    }
    const std::string_view letters = name.substr(prefix.size());
    for (std::string_view known : {"f", "o", "t", "p", "fo", "ft", "fp", "fotp"}) {
        if (letters == known) {
            VariantSpec v;
            v.quantum_f = letters.find('f') != std::string_view::npos;
            v.quantum_o = letters.find('o') != std::string_view::npos;
            v.quantum_t = letters.find('t') != std::string_view::npos;
            v.quantum_p = letters.find('p') != std::string_view::npos;
            return v;
        }
    }
    throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::string variant_name(const VariantSpec& v) {
    std::string letters;
    if (v.quantum_f) letters += 'f';
    if (v.quantum_o) letters += 'o';
    if (v.quantum_t) letters += 't';
    if (v.quantum_p) letters += 'p';
    return letters.empty() ? "classical" : "hybrid_" + letters;
}

std::vector<std::string> hybrid_variant_names() {
    return {"hybrid_fotp", "hybrid_fo", "hybrid_ft", "hybrid_fp", "hybrid_f", "hybrid_o", "hybrid_t", "hybrid_p"};
}

Layout default_layout(envs::EnvId env) {
    if (env == envs::EnvId::CartPole) return {8, 4, 0, 1};
    return {8, 5, 3, 2};
}

QuantumFeatureExtractor::QuantumFeatureExtractor(const std::string& name, vqc::Architecture arch,
                                                 vqc::EncodingSpec encoding)
    : layer_(name, arch), encoding_(std::move(encoding)) {}

nn::Var QuantumFeatureExtractor::forward(nn::Tape& tape, nn::Var x) {
    // Observations are data, so the encoding sits outside the gradient path.
    return layer_.forward(tape, tape.constant(vqc::normalize_input(x.value(), encoding_)));
}

namespace {

std::unique_ptr<Component> make_head(const std::string& name, bool quantum, const Layout& layout, int in_dim,
                                     int out_dim, const NetOptions& opt) {
    if (quantum) {
        vqc::Architecture arch{in_dim, layout.head_layers, opt.entangling, out_dim, opt.learnable_scaling};
        return std::make_unique<QuantumHead>(name, arch);
    }
    if (layout.head_hidden > 0) return std::make_unique<MlpComponent>(name, in_dim, layout.head_hidden, out_dim);
    return std::make_unique<LinearComponent>(name, in_dim, out_dim);
}

}  // namespace

OptionCriticNet::OptionCriticNet(envs::EnvId env, VariantSpec variant, NetOptions options)
    : env_(env), variant_(variant), options_(options) {
    auto probe = envs::make_env(env);
    obs_dim_ = probe->obs_dim();
    n_actions_ = probe->n_actions();
    if (options_.n_options < 2) throw std::invalid_argument("need at least two options");

    const Layout layout = default_layout(env);
    if (variant.quantum_f) {
        const int layers = layout.fe_layers + options_.depth_delta;
        if (layers < 1) throw std::invalid_argument("feature-extractor depth must stay positive");
        vqc::Architecture arch{obs_dim_, layers, options_.entangling, obs_dim_, options_.learnable_scaling};
        fe_ = std::make_unique<QuantumFeatureExtractor>("fe", arch, envs::encoding_spec(env));
    } else {
        const int width = options_.fe_width.value_or(layout.fe_hidden);
        if (width < 1) throw std::invalid_argument("feature-extractor width must be positive");
        fe_ = std::make_unique<MlpComponent>("fe", obs_dim_, width, obs_dim_);
    }
    const bool quantum_any_head = variant.quantum_o || variant.quantum_t || variant.quantum_p;
    if (quantum_any_head && std::max(options_.n_options, n_actions_) > obs_dim_) {
        throw std::invalid_argument("quantum heads cannot measure more outputs than qubits");
    }
    q_head_ = make_head("q", variant.quantum_o, layout, obs_dim_, options_.n_options, options_);
    term_head_ = make_head("term", variant.quantum_t, layout, obs_dim_, options_.n_options, options_);
    for (int o = 0; o < options_.n_options; ++o) {
        policies_.push_back(
            make_head("policy." + std::to_string(o), variant.quantum_p, layout, obs_dim_, n_actions_, options_));
    }
}

void OptionCriticNet::init(std::mt19937_64& rng) {
    fe_->init(rng);
    q_head_->init(rng);
    term_head_->init(rng);
    for (auto& p : policies_) p->init(rng);
}

void OptionCriticNet::check_option(int option) const {
    if (option < 0 || option >= options_.n_options) throw std::out_of_range("option index out of range");
}

nn::Var OptionCriticNet::features(nn::Tape& tape, std::span<const double> observation) {
    if (observation.size() != static_cast<std::size_t>(obs_dim_)) {
        throw nn::ShapeError("observation has " + std::to_string(observation.size()) + " values, expected " +
                             std::to_string(obs_dim_));
    }
    return fe_->forward(tape, tape.constant({observation.begin(), observation.end()}));
}

nn::Var OptionCriticNet::q_values(nn::Tape& tape, nn::Var h) { return q_head_->forward(tape, h); }

nn::Var OptionCriticNet::terminations(nn::Tape& tape, nn::Var h) {
    return nn::sigmoid(term_head_->forward(tape, h));
}

nn::Var OptionCriticNet::policy_logits(nn::Tape& tape, nn::Var h, int option) {
    check_option(option);
    return policies_[static_cast<std::size_t>(option)]->forward(tape, h);
}

nn::Var OptionCriticNet::policy_probs(nn::Tape& tape, nn::Var h, int option) {
    return nn::softmax(policy_logits(tape, h, option));
}

std::vector<nn::Tensor*> OptionCriticNet::parameters() {
    std::vector<nn::Tensor*> all;
    auto append = [&](Component& c) {
        for (nn::Tensor* t : c.parameters()) all.push_back(t);
    };
    append(*fe_);
    append(*q_head_);
    append(*term_head_);
    for (auto& p : policies_) append(*p);
    return all;
}

ComponentCounts OptionCriticNet::component_counts() const {
    ComponentCounts c;
    c.feature_extractor = fe_->param_count();
    c.option_value = q_head_->param_count();
    c.termination = term_head_->param_count();
    for (const auto& p : policies_) c.policies += p->param_count();
    return c;
}

void OptionCriticNet::copy_parameters_from(OptionCriticNet& other) {
    auto dst = parameters();
    auto src = other.parameters();
    if (dst.size() != src.size()) throw std::invalid_argument("network structures differ");
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i]->shape() != src[i]->shape()) throw std::invalid_argument("network structures differ");
        dst[i]->values() = src[i]->values();
    }
}

int choose_option(std::span<const double> q, double epsilon, std::mt19937_64& rng) {
    if (q.empty()) throw std::invalid_argument("choose_option on an empty value vector");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
        return pick(rng);
    }
    return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int sample_action(std::span<const double> probs, std::mt19937_64& rng) {
    if (probs.empty()) throw std::invalid_argument("sample_action on an empty distribution");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = u(rng);
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (r < cum) return static_cast<int>(i);
    }
    // r landed past the rounded total; fall back to the last nonzero entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return static_cast<int>(i);
    }
    return 0;
}

void save_checkpoint(OptionCriticNet& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    const auto params = net.parameters();
    out << "qoc-checkpoint " << kCheckpointVersion << '\n' << params.size() << '\n';
    out << std::hexfloat;
    for (const nn::Tensor* t : params) {
        out << t->name() << ' ' << t->shape().size();
        for (int d : t->shape()) out << ' ' << d;
        out << '\n';
        for (std::size_t i = 0; i < t->size(); ++i) out << (i ? " " : "") << t->values()[i];
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

void load_checkpoint(OptionCriticNet& net, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    std::string magic;
    int version = 0;
    std::size_t count = 0;
    in >> magic >> version >> count;
    if (magic != "qoc-checkpoint") throw std::runtime_error("not a checkpoint file: " + path.string());
    if (version != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
    auto params = net.parameters();
    if (count != params.size()) throw std::runtime_error("checkpoint tensor count does not match the network");
    for (nn::Tensor* t : params) {
        std::string name;
        std::size_t rank = 0;
        in >> name >> rank;
        std::vector<int> shape(rank);
        for (int& d : shape) in >> d;
        if (!in || name != t->name() || shape != t->shape()) {
            throw std::runtime_error("checkpoint tensor '" + name + "' does not match '" + t->name() + "'");
        }
        for (double& v : t->values()) {
            std::string token;
            in >> token;
            v = std::strtod(token.c_str(), nullptr);
        }
        if (!in) throw std::runtime_error("truncated checkpoint " + path.string());
    }
}

}  // namespace qoc::agent
