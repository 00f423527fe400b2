#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "qoc/expkit.hpp"

namespace qoc::expkit {

namespace {

constexpr double kStep = 1e-5;
constexpr double kRelTol = 1e-4;
constexpr double kShiftTol = 1e-9;

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5}); }

double central(const std::function<double()>& f, double& x) {
    const double x0 = x;
    x = x0 + kStep;
    const double fp = f();
    x = x0 - kStep;
    const double fm = f();
    x = x0;
    return (fp - fm) / (2.0 * kStep);
}

bool report(std::ostream& out, const std::string& name, double err, double tol) {
    const bool ok = err < tol;
    out << (ok ? "ok   " : "FAIL ") << name << "  max_err=" << err << "  tol=" << tol << '\n';
    return ok;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double check_shift(std::mt19937_64& rng) {
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        for (int layers = 1; layers <= 3; ++layers) {
            vqc::Architecture arch{n, layers, true, n, true};
            vqc::Params p = vqc::Params::zeros(arch);
            p.lambda = uniform(rng, p.lambda.size(), 0.5, 1.5);
            p.theta_ry = uniform(rng, p.theta_ry.size(), -M_PI, M_PI);
            p.theta_rz = uniform(rng, p.theta_rz.size(), -M_PI, M_PI);
            const auto angles = uniform(rng, static_cast<std::size_t>(n), -M_PI, M_PI);
            const auto circuit = vqc::build_circuit(arch, p, angles);
            std::vector<qsim::Observable> obs;
            for (int k = 0; k < n; ++k) obs.push_back({k});
            const auto adj = qsim::grad_expectations(circuit, obs);
            const auto ps = qsim::grad_expectations_param_shift(circuit, obs);
            for (std::size_t k = 0; k < adj.size(); ++k) {
                for (std::size_t j = 0; j < adj[k].size(); ++j) worst = std::max(worst, std::abs(adj[k][j] - ps[k][j]));
            }
        }
    }
    return worst;
}

double check_vqc(std::mt19937_64& rng) {
    double worst = 0.0;
    for (bool ent : {true, false}) {
        for (int n : {2, 4, 6}) {
            vqc::Architecture arch{n, 3, ent, std::min(n, 3), true};
            vqc::Params p = vqc::Params::zeros(arch);
            p.lambda = uniform(rng, p.lambda.size(), 0.5, 1.5);
            p.theta_ry = uniform(rng, p.theta_ry.size(), -M_PI, M_PI);
            p.theta_rz = uniform(rng, p.theta_rz.size(), -M_PI, M_PI);
            auto angles = uniform(rng, static_cast<std::size_t>(n), -M_PI, M_PI);
            const auto w = uniform(rng, static_cast<std::size_t>(arch.out_dim), -1.0, 1.0);
            auto f = [&] {
                const auto out = vqc::forward(arch, p, angles).outputs;
                double s = 0.0;
                for (std::size_t k = 0; k < out.size(); ++k) s += w[k] * out[k];
                return s;
            };
            const auto g = vqc::backward(vqc::forward(arch, p, angles).trace, w);
            auto sweep = [&](std::vector<double>& xs, const std::vector<double>& gs) {
                for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, rel_err(gs[i], central(f, xs[i])));
            };
            sweep(p.lambda, g.lambda);
            sweep(p.theta_ry, g.theta_ry);
            sweep(p.theta_rz, g.theta_rz);
            sweep(angles, g.inputs);
        }
    }
    return worst;
}

// Surrogate objective touching every head: the loss terms of a training step
// with the detached quantities pinned to constants.
double check_net(envs::EnvId env, const std::string& variant, std::mt19937_64& rng) {
    agent::OptionCriticNet net(env, agent::parse_variant(variant));
    net.init(rng);
    const int obs_dim = net.obs_dim();
    std::vector<std::vector<double>> states;
    for (int i = 0; i < 3; ++i) states.push_back(uniform(rng, static_cast<std::size_t>(obs_dim), -0.5, 0.5));
    const auto targets = uniform(rng, states.size(), -2.0, 2.0);

    auto loss = [&](nn::Tape& tape) {
        std::vector<nn::Var> preds;
        nn::Var acc = tape.constant({0.0});
        for (std::size_t i = 0; i < states.size(); ++i) {
            const int omega = static_cast<int>(i) % net.n_options();
            const nn::Var h = net.features(tape, states[i]);
            preds.push_back(nn::pick(net.q_values(tape, h), static_cast<std::size_t>(omega)));
            acc = nn::add(acc, trainer::policy_loss(net.policy_logits(tape, h, omega), 0, 0.7, 0.01));
            acc = nn::add(acc, trainer::termination_loss(
                                   nn::pick(net.terminations(tape, h), static_cast<std::size_t>(omega)), 0.3, 0.9, 0.01));
        }
        return nn::add(acc, trainer::critic_loss(preds, targets));
    };
    auto value = [&] {
        nn::Tape tape;
        return loss(tape).item();
    };

    const auto params = net.parameters();
    for (nn::Tensor* t : params) t->zero_grad();
    nn::Tape tape;
    tape.backward(loss(tape));

    double worst = 0.0;
    for (nn::Tensor* t : params) {
        for (std::size_t i = 0; i < t->size(); ++i) {
            worst = std::max(worst, rel_err(t->grad()[i], central(value, t->values()[i])));
        }
    }
    return worst;
}

}  // namespace

bool run_gradcheck(std::ostream& out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    bool ok = true;
    ok &= report(out, "circuit adjoint vs parameter shift", check_shift(rng), kShiftTol);
    ok &= report(out, "vqc backward vs finite differences", check_vqc(rng), kRelTol);
    for (auto env : {envs::EnvId::CartPole, envs::EnvId::Acrobot}) {
        for (const char* v : {"classical", "hybrid_f", "hybrid_o", "hybrid_t", "hybrid_p", "hybrid_fotp"}) {
            ok &= report(out, std::string(envs::env_name(env)) + " " + v + " loss vs finite differences",
                         check_net(env, v, rng), kRelTol);
        }
    }
    return ok;
}

}  // namespace qoc::expkit
