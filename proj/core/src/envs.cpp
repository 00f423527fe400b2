#include "qoc/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qoc::envs {

EnvId parse_env(std::string_view name) {
    if (name == "cartpole") return EnvId::CartPole;
    if (name == "acrobot") return EnvId::Acrobot;
    throw EnvError("unsupported environment '" + std::string(name) + "'");
}

std::string_view env_name(EnvId id) { return id == EnvId::CartPole ? "cartpole" : "acrobot"; }

CartPoleState cartpole_dynamics(const CartPoleState& s, int action) {
    using C = CartPoleConstants;
    if (action != 0 && action != 1) throw EnvError("CartPole action must be 0 or 1");
    const double force = action == 1 ? C::force_mag : -C::force_mag;
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);
    const double temp = (force + C::pole_mass_length * s.theta_dot * s.theta_dot * sin_t) / C::total_mass;
    const double theta_acc = (C::gravity * sin_t - cos_t * temp) /
                             (C::half_length * (4.0 / 3.0 - C::mass_pole * cos_t * cos_t / C::total_mass));
    const double x_acc = temp - C::pole_mass_length * theta_acc * cos_t / C::total_mass;
    return {
        s.x + C::tau * s.x_dot,
        s.x_dot + C::tau * x_acc,
        s.theta + C::tau * s.theta_dot,
        s.theta_dot + C::tau * theta_acc,
    };
}

bool cartpole_terminal(const CartPoleState& s) {
    using C = CartPoleConstants;
    return s.x < -C::x_threshold || s.x > C::x_threshold || s.theta < -C::theta_threshold ||
           s.theta > C::theta_threshold;
}

std::vector<double> CartPole::reset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    state_.x = u(rng);
    state_.x_dot = u(rng);
    state_.theta = u(rng);
    state_.theta_dot = u(rng);
    elapsed_ = 0;
    return observation();
}

EnvStep CartPole::step(int action) {
    state_ = cartpole_dynamics(state_, action);
    ++elapsed_;
    EnvStep out;
    out.observation = observation();
    out.reward = 1.0;
    out.terminated = cartpole_terminal(state_);
    out.truncated = elapsed_ >= kMaxEpisodeSteps;
    return out;
}

std::vector<double> CartPole::observation() const { return {state_.x, state_.x_dot, state_.theta, state_.theta_dot}; }

namespace {

using Vec5 = std::array<double, 5>;

// Equations of motion for the "book" acrobot; y = (t1, t2, dt1, dt2, torque).
Vec5 acrobot_dsdt(const Vec5& y) {
    using C = AcrobotConstants;
    constexpr double m1 = C::link_mass_1;
    constexpr double m2 = C::link_mass_2;
    constexpr double l1 = C::link_length_1;
    constexpr double lc1 = C::link_com_1;
    constexpr double lc2 = C::link_com_2;
    constexpr double i1 = C::link_moi;
    constexpr double i2 = C::link_moi;
    constexpr double g = C::gravity;
    constexpr double half_pi = std::numbers::pi / 2.0;

    const double theta1 = y[0];
    const double theta2 = y[1];
    const double dtheta1 = y[2];
    const double dtheta2 = y[3];
    const double a = y[4];

    const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
    const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - half_pi);
    const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                        2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - half_pi) + phi2;
    const double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
                            (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0};
}

Vec5 axpy(const Vec5& y, double h, const Vec5& k) {
    Vec5 out;
    for (std::size_t i = 0; i < 5; ++i) out[i] = y[i] + h * k[i];
    return out;
}

double wrap(double x, double lo, double hi) {
    const double diff = hi - lo;
    while (x > hi) x -= diff;
    while (x < lo) x += diff;
    return x;
}

}  // namespace

AcrobotState acrobot_dynamics(const AcrobotState& s, int action) {
    using C = AcrobotConstants;
    if (action < 0 || action > 2) throw EnvError("Acrobot action must be 0, 1 or 2");
    const Vec5 y0{s.theta1, s.theta2, s.theta1_dot, s.theta2_dot, C::torques[static_cast<std::size_t>(action)]};
    const double dt = C::dt;
    const double dt2 = dt / 2.0;
    const Vec5 k1 = acrobot_dsdt(y0);
    const Vec5 k2 = acrobot_dsdt(axpy(y0, dt2, k1));
    const Vec5 k3 = acrobot_dsdt(axpy(y0, dt2, k2));
    const Vec5 k4 = acrobot_dsdt(axpy(y0, dt, k3));
    Vec5 y1;
    for (std::size_t i = 0; i < 5; ++i) y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    return {
        wrap(y1[0], -std::numbers::pi, std::numbers::pi),
        wrap(y1[1], -std::numbers::pi, std::numbers::pi),
        std::clamp(y1[2], -C::max_vel_1, C::max_vel_1),
        std::clamp(y1[3], -C::max_vel_2, C::max_vel_2),
    };
}

bool acrobot_terminal(const AcrobotState& s) { return -std::cos(s.theta1) - std::cos(s.theta2 + s.theta1) > 1.0; }

std::vector<double> Acrobot::reset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    state_.theta1 = u(rng);
    state_.theta2 = u(rng);
    state_.theta1_dot = u(rng);
    state_.theta2_dot = u(rng);
    elapsed_ = 0;
    return observation();
}

EnvStep Acrobot::step(int action) {
    state_ = acrobot_dynamics(state_, action);
    ++elapsed_;
    EnvStep out;
    out.observation = observation();
    out.terminated = acrobot_terminal(state_);
    out.reward = out.terminated ? 0.0 : -1.0;
    out.truncated = elapsed_ >= kMaxEpisodeSteps;
    return out;
}

std::vector<double> Acrobot::observation() const {
    return {std::cos(state_.theta1), std::sin(state_.theta1), std::cos(state_.theta2),
            std::sin(state_.theta2), state_.theta1_dot,       state_.theta2_dot};
}

std::unique_ptr<Environment> make_env(EnvId id) {
    if (id == EnvId::CartPole) return std::make_unique<CartPole>();
    return std::make_unique<Acrobot>();
}

vqc::EncodingSpec encoding_spec(EnvId id) {
    using vqc::InputEncoding;
    if (id == EnvId::CartPole) {
        return {InputEncoding::bounded(4.8), InputEncoding::unbounded(), InputEncoding::bounded(0.418),
                InputEncoding::unbounded()};
    }
    return {InputEncoding::bounded(1.0),
            InputEncoding::bounded(1.0),
            InputEncoding::bounded(1.0),
            InputEncoding::bounded(1.0),
            InputEncoding::bounded(AcrobotConstants::max_vel_1),
            InputEncoding::bounded(AcrobotConstants::max_vel_2)};
}

int random_action(int n_actions, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, n_actions - 1);
    return d(rng);
}

std::vector<double> random_returns(EnvId id, int episodes, std::uint64_t seed) {
    auto env = make_env(id);
    std::mt19937_64 rng(seed);
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        env->reset(rng);
        double total = 0.0;
        for (;;) {
            const auto st = env->step(random_action(env->n_actions(), rng));
            total += st.reward;
            if (st.done()) break;
        }
        returns.push_back(total);
    }
    return returns;
}

}  // namespace qoc::envs
