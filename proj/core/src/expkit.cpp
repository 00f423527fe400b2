#include "qoc/expkit.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace qoc::expkit {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

long parse_long(const std::string& key, const std::string& v) {
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_long(key, v)); }

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(std::string(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string RunConfig::label() const {
    if (is_random()) return "random";
    std::vector<std::string> mods;
    if (net.n_options != 2) mods.push_back(std::to_string(net.n_options) + " options");
    if (net.fe_width) mods.push_back(std::to_string(*net.fe_width) + " neurons");
    if (net.depth_delta != 0) mods.push_back((net.depth_delta > 0 ? "depth+" : "depth") + std::to_string(net.depth_delta));
    if (!net.learnable_scaling) mods.push_back("fixed lambda");
    if (!net.entangling) mods.push_back("no CNOT");
    std::string out = variant;
    if (!mods.empty()) {
        out += " (";
        for (std::size_t i = 0; i < mods.size(); ++i) out += (i ? ", " : "") + mods[i];
        out += ")";
    }
    return out;
}

void RunConfig::validate() const {
    if (!is_random()) {
        try {
            agent::parse_variant(variant);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        // Constructing the network checks every architectural constraint.
        try {
            agent::OptionCriticNet probe(env, agent::parse_variant(variant), net);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid network for this environment: ") + e.what());
        }
    }
    try {
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("seed list contains duplicates");
    }
    if (smoothing_window < 1 || curve_stride < 1) throw ConfigError("smoothing window and stride must be positive");
    if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be non-negative");
}

std::string config_schema() {
    return R"(# qoc run configuration: one "key = value" per line, '#' starts a comment.
env = cartpole                 # cartpole | acrobot
variant = classical            # classical | hybrid_{f,o,t,p,fo,ft,fp,fotp} | random
options = 2                    # number of options (2..4)
fe_width = default             # classical feature-extractor hidden width, or "default"
depth_delta = 0                # layers added to the quantum feature extractor
learnable_scaling = true       # train the input scalings (false: fixed at 1)
entangling = true              # CNOT ring in every VQC layer
gamma = 0.99                   # discount factor
lr = 0.0005                    # Adam learning rate
n_critic = 4                   # critic update period (steps)
n_target = 200                 # target synchronization period (steps)
eps_start = 1.0                # initial option-exploration rate
eps_min = 0.05                 # floor of the exploration rate
eps_decay_rate = 0             # per-step decay factor; 0 = reach eps_min at half of total_steps
term_reg = 0.01                # termination regularizer
entropy_reg = 0.01             # policy entropy bonus
batch_size = 32                # critic mini-batch size
buffer_capacity = 10000        # replay buffer capacity
total_steps = 100000           # environment steps per seed
seeds = 0                      # comma-separated seed list
out = runs                     # output directory
smoothing_window = 2000        # trailing window for reward curves (steps)
curve_stride = 100             # spacing of aggregate curve points (steps)
checkpoint_interval = 0        # steps between checkpoints; 0 = final only
)";
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream out;
    out << "# qoc resolved configuration\n";
    out << "env = " << envs::env_name(c.env) << '\n';
    out << "variant = " << c.variant << '\n';
    out << "options = " << c.net.n_options << '\n';
    out << "fe_width = " << (c.net.fe_width ? std::to_string(*c.net.fe_width) : "default") << '\n';
    out << "depth_delta = " << c.net.depth_delta << '\n';
    out << "learnable_scaling = " << (c.net.learnable_scaling ? "true" : "false") << '\n';
    out << "entangling = " << (c.net.entangling ? "true" : "false") << '\n';
    out << "gamma = " << format_double(c.train.gamma) << '\n';
    out << "lr = " << format_double(c.train.lr) << '\n';
    out << "n_critic = " << c.train.n_critic << '\n';
    out << "n_target = " << c.train.n_target << '\n';
    out << "eps_start = " << format_double(c.train.eps_start) << '\n';
    out << "eps_min = " << format_double(c.train.eps_min) << '\n';
    out << "eps_decay_rate = " << format_double(c.train.decay_rate()) << '\n';
    out << "term_reg = " << format_double(c.train.term_reg) << '\n';
    out << "entropy_reg = " << format_double(c.train.entropy_reg) << '\n';
    out << "batch_size = " << c.train.batch_size << '\n';
    out << "buffer_capacity = " << c.train.buffer_capacity << '\n';
    out << "total_steps = " << c.train.total_steps << '\n';
    out << "seeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
    out << '\n';
    out << "out = " << c.out_dir.generic_string() << '\n';
    out << "smoothing_window = " << c.smoothing_window << '\n';
    out << "curve_stride = " << c.curve_stride << '\n';
    out << "checkpoint_interval = " << c.checkpoint_interval << '\n';
    return out.str();
}

RunConfig parse_config_text(std::string_view text) {
    RunConfig c;
    std::set<std::string> seen;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string v = trim(std::string_view(line).substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");

        if (key == "env") {
            try {
                c.env = envs::parse_env(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "variant") {
            c.variant = v;
        } else if (key == "options") {
            c.net.n_options = parse_int(key, v);
        } else if (key == "fe_width") {
            c.net.fe_width = v == "default" ? std::nullopt : std::optional<int>(parse_int(key, v));
        } else if (key == "depth_delta") {
            c.net.depth_delta = parse_int(key, v);
        } else if (key == "learnable_scaling") {
            c.net.learnable_scaling = parse_bool(key, v);
        } else if (key == "entangling") {
            c.net.entangling = parse_bool(key, v);
        } else if (key == "gamma") {
            c.train.gamma = parse_double(key, v);
        } else if (key == "lr") {
            c.train.lr = parse_double(key, v);
        } else if (key == "n_critic") {
            c.train.n_critic = parse_int(key, v);
        } else if (key == "n_target") {
            c.train.n_target = parse_int(key, v);
        } else if (key == "eps_start") {
            c.train.eps_start = parse_double(key, v);
        } else if (key == "eps_min") {
            c.train.eps_min = parse_double(key, v);
        } else if (key == "eps_decay_rate") {
            c.train.eps_decay_rate = parse_double(key, v);
        } else if (key == "term_reg") {
            c.train.term_reg = parse_double(key, v);
        } else if (key == "entropy_reg") {
            c.train.entropy_reg = parse_double(key, v);
        } else if (key == "batch_size") {
            c.train.batch_size = parse_int(key, v);
        } else if (key == "buffer_capacity") {
            c.train.buffer_capacity = parse_int(key, v);
        } else if (key == "total_steps") {
            c.train.total_steps = parse_long(key, v);
        } else if (key == "seeds") {
            c.seeds.clear();
            for (const auto& s : split(v, ',')) c.seeds.push_back(static_cast<std::uint64_t>(parse_long(key, trim(s))));
        } else if (key == "out") {
            c.out_dir = v;
        } else if (key == "smoothing_window") {
            c.smoothing_window = parse_int(key, v);
        } else if (key == "curve_stride") {
            c.curve_stride = parse_int(key, v);
        } else if (key == "checkpoint_interval") {
            c.checkpoint_interval = parse_long(key, v);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    return c;
}

RunConfig load_config(const fs::path& path) { return parse_config_text(read_file(path)); }

std::vector<EpisodeRecord> SeedRun::episodes() const {
    std::vector<EpisodeRecord> out;
    for (const auto& m : metrics) {
        if (m.episode_return) out.push_back({m.step, *m.episode_return});
    }
    return out;
}

std::vector<long> SeedRun::option_histogram(int n_options) const {
    std::vector<long> h(static_cast<std::size_t>(std::max(n_options, 1)), 0);
    for (const auto& m : metrics) {
        if (m.option >= 0 && m.option < n_options) ++h[static_cast<std::size_t>(m.option)];
    }
    return h;
}

std::string metrics_csv(std::span<const trainer::StepMetrics> metrics) {
    std::string out = "step,episode_return,entropy,actor_loss,critic_loss,epsilon,option\n";
    out.reserve(metrics.size() * 64);
    for (const auto& m : metrics) {
        out += std::to_string(m.step);
        out += ',';
        if (m.episode_return) out += format_double(*m.episode_return);
        out += ',';
        out += format_double(m.entropy);
        out += ',';
        out += format_double(m.actor_loss);
        out += ',';
        if (m.critic_loss) out += format_double(*m.critic_loss);
        out += ',';
        out += format_double(m.epsilon);
        out += ',';
        out += std::to_string(m.option);
        out += '\n';
    }
    return out;
}

std::vector<trainer::StepMetrics> parse_metrics_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]) != "step,episode_return,entropy,actor_loss,critic_loss,epsilon,option") {
        throw ConfigError("unexpected metrics header");
    }
    std::vector<trainer::StepMetrics> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7) throw ConfigError("metrics row " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
        trainer::StepMetrics m;
        m.step = parse_long("step", f[0]);
        if (!f[1].empty()) m.episode_return = parse_double("episode_return", f[1]);
        m.entropy = parse_double("entropy", f[2]);
        m.actor_loss = parse_double("actor_loss", f[3]);
        if (!f[4].empty()) m.critic_loss = parse_double("critic_loss", f[4]);
        m.epsilon = parse_double("epsilon", f[5]);
        m.option = parse_int("option", f[6]);
        out.push_back(m);
    }
    return out;
}

namespace {

SeedRun run_seed_impl(const RunConfig& config, std::uint64_t seed, const fs::path* dir) {
    SeedRun run;
    run.seed = seed;
    run.metrics.reserve(static_cast<std::size_t>(config.train.total_steps));

    if (config.is_random()) {
        trainer::RandomBaseline runner(config.env, seed);
        for (long t = 0; t < config.train.total_steps; ++t) run.metrics.push_back(runner.train_step());
        return run;
    }

    trainer::Trainer runner(config.env, agent::parse_variant(config.variant), config.net, config.train, seed);
    for (long t = 0; t < config.train.total_steps; ++t) {
        run.metrics.push_back(runner.train_step());
        if (dir && config.checkpoint_interval > 0 && runner.steps_done() % config.checkpoint_interval == 0 &&
            runner.steps_done() != config.train.total_steps) {
            agent::save_checkpoint(runner.net(),
                                   *dir / ("checkpoint_" + std::to_string(runner.steps_done()) + ".txt"));
        }
    }
    if (dir) agent::save_checkpoint(runner.net(), *dir / "checkpoint.txt");
    return run;
}

int worker_count(std::size_t jobs) {
    long n = 0;
    if (const char* env = std::getenv("QOC_WORKERS")) n = std::strtol(env, nullptr, 10);
    if (n <= 0) n = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::min<long>(n, static_cast<long>(jobs)));
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed_" + std::to_string(seed)); }

}  // namespace

SeedRun run_seed(const RunConfig& config, std::uint64_t seed) { return run_seed_impl(config, seed, nullptr); }

std::optional<double> smooth_at(std::span<const EpisodeRecord> episodes, long step, long window) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& e : episodes) {
        if (e.end_step > step - window && e.end_step <= step) {
            total += e.ret;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return total / static_cast<double>(n);
}

std::vector<std::optional<double>> smooth_trailing(std::span<const EpisodeRecord> episodes,
                                                   std::span<const long> steps, long window) {
    if (window <= 0) throw std::invalid_argument("smoothing window must be positive");
    std::vector<std::optional<double>> out;
    out.reserve(steps.size());
    for (long s : steps) out.push_back(smooth_at(episodes, s, window));
    return out;
}

Stats mean_sd(std::span<const double> values) {
    Stats s;
    s.n = values.size();
    if (values.empty()) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

AggregateCurve aggregate(std::string label, std::span<const std::vector<EpisodeRecord>> per_seed, long total_steps,
                         long window, long stride) {
    if (stride <= 0) throw std::invalid_argument("curve stride must be positive");
    std::vector<long> steps;
    for (long s = stride; s < total_steps; s += stride) steps.push_back(s);
    steps.push_back(total_steps);

    std::vector<std::vector<std::optional<double>>> smoothed;
    smoothed.reserve(per_seed.size());
    for (const auto& eps : per_seed) smoothed.push_back(smooth_trailing(eps, steps, window));

    AggregateCurve curve;
    curve.label = std::move(label);
    std::vector<double> vals;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        vals.clear();
        bool complete = !smoothed.empty();
        for (const auto& s : smoothed) {
            if (!s[i]) {
                complete = false;
                break;
            }
            vals.push_back(*s[i]);
        }
        if (!complete) continue;
        const Stats st = mean_sd(vals);
        curve.points.push_back({steps[i], st.mean, st.sd});
    }
    return curve;
}

ExperimentResult run_experiment(const RunConfig& config, bool write_artifacts) {
    config.validate();
    ExperimentResult result;
    result.config = config;
    result.runs.resize(config.seeds.size());

    if (write_artifacts) {
        fs::create_directories(config.out_dir);
        write_file(config.out_dir / "resolved.config", to_config_text(config));
        for (auto seed : config.seeds) fs::create_directories(seed_dir(config.out_dir, seed));
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(config.seeds.size());
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.seeds.size()) return;
            try {
                const fs::path dir = seed_dir(config.out_dir, config.seeds[i]);
                result.runs[i] = run_seed_impl(config, config.seeds[i], write_artifacts ? &dir : nullptr);
                if (write_artifacts) write_file(dir / "metrics.csv", metrics_csv(result.runs[i].metrics));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = worker_count(config.seeds.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<std::vector<EpisodeRecord>> per_seed;
    for (const auto& r : result.runs) per_seed.push_back(r.episodes());
    result.curve = aggregate(config.label(), per_seed, config.train.total_steps, config.smoothing_window,
                             config.curve_stride);

    if (write_artifacts) {
        write_file(config.out_dir / "aggregate.csv", curve_csv(result.curve));
        std::ostringstream s;
        std::vector<double> pooled;
        for (const auto& eps : per_seed) {
            for (const auto& e : eps) pooled.push_back(e.ret);
        }
        const Stats st = mean_sd(pooled);
        s << "label: " << config.label() << '\n';
        s << "env: " << envs::env_name(config.env) << '\n';
        s << "episodes: " << st.n << '\n';
        s << "mean_return: " << format_double(st.mean) << '\n';
        s << "sd_return: " << format_double(st.sd) << '\n';
        if (!result.curve.points.empty()) {
            s << "final_smoothed_mean: " << format_double(result.curve.points.back().mean) << '\n';
            s << "final_smoothed_sd: " << format_double(result.curve.points.back().sd) << '\n';
        }
        const int n_opt = config.is_random() ? 1 : config.net.n_options;
        for (const auto& r : result.runs) {
            s << "seed " << r.seed << " option_steps:";
            for (long c : r.option_histogram(n_opt)) s << ' ' << c;
            s << '\n';
        }
        write_file(config.out_dir / "summary.txt", s.str());
    }
    return result;
}

std::vector<LoadedExperiment> load_experiments(const fs::path& root) {
    std::vector<fs::path> dirs;
    if (fs::exists(root / "resolved.config")) dirs.push_back(root);
    if (fs::is_directory(root)) {
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_regular_file() && entry.path().filename() == "resolved.config" &&
                entry.path().parent_path() != root) {
                dirs.push_back(entry.path().parent_path());
            }
        }
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<LoadedExperiment> out;
    for (const auto& d : dirs) {
        LoadedExperiment e;
        e.dir = d;
        e.config = load_config(d / "resolved.config");
        for (auto seed : e.config.seeds) {
            SeedRun r;
            r.metrics = parse_metrics_csv(read_file(seed_dir(d, seed) / "metrics.csv"));
            e.episodes.push_back(r.episodes());
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<SummaryRow> summarize(std::span<const LoadedExperiment> experiments) {
    std::map<envs::EnvId, double> baseline;
    std::vector<SummaryRow> rows;
    for (const auto& e : experiments) {
        std::vector<double> pooled;
        for (const auto& eps : e.episodes) {
            for (const auto& ep : eps) pooled.push_back(ep.ret);
        }
        const Stats st = mean_sd(pooled);
        rows.push_back({e.config.label(), e.config.env, st.mean, st.sd, 1.0});
        if (e.config.label() == "classical") baseline[e.config.env] = st.mean;
    }
    for (auto& r : rows) {
        const auto it = baseline.find(r.env);
        if (it == baseline.end()) {
            throw ConfigError("no classical baseline for " + std::string(envs::env_name(r.env)));
        }
        r.relative = r.mean / it->second;
    }
    return rows;
}

std::string format_summary(std::span<const SummaryRow> rows) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-32s %-9s %10s %10s %8s\n", "model", "env", "mean", "sd", "rel");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-32s %-9s %10.2f %10.2f %7.2fx\n", r.label.c_str(),
                      std::string(envs::env_name(r.env)).c_str(), r.mean, r.sd, r.relative);
        out << buf;
    }
    return out.str();
}

std::string curve_csv(const AggregateCurve& curve) {
    std::string out = "step,mean,sd\n";
    for (const auto& p : curve.points) {
        out += std::to_string(p.step) + ',' + format_double(p.mean) + ',' + format_double(p.sd) + '\n';
    }
    return out;
}

AggregateCurve parse_curve_csv(std::string_view text, std::string label) {
    const auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]) != "step,mean,sd") throw ConfigError("unexpected curve header");
    AggregateCurve c;
    c.label = std::move(label);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw ConfigError("curve row " + std::to_string(i) + " is malformed");
        c.points.push_back({parse_long("step", f[0]), parse_double("mean", f[1]), parse_double("sd", f[2])});
    }
    return c;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(std::span<const AggregateCurve> curves, std::string_view title) {
    if (curves.empty()) throw std::invalid_argument("render_svg needs at least one curve");

    constexpr double width = 800.0;
    constexpr double height = 480.0;
    constexpr double left = 70.0;
    constexpr double right = 200.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    bool any = false;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            const double s = static_cast<double>(p.step);
            if (!any) {
                x_max = s;
                y_min = p.mean - p.sd;
                y_max = p.mean + p.sd;
                any = true;
            }
            x_max = std::max(x_max, s);
            y_min = std::min(y_min, p.mean - p.sd);
            y_max = std::max(y_max, p.mean + p.sd);
        }
    }
    if (y_max - y_min < 1e-9) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << fixed2(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";
    out << "<g stroke=\"black\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top + plot_h) << "\" x2=\"" << fixed2(left + plot_w)
        << "\" y2=\"" << fixed2(top + plot_h) << "\"/>\n";
    out << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top) << "\" x2=\"" << fixed2(left) << "\" y2=\""
        << fixed2(top + plot_h) << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        out << "<text x=\"" << fixed2(sx(xv)) << "\" y=\"" << fixed2(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << fixed2(xv) << "</text>\n";
        out << "<text x=\"" << fixed2(left - 6) << "\" y=\"" << fixed2(sy(yv) + 4) << "\" text-anchor=\"end\">"
            << fixed2(yv) << "</text>\n";
    }
    out << "<text x=\"" << fixed2(left + plot_w / 2) << "\" y=\"" << fixed2(height - 10)
        << "\" text-anchor=\"middle\">step</text>\n";
    out << "</g>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = palette[ci % std::size(palette)];
        if (!c.points.empty()) {
            out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (const auto& p : c.points) {
                out << fixed2(sx(static_cast<double>(p.step))) << ',' << fixed2(sy(p.mean + p.sd)) << ' ';
            }
            for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
                out << fixed2(sx(static_cast<double>(it->step))) << ',' << fixed2(sy(it->mean - it->sd)) << ' ';
            }
            out << "\"/>\n";
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& p : c.points) {
                out << fixed2(sx(static_cast<double>(p.step))) << ',' << fixed2(sy(p.mean)) << ' ';
            }
            out << "\"/>\n";
        }
        const double ly = top + 14.0 + 18.0 * static_cast<double>(ci);
        out << "<line x1=\"" << fixed2(left + plot_w + 12) << "\" y1=\"" << fixed2(ly) << "\" x2=\""
            << fixed2(left + plot_w + 32) << "\" y2=\"" << fixed2(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fixed2(left + plot_w + 38) << "\" y=\"" << fixed2(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(c.label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::vector<RunConfig> experiment_suite(std::string_view name, const RunConfig& base) {
    std::vector<RunConfig> out;
    auto add = [&](const std::string& variant, auto&& tweak) {
        RunConfig c = base;
        c.variant = variant;
        c.net = agent::NetOptions{};
        c.net.n_options = 2;
        tweak(c);
        std::string dir = c.label();
        for (char& ch : dir) {
            if (ch == ' ' || ch == '(' || ch == ')' || ch == ',') ch = '_';
            if (ch == '+') ch = 'p';
        }
        dir.erase(std::unique(dir.begin(), dir.end(), [](char a, char b) { return a == '_' && b == '_'; }), dir.end());
        while (!dir.empty() && dir.back() == '_') dir.pop_back();
        c.out_dir = base.out_dir / dir;
        out.push_back(std::move(c));
    };
    auto none = [](RunConfig&) {};

    if (name == "main") {
        add("classical", none);
        add("random", none);
        for (const auto& v : agent::hybrid_variant_names()) add(v, none);
    } else if (name == "scaling") {
        add("classical", none);
        add("hybrid_f", none);
        for (int w : {16, 24, 32}) add("classical", [w](RunConfig& c) { c.net.fe_width = w; });
    } else if (name == "options") {
        for (const char* v : {"classical", "hybrid_p"}) {
            for (int k : {3, 4}) add(v, [k](RunConfig& c) { c.net.n_options = k; });
        }
    } else if (name == "ablation") {
        add("hybrid_f", none);
        add("hybrid_f", [](RunConfig& c) { c.net.depth_delta = 2; });
        add("hybrid_f", [](RunConfig& c) { c.net.depth_delta = -2; });
        add("hybrid_f", [](RunConfig& c) { c.net.learnable_scaling = false; });
        add("hybrid_f", [](RunConfig& c) { c.net.entangling = false; });
    } else {
        throw ConfigError("unknown suite '" + std::string(name) + "' (main, scaling, options, ablation)");
    }
    return out;
}

}  // namespace qoc::expkit
